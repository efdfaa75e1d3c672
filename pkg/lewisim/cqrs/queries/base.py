# Base query class

class Query:
	"""Base class for all queries: read-only requests over artifacts."""
	pass

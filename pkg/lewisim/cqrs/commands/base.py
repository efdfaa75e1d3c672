# Base command class

class Command:
	"""Base class for all commands: requests that write artifacts."""
	pass

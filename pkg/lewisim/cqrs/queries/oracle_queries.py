from dataclasses import dataclass

from .base import Query


@dataclass
class VerifyOracle(Query):
	games: int = 1000
	seed: int = 0


@dataclass
class DecomposeGame(Query):
	"""Exact decomposition of a tabular game file."""
	path: str

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from lewisim.core.errors import ContractViolation

ROW_TOLERANCE = 1e-12


def _check_stochastic(name: str, matrix: np.ndarray) -> None:
	if np.any(~np.isfinite(matrix)) or np.any(matrix < 0):
		raise ContractViolation(f"{name} entries must be finite and non-negative")
	if np.any(np.abs(matrix.sum(axis=-1) - 1.0) > ROW_TOLERANCE):
		raise ContractViolation(f"{name} rows must sum to 1 within {ROW_TOLERANCE}")


@dataclass(frozen=True)
class TabularGame:
	"""Explicit prior p(x), speaker pi(m|x) as |X| x |M|, listener rho(x|m) as |M| x |X|."""

	prior: np.ndarray
	speaker: np.ndarray
	listener: np.ndarray

	def __post_init__(self) -> None:
		prior = np.asarray(self.prior, dtype=np.float64)
		speaker = np.asarray(self.speaker, dtype=np.float64)
		listener = np.asarray(self.listener, dtype=np.float64)
		if prior.ndim != 1 or speaker.ndim != 2 or listener.ndim != 2:
			raise ContractViolation("prior must be a vector and both policies matrices")
		n_x, n_m = speaker.shape
		if prior.shape != (n_x,) or listener.shape != (n_m, n_x):
			raise ContractViolation(
				f"inconsistent shapes prior {prior.shape}, speaker {speaker.shape}, listener {listener.shape}"
			)
		_check_stochastic("prior", prior)
		_check_stochastic("speaker", speaker)
		_check_stochastic("listener", listener)
		object.__setattr__(self, "prior", prior)
		object.__setattr__(self, "speaker", speaker)
		object.__setattr__(self, "listener", listener)

	@property
	def n_objects(self) -> int:
		return int(self.speaker.shape[0])

	@property
	def n_messages(self) -> int:
		return int(self.speaker.shape[1])

	@property
	def joint(self) -> np.ndarray:
		"""p(x) pi(m|x), |X| x |M|."""
		return self.prior[:, None] * self.speaker

	@property
	def marginal(self) -> np.ndarray:
		"""pi(m) = sum_x p(x) pi(m|x)."""
		return self.joint.sum(axis=0)

	def with_listener(self, listener: np.ndarray) -> "TabularGame":
		return TabularGame(self.prior, self.speaker, listener)

	def with_prior(self, prior: np.ndarray) -> "TabularGame":
		return TabularGame(prior, self.speaker, self.listener)


@dataclass(frozen=True)
class Posterior:
	"""rho*(x|m) as |M| x |X|; rows of zero-marginal messages are zero and flagged undefined."""

	rows: np.ndarray
	defined: np.ndarray
	marginal: np.ndarray


@dataclass(frozen=True)
class DecompositionRecord:
	"""total = info + adapt - offset up to `residual` (offset is K of the reward; 0 for log-likelihood)."""

	total: float
	info: float
	adapt: float
	residual: float
	offset: float = 0.0
	infinite: bool = False


@dataclass(frozen=True)
class GapSplit:
	"""Train-minus-full differences of each loss component."""

	info_gap: float
	adapt_gap: float
	total_gap: float
	train: DecompositionRecord
	full: DecompositionRecord

from __future__ import annotations

from typing import Sequence

import numpy as np

from lewisim.core.errors import ContractViolation


def normalized(log_probs: np.ndarray, tolerance: float = 1e-12) -> bool:
	"""True when every row of exp(log_probs) sums to one within tolerance."""
	return bool(np.all(np.abs(np.exp(log_probs).sum(axis=-1) - 1.0) <= tolerance))


def validate_messages(symbols: np.ndarray, vocab_size: int) -> None:
	if symbols.size and (symbols.min() < 0 or symbols.max() >= vocab_size):
		raise ContractViolation(f"message symbols must lie in [0, {vocab_size})")


def validate_attributes(attrs: np.ndarray, cardinalities: Sequence[int]) -> None:
	attrs = np.asarray(attrs)
	if attrs.ndim != 2 or attrs.shape[1] != len(cardinalities):
		raise ContractViolation(f"expected (B, {len(cardinalities)}) attributes, got {attrs.shape}")
	if np.any(attrs < 0) or np.any(attrs >= np.asarray(cardinalities)[None, :]):
		raise ContractViolation("attribute value outside its cardinality")


def target_appears_once(candidates: np.ndarray, targets: np.ndarray) -> bool:
	"""Per row, the target object index occurs exactly once among the candidates."""
	return bool(np.all((candidates == targets[:, None]).sum(axis=1) == 1))


def sample_categorical(probs: np.ndarray, u: np.ndarray) -> np.ndarray:
	"""Inverse-CDF draw per row from uniforms u in [0, 1)."""
	cdf = np.cumsum(probs, axis=-1)
	idx = (cdf <= u[:, None] * cdf[:, -1:]).sum(axis=-1)
	return np.minimum(idx, probs.shape[-1] - 1)

from __future__ import annotations

import numpy as np


def is_dirac(row: np.ndarray, tolerance: float = 1e-12) -> bool:
	return bool(abs(float(np.max(row)) - 1.0) <= tolerance)


def argmax_lowest(rows: np.ndarray) -> np.ndarray:
	"""Row-wise argmax; np.argmax already returns the first (lowest) index on ties."""
	return np.argmax(rows, axis=-1)


def dirac_rows(indices: np.ndarray, width: int) -> np.ndarray:
	out = np.zeros((indices.size, width))
	out[np.arange(indices.size), indices] = 1.0
	return out

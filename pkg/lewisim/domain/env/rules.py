from __future__ import annotations

from typing import Sequence

import numpy as np


def sizes_fit(sizes: Sequence[int], total: int) -> bool:
	"""True when the requested split sizes are non-negative and fit in the space."""
	return all(int(s) >= 0 for s in sizes) and int(sum(sizes)) <= total


def pairwise_disjoint(*parts: np.ndarray) -> bool:
	seen = np.concatenate([np.asarray(p, dtype=np.int64) for p in parts]) if parts else np.zeros(0, dtype=np.int64)
	return np.unique(seen).size == seen.size


def is_one_hot_block(vector: np.ndarray, cardinalities: Sequence[int]) -> bool:
	"""True when every attribute block of `vector` holds exactly one 1."""
	offset = 0
	for c in cardinalities:
		block = vector[offset:offset + c]
		if not (np.isin(block, (0.0, 1.0)).all() and block.sum() == 1):
			return False
		offset += c
	return offset == len(vector)

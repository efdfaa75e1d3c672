from __future__ import annotations

from typing import Sequence, Tuple

import numpy as np


def pair_indices(n: int) -> Tuple[np.ndarray, np.ndarray]:
	"""Every unordered pair (i < j) of n items exactly once."""
	return np.triu_indices(n, k=1)


def pad_contents(contents: Sequence[Sequence[int]], width: int) -> Tuple[np.ndarray, np.ndarray]:
	"""Ragged symbol contents -> (n, width) matrix padded with -1, plus lengths."""
	out = np.full((len(contents), max(width, 1)), -1, dtype=np.int64)
	lengths = np.zeros(len(contents), dtype=np.int64)
	for i, c in enumerate(contents):
		out[i, :len(c)] = c
		lengths[i] = len(c)
	return out, lengths

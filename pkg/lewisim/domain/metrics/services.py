from __future__ import annotations

from typing import List, Sequence, Union

import numpy as np
from scipy.stats import rankdata

from lewisim.autodiff.tensor import no_grad
from lewisim.core.errors import ContractViolation, UndefinedCorrelation
from lewisim.core.logger import logger
from lewisim.domain.agents.entities import Message
from lewisim.domain.env.entities import Object, ObjectSpace
from lewisim.domain.metrics import rules as metric_rules
from lewisim.domain.metrics.entities import TopoSimEstimate

Symbols = Union[Message, Sequence[int]]


def _content(m: Symbols) -> Sequence[int]:
	return m.content if isinstance(m, Message) else tuple(m)


def edit_distance(a: Symbols, b: Symbols) -> int:
	"""Levenshtein distance between message contents (insert, delete, substitute all cost 1)."""
	s, t = _content(a), _content(b)
	prev = list(range(len(s) + 1))
	for j in range(len(t)):
		cur = [j + 1]
		for i in range(len(s)):
			cost = 0 if s[i] == t[j] else 1
			cur.append(min(prev[i + 1] + 1, cur[i] + 1, prev[i] + cost))
		prev = cur
	return prev[-1]


def pairwise_edit_distances(contents: Sequence[Sequence[int]]) -> np.ndarray:
	"""Edit distances of all unordered pairs, in np.triu_indices order.

	The dynamic programme runs once over all pairs at the same time, one table row
	per step; each pair's answer is read off when the row reaches its first length.
	"""
	width = max((len(c) for c in contents), default=0)
	padded, lengths = metric_rules.pad_contents(contents, width)
	left, right = metric_rules.pair_indices(len(contents))
	a, b = padded[left], padded[right]
	la, lb = lengths[left], lengths[right]
	n_pairs = left.size
	result = np.zeros(n_pairs, dtype=np.int64)
	prev = np.tile(np.arange(width + 1, dtype=np.int64), (n_pairs, 1))
	done = la == 0
	result[done] = lb[done]
	rows = np.arange(n_pairs)
	for i in range(1, width + 1):
		cur = np.empty_like(prev)
		cur[:, 0] = i
		for j in range(1, width + 1):
			cost = (a[:, i - 1] != b[:, j - 1]).astype(np.int64)
			cur[:, j] = np.minimum(np.minimum(prev[:, j] + 1, cur[:, j - 1] + 1), prev[:, j - 1] + cost)
		hit = la == i
		result[hit] = cur[rows[hit], lb[hit]]
		prev = cur
	return result


def input_distance(a: Object, b: Object) -> int:
	"""Number of attribute slots where the two objects differ."""
	if len(a.attrs) != len(b.attrs):
		raise ContractViolation("objects come from different specs")
	return int(sum(x != y for x, y in zip(a.attrs, b.attrs)))


def pairwise_input_distances(attrs: np.ndarray) -> np.ndarray:
	left, right = metric_rules.pair_indices(attrs.shape[0])
	return (attrs[left] != attrs[right]).sum(axis=1)


def spearman(u: Sequence[float], v: Sequence[float]) -> float:
	"""Pearson correlation of average ranks."""
	u, v = np.asarray(u, dtype=np.float64), np.asarray(v, dtype=np.float64)
	if u.shape != v.shape or u.ndim != 1 or u.size < 2:
		raise ContractViolation("spearman needs two equal-length sequences of at least 2 values")
	ru, rv = rankdata(u, method="average"), rankdata(v, method="average")
	if np.ptp(ru) == 0 or np.ptp(rv) == 0:
		raise UndefinedCorrelation("a ranked sequence has zero variance")
	return float(np.clip(np.corrcoef(ru, rv)[0, 1], -1.0, 1.0))


def topographic_similarity(
	speaker,
	space: ObjectSpace,
	rng: np.random.Generator,
	batch_size: int = 1000,
	repeats: int = 100,
) -> TopoSimEstimate:
	"""Mean/std over repeats of Spearman(input distances, message edit distances).

	Each repeat draws `batch_size` objects from the whole space (without replacement
	when the space is large enough) and samples one message per object.
	"""
	if batch_size < 2 or repeats < 1:
		raise ContractViolation("toposim needs batch_size >= 2 and repeats >= 1")
	values: List[float] = []
	undefined = False
	for _ in range(repeats):
		replace = batch_size > space.size
		indices = rng.choice(space.size, size=batch_size, replace=replace)
		attrs = space.decode(indices)
		with no_grad():
			messages = speaker.sample(attrs, rng).messages
		try:
			values.append(spearman(pairwise_input_distances(attrs), pairwise_edit_distances(messages.contents())))
		except UndefinedCorrelation:
			undefined = True
	if undefined:
		logger.debug("Topographic similarity undefined: degenerate distances in a repeat")
		return TopoSimEstimate(float("nan"), float("nan"), repeats, batch_size, undefined=True, values=values)
	return TopoSimEstimate(float(np.mean(values)), float(np.std(values)), repeats, batch_size, values=values)

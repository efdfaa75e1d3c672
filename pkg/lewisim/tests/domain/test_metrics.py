import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from lewisim.core.errors import ContractViolation, UndefinedCorrelation
from lewisim.domain.agents.entities import Channel, Message
from lewisim.domain.agents.handbuilt import UniformSpeaker, compositional_speaker, constant_speaker
from lewisim.domain.env.entities import Object, ObjectSpace, ObjectSpaceSpec
from lewisim.domain.metrics.rules import pair_indices
from lewisim.domain.metrics.services import (
	edit_distance,
	input_distance,
	pairwise_edit_distances,
	pairwise_input_distances,
	spearman,
	topographic_similarity,
)


def test_edit_distance_examples():
	assert edit_distance([], []) == 0
	assert edit_distance([1, 2, 3], [1, 4, 3]) == 1
	assert edit_distance([5, 1, 6, 6, 2, 5], [5, 1, 6, 6, 1, 5, 3]) == 2
	assert edit_distance([], [1, 2]) == 2


def test_edit_distance_reads_message_content():
	channel = Channel(vocab_size=5, max_len=4)
	assert edit_distance(Message.from_content([1, 2], channel), Message.from_content([1, 2, 3], channel)) == 1


words = st.lists(st.integers(0, 3), max_size=6)


@given(words, words, words)
def test_edit_distance_is_a_metric(a, b, c):
	d = edit_distance(a, b)
	assert edit_distance(a, a) == 0
	assert d == edit_distance(b, a)
	assert (d == 0) == (a == b)
	assert d <= edit_distance(a, c) + edit_distance(c, b)
	assert abs(len(a) - len(b)) <= d <= max(len(a), len(b))


@given(st.lists(words, min_size=2, max_size=12))
def test_pairwise_edit_distances_match_scalar_version(contents):
	left, right = pair_indices(len(contents))
	expected = [edit_distance(contents[i], contents[j]) for i, j in zip(left, right)]
	np.testing.assert_array_equal(pairwise_edit_distances(contents), expected)


def test_input_distance():
	assert input_distance(Object((1, 2, 3)), Object((1, 2, 3))) == 0
	assert input_distance(Object((1, 2, 3)), Object((1, 5, 3))) == 1
	assert input_distance(Object((0, 0, 0)), Object((1, 1, 1))) == 3
	with pytest.raises(ContractViolation):
		input_distance(Object((1, 2)), Object((1, 2, 3)))


def test_all_pairs_of_a_thousand_objects():
	attrs = np.zeros((1000, 2), dtype=np.int64)
	assert pairwise_input_distances(attrs).size == 499500
	left, right = pair_indices(1000)
	assert np.all(left < right)


def test_spearman_examples():
	assert spearman([1, 2, 3, 4], [2, 4, 8, 16]) == pytest.approx(1.0)
	assert spearman([1, 2, 3, 4], [9, 7, 3, 1]) == pytest.approx(-1.0)
	# average ranks (1, 2.5, 2.5, 4) and (1, 2, 3.5, 3.5)
	assert spearman([1, 2, 2, 3], [1, 2, 3, 3]) == pytest.approx(3.75 / 4.5, abs=1e-12)


@given(st.lists(st.tuples(st.integers(-20, 20), st.integers(-20, 20)), min_size=3, max_size=30))
def test_spearman_is_invariant_under_increasing_transforms(pairs):
	u = np.array([p[0] for p in pairs], dtype=np.float64)
	v = np.array([p[1] for p in pairs], dtype=np.float64)
	assume(np.ptp(u) > 0 and np.ptp(v) > 0)
	assert spearman(np.exp(u / 7.0), v ** 3) == pytest.approx(spearman(u, v), abs=1e-12)


def test_spearman_rejects_degenerate_input():
	with pytest.raises(UndefinedCorrelation):
		spearman([1, 1, 1], [1, 2, 3])
	with pytest.raises(ContractViolation):
		spearman([1], [1])
	with pytest.raises(ContractViolation):
		spearman([1, 2], [1, 2, 3])


def test_compositional_language_is_topographic(rng):
	space = ObjectSpace(ObjectSpaceSpec((4, 4)))
	speaker = compositional_speaker(space, Channel(vocab_size=5, max_len=2))
	estimate = topographic_similarity(speaker, space, rng, batch_size=40, repeats=3)
	assert not estimate.undefined
	assert estimate.mean >= 0.95
	assert len(estimate.values) == 3


def test_random_language_is_not_topographic(rng):
	space = ObjectSpace(ObjectSpaceSpec((4, 4, 4)))
	speaker = UniformSpeaker(space, Channel(vocab_size=5, max_len=3))
	estimate = topographic_similarity(speaker, space, rng, batch_size=60, repeats=5)
	assert abs(estimate.mean) <= 0.1


def test_toposim_ignores_symbol_relabelling():
	space = ObjectSpace(ObjectSpaceSpec((3, 3, 3)))
	channel = Channel(vocab_size=5, max_len=3)
	plain = topographic_similarity(compositional_speaker(space, channel), space, np.random.default_rng(8), 30, 4)
	relabelled = compositional_speaker(space, channel, relabel=np.array([2, 0, 3, 1]))
	shuffled = topographic_similarity(relabelled, space, np.random.default_rng(8), 30, 4)
	assert shuffled.values == pytest.approx(plain.values, abs=1e-12)


def test_constant_language_is_flagged_undefined(small_space, small_channel, rng):
	estimate = topographic_similarity(constant_speaker(small_space, small_channel), small_space, rng, 10, 2)
	assert estimate.undefined
	assert math.isnan(estimate.mean)
	assert estimate.to_dict()["undefined"] is True

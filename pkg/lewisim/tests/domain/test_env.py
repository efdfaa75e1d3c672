import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lewisim.core.errors import ArtifactError, ConfigurationError, ContractViolation
from lewisim.domain.env.entities import Object, ObjectSpace, ObjectSpaceSpec
from lewisim.domain.env.rules import is_one_hot_block, pairwise_disjoint
from lewisim.domain.env.services import (
	ObjectSource,
	decode_one_hot,
	dump_split,
	encode_object,
	encode_objects,
	load_split,
	sample_batch,
	split_dataset,
)


def test_mixed_radix_with_first_attribute_most_significant():
	space = ObjectSpace(ObjectSpaceSpec((3, 3)))
	assert space.object_at(4) == Object((1, 1))
	assert space.index_of(Object((2, 0))) == 6
	assert space.size == 9


def test_encode_decode_are_inverse(small_space):
	indices = np.arange(small_space.size)
	np.testing.assert_array_equal(small_space.encode(small_space.decode(indices)), indices)


@given(st.lists(st.integers(2, 6), min_size=1, max_size=4), st.data())
def test_index_and_one_hot_roundtrip(cardinalities, data):
	space = ObjectSpace(ObjectSpaceSpec(tuple(cardinalities)))
	index = data.draw(st.integers(0, space.size - 1))
	obj = space.object_at(index)
	assert space.index_of(obj) == index
	vec = encode_object(obj, space.spec)
	assert is_one_hot_block(vec, space.spec.cardinalities)
	np.testing.assert_array_equal(decode_one_hot(vec, space.spec), [obj.attrs])


def test_spec_rejects_degenerate_attributes():
	with pytest.raises(ConfigurationError):
		ObjectSpaceSpec(())
	with pytest.raises(ConfigurationError):
		ObjectSpaceSpec((3, 1))


def test_space_size_overflow_is_a_configuration_error():
	with pytest.raises(ConfigurationError):
		ObjectSpace(ObjectSpaceSpec((1 << 32, 1 << 32)))


def test_one_hot_encoding_blocks():
	spec = ObjectSpaceSpec((2, 3))
	vec = encode_object(Object((1, 2)), spec)
	np.testing.assert_array_equal(vec, [0, 1, 0, 0, 1])
	assert is_one_hot_block(vec, spec.cardinalities)
	np.testing.assert_array_equal(decode_one_hot(vec, spec), [[1, 2]])


def test_encoding_rejects_out_of_range_attribute():
	with pytest.raises(ContractViolation):
		encode_objects(np.array([[0, 3]]), ObjectSpaceSpec((2, 3)))
	with pytest.raises(ContractViolation):
		Object((0, 3)).validate(ObjectSpaceSpec((2, 3)))


def test_split_is_disjoint_and_sized(small_space):
	split = split_dataset(small_space, (6, 3, 2), seed=5)
	assert (split.train.size, split.val.size, split.test.size) == (6, 3, 2)
	assert pairwise_disjoint(split.train, split.val, split.test)


def test_split_covering_the_space_is_a_permutation(small_space):
	split = split_dataset(small_space, (6, 3, 3), seed=0)
	all_indices = np.concatenate([split.train, split.val, split.test])
	np.testing.assert_array_equal(np.sort(all_indices), np.arange(small_space.size))


def test_split_is_reproducible(small_space):
	a = split_dataset(small_space, (4, 4, 4), seed=11)
	b = split_dataset(small_space, (4, 4, 4), seed=11)
	np.testing.assert_array_equal(a.train, b.train)


def test_split_too_large_is_rejected(small_space):
	with pytest.raises(ConfigurationError):
		split_dataset(small_space, (10, 2, 1), seed=0)


def test_sample_batch_draws_from_part(rng):
	part = np.array([3, 7, 9])
	batch = sample_batch(part, 50, rng)
	assert batch.shape == (50,)
	assert set(batch.tolist()) <= {3, 7, 9}


def test_sample_batch_on_empty_part(rng):
	with pytest.raises(ContractViolation):
		sample_batch(np.array([], dtype=np.int64), 4, rng)


def test_object_source_full_and_split(small_space, rng):
	full = ObjectSource.full(small_space)
	assert full.size == small_space.size
	assert np.all(full.sample(100, rng) < small_space.size)
	part = ObjectSource.from_indices(small_space, [1, 2])
	assert set(part.sample(20, rng).tolist()) <= {1, 2}
	assert part.one_hot(np.array([1])).shape == (1, 7)


def test_split_file_roundtrip(small_space):
	split = split_dataset(small_space, (5, 3, 2), seed=2)
	loaded = load_split(dump_split(split), seed=2)
	np.testing.assert_array_equal(loaded.val, split.val)
	assert loaded.sizes == (5, 3, 2)


def test_split_file_rejects_overlap():
	with pytest.raises(ArtifactError):
		load_split("#train\n1\n#val\n1\n#test\n2\n")

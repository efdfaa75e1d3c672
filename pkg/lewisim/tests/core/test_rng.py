import numpy as np
import pytest

from lewisim.core.rng import RngStreams, stream_key


def test_same_name_same_stream():
	a = RngStreams(7).generator("listener_init", 3).random(4)
	b = RngStreams(7).generator("listener_init", 3).random(4)
	np.testing.assert_array_equal(a, b)


def test_streams_are_independent():
	streams = RngStreams(7)
	untouched = streams.generator("eval").random(3)
	streams.generator("sampling").random(1000)
	np.testing.assert_array_equal(streams.generator("eval").random(3), untouched)
	assert not np.array_equal(streams.generator("listener_init", 1).random(3), streams.generator("listener_init", 2).random(3))


def test_stream_key_is_stable():
	assert stream_key("env") == stream_key("env")
	assert isinstance(RngStreams(0).child_seed("env"), int)
	with pytest.raises(ValueError):
		RngStreams(-1)

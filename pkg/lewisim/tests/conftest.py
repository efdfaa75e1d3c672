import json

import numpy as np
import pytest

from lewisim.domain.agents.entities import Channel
from lewisim.domain.env.entities import ObjectSpace, ObjectSpaceSpec
from lewisim.schemas.run_config import parse_run_config


def tiny_config_data(**overrides):
	"""A config small enough to train in a few seconds on one core."""
	data = {
		"space": {"cardinalities": [3, 3]},
		"split": {"train": 5, "val": 2, "test": 2},
		"channel": {"max_len": 3, "vocab_size": 4},
		"speaker": {"hidden_size": 8},
		"listener": {"hidden_size": 8},
		"probe": {"patience": 2, "eval_every": 5, "max_updates": 20, "heldout_size": 16, "n_samples": 64, "every": 4},
		"evaluation": {"eval_every": 2, "toposim_batch": 6, "toposim_repeats": 2, "final_generalization": True},
		"batch_size": 8,
		"max_speaker_updates": 4,
		"seed": 3,
	}
	for key, value in overrides.items():
		if isinstance(value, dict) and isinstance(data.get(key), dict):
			data[key] = {**data[key], **value}
		else:
			data[key] = value
	return data


@pytest.fixture
def rng():
	return np.random.default_rng(1234)


@pytest.fixture
def small_space():
	return ObjectSpace(ObjectSpaceSpec((3, 4)))


@pytest.fixture
def small_channel():
	return Channel(vocab_size=5, max_len=3)


@pytest.fixture
def tiny_config():
	return parse_run_config(tiny_config_data())


@pytest.fixture
def config_file(tmp_path):
	def write(**overrides):
		path = tmp_path / "config.json"
		path.write_text(json.dumps(tiny_config_data(**overrides)), encoding="utf-8")
		return path
	return write

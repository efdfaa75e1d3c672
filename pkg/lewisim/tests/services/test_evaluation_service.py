import math

import numpy as np
import pytest
from scipy.stats import chisquare

from lewisim.core.rng import RngStreams
from lewisim.domain.agents.entities import Channel
from lewisim.domain.agents.handbuilt import compositional_speaker, constant_speaker
from lewisim.domain.agents.policies import DiscriminationListener, SpeakerPolicy
from lewisim.domain.agents.services import draw_candidates
from lewisim.domain.env.entities import DatasetSplit, ObjectSpace, ObjectSpaceSpec
from lewisim.schemas.run_config import parse_run_config
from lewisim.services.evaluation_service import evaluate_discrimination, generalization_score
from lewisim.tests.conftest import tiny_config_data


def _balanced_split(space):
	"""Test objects hold every attribute value exactly twice; train covers the rest."""
	test = [(i, i, i) for i in range(4)] + [(i, (i + 1) % 4, (i + 2) % 4) for i in range(4)]
	test_idx = space.encode(np.array(test))
	rest = np.setdiff1d(np.arange(space.size), test_idx)
	val_idx = rest[::7][:8]
	train_idx = np.setdiff1d(rest, val_idx)
	return DatasetSplit(train=train_idx, val=val_idx, test=np.sort(test_idx))


def _generalization_config():
	return parse_run_config(tiny_config_data(
		space={"cardinalities": [4, 4, 4]},
		split={"train": 48, "val": 8, "test": 8},
		channel={"max_len": 3, "vocab_size": 5},
		listener={"hidden_size": 32, "lr": 0.01},
		probe={"max_updates": 2000, "patience": 20, "eval_every": 25, "heldout_size": 256},
		batch_size=64,
	))


@pytest.mark.slow
def test_compositional_language_generalizes():
	config = _generalization_config()
	space = ObjectSpace(ObjectSpaceSpec((4, 4, 4)))
	split = _balanced_split(space)
	speaker = compositional_speaker(space, Channel(vocab_size=5, max_len=3))
	assert generalization_score(speaker, space, split, config, RngStreams(0)) >= 0.99


def test_constant_language_sits_at_the_uniform_guess_floor():
	config = parse_run_config(tiny_config_data(
		space={"cardinalities": [4, 4, 4]},
		split={"train": 48, "val": 8, "test": 8},
		channel={"max_len": 3, "vocab_size": 5},
	))
	space = ObjectSpace(ObjectSpaceSpec((4, 4, 4)))
	split = _balanced_split(space)
	speaker = constant_speaker(space, Channel(vocab_size=5, max_len=3))
	# one message for every object, so each head guesses one value per attribute
	assert generalization_score(speaker, space, split, config, RngStreams(0)) == pytest.approx(0.25)


def test_untrained_discrimination_loss_is_log_of_candidate_count():
	space = ObjectSpace(ObjectSpaceSpec((4, 4)))
	channel = Channel(vocab_size=5, max_len=3)
	speaker = SpeakerPolicy(space.spec, channel, 8, np.random.default_rng(0)).eval()
	listener = DiscriminationListener(space.spec, channel, 8, 4, np.random.default_rng(1)).eval()
	targets = np.tile(np.arange(space.size), 32)
	evaluation = evaluate_discrimination(speaker, listener, space, targets, 16, np.random.default_rng(2))
	assert abs(evaluation.loss - math.log(16)) <= 0.05


def test_target_position_is_uniform(rng):
	targets = rng.integers(0, 20, size=10_000)
	_, target_pos = draw_candidates(targets, np.arange(20), 4, rng)
	counts = np.bincount(target_pos, minlength=4)
	assert counts.sum() == 10_000
	assert chisquare(counts).pvalue > 1e-4

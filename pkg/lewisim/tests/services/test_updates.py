import numpy as np
import pytest

from lewisim.autodiff.gradcheck import grad_check
from lewisim.autodiff.optim import Adam
from lewisim.autodiff.tensor import no_grad
from lewisim.core.errors import ConfigurationError, NumericFailure
from lewisim.domain.agents.entities import Channel, Message, MessageBatch
from lewisim.domain.agents.policies import DiscriminationListener, ListenerPolicy, SpeakerPolicy
from lewisim.domain.agents.services import draw_candidates
from lewisim.domain.env.entities import ObjectSpace, ObjectSpaceSpec
from lewisim.services.training.updates import (
	alpha_balanced_reward,
	discrimination_reward,
	discrimination_step,
	listener_step,
	listener_update,
	reconstruction_reward,
	reinforce_advantage,
	reinforce_surrogate,
	speaker_update,
)


@pytest.fixture
def pair(small_space, small_channel, rng):
	speaker = SpeakerPolicy(small_space.spec, small_channel, 8, rng).eval()
	listener = ListenerPolicy(small_space.spec, small_channel, 8, rng).eval()
	return speaker, listener


def test_constant_rewards_give_exactly_zero_advantage():
	np.testing.assert_array_equal(reinforce_advantage(np.full(5, -1.3)), np.zeros(5))
	adv = reinforce_advantage(np.array([1.0, 2.0, 6.0]))
	np.testing.assert_allclose(adv, [-2.0, -1.0, 3.0])


def test_alpha_balanced_reward():
	probe, listener = np.array([-1.0, -2.0]), np.array([-3.0, -5.0])
	np.testing.assert_array_equal(alpha_balanced_reward(probe, listener, 0.0), probe)
	np.testing.assert_allclose(alpha_balanced_reward(probe, listener, 0.5), 0.5 * listener)
	np.testing.assert_allclose(alpha_balanced_reward(probe, listener, 0.25), [-1.25, -2.25])
	with pytest.raises(ConfigurationError):
		alpha_balanced_reward(probe, listener, 0.6)


def test_reconstruction_reward_without_probe_is_half_loglik(pair, small_space):
	speaker, listener = pair
	attrs = small_space.decode(np.arange(6))
	with no_grad():
		messages = speaker.sample(attrs, np.random.default_rng(1)).messages
		expected = 0.5 * listener.log_likelihood(messages, attrs)[0].data
		np.testing.assert_allclose(reconstruction_reward(listener)(messages, attrs), expected)
	with pytest.raises(ConfigurationError):
		reconstruction_reward(listener, alpha=0.25)


def test_surrogate_gradient_on_frozen_minibatch(small_space, rng):
	space = ObjectSpace(ObjectSpaceSpec((2, 3)))
	speaker = SpeakerPolicy(space.spec, Channel(vocab_size=4, max_len=2), 4, rng).eval()
	attrs = space.decode(np.arange(space.size))
	with no_grad():
		messages = speaker.sample(attrs, np.random.default_rng(4)).messages
	advantage = reinforce_advantage(rng.normal(size=space.size))

	def surrogate():
		out = speaker.score(attrs, messages)
		return reinforce_surrogate(out.log_prob, out.entropy, advantage, 0.01)

	report = grad_check(surrogate, speaker.parameters(), h=1e-5)
	assert report.passed(1e-3), report.per_parameter


def test_listener_update_leaves_speaker_untouched(pair, small_space):
	speaker, listener = pair
	before_speaker, before_listener = speaker.parameter_hash(), listener.parameter_hash()
	optimizer = Adam(listener.parameters(), lr=0.01)
	listener_update(
		listener, optimizer, speaker, small_space, np.arange(small_space.size), 8,
		np.random.default_rng(0), np.random.default_rng(1),
	)
	assert speaker.parameter_hash() == before_speaker
	assert listener.parameter_hash() != before_listener
	assert not listener.training


def test_speaker_update_leaves_listener_untouched(pair, small_space):
	speaker, listener = pair
	before_speaker, before_listener = speaker.parameter_hash(), listener.parameter_hash()
	attrs = small_space.decode(np.arange(8))
	step = speaker_update(
		speaker, Adam(speaker.parameters(), lr=0.01), attrs, reconstruction_reward(listener), 0.01,
		np.random.default_rng(2),
	)
	assert listener.parameter_hash() == before_listener
	assert speaker.parameter_hash() != before_speaker
	assert step.mean_reward < 0
	assert step.mean_entropy > 0


def test_speaker_update_rejects_bad_rewards(pair, small_space):
	speaker, _ = pair
	attrs = small_space.decode(np.arange(4))
	optimizer = Adam(speaker.parameters())
	with pytest.raises(NumericFailure):
		speaker_update(speaker, optimizer, attrs, lambda m, x: np.zeros(3), 0.01, np.random.default_rng(0))
	with pytest.raises(NumericFailure):
		speaker_update(speaker, optimizer, attrs, lambda m, x: np.full(4, np.nan), 0.01, np.random.default_rng(0))
	assert not speaker.training


def test_listener_steps_fit_a_fixed_batch(pair, small_space):
	speaker, listener = pair
	attrs = small_space.decode(np.arange(small_space.size))
	with no_grad():
		messages = speaker.sample(attrs, np.random.default_rng(3)).messages
	optimizer = Adam(listener.parameters(), lr=0.01)
	first = listener_step(listener, optimizer, messages, attrs)
	for _ in range(60):
		last = listener_step(listener, optimizer, messages, attrs)
	assert last < first


def test_discrimination_step_and_reward(small_space, small_channel, rng):
	speaker = SpeakerPolicy(small_space.spec, small_channel, 8, rng).eval()
	listener = DiscriminationListener(small_space.spec, small_channel, 8, 6, rng).eval()
	targets = np.arange(6)
	attrs = small_space.decode(targets)
	with no_grad():
		messages = speaker.sample(attrs, np.random.default_rng(0)).messages
	pool = np.arange(small_space.size)
	reward = discrimination_reward(listener, targets, pool, 4, small_space, np.random.default_rng(5))
	with no_grad():
		values = reward(messages, attrs)
	assert values.shape == (6,)
	assert np.all(values <= 0.0)
	candidates, pos = draw_candidates(targets, pool, 4, np.random.default_rng(6))
	optimizer = Adam(listener.parameters(), lr=0.01)
	first = discrimination_step(listener, optimizer, messages, candidates, pos, small_space)
	for _ in range(40):
		last = discrimination_step(listener, optimizer, messages, candidates, pos, small_space)
	assert last < first


def test_alpha_zero_speaker_update_ignores_the_listener(small_space, small_channel):
	attrs = small_space.decode(np.arange(small_space.size))
	probe = ListenerPolicy(small_space.spec, small_channel, 8, np.random.default_rng(11)).eval()
	states = []
	for listener_seed in (1, 2):
		speaker = SpeakerPolicy(small_space.spec, small_channel, 8, np.random.default_rng(7)).eval()
		listener = ListenerPolicy(small_space.spec, small_channel, 8, np.random.default_rng(listener_seed)).eval()
		optimizer = Adam(speaker.parameters(), lr=0.01)
		sampling = np.random.default_rng(3)
		for _ in range(3):
			speaker_update(speaker, optimizer, attrs, reconstruction_reward(listener, probe, alpha=0.0), 0.01, sampling)
		states.append(speaker.state_dict())
	assert states[0].keys() == states[1].keys()
	for name in states[0]:
		np.testing.assert_array_equal(states[0][name], states[1][name])


@pytest.mark.slow
def test_speaker_learns_a_two_object_bandit():
	space = ObjectSpace(ObjectSpaceSpec((2,)))
	channel = Channel(vocab_size=3, max_len=1)
	speaker = SpeakerPolicy(space.spec, channel, 8, np.random.default_rng(0)).eval()
	optimizer = Adam(speaker.parameters(), lr=0.01)
	objects = space.decode(np.arange(2))
	rewarded = MessageBatch.from_messages([Message.from_content([0], channel), Message.from_content([1], channel)], channel)
	batch = np.repeat(objects, 16, axis=0)
	sampling = np.random.default_rng(1)

	def reward(messages, attrs):
		return (messages.symbols[:, 0] == attrs[:, 0]).astype(np.float64)

	success = 0.0
	for update in range(2000):
		speaker_update(speaker, optimizer, batch, reward, 0.0, sampling)
		if update % 50 == 49:
			with no_grad():
				success = float(speaker.message_probs(objects, rewarded).mean())
			if success >= 0.99:
				break
	assert success >= 0.99

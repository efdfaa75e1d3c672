import numpy as np
import pytest

from lewisim.autodiff.tensor import no_grad
from lewisim.core.errors import ArtifactError, ConfigurationError, ContractViolation
from lewisim.domain.agents.checkpoint import Checkpoint, dump_checkpoint, load_checkpoint
from lewisim.domain.agents.entities import Channel, Message, MessageBatch
from lewisim.domain.agents.handbuilt import (
	bijective_speaker,
	compositional_listener,
	compositional_speaker,
	constant_speaker,
	lookup_listener_for,
	random_table_speaker,
)
from lewisim.domain.agents.policies import DiscriminationListener, ListenerPolicy, SpeakerPolicy
from lewisim.domain.agents.rules import normalized, target_appears_once
from lewisim.domain.agents.services import (
	discrimination_forward,
	draw_candidates,
	enumerate_messages,
	exact_match_accuracy,
	per_attribute_accuracy,
)


def test_channel_reserves_last_id_for_eos():
	channel = Channel(vocab_size=5, max_len=3)
	assert channel.eos_id == 4
	assert channel.n_symbols == 4
	with pytest.raises(ConfigurationError):
		Channel(vocab_size=1, max_len=3)
	with pytest.raises(ConfigurationError):
		Channel(vocab_size=3, max_len=0)


def test_message_from_content_appends_eos_or_truncates(small_channel):
	short = Message.from_content([1, 2], small_channel)
	assert short.symbols == (1, 2, 4)
	assert short.content == (1, 2)
	full = Message.from_content([0, 1, 2, 3], small_channel)
	assert full.symbols == (0, 1, 2)
	assert len(full) == 3
	assert Message.from_content([], small_channel).symbols == (4,)
	with pytest.raises(ContractViolation):
		Message.from_content([4], small_channel)


def test_message_batch_rejects_bad_lengths():
	with pytest.raises(ContractViolation):
		MessageBatch(np.zeros((2, 3)), np.array([0, 1]), 4)
	with pytest.raises(ContractViolation):
		MessageBatch(np.zeros((2, 3)), np.array([1, 4]), 4)


def test_enumerate_messages_counts_every_emittable_message():
	channel = Channel(vocab_size=3, max_len=2)
	messages = enumerate_messages(channel)
	# EoS only, one symbol then EoS, two symbols
	assert len(messages) == 1 + 2 + 4
	assert len({m.symbols for m in messages}) == len(messages)


def test_speaker_scores_its_samples_exactly(small_space, small_channel, rng):
	speaker = SpeakerPolicy(small_space.spec, small_channel, 8, rng).eval()
	attrs = small_space.decode(np.arange(small_space.size))
	with no_grad():
		sampled = speaker.sample(attrs, np.random.default_rng(0))
		scored = speaker.score(attrs, sampled.messages)
	np.testing.assert_array_equal(sampled.log_prob.data, scored.log_prob.data)
	np.testing.assert_array_equal(sampled.entropy.data, scored.entropy.data)
	assert np.all(sampled.log_prob.data <= 0.0)


def test_sampled_lengths_stop_at_first_eos(small_space, small_channel, rng):
	speaker = SpeakerPolicy(small_space.spec, small_channel, 8, rng).eval()
	attrs = small_space.decode(np.arange(small_space.size))
	with no_grad():
		out = speaker.sample(attrs, np.random.default_rng(5))
	for b in range(len(out.messages)):
		message = out.messages.message(b)
		eos = [t for t, s in enumerate(message.symbols) if s == small_channel.eos_id]
		assert eos == [] or eos == [len(message) - 1]
		assert np.all(out.messages.symbols[b, len(message):] == small_channel.eos_id)


def test_speaker_distribution_over_all_messages_sums_to_one(small_space, rng):
	channel = Channel(vocab_size=3, max_len=2)
	speaker = SpeakerPolicy(small_space.spec, channel, 6, rng).eval()
	messages = MessageBatch.from_messages(enumerate_messages(channel), channel)
	for index in (0, 5, 11):
		attrs = np.repeat(small_space.decode(np.array([index])), len(messages), axis=0)
		assert speaker.message_probs(attrs, messages).sum() == pytest.approx(1.0, abs=1e-10)


def test_forced_messages_must_match_batch(small_space, small_channel, rng):
	speaker = SpeakerPolicy(small_space.spec, small_channel, 8, rng)
	messages = MessageBatch.from_messages([Message.from_content([1], small_channel)], small_channel)
	with pytest.raises(ContractViolation):
		speaker.score(small_space.decode(np.array([0, 1])), messages)


def test_listener_heads_are_normalised(small_space, small_channel, rng):
	listener = ListenerPolicy(small_space.spec, small_channel, 8, rng).eval()
	messages = MessageBatch.from_messages(enumerate_messages(small_channel)[:20], small_channel)
	heads = listener.head_log_probs(messages)
	assert [h.shape for h in heads] == [(20, 3), (20, 4)]
	assert all(normalized(h, 1e-10) for h in heads)
	attrs = small_space.decode(np.arange(20) % small_space.size)
	with no_grad():
		total, per_head = listener.log_likelihood(messages, attrs)
	np.testing.assert_allclose(total.data, per_head[0].data + per_head[1].data)
	assert listener.predict(messages).shape == (20, 2)


def test_listener_rejects_mismatched_objects(small_space, small_channel, rng):
	listener = ListenerPolicy(small_space.spec, small_channel, 8, rng)
	messages = MessageBatch.from_messages([Message.from_content([1], small_channel)], small_channel)
	with pytest.raises(ContractViolation):
		listener.log_likelihood(messages, small_space.decode(np.array([0, 1])))
	with pytest.raises(ContractViolation):
		listener.log_likelihood(messages, np.array([[3, 0]]))


def test_draw_candidates_places_each_target_once(rng):
	targets = np.array([0, 3, 7, 7])
	candidates, pos = draw_candidates(targets, np.arange(10), 4, rng)
	assert candidates.shape == (4, 4)
	np.testing.assert_array_equal(candidates[np.arange(4), pos], targets)
	assert target_appears_once(candidates, targets)
	assert all(len(set(row)) == 4 for row in candidates)


def test_draw_candidates_needs_a_large_enough_pool(rng):
	with pytest.raises(ConfigurationError):
		draw_candidates(np.array([0]), np.arange(3), 4, rng)


def test_discrimination_forward_returns_normalised_scores(small_space, small_channel, rng):
	listener = DiscriminationListener(small_space.spec, small_channel, 8, 6, rng).eval()
	messages = MessageBatch.from_messages([Message.from_content([0, 1], small_channel)] * 3, small_channel)
	candidates, pos = draw_candidates(np.array([0, 4, 9]), np.arange(small_space.size), 5, rng)
	with no_grad():
		log_probs, loss = discrimination_forward(listener, messages, candidates, pos, small_space)
	assert log_probs.shape == (3, 5)
	assert normalized(log_probs.data, 1e-10)
	np.testing.assert_allclose(loss.data, -log_probs.data[np.arange(3), pos])


def test_discrimination_forward_rejects_duplicated_target(small_space, small_channel, rng):
	listener = DiscriminationListener(small_space.spec, small_channel, 8, 6, rng)
	messages = MessageBatch.from_messages([Message.from_content([0], small_channel)], small_channel)
	with pytest.raises(ContractViolation):
		discrimination_forward(listener, messages, np.array([[2, 2, 5]]), np.array([0]), small_space)
	with pytest.raises(ContractViolation):
		discrimination_forward(listener, messages, np.array([[2, 3, 5]]), np.array([3]), small_space)


def test_compositional_pair_communicates_perfectly(small_space, small_channel):
	speaker = compositional_speaker(small_space, small_channel)
	listener = compositional_listener(small_space, small_channel)
	attrs = small_space.decode(np.arange(small_space.size))
	messages = speaker.sample(attrs).messages
	assert messages.contents()[7] == tuple(attrs[7])
	predicted = listener.predict(messages)
	assert per_attribute_accuracy(predicted, attrs) == 1.0
	assert exact_match_accuracy(predicted, attrs) == 1.0


def test_compositional_speaker_needs_room(small_space):
	with pytest.raises(ConfigurationError):
		compositional_speaker(small_space, Channel(vocab_size=5, max_len=1))
	with pytest.raises(ConfigurationError):
		compositional_speaker(small_space, Channel(vocab_size=3, max_len=3))


def test_bijective_speaker_gives_distinct_messages(small_space, small_channel):
	speaker = bijective_speaker(small_space, small_channel, np.random.default_rng(2))
	attrs = small_space.decode(np.arange(small_space.size))
	contents = speaker.sample(attrs).messages.contents()
	assert len(set(contents)) == small_space.size
	listener = lookup_listener_for(speaker, small_space)
	assert exact_match_accuracy(listener.predict(speaker.sample(attrs).messages), attrs) == 1.0


def test_constant_speaker_sends_one_message(small_space, small_channel):
	speaker = constant_speaker(small_space, small_channel)
	attrs = small_space.decode(np.arange(small_space.size))
	assert len(set(speaker.sample(attrs).messages.contents())) == 1


def test_table_speaker_scores_and_refuses_unknown_messages(small_space, small_channel, rng):
	speaker = random_table_speaker(small_space, small_channel, rng, n_messages=6)
	attrs = small_space.decode(np.arange(small_space.size))
	out = speaker.sample(attrs, np.random.default_rng(0))
	np.testing.assert_allclose(speaker.score(attrs, out.messages).log_prob.data, out.log_prob.data)
	unknown = [m for m in enumerate_messages(small_channel) if m not in speaker.messages][0]
	batch = MessageBatch.from_messages([unknown], small_channel)
	with pytest.raises(ContractViolation):
		speaker.score(attrs[:1], batch)
	assert speaker.message_probs(attrs[:1], batch)[0] == 0.0


def test_checkpoint_codec_keeps_parameters_and_meta(small_space, small_channel, rng):
	speaker = SpeakerPolicy(small_space.spec, small_channel, 8, rng)
	listener = ListenerPolicy(small_space.spec, small_channel, 8, rng)
	data = dump_checkpoint(Checkpoint(speaker.state_dict(), listener.state_dict(), {"config_hash": "abc"}))
	loaded = load_checkpoint(data)
	assert loaded.meta["config_hash"] == "abc"
	assert loaded.meta["format"] == 1
	restored = SpeakerPolicy(small_space.spec, small_channel, 8, np.random.default_rng(99))
	restored.load_state_dict(loaded.speaker)
	assert restored.parameter_hash() == speaker.parameter_hash()
	assert set(loaded.listener) == set(listener.state_dict())


def test_unreadable_checkpoint_is_an_artifact_error():
	with pytest.raises(ArtifactError):
		load_checkpoint(b"not a zip archive")

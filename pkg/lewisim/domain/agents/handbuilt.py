"""
Hand-built speakers and listeners with known languages.

They share the sampling/scoring interface of the recurrent policies, so probes,
metrics and the tabular oracle can be checked against languages whose
properties (compositional, bijective, constant, random) are known exactly.
"""
from __future__ import annotations

import hashlib
import math
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import entr

from lewisim.autodiff.layers import Module
from lewisim.autodiff.tensor import Tensor
from lewisim.core.errors import ConfigurationError, ContractViolation
from lewisim.domain.agents import rules as agent_rules
from lewisim.domain.agents.entities import Channel, Message, MessageBatch, SpeakerOutput
from lewisim.domain.env.entities import ObjectSpace


def _batch_from_contents(contents: np.ndarray, channel: Channel) -> MessageBatch:
	B, L = contents.shape
	T = channel.max_len
	symbols = np.full((B, T), channel.eos_id, dtype=np.int64)
	symbols[:, :min(L, T)] = contents[:, :T]
	lengths = np.full(B, min(L + 1, T), dtype=np.int64)
	return MessageBatch(symbols, lengths, channel.eos_id)


def _constant_output(messages: MessageBatch, log_prob: np.ndarray, entropy: np.ndarray) -> SpeakerOutput:
	B, T = messages.symbols.shape
	lp = np.zeros((B, T))
	ent = np.zeros((B, T))
	lp[:, 0] = log_prob
	ent[:, 0] = entropy
	return SpeakerOutput(messages, Tensor(lp), Tensor(ent))


class DeterministicSpeaker(Module):
	"""x -> one fixed message, given by a vectorised content function on attribute rows."""

	def __init__(self, space: ObjectSpace, channel: Channel, contents: Callable[[np.ndarray], np.ndarray], name: str):
		self.space, self.channel = space, channel
		self.contents = contents
		self.name = name

	def sample(self, attrs: np.ndarray, rng: Optional[np.random.Generator] = None, dropout_rng=None) -> SpeakerOutput:
		attrs = np.asarray(attrs, dtype=np.int64)
		agent_rules.validate_attributes(attrs, self.space.spec.cardinalities)
		messages = _batch_from_contents(np.asarray(self.contents(attrs), dtype=np.int64), self.channel)
		zeros = np.zeros(len(messages))
		return _constant_output(messages, zeros, zeros)

	def score(self, attrs: np.ndarray, messages: MessageBatch) -> SpeakerOutput:
		own = self.sample(attrs).messages
		if not (np.array_equal(own.lengths, messages.lengths) and np.array_equal(own.symbols, messages.symbols)):
			raise ContractViolation(f"{self.name} speaker never emits some of these messages")
		return self.sample(attrs)

	def log_prob(self, attrs: np.ndarray, messages: MessageBatch) -> Tensor:
		return self.score(attrs, messages).log_prob

	def message_probs(self, attrs: np.ndarray, messages: MessageBatch) -> np.ndarray:
		own = self.sample(attrs).messages
		same = (own.lengths == messages.lengths) & np.all(own.symbols == messages.symbols, axis=1)
		return same.astype(np.float64)

	def parameter_hash(self) -> str:
		return hashlib.sha256(f"{self.name}:{self.channel}:{self.space.spec}".encode("utf-8")).hexdigest()


class UniformSpeaker(Module):
	"""Full-length messages of i.i.d. uniform non-EoS symbols, independent of the object."""

	def __init__(self, space: ObjectSpace, channel: Channel):
		self.space, self.channel = space, channel

	def sample(self, attrs: np.ndarray, rng: np.random.Generator, dropout_rng=None) -> SpeakerOutput:
		attrs = np.asarray(attrs, dtype=np.int64)
		agent_rules.validate_attributes(attrs, self.space.spec.cardinalities)
		B, T = attrs.shape[0], self.channel.max_len
		symbols = rng.integers(0, self.channel.n_symbols, size=(B, T))
		messages = MessageBatch(symbols, np.full(B, T), self.channel.eos_id)
		step = math.log(self.channel.n_symbols)
		return SpeakerOutput(messages, Tensor(np.full((B, T), -step)), Tensor(np.full((B, T), step)))

	def message_probs(self, attrs: np.ndarray, messages: MessageBatch) -> np.ndarray:
		T = self.channel.max_len
		full = (messages.lengths == T) & np.all(messages.symbols != self.channel.eos_id, axis=1)
		return np.where(full, float(self.channel.n_symbols) ** -T, 0.0)

	def parameter_hash(self) -> str:
		return hashlib.sha256(f"uniform:{self.channel}".encode("utf-8")).hexdigest()


class TableSpeaker(Module):
	"""Stochastic speaker given as a dense |X| x n_messages table over an explicit message list."""

	def __init__(self, space: ObjectSpace, channel: Channel, messages: Sequence[Message], probs: np.ndarray):
		probs = np.asarray(probs, dtype=np.float64)
		if probs.shape != (space.size, len(messages)):
			raise ContractViolation(f"table must be ({space.size}, {len(messages)}), got {probs.shape}")
		if np.any(probs < 0) or np.any(np.abs(probs.sum(axis=1) - 1.0) > 1e-12):
			raise ContractViolation("speaker table rows must be probability vectors")
		self.space, self.channel = space, channel
		self.messages = list(messages)
		self.probs = probs
		self._batch = MessageBatch.from_messages(self.messages, channel)
		self._ids: Dict[Tuple[int, ...], int] = {m.symbols: i for i, m in enumerate(self.messages)}
		if len(self._ids) != len(self.messages):
			raise ContractViolation("table messages must be distinct")

	def _entropy(self, rows: np.ndarray) -> np.ndarray:
		return entr(self.probs[rows]).sum(axis=1)

	def sample(self, attrs: np.ndarray, rng: np.random.Generator, dropout_rng=None) -> SpeakerOutput:
		rows = self.space.encode(attrs)
		picked = agent_rules.sample_categorical(self.probs[rows], rng.random(rows.size))
		messages = self._batch.take(picked)
		return _constant_output(messages, np.log(self.probs[rows, picked]), self._entropy(rows))

	def score(self, attrs: np.ndarray, messages: MessageBatch) -> SpeakerOutput:
		rows = self.space.encode(attrs)
		ids = np.asarray([self._ids.get(messages.message(b).symbols, -1) for b in range(len(messages))])
		if np.any(ids < 0):
			raise ContractViolation("message outside the speaker's table")
		p = self.probs[rows, ids]
		if np.any(p <= 0):
			raise ContractViolation("message has zero probability under this speaker")
		return _constant_output(messages, np.log(p), self._entropy(rows))

	def message_probs(self, attrs: np.ndarray, messages: MessageBatch) -> np.ndarray:
		rows = self.space.encode(attrs)
		ids = np.asarray([self._ids.get(messages.message(b).symbols, -1) for b in range(len(messages))])
		return np.where(ids >= 0, self.probs[rows, np.maximum(ids, 0)], 0.0)

	def log_prob(self, attrs: np.ndarray, messages: MessageBatch) -> Tensor:
		return self.score(attrs, messages).log_prob

	def parameter_hash(self) -> str:
		digest = hashlib.sha256(np.ascontiguousarray(self.probs).tobytes())
		for m in self.messages:
			digest.update(str(m.symbols).encode("utf-8"))
		return digest.hexdigest()


class LookupListener(Module):
	"""Listener that decodes message content with a lookup function.

	Known messages put `confidence` on the decoded value of each attribute; unknown
	messages get uniform heads.
	"""

	def __init__(
		self,
		space: ObjectSpace,
		channel: Channel,
		decode: Callable[[Tuple[int, ...]], Optional[Tuple[int, ...]]],
		confidence: float = 1.0 - 1e-6,
	):
		if not 0.0 < confidence < 1.0:
			raise ContractViolation("confidence must lie in (0, 1)")
		self.space, self.channel = space, channel
		self.spec = space.spec
		self.decode = decode
		self.confidence = confidence

	def head_log_probs(self, messages: MessageBatch) -> List[np.ndarray]:
		cards = self.spec.cardinalities
		out = [np.full((len(messages), c), -math.log(c)) for c in cards]
		for b, content in enumerate(messages.contents()):
			attrs = self.decode(content)
			if attrs is None:
				continue
			for k, c in enumerate(cards):
				row = np.full(c, math.log((1.0 - self.confidence) / (c - 1)))
				row[attrs[k]] = math.log(self.confidence)
				out[k][b] = row
		return out

	def log_likelihood(self, messages: MessageBatch, attrs: np.ndarray, dropout_rng=None) -> Tuple[Tensor, List[Tensor]]:
		attrs = np.asarray(attrs, dtype=np.int64)
		rows = np.arange(len(messages))
		per_head = [Tensor(lp[rows, attrs[:, k]]) for k, lp in enumerate(self.head_log_probs(messages))]
		return Tensor(np.sum([t.data for t in per_head], axis=0)), per_head

	def predict(self, messages: MessageBatch) -> np.ndarray:
		return np.stack([np.argmax(lp, axis=1) for lp in self.head_log_probs(messages)], axis=1)


def compositional_speaker(space: ObjectSpace, channel: Channel, relabel: Optional[np.ndarray] = None) -> DeterministicSpeaker:
	"""Position k carries attribute k; value v is symbol relabel[v] (identity by default)."""
	spec = space.spec
	if spec.n_attributes > channel.max_len:
		raise ConfigurationError("compositional language needs max_len >= number of attributes", field="channel.max_len")
	if max(spec.cardinalities) > channel.n_symbols:
		raise ConfigurationError("compositional language needs one symbol per attribute value", field="channel.vocab_size")
	table = np.arange(channel.n_symbols) if relabel is None else np.asarray(relabel, dtype=np.int64)
	return DeterministicSpeaker(space, channel, lambda attrs: table[attrs], "compositional")


def compositional_listener(space: ObjectSpace, channel: Channel, relabel: Optional[np.ndarray] = None) -> LookupListener:
	cards = space.spec.cardinalities
	table = np.arange(channel.n_symbols) if relabel is None else np.asarray(relabel, dtype=np.int64)
	inverse = {int(s): v for v, s in enumerate(table)}

	def decode(content: Tuple[int, ...]) -> Optional[Tuple[int, ...]]:
		if len(content) != len(cards):
			return None
		attrs = tuple(inverse.get(s, -1) for s in content)
		return attrs if all(0 <= a < c for a, c in zip(attrs, cards)) else None

	return LookupListener(space, channel, decode)


def bijective_speaker(space: ObjectSpace, channel: Channel, rng: Optional[np.random.Generator] = None) -> DeterministicSpeaker:
	"""Each object gets a distinct message: its (optionally permuted) index in base n_symbols."""
	n = channel.n_symbols
	if n == 1 and space.size > 1:
		raise ConfigurationError("channel too small for a bijective language", field="channel")
	width = 1
	while n ** width < space.size:
		width += 1
	if width > channel.max_len:
		raise ConfigurationError("channel too small for a bijective language", field="channel")
	perm = np.arange(space.size) if rng is None else rng.permutation(space.size)
	place = n ** np.arange(width - 1, -1, -1, dtype=np.int64)

	def contents(attrs: np.ndarray) -> np.ndarray:
		codes = perm[space.encode(attrs)]
		return (codes[:, None] // place[None, :]) % n

	return DeterministicSpeaker(space, channel, contents, "bijective")


def constant_speaker(space: ObjectSpace, channel: Channel) -> DeterministicSpeaker:
	return DeterministicSpeaker(space, channel, lambda attrs: np.zeros((attrs.shape[0], 1), dtype=np.int64), "constant")


def lookup_listener_for(speaker: DeterministicSpeaker, space: ObjectSpace) -> LookupListener:
	"""Perfect listener for a deterministic speaker over an enumerable space."""
	attrs = space.decode(np.arange(space.size))
	table: Dict[Tuple[int, ...], Tuple[int, ...]] = {}
	for content, row in zip(speaker.sample(attrs).messages.contents(), attrs):
		table.setdefault(content, tuple(int(a) for a in row))
	return LookupListener(space, speaker.channel, table.get)


def random_table_speaker(
	space: ObjectSpace,
	channel: Channel,
	rng: np.random.Generator,
	n_messages: int,
	concentration: float = 1.0,
) -> TableSpeaker:
	"""Dirichlet(concentration) rows over n_messages distinct messages of the channel."""
	from lewisim.domain.agents.services import enumerate_messages

	pool = enumerate_messages(channel)
	if not 1 <= n_messages <= len(pool):
		raise ConfigurationError(f"n_messages must lie in [1, {len(pool)}]", field="n_messages")
	chosen = [pool[i] for i in sorted(rng.choice(len(pool), size=n_messages, replace=False))]
	probs = rng.dirichlet(np.full(n_messages, concentration), size=space.size)
	probs /= probs.sum(axis=1, keepdims=True)
	return TableSpeaker(space, channel, chosen, probs)

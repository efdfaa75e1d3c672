"""
Recurrent speaker and listener policies.

Speaker: the projected one-hot object is the initial LSTM hidden state, a learned
start vector is the first input, and each emitted symbol is embedded as the next
input. Listener: reads the full emitted sequence (EoS included) and decodes one
categorical head per attribute from the hidden state at the last emitted symbol.
"""
from __future__ import annotations

from typing import List, Optional, Tuple

import numpy as np

from lewisim.autodiff import ops
from lewisim.autodiff.layers import Embedding, LSTMCell, Linear, Module, apply_dropout, uniform_init
from lewisim.autodiff.tensor import Tensor, no_grad, parameter
from lewisim.core.errors import ContractViolation
from lewisim.domain.agents import rules as agent_rules
from lewisim.domain.agents.entities import Channel, MessageBatch, SpeakerOutput
from lewisim.domain.env.entities import ObjectSpaceSpec
from lewisim.domain.env.services import encode_objects


class SpeakerPolicy(Module):
	def __init__(
		self,
		spec: ObjectSpaceSpec,
		channel: Channel,
		hidden_size: int,
		rng: np.random.Generator,
		layer_norm: bool = True,
		dropout: float = 0.0,
	):
		self.spec, self.channel = spec, channel
		self.hidden_size = hidden_size
		self.dropout = dropout
		self.input_proj = Linear(spec.input_dim, hidden_size, rng)
		self.start = parameter(uniform_init(rng, hidden_size, (hidden_size,)), "start")
		self.embedding = Embedding(channel.vocab_size, hidden_size, rng)
		self.cell = LSTMCell(hidden_size, hidden_size, rng, layer_norm=layer_norm)
		self.output = Linear(hidden_size, channel.vocab_size, rng)

	def _unroll(
		self,
		attrs: np.ndarray,
		rng: Optional[np.random.Generator] = None,
		forced: Optional[MessageBatch] = None,
		dropout_rng: Optional[np.random.Generator] = None,
	) -> SpeakerOutput:
		"""One autoregressive pass, either sampling (rng) or scoring `forced` messages.

		Both modes run the same operations, so the log-prob of a sampled message
		equals its score bit for bit.
		"""
		attrs = np.asarray(attrs, dtype=np.int64)
		agent_rules.validate_attributes(attrs, self.spec.cardinalities)
		if forced is None and rng is None:
			raise ContractViolation("sampling needs an rng")
		B, T, H = attrs.shape[0], self.channel.max_len, self.hidden_size
		eos = self.channel.eos_id
		if forced is not None:
			if len(forced) != B or forced.max_len != T:
				raise ContractViolation(f"forced messages must be ({B}, {T}), got ({len(forced)}, {forced.max_len})")
			agent_rules.validate_messages(forced.symbols, self.channel.vocab_size)

		h = self.input_proj(Tensor(encode_objects(attrs, self.spec)))
		c = Tensor(np.zeros((B, H)))
		inp = ops.broadcast_to(self.start, (B, H))
		alive = np.ones(B, dtype=bool)
		symbols = np.full((B, T), eos, dtype=np.int64)
		lengths = np.zeros(B, dtype=np.int64)
		step_lp: List[Tensor] = []
		step_ent: List[Tensor] = []
		drop_rng = dropout_rng if self.training else None
		for t in range(T):
			h, c = self.cell(inp, (h, c))
			log_probs = ops.log_softmax(self.output(apply_dropout(h, self.dropout, drop_rng)))
			if forced is not None:
				sym = forced.symbols[:, t]
			else:
				sym = agent_rules.sample_categorical(np.exp(log_probs.data), rng.random(B))
			mask = Tensor(alive.astype(np.float64))
			step_lp.append(ops.gather(log_probs, sym) * mask)
			step_ent.append(ops.entropy_from_log_probs(log_probs) * mask)
			symbols[alive, t] = sym[alive]
			lengths[alive] += 1
			alive &= sym != eos
			if not alive.any():
				break
			inp = self.embedding(symbols[:, t])
		for _ in range(len(step_lp), T):
			step_lp.append(Tensor(np.zeros(B)))
			step_ent.append(Tensor(np.zeros(B)))
		if forced is not None and not np.array_equal(lengths, forced.lengths):
			raise ContractViolation("forced message lengths disagree with their EoS positions")
		return SpeakerOutput(MessageBatch(symbols, lengths, eos), ops.stack(step_lp), ops.stack(step_ent))

	def sample(
		self, attrs: np.ndarray, rng: np.random.Generator, dropout_rng: Optional[np.random.Generator] = None
	) -> SpeakerOutput:
		return self._unroll(attrs, rng=rng, dropout_rng=dropout_rng)

	def score(self, attrs: np.ndarray, messages: MessageBatch) -> SpeakerOutput:
		return self._unroll(attrs, forced=messages)

	def log_prob(self, attrs: np.ndarray, messages: MessageBatch) -> Tensor:
		return self.score(attrs, messages).log_prob

	def message_probs(self, attrs: np.ndarray, messages: MessageBatch) -> np.ndarray:
		with no_grad():
			return np.exp(self.log_prob(attrs, messages).data)

	def first_step_probs(self, attrs: np.ndarray) -> np.ndarray:
		"""pi(m_1 | x) for every row, without recording."""
		attrs = np.asarray(attrs, dtype=np.int64)
		B = attrs.shape[0]
		with no_grad():
			h = self.input_proj(Tensor(encode_objects(attrs, self.spec)))
			c = Tensor(np.zeros((B, self.hidden_size)))
			h, _ = self.cell(ops.broadcast_to(self.start, (B, self.hidden_size)), (h, c))
			return ops.softmax_array(self.output(h).data)


class MessageEncoder(Module):
	"""Embedding + LSTM over a message batch; returns the state at each message's last symbol."""

	def __init__(self, channel: Channel, hidden_size: int, rng: np.random.Generator, layer_norm: bool = True):
		self.channel = channel
		self.hidden_size = hidden_size
		self.embedding = Embedding(channel.vocab_size, hidden_size, rng)
		self.cell = LSTMCell(hidden_size, hidden_size, rng, layer_norm=layer_norm)

	def __call__(self, messages: MessageBatch) -> Tensor:
		agent_rules.validate_messages(messages.symbols, self.channel.vocab_size)
		B = len(messages)
		h, c = self.cell.zero_state(B)
		last = messages.lengths - 1
		final: Optional[Tensor] = None
		for t in range(int(messages.lengths.max())):
			h, c = self.cell(self.embedding(messages.symbols[:, t]), (h, c))
			picked = h * Tensor((last == t).astype(np.float64)[:, None])
			final = picked if final is None else final + picked
		return final


class ListenerPolicy(Module):
	def __init__(
		self,
		spec: ObjectSpaceSpec,
		channel: Channel,
		hidden_size: int,
		rng: np.random.Generator,
		layer_norm: bool = True,
		dropout: float = 0.0,
	):
		self.spec, self.channel = spec, channel
		self.hidden_size = hidden_size
		self.dropout = dropout
		self.encoder = MessageEncoder(channel, hidden_size, rng, layer_norm=layer_norm)
		self.heads = [Linear(hidden_size, c, rng) for c in spec.cardinalities]

	def head_log_prob_tensors(
		self, messages: MessageBatch, dropout_rng: Optional[np.random.Generator] = None
	) -> List[Tensor]:
		state = self.encoder(messages)
		state = apply_dropout(state, self.dropout, dropout_rng if self.training else None)
		return [ops.log_softmax(head(state)) for head in self.heads]

	def log_likelihood(
		self,
		messages: MessageBatch,
		attrs: np.ndarray,
		dropout_rng: Optional[np.random.Generator] = None,
	) -> Tuple[Tensor, List[Tensor]]:
		"""log rho(x|m) per row, as the sum over attributes, plus the per-attribute terms."""
		attrs = np.asarray(attrs, dtype=np.int64)
		agent_rules.validate_attributes(attrs, self.spec.cardinalities)
		if attrs.shape[0] != len(messages):
			raise ContractViolation("one object per message is required")
		per_head = [ops.gather(lp, attrs[:, k]) for k, lp in enumerate(self.head_log_prob_tensors(messages, dropout_rng))]
		total = per_head[0]
		for term in per_head[1:]:
			total = total + term
		return total, per_head

	def head_log_probs(self, messages: MessageBatch) -> List[np.ndarray]:
		with no_grad():
			return [lp.data for lp in self.head_log_prob_tensors(messages)]

	def predict(self, messages: MessageBatch) -> np.ndarray:
		return np.stack([np.argmax(lp, axis=1) for lp in self.head_log_probs(messages)], axis=1)


class DiscriminationListener(Module):
	"""Scores candidates by dot product between a message code and a candidate code."""

	def __init__(
		self,
		spec: ObjectSpaceSpec,
		channel: Channel,
		hidden_size: int,
		embed_dim: int,
		rng: np.random.Generator,
		layer_norm: bool = True,
		dropout: float = 0.0,
	):
		self.spec, self.channel = spec, channel
		self.hidden_size = hidden_size
		self.dropout = dropout
		self.encoder = MessageEncoder(channel, hidden_size, rng, layer_norm=layer_norm)
		self.message_proj = Linear(hidden_size, embed_dim, rng)
		self.candidate_proj = Linear(spec.input_dim, embed_dim, rng)
		self.embed_dim = embed_dim

	def candidate_log_probs(
		self,
		messages: MessageBatch,
		candidate_attrs: np.ndarray,
		dropout_rng: Optional[np.random.Generator] = None,
	) -> Tensor:
		"""(B, C, K) candidate attributes -> (B, C) log-softmax over dot-product scores."""
		candidate_attrs = np.asarray(candidate_attrs, dtype=np.int64)
		if candidate_attrs.ndim != 3 or candidate_attrs.shape[0] != len(messages):
			raise ContractViolation(f"expected (B, C, K) candidates, got {candidate_attrs.shape}")
		B, C, K = candidate_attrs.shape
		state = apply_dropout(self.encoder(messages), self.dropout, dropout_rng if self.training else None)
		code = self.message_proj(state)
		onehot = encode_objects(candidate_attrs.reshape(B * C, K), self.spec)
		cand = self.candidate_proj(Tensor(onehot)).reshape(B, C, self.embed_dim)
		return ops.log_softmax(ops.batched_dot(code, cand))

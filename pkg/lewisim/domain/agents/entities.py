from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np

from lewisim.autodiff.tensor import Tensor
from lewisim.core.errors import ConfigurationError, ContractViolation


@dataclass(frozen=True)
class Channel:
	"""Message channel: vocabulary of `vocab_size` ids, the last one reserved for EoS."""

	vocab_size: int
	max_len: int

	def __post_init__(self) -> None:
		if self.vocab_size < 2:
			raise ConfigurationError("vocabulary needs EoS plus at least one symbol", field="channel.vocab_size")
		if self.max_len < 1:
			raise ConfigurationError("max message length must be >= 1", field="channel.max_len")

	@property
	def eos_id(self) -> int:
		return self.vocab_size - 1

	@property
	def n_symbols(self) -> int:
		"""Non-EoS symbols."""
		return self.vocab_size - 1


@dataclass(frozen=True)
class Message:
	"""An emitted symbol sequence; `content` is everything before the first EoS."""

	symbols: Tuple[int, ...]
	eos_id: int

	@property
	def content(self) -> Tuple[int, ...]:
		out = []
		for s in self.symbols:
			if s == self.eos_id:
				break
			out.append(s)
		return tuple(out)

	def __len__(self) -> int:
		return len(self.symbols)

	@classmethod
	def from_content(cls, content: Sequence[int], channel: Channel) -> "Message":
		"""Append EoS when there is room, otherwise truncate at max_len."""
		content = tuple(int(s) for s in content)
		if any(s < 0 or s >= channel.n_symbols for s in content):
			raise ContractViolation(f"content symbols must lie in [0, {channel.n_symbols})")
		if len(content) >= channel.max_len:
			return cls(content[:channel.max_len], channel.eos_id)
		return cls(content + (channel.eos_id,), channel.eos_id)


@dataclass
class MessageBatch:
	"""B messages as a (B, T) id matrix padded with EoS, plus emitted lengths.

	lengths[b] counts emitted symbols including a trailing EoS, so an immediate EoS
	has length 1 and a truncated message has length T.
	"""

	symbols: np.ndarray
	lengths: np.ndarray
	eos_id: int

	def __post_init__(self) -> None:
		self.symbols = np.asarray(self.symbols, dtype=np.int64)
		self.lengths = np.asarray(self.lengths, dtype=np.int64)
		if self.symbols.ndim != 2 or self.lengths.shape != (self.symbols.shape[0],):
			raise ContractViolation(f"bad message batch shapes {self.symbols.shape} / {self.lengths.shape}")
		if self.lengths.size and (self.lengths.min() < 1 or self.lengths.max() > self.symbols.shape[1]):
			raise ContractViolation("message lengths must lie in [1, T]")

	def __len__(self) -> int:
		return int(self.symbols.shape[0])

	@property
	def max_len(self) -> int:
		return int(self.symbols.shape[1])

	def message(self, b: int) -> Message:
		return Message(tuple(int(s) for s in self.symbols[b, :self.lengths[b]]), self.eos_id)

	def contents(self) -> List[Tuple[int, ...]]:
		return [self.message(b).content for b in range(len(self))]

	def take(self, rows: np.ndarray) -> "MessageBatch":
		return MessageBatch(self.symbols[rows], self.lengths[rows], self.eos_id)

	@classmethod
	def from_messages(cls, messages: Sequence[Message], channel: Channel) -> "MessageBatch":
		symbols = np.full((len(messages), channel.max_len), channel.eos_id, dtype=np.int64)
		lengths = np.zeros(len(messages), dtype=np.int64)
		for b, m in enumerate(messages):
			if len(m) < 1 or len(m) > channel.max_len:
				raise ContractViolation(f"message length {len(m)} outside [1, {channel.max_len}]")
			symbols[b, :len(m)] = m.symbols
			lengths[b] = len(m)
		return cls(symbols, lengths, channel.eos_id)


@dataclass
class SpeakerOutput:
	"""Sampled messages with per-step log-probs and entropies, zero past each message end."""

	messages: MessageBatch
	step_log_probs: Tensor
	step_entropies: Tensor
	log_prob: Tensor = field(init=False)
	entropy: Tensor = field(init=False)

	def __post_init__(self) -> None:
		self.log_prob = self.step_log_probs.sum(axis=-1)
		self.entropy = self.step_entropies.sum(axis=-1)

from __future__ import annotations

from itertools import product
from typing import List, Tuple

import numpy as np

from lewisim.autodiff import ops
from lewisim.autodiff.tensor import Tensor
from lewisim.core.errors import ConfigurationError, ContractViolation
from lewisim.domain.agents import rules as agent_rules
from lewisim.domain.agents.entities import Channel, Message, MessageBatch, SpeakerOutput
from lewisim.domain.agents.policies import DiscriminationListener
from lewisim.domain.env.entities import ObjectSpace


def speaker_sample(speaker, attrs: np.ndarray, rng: np.random.Generator, dropout_rng=None) -> SpeakerOutput:
	return speaker.sample(attrs, rng, dropout_rng=dropout_rng)


def speaker_log_prob(speaker, attrs: np.ndarray, messages: MessageBatch) -> Tensor:
	return speaker.log_prob(attrs, messages)


def listener_log_likelihood(listener, messages: MessageBatch, attrs: np.ndarray, dropout_rng=None) -> Tuple[Tensor, List[Tensor]]:
	return listener.log_likelihood(messages, attrs, dropout_rng=dropout_rng)


def enumerate_messages(channel: Channel) -> List[Message]:
	"""Every distinct emittable message: content of length < T followed by EoS, or T symbols."""
	out: List[Message] = []
	for length in range(channel.max_len):
		for content in product(range(channel.n_symbols), repeat=length):
			out.append(Message(tuple(content) + (channel.eos_id,), channel.eos_id))
	for content in product(range(channel.n_symbols), repeat=channel.max_len):
		out.append(Message(tuple(content), channel.eos_id))
	return out


def per_attribute_accuracy(predicted: np.ndarray, attrs: np.ndarray) -> float:
	"""Mean over objects and attributes of argmax correctness (the reconstruction score)."""
	return float(np.mean(np.asarray(predicted) == np.asarray(attrs)))


def exact_match_accuracy(predicted: np.ndarray, attrs: np.ndarray) -> float:
	return float(np.mean(np.all(np.asarray(predicted) == np.asarray(attrs), axis=1)))


def draw_candidates(
	targets: np.ndarray,
	pool: np.ndarray,
	n_candidates: int,
	rng: np.random.Generator,
) -> Tuple[np.ndarray, np.ndarray]:
	"""Candidate sets holding each target once plus distractors drawn without replacement.

	Distractors come uniformly from `pool` minus the target; each row is then
	shuffled so the target position is uniform. Returns (candidates, target_pos).
	"""
	targets = np.asarray(targets, dtype=np.int64)
	pool = np.unique(np.asarray(pool, dtype=np.int64))
	if n_candidates < 1:
		raise ConfigurationError("need at least one candidate", field="game.n_candidates")
	if n_candidates > pool.size:
		raise ConfigurationError(
			f"{n_candidates} candidates requested from a pool of {pool.size}", field="game.n_candidates"
		)
	B = targets.size
	candidates = np.empty((B, n_candidates), dtype=np.int64)
	target_pos = np.empty(B, dtype=np.int64)
	for b in range(B):
		others = pool[pool != targets[b]]
		picked = others[rng.choice(others.size, size=n_candidates - 1, replace=False)]
		row = np.concatenate([[targets[b]], picked])
		perm = rng.permutation(n_candidates)
		candidates[b] = row[perm]
		target_pos[b] = int(np.flatnonzero(perm == 0)[0])
	return candidates, target_pos


def discrimination_forward(
	listener: DiscriminationListener,
	messages: MessageBatch,
	candidates: np.ndarray,
	target_pos: np.ndarray,
	space: ObjectSpace,
	dropout_rng=None,
) -> Tuple[Tensor, Tensor]:
	"""(log-probs over candidates (B, C), InfoNCE loss per row (B,))."""
	candidates = np.asarray(candidates, dtype=np.int64)
	target_pos = np.asarray(target_pos, dtype=np.int64)
	B, C = candidates.shape
	if target_pos.shape != (B,) or np.any(target_pos < 0) or np.any(target_pos >= C):
		raise ContractViolation(f"target index must lie in [0, {C})")
	targets = candidates[np.arange(B), target_pos]
	if not agent_rules.target_appears_once(candidates, targets):
		raise ContractViolation("the target object may not be duplicated in its candidate set")
	cand_attrs = space.decode(candidates.reshape(-1)).reshape(B, C, space.spec.n_attributes)
	log_probs = listener.candidate_log_probs(messages, cand_attrs, dropout_rng=dropout_rng)
	return log_probs, -ops.gather(log_probs, target_pos)

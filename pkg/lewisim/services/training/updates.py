"""
Single gradient steps for both agents.

Every step owns exactly one agent's optimizer: a listener step never touches speaker
parameters and a speaker step never touches listener parameters.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from lewisim.autodiff.optim import Adam
from lewisim.autodiff.tensor import Tape, Tensor, no_grad
from lewisim.core.errors import ConfigurationError, NumericFailure
from lewisim.domain.agents.entities import MessageBatch
from lewisim.domain.agents.policies import DiscriminationListener
from lewisim.domain.agents.services import discrimination_forward, draw_candidates
from lewisim.domain.env.entities import ObjectSpace
from lewisim.domain.env.services import sample_batch

RewardFn = Callable[[MessageBatch, np.ndarray], np.ndarray]


@dataclass
class SpeakerStep:
	loss: float
	mean_reward: float
	mean_entropy: float


def _require_finite(value: float, what: str) -> None:
	if not np.isfinite(value):
		raise NumericFailure(f"{what} is not finite")


def listener_step(listener, optimizer: Adam, messages: MessageBatch, attrs: np.ndarray, dropout_rng=None) -> float:
	"""One Adam step on -mean log rho(x|m) over a fixed (x, m) batch."""
	listener.train()
	try:
		with Tape() as tape:
			loglik, _ = listener.log_likelihood(messages, attrs, dropout_rng=dropout_rng)
			loss = -loglik.mean()
		_require_finite(loss.item(), "listener loss")
		tape.backward(loss, optimizer.params.values())
		optimizer.step()
	finally:
		listener.eval()
	return loss.item()


def listener_update(
	listener,
	optimizer: Adam,
	speaker,
	space: ObjectSpace,
	part: np.ndarray,
	batch_size: int,
	batch_rng: np.random.Generator,
	sampling_rng: np.random.Generator,
	dropout_rng: Optional[np.random.Generator] = None,
) -> float:
	"""Fresh batch from `part`, messages from the frozen speaker, one listener step."""
	attrs = space.decode(sample_batch(part, batch_size, batch_rng))
	with no_grad():
		messages = speaker.sample(attrs, sampling_rng).messages
	return listener_step(listener, optimizer, messages, attrs, dropout_rng)


def reinforce_advantage(rewards: np.ndarray) -> np.ndarray:
	"""r - minibatch mean; exactly zero when every reward is equal."""
	rewards = np.asarray(rewards, dtype=np.float64)
	if np.all(rewards == rewards[0]):
		return np.zeros_like(rewards)
	return rewards - rewards.mean()


def reinforce_surrogate(log_prob: Tensor, entropy: Tensor, advantage: np.ndarray, entropy_coef: float) -> Tensor:
	"""Scalar whose gradient is the REINFORCE estimate minus the entropy bonus."""
	return -(log_prob * Tensor(advantage)).mean() - (entropy.mean() * entropy_coef)


def speaker_update(
	speaker,
	optimizer: Adam,
	attrs: np.ndarray,
	reward_fn: RewardFn,
	entropy_coef: float,
	sampling_rng: np.random.Generator,
	dropout_rng: Optional[np.random.Generator] = None,
) -> SpeakerStep:
	"""Sample messages for `attrs`, reward them, take one policy-gradient step."""
	speaker.train()
	try:
		with Tape() as tape:
			out = speaker.sample(attrs, sampling_rng, dropout_rng=dropout_rng)
			with no_grad():
				rewards = np.asarray(reward_fn(out.messages, attrs), dtype=np.float64)
			if rewards.shape != (len(out.messages),):
				raise NumericFailure(f"reward shape {rewards.shape} does not match the batch")
			if not np.all(np.isfinite(rewards)):
				raise NumericFailure("non-finite reward")
			loss = reinforce_surrogate(out.log_prob, out.entropy, reinforce_advantage(rewards), entropy_coef)
		_require_finite(loss.item(), "speaker loss")
		tape.backward(loss, optimizer.params.values())
		optimizer.step()
	finally:
		speaker.eval()
	return SpeakerStep(loss=loss.item(), mean_reward=float(rewards.mean()), mean_entropy=float(out.entropy.data.mean()))


def alpha_balanced_reward(probe_loglik: np.ndarray, listener_loglik: np.ndarray, alpha: float) -> np.ndarray:
	"""(1 - 2 alpha) log rho_probe(x|m) + alpha log rho(x|m).

	The expected speaker loss is then (1 - alpha) L_info + alpha L_adapt.
	"""
	if not 0.0 <= alpha <= 0.5:
		raise ConfigurationError(f"alpha must lie in [0, 0.5], got {alpha}", field="alpha")
	probe_loglik = np.asarray(probe_loglik, dtype=np.float64)
	if alpha == 0.0:
		return probe_loglik.copy()
	return (1.0 - 2.0 * alpha) * probe_loglik + alpha * np.asarray(listener_loglik, dtype=np.float64)


def reconstruction_reward(listener, probe=None, alpha: float = 0.5) -> RewardFn:
	"""Reward provider for the reconstruction game.

	Without a probe only alpha = 0.5 is meaningful and the reward is 0.5 log rho(x|m).
	"""
	if probe is None and alpha != 0.5:
		raise ConfigurationError("alpha below 0.5 needs a probe listener", field="alpha")

	def reward(messages: MessageBatch, attrs: np.ndarray) -> np.ndarray:
		listener_ll = np.zeros(len(messages)) if alpha == 0.0 else listener.log_likelihood(messages, attrs)[0].data
		probe_ll = listener_ll if probe is None else probe.log_likelihood(messages, attrs)[0].data
		return alpha_balanced_reward(probe_ll, listener_ll, alpha)

	return reward


def discrimination_step(
	listener: DiscriminationListener,
	optimizer: Adam,
	messages: MessageBatch,
	candidates: np.ndarray,
	target_pos: np.ndarray,
	space: ObjectSpace,
	dropout_rng=None,
) -> float:
	"""One Adam step on the mean InfoNCE loss."""
	listener.train()
	try:
		with Tape() as tape:
			_, per_row = discrimination_forward(listener, messages, candidates, target_pos, space, dropout_rng)
			loss = per_row.mean()
		_require_finite(loss.item(), "discrimination loss")
		tape.backward(loss, optimizer.params.values())
		optimizer.step()
	finally:
		listener.eval()
	return loss.item()


def discrimination_reward(
	listener: DiscriminationListener,
	targets: np.ndarray,
	pool: np.ndarray,
	n_candidates: int,
	space: ObjectSpace,
	rng: np.random.Generator,
) -> RewardFn:
	"""log rho(x | m, C) with candidates drawn once for the rows of `targets`."""
	candidates, target_pos = draw_candidates(targets, pool, n_candidates, rng)

	def reward(messages: MessageBatch, attrs: np.ndarray) -> np.ndarray:
		log_probs, _ = discrimination_forward(listener, messages, candidates, target_pos, space)
		return log_probs.data[np.arange(len(messages)), target_pos]

	return reward

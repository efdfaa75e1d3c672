from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from lewisim.autodiff.tensor import no_grad
from lewisim.core.rng import RngStreams
from lewisim.domain.agents.entities import MessageBatch
from lewisim.domain.agents.services import (
	discrimination_forward,
	draw_candidates,
	exact_match_accuracy,
	per_attribute_accuracy,
)
from lewisim.domain.env.entities import DatasetSplit, ObjectSpace
from lewisim.domain.env.services import ObjectSource
from lewisim.domain.metrics.entities import TopoSimEstimate
from lewisim.domain.metrics.services import topographic_similarity
from lewisim.schemas.run_config import RunConfig
from lewisim.services.probe_service import train_probe


@dataclass
class ListenerEvaluation:
	loss: float
	accuracy: float
	exact_accuracy: float
	speaker_entropy: Optional[float] = None


def score_listener(listener, messages: MessageBatch, attrs: np.ndarray) -> ListenerEvaluation:
	with no_grad():
		loss = float(-listener.log_likelihood(messages, attrs)[0].data.mean())
	predicted = listener.predict(messages)
	return ListenerEvaluation(
		loss=loss,
		accuracy=per_attribute_accuracy(predicted, attrs),
		exact_accuracy=exact_match_accuracy(predicted, attrs),
	)


def evaluate_listener(speaker, listener, space: ObjectSpace, indices: np.ndarray, rng: np.random.Generator) -> ListenerEvaluation:
	"""Loss and argmax accuracy of `listener` on one sampled message per object of `indices`."""
	attrs = space.decode(np.asarray(indices, dtype=np.int64))
	with no_grad():
		out = speaker.sample(attrs, rng)
	evaluation = score_listener(listener, out.messages, attrs)
	evaluation.speaker_entropy = float(np.mean(out.entropy.data))
	return evaluation


def evaluate_discrimination(
	speaker,
	listener,
	space: ObjectSpace,
	indices: np.ndarray,
	n_candidates: int,
	rng: np.random.Generator,
) -> ListenerEvaluation:
	"""InfoNCE loss and target-pick accuracy with distractors from the same split.

	A split smaller than the candidate count borrows distractors from the whole space.
	"""
	indices = np.asarray(indices, dtype=np.int64)
	pool = indices if indices.size >= n_candidates else np.arange(space.size)
	attrs = space.decode(indices)
	with no_grad():
		out = speaker.sample(attrs, rng)
		candidates, target_pos = draw_candidates(indices, pool, n_candidates, rng)
		log_probs, per_row = discrimination_forward(listener, out.messages, candidates, target_pos, space)
	hits = np.argmax(log_probs.data, axis=1) == target_pos
	accuracy = float(np.mean(hits))
	return ListenerEvaluation(
		loss=float(per_row.data.mean()),
		accuracy=accuracy,
		exact_accuracy=accuracy,
		speaker_entropy=float(np.mean(out.entropy.data)),
	)


def generalization_score(
	speaker,
	space: ObjectSpace,
	split: DatasetSplit,
	config: RunConfig,
	streams: RngStreams,
	index: int = 0,
) -> float:
	"""Test per-attribute accuracy of a fresh listener fitted on the train split.

	Early stopping watches a message batch drawn from the validation split.
	"""
	fit = train_probe(
		speaker,
		ObjectSource.from_indices(space, split.train),
		config,
		streams.generator("generalization_init", index),
		streams.generator("generalization_batches", index),
		val_source=ObjectSource.from_indices(space, split.val),
	)
	return evaluate_listener(speaker, fit.probe, space, split.test, streams.generator("generalization_eval", index)).accuracy


def toposim_of(speaker, space: ObjectSpace, config: RunConfig, rng: np.random.Generator) -> TopoSimEstimate:
	return topographic_similarity(
		speaker,
		space,
		rng,
		batch_size=config.evaluation.toposim_batch,
		repeats=config.evaluation.toposim_repeats,
	)

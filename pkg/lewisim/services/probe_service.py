"""
Probe listeners: a fresh listener fitted against a frozen speaker, used to estimate
the information and co-adaptation parts of a listener's loss.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from lewisim.autodiff.tensor import no_grad
from lewisim.core.errors import ContractViolation
from lewisim.core.logger import logger
from lewisim.core.rng import RngStreams
from lewisim.domain.agents.entities import MessageBatch
from lewisim.domain.env.entities import DatasetSplit, ObjectSpace
from lewisim.domain.env.services import ObjectSource
from lewisim.schemas.artifacts import ProbeReport
from lewisim.schemas.run_config import RunConfig
from lewisim.services.training.early_stopping import InnerLoopResult, fit_with_early_stopping
from lewisim.services.training.factory import build_probe_listener, make_optimizer
from lewisim.services.training.updates import listener_step

_CHUNK = 2048


@dataclass
class ProbeFit:
	probe: object
	result: InnerLoopResult


def validation_loss(listener, messages: MessageBatch, attrs: np.ndarray) -> float:
	"""-mean log rho(x|m) on a fixed batch, without recording."""
	with no_grad():
		return float(-listener.log_likelihood(messages, attrs)[0].data.mean())


def _sample_pairs(speaker, source: ObjectSource, n: int, rng: np.random.Generator) -> Tuple[np.ndarray, MessageBatch]:
	attrs = source.attributes(source.sample(n, rng))
	with no_grad():
		return attrs, speaker.sample(attrs, rng).messages


def train_probe(
	speaker,
	source: ObjectSource,
	config: RunConfig,
	init_rng: np.random.Generator,
	data_rng: np.random.Generator,
	val_source: Optional[ObjectSource] = None,
) -> ProbeFit:
	"""Fit a freshly initialised listener on (x, m ~ speaker(x)) with x from `source`.

	Early stopping watches a held-out slice drawn from `val_source`, or from the
	training source itself when none is given. The speaker must come out of this
	untouched.
	"""
	probe_cfg = config.probe
	before = speaker.parameter_hash()
	probe = build_probe_listener(config, init_rng)
	optimizer = make_optimizer(probe, config.listener, weight_decay=False)
	held_attrs, held_messages = _sample_pairs(speaker, val_source or source, probe_cfg.heldout_size, data_rng)

	def step() -> float:
		attrs, messages = _sample_pairs(speaker, source, config.batch_size, data_rng)
		return listener_step(probe, optimizer, messages, attrs)

	result = fit_with_early_stopping(
		probe,
		step,
		lambda: validation_loss(probe, held_messages, held_attrs),
		patience=probe_cfg.patience,
		min_delta=probe_cfg.min_delta,
		eval_every=probe_cfg.eval_every,
		max_updates=probe_cfg.max_updates,
	)
	if speaker.parameter_hash() != before:
		raise ContractViolation("speaker parameters changed while probing")
	logger.debug(f"probe stopped after {result.updates} updates ({result.stop_reason}), best val {result.best_val_loss:.4f}")
	return ProbeFit(probe=probe, result=result)


def _loglik_in_chunks(listener, messages: MessageBatch, attrs: np.ndarray) -> np.ndarray:
	out = np.empty(len(messages))
	with no_grad():
		for start in range(0, len(messages), _CHUNK):
			rows = np.arange(start, min(start + _CHUNK, len(messages)))
			out[rows] = listener.log_likelihood(messages.take(rows), attrs[rows])[0].data
	return out


def estimate_split(
	speaker, listener, probe, source: ObjectSource, n_samples: int, rng: np.random.Generator
) -> Tuple[float, float, float]:
	"""(info, adapt, total) on one distribution; both terms use the same samples."""
	attrs, messages = _sample_pairs(speaker, source, n_samples, rng)
	info = float(-_loglik_in_chunks(probe, messages, attrs).mean())
	total = float(-_loglik_in_chunks(listener, messages, attrs).mean())
	return info, total - info, total


def estimate_decomposition(
	speaker,
	listener,
	train_fit: ProbeFit,
	test_fit: ProbeFit,
	train_source: ObjectSource,
	test_source: ObjectSource,
	n_samples: int,
	rng: np.random.Generator,
	update: Optional[int] = None,
) -> ProbeReport:
	info_train, adapt_train, total_train = estimate_split(speaker, listener, train_fit.probe, train_source, n_samples, rng)
	info_test, adapt_test, total_test = estimate_split(speaker, listener, test_fit.probe, test_source, n_samples, rng)
	return ProbeReport(
		update=update,
		info_train=info_train,
		adapt_train=adapt_train,
		total_train=total_train,
		info_test=info_test,
		adapt_test=adapt_test,
		total_test=total_test,
		n_samples=n_samples,
		probe_updates_train=train_fit.result.updates,
		probe_updates_test=test_fit.result.updates,
		stop_reason_train=train_fit.result.stop_reason,
		stop_reason_test=test_fit.result.stop_reason,
		curve_train=train_fit.result.curve,
		curve_test=test_fit.result.curve,
	)


def probe_run(
	speaker,
	listener,
	space: ObjectSpace,
	split: DatasetSplit,
	config: RunConfig,
	streams: RngStreams,
	index: int = 0,
	update: Optional[int] = None,
) -> Tuple[ProbeReport, ProbeFit]:
	"""Train the train-split probe and the full-distribution probe, then estimate.

	The test probe is fitted on the whole object space, never on the test split.
	Returns the report and the train-split probe (reused by the alpha reward).
	"""
	train_source = ObjectSource.from_indices(space, split.train)
	train_fit = train_probe(
		speaker, train_source, config, streams.generator("probe_init", index, 0), streams.generator("probe_batches", index, 0)
	)
	test_fit = train_probe(
		speaker, ObjectSource.full(space), config, streams.generator("probe_init", index, 1), streams.generator("probe_batches", index, 1)
	)
	report = estimate_decomposition(
		speaker,
		listener,
		train_fit,
		test_fit,
		train_source,
		ObjectSource.from_indices(space, split.test),
		config.probe.n_samples,
		streams.generator("probe_estimate", index),
		update=update,
	)
	return report, train_fit

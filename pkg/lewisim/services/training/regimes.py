"""
Training session: alternates listener and speaker updates under one of the listener
regimes (continuous, partial reset, early-stopped reset) or the discrimination game,
and reports evaluation rows, probe estimates and checkpoints to a Recorder.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from lewisim.autodiff.tensor import no_grad
from lewisim.core.errors import ContractViolation, NumericFailure
from lewisim.core.logger import logger
from lewisim.core.rng import RngStreams
from lewisim.domain.agents.services import draw_candidates
from lewisim.domain.env.entities import DatasetSplit
from lewisim.domain.env.services import ObjectSource, sample_batch, split_dataset
from lewisim.domain.metrics.entities import TopoSimEstimate
from lewisim.schemas.artifacts import MetricsRow, ProbeReport, RegimeRow
from lewisim.schemas.run_config import EarlyStoppingRegime, PartialRegime, RunConfig
from lewisim.services.evaluation_service import (
	ListenerEvaluation,
	evaluate_discrimination,
	evaluate_listener,
	generalization_score,
	toposim_of,
)
from lewisim.services.probe_service import probe_run, train_probe, validation_loss
from lewisim.services.training.early_stopping import fit_with_early_stopping
from lewisim.services.training.factory import (
	architecture_of,
	build_listener,
	build_speaker,
	channel_of,
	make_optimizer,
	object_space_of,
)
from lewisim.services.training.recorder import Recorder
from lewisim.services.training.updates import (
	discrimination_reward,
	discrimination_step,
	listener_step,
	listener_update,
	reconstruction_reward,
	speaker_update,
)


@dataclass
class RegimeState:
	reinit_count: int = 0
	steps_since_reinit: int = 0
	listener_updates: int = 0
	last_inner_updates: Optional[int] = None
	best_val_loss: Optional[float] = None
	patience_counter: int = 0

	def __post_init__(self) -> None:
		self.check()

	def check(self) -> None:
		for name in ("reinit_count", "steps_since_reinit", "listener_updates", "patience_counter"):
			if getattr(self, name) < 0:
				raise ContractViolation(f"{name} went negative")


@dataclass
class RunResult:
	updates: int
	final_row: MetricsRow
	state: RegimeState
	acc_train: float
	acc_test: float
	best_val_accuracy: float
	last_probe: Optional[ProbeReport] = None
	toposim: Optional[TopoSimEstimate] = None
	generalization: Optional[float] = None


class TrainingSession:
	"""One run: owns both agents, their optimizers and every random stream."""

	def __init__(
		self,
		config: RunConfig,
		recorder: Recorder,
		streams: Optional[RngStreams] = None,
		split: Optional[DatasetSplit] = None,
	):
		self.config = config
		self.recorder = recorder
		self.streams = streams or RngStreams(config.seed)
		self.space = object_space_of(config)
		self.channel = channel_of(config)
		sizes = (config.split.train, config.split.val, config.split.test)
		self.split = split or split_dataset(self.space, sizes, self.streams.child_seed("env"))
		self.speaker = build_speaker(config, self.streams.generator("speaker_init"))
		self.speaker_optimizer = make_optimizer(self.speaker, config.speaker)
		self.state = RegimeState()
		self._reset_listener(0)
		self.sampling_rng = self.streams.generator("sampling")
		self.listener_sampling_rng = self.streams.generator("listener_sampling")
		self.listener_batch_rng = self.streams.generator("listener_batches")
		self.speaker_batch_rng = self.streams.generator("speaker_batches")
		self.eval_rng = self.streams.generator("eval")
		self.dropout_rng = self.streams.generator("dropout")
		self.candidate_rng = self.streams.generator("candidates")
		self._probe_index = 0
		self._reward_probe = None
		self._reward_probe_index = 0
		self.best_val_accuracy = -np.inf
		self.last_probe: Optional[ProbeReport] = None
		self.last_toposim: Optional[TopoSimEstimate] = None

	@property
	def discrimination(self) -> bool:
		return self.config.game.kind == "discrimination"

	def _reset_listener(self, index: int) -> None:
		self.listener = build_listener(self.config, self.streams.generator("listener_init", index))
		self.listener_optimizer = make_optimizer(self.listener, self.config.listener)

	def _reinitialize_listener(self) -> None:
		self.state.reinit_count += 1
		self.state.steps_since_reinit = 0
		self._reset_listener(self.state.reinit_count)

	def _train_listener_once(self) -> None:
		listener_update(
			self.listener,
			self.listener_optimizer,
			self.speaker,
			self.space,
			self.split.train,
			self.config.batch_size,
			self.listener_batch_rng,
			self.listener_sampling_rng,
			self.dropout_rng,
		)
		self.state.listener_updates += 1
		self.state.steps_since_reinit += 1

	# listener phases, one per regime

	def _continuous_phase(self, attrs: np.ndarray) -> None:
		with no_grad():
			messages = self.speaker.sample(attrs, self.listener_sampling_rng).messages
		listener_step(self.listener, self.listener_optimizer, messages, attrs, self.dropout_rng)
		self.state.listener_updates += 1
		self.state.steps_since_reinit += 1

	def _partial_phase(self, n_step: int) -> None:
		self._reinitialize_listener()
		for _ in range(n_step):
			self._train_listener_once()
		self.state.last_inner_updates = n_step

	def _early_stopping_phase(self, regime: EarlyStoppingRegime) -> None:
		self._reinitialize_listener()
		val_attrs = self.space.decode(self.split.val)
		with no_grad():
			val_messages = self.speaker.sample(val_attrs, self.streams.generator("listener_val", self.state.reinit_count)).messages
		result = fit_with_early_stopping(
			self.listener,
			self._train_listener_once,
			lambda: validation_loss(self.listener, val_messages, val_attrs),
			patience=regime.patience,
			min_delta=regime.min_delta,
			eval_every=regime.eval_every,
			max_updates=regime.max_inner_updates,
		)
		self.state.last_inner_updates = result.updates
		self.state.best_val_loss = result.best_val_loss
		self.state.patience_counter = result.bad_evaluations
		logger.debug(f"inner loop {self.state.reinit_count}: {result.updates} updates ({result.stop_reason})")

	def _discrimination_phase(self, indices: np.ndarray, attrs: np.ndarray) -> None:
		with no_grad():
			messages = self.speaker.sample(attrs, self.listener_sampling_rng).messages
		candidates, target_pos = draw_candidates(indices, self.split.train, self.config.game.n_candidates, self.candidate_rng)
		discrimination_step(self.listener, self.listener_optimizer, messages, candidates, target_pos, self.space, self.dropout_rng)
		self.state.listener_updates += 1
		self.state.steps_since_reinit += 1

	# speaker side

	def _refresh_reward_probe(self, update: int) -> None:
		if self.config.alpha == 0.5 or self.discrimination:
			return
		if self._reward_probe is not None and update % self.config.alpha_probe_every != 0:
			return
		fit = train_probe(
			self.speaker,
			ObjectSource.from_indices(self.space, self.split.train),
			self.config,
			self.streams.generator("reward_probe_init", self._reward_probe_index),
			self.streams.generator("reward_probe_batches", self._reward_probe_index),
		)
		self._reward_probe = fit.probe
		self._reward_probe_index += 1

	def _speaker_phase(self, update: int, indices: np.ndarray, attrs: np.ndarray) -> None:
		if self.discrimination:
			reward = discrimination_reward(
				self.listener, indices, self.split.train, self.config.game.n_candidates, self.space, self.candidate_rng
			)
		else:
			self._refresh_reward_probe(update)
			reward = reconstruction_reward(self.listener, self._reward_probe, self.config.alpha)
		speaker_update(
			self.speaker,
			self.speaker_optimizer,
			attrs,
			reward,
			self.config.entropy_coef,
			self.sampling_rng,
			self.dropout_rng,
		)

	def _update(self, update: int) -> None:
		indices = sample_batch(self.split.train, self.config.batch_size, self.speaker_batch_rng)
		attrs = self.space.decode(indices)
		regime = self.config.regime
		if self.discrimination:
			self._discrimination_phase(indices, attrs)
		elif isinstance(regime, PartialRegime):
			self._partial_phase(regime.n_step)
		elif isinstance(regime, EarlyStoppingRegime):
			self._early_stopping_phase(regime)
		else:
			self._continuous_phase(attrs)
		self._speaker_phase(update, indices, attrs)
		self.state.check()

	# evaluation

	def _evaluate(self, indices: np.ndarray) -> ListenerEvaluation:
		if self.discrimination:
			return evaluate_discrimination(
				self.speaker, self.listener, self.space, indices, self.config.game.n_candidates, self.eval_rng
			)
		return evaluate_listener(self.speaker, self.listener, self.space, indices, self.eval_rng)

	def _checkpoint_meta(self, update: int) -> dict:
		return {**architecture_of(self.config), "config_hash": self.config.config_hash(), "update": update}

	def _probe_due(self, update: int, final: bool) -> bool:
		return self.config.probe.enabled and not self.discrimination and (final or update % self.config.probe.every == 0) and update > 0

	def _record(self, update: int, final: bool = False) -> MetricsRow:
		train = self._evaluate(self.split.train)
		test = self._evaluate(self.split.test)
		val = self._evaluate(self.split.val)
		row = MetricsRow(
			update=update,
			split_loss_train=train.loss,
			split_loss_test=test.loss,
			acc_train=train.accuracy,
			acc_test=test.accuracy,
			speaker_entropy=train.speaker_entropy,
		)
		if self._probe_due(update, final):
			report, _ = probe_run(
				self.speaker, self.listener, self.space, self.split, self.config, self.streams, self._probe_index, update
			)
			self._probe_index += 1
			self.last_probe = report
			self.recorder.record_probe(report)
			row.info_train, row.info_test = report.info_train, report.info_test
			row.adapt_train, row.adapt_test = report.adapt_train, report.adapt_test
			logger.info(
				f"probe @{update}: info train/test {report.info_train:.4f}/{report.info_test:.4f}, "
				f"adapt train/test {report.adapt_train:.4f}/{report.adapt_test:.4f}"
			)
		if final or (self.config.evaluation.toposim_every_probe and update > 0 and update % self.config.probe.every == 0):
			self.last_toposim = toposim_of(self.speaker, self.space, self.config, self.streams.generator("toposim", update))
			row.toposim = None if self.last_toposim.undefined else self.last_toposim.mean
		self.recorder.record_metrics(row)
		self.recorder.record_regime(
			RegimeRow(
				update=update,
				listener_updates=self.state.listener_updates,
				reinit_count=self.state.reinit_count,
				inner_updates=self.state.last_inner_updates,
				best_val_loss=self.state.best_val_loss,
				exact_acc_train=train.exact_accuracy,
				exact_acc_test=test.exact_accuracy,
				acc_val=val.accuracy,
			)
		)
		if val.accuracy > self.best_val_accuracy:
			self.best_val_accuracy = val.accuracy
			self.recorder.save_checkpoint("best", self.speaker, self.listener, self._checkpoint_meta(update))
		logger.debug(f"eval @{update}: loss {train.loss:.4f}/{test.loss:.4f} acc {train.accuracy:.4f}/{test.accuracy:.4f}")
		return row

	def run(self) -> RunResult:
		total = self.config.max_speaker_updates
		every = self.config.evaluation.eval_every
		update = 0
		try:
			self._record(0)
			for update in range(1, total + 1):
				self._update(update)
				if update % every == 0 and update != total:
					self._record(update)
			final_row = self._record(total, final=True)
		except NumericFailure as exc:
			raise exc.at_update(update)
		self.recorder.save_checkpoint("final", self.speaker, self.listener, self._checkpoint_meta(total))
		generalization = None
		if self.config.evaluation.final_generalization:
			generalization = generalization_score(self.speaker, self.space, self.split, self.config, self.streams)
		return RunResult(
			updates=total,
			final_row=final_row,
			state=self.state,
			acc_train=final_row.acc_train,
			acc_test=final_row.acc_test,
			best_val_accuracy=float(self.best_val_accuracy),
			last_probe=self.last_probe,
			toposim=self.last_toposim,
			generalization=generalization,
		)


def run_continuous(config: RunConfig, recorder: Recorder, streams: Optional[RngStreams] = None, split: Optional[DatasetSplit] = None) -> RunResult:
	if config.regime.kind != "continuous" or config.game.kind != "reconstruction":
		raise ContractViolation("run_continuous needs a continuous reconstruction config")
	return TrainingSession(config, recorder, streams, split).run()


def run_partial(config: RunConfig, recorder: Recorder, streams: Optional[RngStreams] = None, split: Optional[DatasetSplit] = None) -> RunResult:
	if not isinstance(config.regime, PartialRegime):
		raise ContractViolation("run_partial needs a partial regime")
	return TrainingSession(config, recorder, streams, split).run()


def run_early_stopping(config: RunConfig, recorder: Recorder, streams: Optional[RngStreams] = None, split: Optional[DatasetSplit] = None) -> RunResult:
	if not isinstance(config.regime, EarlyStoppingRegime):
		raise ContractViolation("run_early_stopping needs an early_stopping regime")
	return TrainingSession(config, recorder, streams, split).run()


def run_discrimination(config: RunConfig, recorder: Recorder, streams: Optional[RngStreams] = None, split: Optional[DatasetSplit] = None) -> RunResult:
	if config.game.kind != "discrimination":
		raise ContractViolation("run_discrimination needs a discrimination game config")
	return TrainingSession(config, recorder, streams, split).run()


def run_training(config: RunConfig, recorder: Recorder, streams: Optional[RngStreams] = None, split: Optional[DatasetSplit] = None) -> RunResult:
	"""Dispatch on game kind, then on regime kind."""
	if config.game.kind == "discrimination":
		return run_discrimination(config, recorder, streams, split)
	runners = {"continuous": run_continuous, "partial": run_partial, "early_stopping": run_early_stopping}
	return runners[config.regime.kind](config, recorder, streams, split)

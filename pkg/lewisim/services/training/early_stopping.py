from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np


@dataclass
class EarlyStopper:
	"""Patience counter over periodic validation losses.

	The best parameters are refreshed on any strict improvement; the patience counter
	only resets when the improvement exceeds `min_delta`. Stops exactly when
	`patience` consecutive evaluations fail to improve by `min_delta`.
	"""

	patience: int
	min_delta: float
	best_loss: float = float("inf")
	best_step: int = -1
	best_state: Optional[Dict[str, np.ndarray]] = None
	bad_evaluations: int = 0
	curve: List[Tuple[int, float]] = field(default_factory=list)

	def observe(self, step: int, loss: float, snapshot: Callable[[], Dict[str, np.ndarray]]) -> bool:
		self.curve.append((step, float(loss)))
		if loss < self.best_loss:
			enough = loss < self.best_loss - self.min_delta
			self.best_loss, self.best_step = float(loss), step
			self.best_state = snapshot()
			self.bad_evaluations = 0 if enough else self.bad_evaluations + 1
		else:
			self.bad_evaluations += 1
		return self.bad_evaluations >= self.patience

	@property
	def exhausted(self) -> bool:
		return self.bad_evaluations >= self.patience


@dataclass
class InnerLoopResult:
	updates: int
	stop_reason: str
	best_val_loss: float
	best_step: int
	bad_evaluations: int
	curve: List[Tuple[int, float]]


def fit_with_early_stopping(
	module,
	step_fn: Callable[[], float],
	val_loss_fn: Callable[[], float],
	patience: int,
	min_delta: float,
	eval_every: int,
	max_updates: int,
) -> InnerLoopResult:
	"""Run `step_fn` until validation stalls or `max_updates`, then restore the best weights.

	The untrained module is evaluated first, so the restored state is never worse on
	validation than the starting point.
	"""
	stopper = EarlyStopper(patience=patience, min_delta=min_delta)
	stopper.observe(0, val_loss_fn(), module.state_dict)
	updates, reason = 0, "max_updates"
	while updates < max_updates:
		step_fn()
		updates += 1
		if updates % eval_every == 0 and stopper.observe(updates, val_loss_fn(), module.state_dict):
			reason = "patience"
			break
	if reason == "max_updates" and updates % eval_every != 0:
		stopper.observe(updates, val_loss_fn(), module.state_dict)
	module.load_state_dict(stopper.best_state)
	return InnerLoopResult(
		updates=updates,
		stop_reason=reason,
		best_val_loss=stopper.best_loss,
		best_step=stopper.best_step,
		bad_evaluations=stopper.bad_evaluations,
		curve=list(stopper.curve),
	)

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict

import numpy as np

from lewisim.autodiff.tensor import Tape, Tensor, no_grad


@dataclass
class GradCheckReport:
	max_rel_error: float
	per_parameter: Dict[str, float] = field(default_factory=dict)

	def passed(self, tolerance: float) -> bool:
		return self.max_rel_error < tolerance


def relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = 1e-8) -> float:
	"""Largest elementwise |a - n| / max(|a|, |n|, floor); 0 for empty tensors."""
	analytic, numeric = np.asarray(analytic, dtype=np.float64), np.asarray(numeric, dtype=np.float64)
	if analytic.size == 0:
		return 0.0
	scale = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)
	return float(np.max(np.abs(analytic - numeric) / scale))


def grad_check(fn: Callable[[], Tensor], params: Dict[str, Tensor], h: float = 1e-4) -> GradCheckReport:
	"""Compare tape gradients of the scalar `fn()` with central differences.

	`fn` must be deterministic: it is re-evaluated twice per parameter element.
	"""
	with Tape() as tape:
		loss = fn()
	tape.backward(loss, params.values())
	analytic = {k: p.grad.copy() for k, p in params.items()}

	per_parameter: Dict[str, float] = {}
	with no_grad():
		for name, p in params.items():
			numeric = np.zeros_like(p.data)
			flat, num_flat = p.data.reshape(-1), numeric.reshape(-1)
			for i in range(flat.size):
				orig = flat[i]
				flat[i] = orig + h
				plus = float(fn().data)
				flat[i] = orig - h
				minus = float(fn().data)
				flat[i] = orig
				num_flat[i] = (plus - minus) / (2.0 * h)
			per_parameter[name] = relative_error(analytic[name], numeric)
	worst = max(per_parameter.values()) if per_parameter else 0.0
	return GradCheckReport(max_rel_error=worst, per_parameter=per_parameter)

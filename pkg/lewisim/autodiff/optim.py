#adam optimizer with bias correction and decoupled weight decay
#moments live in AdamState so a run can inspect or checkpoint them
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

from lewisim.autodiff.tensor import Tensor
from lewisim.core.errors import ContractViolation


@dataclass
class AdamState:
	lr: float = 5e-4
	beta1: float = 0.9
	beta2: float = 0.999
	eps: float = 1e-8
	weight_decay: float = 0.0
	t: int = 0
	m: Dict[str, np.ndarray] = field(default_factory=dict)
	v: Dict[str, np.ndarray] = field(default_factory=dict)

	def __post_init__(self) -> None:
		if self.lr <= 0:
			raise ContractViolation("Adam learning rate must be > 0")
		if self.t < 0:
			raise ContractViolation("Adam step counter must be >= 0")


def adam_step(params: Dict[str, np.ndarray], grads: Dict[str, np.ndarray], state: AdamState) -> None:
	"""One bias-corrected Adam update, in place on `params` and `state`.

	Weight decay is decoupled: p <- p - lr * wd * p, applied before the moment update.
	"""
	for k, p in params.items():
		if k not in grads or grads[k].shape != p.shape:
			got = None if k not in grads else grads[k].shape
			raise ContractViolation(f"gradient shape mismatch for {k}: {got} vs {p.shape}")
	state.t += 1
	bc1 = 1.0 - state.beta1 ** state.t
	bc2 = 1.0 - state.beta2 ** state.t
	for k, p in params.items():
		g = grads[k]
		if k not in state.m:
			state.m[k] = np.zeros_like(p)
			state.v[k] = np.zeros_like(p)
		m, v = state.m[k], state.v[k]
		m *= state.beta1
		m += (1.0 - state.beta1) * g
		v *= state.beta2
		v += (1.0 - state.beta2) * (g * g)
		if state.weight_decay:
			p -= state.lr * state.weight_decay * p
		p -= state.lr * (m / bc1) / (np.sqrt(v / bc2) + state.eps)


class Adam:
	"""Adam over a named set of parameter tensors; reads `.grad` of each."""

	def __init__(
		self,
		params: Dict[str, Tensor],
		lr: float = 5e-4,
		beta1: float = 0.9,
		beta2: float = 0.999,
		eps: float = 1e-8,
		weight_decay: float = 0.0,
	):
		self.params = params
		self.state = AdamState(lr=lr, beta1=beta1, beta2=beta2, eps=eps, weight_decay=weight_decay)

	def zero_grad(self) -> None:
		for p in self.params.values():
			p.zero_grad()

	def step(self, grads: Optional[Dict[str, np.ndarray]] = None) -> None:
		if grads is None:
			grads = {k: (p.grad if p.grad is not None else np.zeros_like(p.data)) for k, p in self.params.items()}
		adam_step({k: p.data for k, p in self.params.items()}, grads, self.state)

from __future__ import annotations

import hashlib
from typing import Dict, Iterator, Optional, Tuple

import numpy as np

from lewisim.autodiff import ops
from lewisim.autodiff.tensor import Tensor, parameter
from lewisim.core.errors import ContractViolation


def uniform_init(rng: np.random.Generator, fan_in: int, shape: Tuple[int, ...]) -> np.ndarray:
	"""uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)), the default for every weight matrix."""
	bound = 1.0 / np.sqrt(max(1, fan_in))
	return rng.uniform(-bound, bound, size=shape)


class Module:
	"""Container of named parameters and sub-modules.

	Parameter names follow attribute assignment order, so `parameters()` is
	deterministic and doubles as the checkpoint key layout.
	"""

	training: bool = True

	def named_children(self) -> Iterator[Tuple[str, "Module"]]:
		for name, value in vars(self).items():
			if isinstance(value, Module):
				yield name, value
			elif isinstance(value, list):
				for i, item in enumerate(value):
					if isinstance(item, Module):
						yield f"{name}.{i}", item

	def parameters(self) -> Dict[str, Tensor]:
		params: Dict[str, Tensor] = {}
		for name, value in vars(self).items():
			if isinstance(value, Tensor) and value.requires_grad:
				params[name] = value
		for child_name, child in self.named_children():
			for name, p in child.parameters().items():
				params[f"{child_name}.{name}"] = p
		return params

	def train(self, mode: bool = True) -> "Module":
		self.training = mode
		for _, child in self.named_children():
			child.train(mode)
		return self

	def eval(self) -> "Module":
		return self.train(False)

	def state_dict(self) -> Dict[str, np.ndarray]:
		return {k: p.data.copy() for k, p in self.parameters().items()}

	def load_state_dict(self, state: Dict[str, np.ndarray]) -> None:
		params = self.parameters()
		missing = sorted(set(params) - set(state))
		if missing:
			raise ContractViolation(f"state is missing parameters: {missing}")
		for k, p in params.items():
			value = np.asarray(state[k], dtype=np.float64)
			if value.shape != p.shape:
				raise ContractViolation(f"shape mismatch for {k}: {value.shape} vs {p.shape}")
			p.data = value.copy()

	def parameter_hash(self) -> str:
		"""SHA256 over names, shapes and raw bytes of all parameters."""
		digest = hashlib.sha256()
		for name, p in self.parameters().items():
			digest.update(name.encode("utf-8"))
			digest.update(str(p.shape).encode("utf-8"))
			digest.update(np.ascontiguousarray(p.data).tobytes())
		return digest.hexdigest()

	def num_parameters(self) -> int:
		return int(sum(p.size for p in self.parameters().values()))


class Linear(Module):
	def __init__(self, in_features: int, out_features: int, rng: np.random.Generator, bias: bool = True):
		self.in_features, self.out_features = in_features, out_features
		self.weight = parameter(uniform_init(rng, in_features, (in_features, out_features)), "weight")
		self.bias = parameter(np.zeros(out_features), "bias") if bias else None

	def __call__(self, x: Tensor) -> Tensor:
		if x.shape[-1] != self.in_features:
			raise ContractViolation(f"Linear expects last dim {self.in_features}, got {x.shape}")
		out = x @ self.weight
		return out + self.bias if self.bias is not None else out


class Embedding(Module):
	def __init__(self, num_embeddings: int, dim: int, rng: np.random.Generator):
		self.num_embeddings, self.dim = num_embeddings, dim
		# a lookup is a linear map of a one-hot input, so fan_in is the table size
		self.weight = parameter(uniform_init(rng, num_embeddings, (num_embeddings, dim)), "weight")

	def __call__(self, index: np.ndarray) -> Tensor:
		return ops.embedding(self.weight, index)


class LayerNorm(Module):
	def __init__(self, size: int):
		self.size = size
		self.gain = parameter(np.ones(size), "gain")
		self.bias = parameter(np.zeros(size), "bias")

	def __call__(self, x: Tensor) -> Tensor:
		return ops.layer_norm(x, self.gain, self.bias)


class LSTMCell(Module):
	"""LSTM cell with optional layer normalization.

	When enabled, layer norm is applied separately to the input-to-hidden and the
	hidden-to-hidden pre-activations (each 4H wide) before they are summed with the
	gate bias. Gate order inside the 4H block: input, forget, cell, output.
	"""

	def __init__(self, input_size: int, hidden_size: int, rng: np.random.Generator, layer_norm: bool = True):
		self.input_size, self.hidden_size = input_size, hidden_size
		self.use_layer_norm = layer_norm
		self.weight_ih = parameter(uniform_init(rng, input_size, (input_size, 4 * hidden_size)), "weight_ih")
		self.weight_hh = parameter(uniform_init(rng, hidden_size, (hidden_size, 4 * hidden_size)), "weight_hh")
		self.bias = parameter(np.zeros(4 * hidden_size), "bias")
		if layer_norm:
			self.ln_ih = LayerNorm(4 * hidden_size)
			self.ln_hh = LayerNorm(4 * hidden_size)

	def zero_state(self, batch: int) -> Tuple[Tensor, Tensor]:
		return Tensor(np.zeros((batch, self.hidden_size))), Tensor(np.zeros((batch, self.hidden_size)))

	def __call__(self, x: Tensor, state: Tuple[Tensor, Tensor]) -> Tuple[Tensor, Tensor]:
		h, c = state
		H = self.hidden_size
		if x.shape[-1] != self.input_size:
			raise ContractViolation(f"LSTM input dim {x.shape[-1]} != {self.input_size}")
		if h.shape[-1] != H or c.shape[-1] != H:
			raise ContractViolation(f"LSTM state dims {h.shape}/{c.shape} != hidden size {H}")
		ih = x @ self.weight_ih
		hh = h @ self.weight_hh
		if self.use_layer_norm:
			ih, hh = self.ln_ih(ih), self.ln_hh(hh)
		pre = ih + hh + self.bias
		i = ops.sigmoid(pre[..., 0:H])
		f = ops.sigmoid(pre[..., H:2 * H])
		g = ops.tanh(pre[..., 2 * H:3 * H])
		o = ops.sigmoid(pre[..., 3 * H:4 * H])
		c_next = f * c + i * g
		h_next = o * ops.tanh(c_next)
		return h_next, c_next


def dropout_mask(shape: Tuple[int, ...], rate: float, rng: Optional[np.random.Generator]) -> Optional[np.ndarray]:
	"""Inverted-dropout mask, or None when dropout is inactive."""
	if rate <= 0.0 or rng is None:
		return None
	if rate >= 1.0:
		raise ContractViolation("dropout rate must be < 1")
	return (rng.random(shape) >= rate).astype(np.float64) / (1.0 - rate)


def apply_dropout(x: Tensor, rate: float, rng: Optional[np.random.Generator]) -> Tensor:
	mask = dropout_mask(x.shape, rate, rng)
	return x if mask is None else x * Tensor(mask)


from __future__ import annotations

from typing import Any, Optional, Sequence, Tuple

import numpy as np

from lewisim.autodiff.tensor import Function, Tensor
from lewisim.core.errors import ContractViolation

LN_EPS = 1e-5


def _unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
	"""Sum `grad` down to `shape` after numpy broadcasting."""
	while grad.ndim > len(shape):
		grad = grad.sum(axis=0)
	for axis, size in enumerate(shape):
		if size == 1 and grad.shape[axis] != 1:
			grad = grad.sum(axis=axis, keepdims=True)
	return grad.reshape(shape)


class Add(Function):
	op_name = "add"

	def forward(self, a, b):
		self.shapes = (a.shape, b.shape)
		return a + b

	def backward(self, grad):
		return _unbroadcast(grad, self.shapes[0]), _unbroadcast(grad, self.shapes[1])


class Sub(Function):
	op_name = "sub"

	def forward(self, a, b):
		self.shapes = (a.shape, b.shape)
		return a - b

	def backward(self, grad):
		return _unbroadcast(grad, self.shapes[0]), _unbroadcast(-grad, self.shapes[1])


class Mul(Function):
	op_name = "mul"

	def forward(self, a, b):
		self.a, self.b = a, b
		return a * b

	def backward(self, grad):
		return _unbroadcast(grad * self.b, self.a.shape), _unbroadcast(grad * self.a, self.b.shape)


class Neg(Function):
	op_name = "neg"

	def forward(self, a):
		return -a

	def backward(self, grad):
		return (-grad,)


class MatMul(Function):
	op_name = "matmul"

	def forward(self, a, b):
		if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
			raise ContractViolation(f"matmul shape mismatch {a.shape} @ {b.shape}")
		self.a, self.b = a, b
		return a @ b

	def backward(self, grad):
		return grad @ self.b.T, self.a.T @ grad


class Sigmoid(Function):
	op_name = "sigmoid"

	def forward(self, a):
		# split by sign so exp never overflows
		out = np.empty_like(a)
		pos = a >= 0
		out[pos] = 1.0 / (1.0 + np.exp(-a[pos]))
		ea = np.exp(a[~pos])
		out[~pos] = ea / (1.0 + ea)
		self.out = out
		return out

	def backward(self, grad):
		return (grad * self.out * (1.0 - self.out),)


class Tanh(Function):
	op_name = "tanh"

	def forward(self, a):
		self.out = np.tanh(a)
		return self.out

	def backward(self, grad):
		return (grad * (1.0 - self.out * self.out),)


class Exp(Function):
	op_name = "exp"

	def forward(self, a):
		self.out = np.exp(a)
		return self.out

	def backward(self, grad):
		return (grad * self.out,)


class Sum(Function):
	op_name = "sum"

	def forward(self, a, axis: Optional[int] = None):
		self.shape, self.axis = a.shape, axis
		return np.sum(a, axis=axis)

	def backward(self, grad):
		if self.axis is None:
			return (np.broadcast_to(grad, self.shape).copy(),)
		return (np.broadcast_to(np.expand_dims(grad, self.axis), self.shape).copy(),)


class Reshape(Function):
	op_name = "reshape"

	def forward(self, a, shape: Tuple[int, ...] = ()):
		self.shape = a.shape
		return a.reshape(shape)

	def backward(self, grad):
		return (grad.reshape(self.shape),)


class BroadcastTo(Function):
	op_name = "broadcast_to"

	def forward(self, a, shape: Tuple[int, ...] = ()):
		self.shape = a.shape
		return np.broadcast_to(a, shape).copy()

	def backward(self, grad):
		return (_unbroadcast(grad, self.shape),)


class GetItem(Function):
	op_name = "getitem"

	def forward(self, a, key: Any = None):
		self.shape, self.key = a.shape, key
		return a[key]

	def backward(self, grad):
		out = np.zeros(self.shape)
		keys = self.key if isinstance(self.key, tuple) else (self.key,)
		if all(k is Ellipsis or isinstance(k, (slice, int, np.integer)) for k in keys):
			out[self.key] = grad
		else:
			np.add.at(out, self.key, grad)
		return (out,)


class Stack(Function):
	"""Stack equally-shaped tensors along a new trailing axis."""

	op_name = "stack"

	def forward(self, *arrays):
		return np.stack(arrays, axis=-1)

	def backward(self, grad):
		return tuple(grad[..., i] for i in range(grad.shape[-1]))


class Gather(Function):
	"""out[b] = a[b, index[b]] for a 2-D `a`."""

	op_name = "gather"

	def forward(self, a, index: Optional[np.ndarray] = None):
		self.shape, self.index = a.shape, index
		return a[np.arange(a.shape[0]), index]

	def backward(self, grad):
		out = np.zeros(self.shape)
		out[np.arange(self.shape[0]), self.index] = grad
		return (out,)


class EmbeddingLookup(Function):
	op_name = "embedding"

	def forward(self, weight, index: Optional[np.ndarray] = None):
		self.shape, self.index = weight.shape, index
		return weight[index]

	def backward(self, grad):
		out = np.zeros(self.shape)
		np.add.at(out, self.index, grad)
		return (out,)


class LogSoftmax(Function):
	op_name = "log_softmax"

	def forward(self, a):
		shifted = a - np.max(a, axis=-1, keepdims=True)
		self.out = shifted - np.log(np.sum(np.exp(shifted), axis=-1, keepdims=True))
		return self.out

	def backward(self, grad):
		return (grad - np.exp(self.out) * np.sum(grad, axis=-1, keepdims=True),)


class LayerNorm(Function):
	"""gain * (x - mean) / sqrt(var + eps) + bias over the last axis."""

	op_name = "layer_norm"

	def forward(self, x, gain, bias, eps: float = LN_EPS):
		mu = np.mean(x, axis=-1, keepdims=True)
		centered = x - mu
		var = np.mean(centered * centered, axis=-1, keepdims=True)
		self.inv_std = 1.0 / np.sqrt(var + eps)
		self.xhat = centered * self.inv_std
		self.gain = gain
		self.x_shape, self.gain_shape = x.shape, gain.shape
		return gain * self.xhat + bias

	def backward(self, grad):
		n = self.xhat.shape[-1]
		dxhat = grad * self.gain
		dx = (self.inv_std / n) * (
			n * dxhat
			- np.sum(dxhat, axis=-1, keepdims=True)
			- self.xhat * np.sum(dxhat * self.xhat, axis=-1, keepdims=True)
		)
		dgain = _unbroadcast(grad * self.xhat, self.gain_shape)
		dbias = _unbroadcast(grad, self.gain_shape)
		return dx, dgain, dbias


class BatchedDot(Function):
	"""scores[b, c] = <a[b], cands[b, c]>."""

	op_name = "batched_dot"

	def forward(self, a, cands):
		self.a, self.cands = a, cands
		return np.einsum("bd,bcd->bc", a, cands)

	def backward(self, grad):
		return np.einsum("bc,bcd->bd", grad, self.cands), grad[:, :, None] * self.a[:, None, :]


def add(a: Tensor, b: Tensor) -> Tensor: return Add.apply(a, b)
def sub(a: Tensor, b: Tensor) -> Tensor: return Sub.apply(a, b)
def mul(a: Tensor, b: Tensor) -> Tensor: return Mul.apply(a, b)
def neg(a: Tensor) -> Tensor: return Neg.apply(a)
def matmul(a: Tensor, b: Tensor) -> Tensor: return MatMul.apply(a, b)
def sigmoid(a: Tensor) -> Tensor: return Sigmoid.apply(a)
def tanh(a: Tensor) -> Tensor: return Tanh.apply(a)
def exp(a: Tensor) -> Tensor: return Exp.apply(a)
def log_softmax(a: Tensor) -> Tensor: return LogSoftmax.apply(a)
def reshape(a: Tensor, shape: Sequence[int]) -> Tensor: return Reshape.apply(a, shape=tuple(shape))
def broadcast_to(a: Tensor, shape: Sequence[int]) -> Tensor: return BroadcastTo.apply(a, shape=tuple(shape))
def getitem(a: Tensor, key: Any) -> Tensor: return GetItem.apply(a, key=key)
def batched_dot(a: Tensor, cands: Tensor) -> Tensor: return BatchedDot.apply(a, cands)


def sum(a: Tensor, axis: Optional[int] = None) -> Tensor:  # noqa: A001
	return Sum.apply(a, axis=axis)


def mean(a: Tensor, axis: Optional[int] = None) -> Tensor:
	count = a.size if axis is None else a.shape[axis]
	return Sum.apply(a, axis=axis) * (1.0 / count)


def stack(tensors: Sequence[Tensor]) -> Tensor:
	if not tensors:
		raise ContractViolation("stack needs at least one tensor")
	return Stack.apply(*tensors)


def gather(a: Tensor, index: np.ndarray) -> Tensor:
	index = np.asarray(index, dtype=np.int64)
	if a.ndim != 2 or index.shape != (a.shape[0],):
		raise ContractViolation(f"gather expects (B, n) and (B,), got {a.shape} and {index.shape}")
	if index.size and (index.min() < 0 or index.max() >= a.shape[1]):
		raise ContractViolation(f"gather index out of range [0, {a.shape[1]})")
	return Gather.apply(a, index=index)


def embedding(weight: Tensor, index: np.ndarray) -> Tensor:
	index = np.asarray(index, dtype=np.int64)
	if index.size and (index.min() < 0 or index.max() >= weight.shape[0]):
		raise ContractViolation(f"embedding index out of range [0, {weight.shape[0]})")
	return EmbeddingLookup.apply(weight, index=index)


def layer_norm(x: Tensor, gain: Tensor, bias: Tensor, eps: float = LN_EPS) -> Tensor:
	n = x.shape[-1]
	if n < 1 or gain.shape != (n,) or bias.shape != (n,):
		raise ContractViolation(f"layer_norm expects gain/bias of shape ({n},), got {gain.shape}/{bias.shape}")
	return LayerNorm.apply(x, gain, bias, eps=eps)


def entropy_from_log_probs(log_probs: Tensor) -> Tensor:
	"""Per-row entropy in nats of a row-normalised log-probability tensor."""
	return -(exp(log_probs) * log_probs).sum(axis=-1)


def log_softmax_cross_entropy(logits: Tensor, target: Any) -> Tuple[Tensor, Tensor]:
	"""Return (-log softmax(logits)[target], log_softmax(logits)).

	Accepts a single logit vector with an integer target, or a (B, n) batch with a
	(B,) target array; the loss has shape () or (B,) accordingly.
	"""
	n = logits.shape[-1]
	target_arr = np.asarray(target, dtype=np.int64)
	if np.any(target_arr < 0) or np.any(target_arr >= n):
		raise ContractViolation(f"target out of range [0, {n})")
	if logits.ndim == 1:
		if target_arr.ndim != 0:
			raise ContractViolation("a single logit vector takes a scalar target")
		log_probs = log_softmax(logits)
		return -log_probs[int(target_arr)], log_probs
	log_probs = log_softmax(logits)
	return -gather(log_probs, target_arr), log_probs


def softmax_array(logits: np.ndarray) -> np.ndarray:
	shifted = logits - np.max(logits, axis=-1, keepdims=True)
	e = np.exp(shifted)
	return e / np.sum(e, axis=-1, keepdims=True)

"""
Dense float64 tensors with tape-based reverse-mode differentiation.

Operations applied while a Tape is active (and touching at least one tensor that
requires a gradient) are appended to that tape in execution order, so the tape is
topologically ordered by construction. Outside a tape every operation is a plain
numpy evaluation.
"""
from __future__ import annotations

from contextlib import contextmanager
from contextvars import ContextVar
from dataclasses import dataclass
from typing import Any, Dict, Iterable, Iterator, List, Optional, Tuple

import numpy as np

from lewisim.core.errors import ContractViolation, NumericFailure

_active_tape: ContextVar[Optional["Tape"]] = ContextVar("lewisim_active_tape", default=None)


class Tensor:
	"""A float64 array, an optional gradient, and its position on the active tape."""

	__slots__ = ("data", "grad", "requires_grad", "node_id", "name")

	def __init__(self, data: Any, requires_grad: bool = False, name: Optional[str] = None):
		self.data = np.array(data, dtype=np.float64)
		self.grad: Optional[np.ndarray] = None
		self.requires_grad = bool(requires_grad)
		self.node_id: Optional[int] = None
		self.name = name

	def __repr__(self) -> str:
		label = f" {self.name}" if self.name else ""
		return f"<Tensor{label} shape={self.shape} requires_grad={self.requires_grad}>"

	@property
	def shape(self) -> Tuple[int, ...]:
		return self.data.shape

	@property
	def size(self) -> int:
		return int(self.data.size)

	@property
	def ndim(self) -> int:
		return self.data.ndim

	def item(self) -> float:
		return float(self.data.reshape(-1)[0]) if self.data.size == 1 else float("nan")

	def numpy(self) -> np.ndarray:
		return self.data

	def zero_grad(self) -> None:
		self.grad = np.zeros_like(self.data)

	@staticmethod
	def wrap(x: Any) -> "Tensor":
		return x if isinstance(x, Tensor) else Tensor(x)

	def __neg__(self) -> "Tensor": return ops.neg(self)
	def __add__(self, x: Any) -> "Tensor": return ops.add(self, Tensor.wrap(x))
	def __radd__(self, x: Any) -> "Tensor": return ops.add(Tensor.wrap(x), self)
	def __sub__(self, x: Any) -> "Tensor": return ops.sub(self, Tensor.wrap(x))
	def __rsub__(self, x: Any) -> "Tensor": return ops.sub(Tensor.wrap(x), self)
	def __mul__(self, x: Any) -> "Tensor": return ops.mul(self, Tensor.wrap(x))
	def __rmul__(self, x: Any) -> "Tensor": return ops.mul(Tensor.wrap(x), self)
	def __matmul__(self, x: Any) -> "Tensor": return ops.matmul(self, Tensor.wrap(x))
	def __getitem__(self, key: Any) -> "Tensor": return ops.getitem(self, key)

	def sum(self, axis: Optional[int] = None) -> "Tensor":
		return ops.sum(self, axis=axis)

	def mean(self, axis: Optional[int] = None) -> "Tensor":
		return ops.mean(self, axis=axis)

	def reshape(self, *shape: int) -> "Tensor":
		return ops.reshape(self, shape)


class Function:
	"""One differentiable operation: forward on arrays, backward to parent gradients."""

	op_name = "op"

	def __init__(self, *parents: Tensor):
		self.parents = parents

	@classmethod
	def apply(cls, *parents: Tensor, **kwargs: Any) -> Tensor:
		fn = cls(*parents)
		out = Tensor(fn.forward(*[p.data for p in parents], **kwargs))
		tape = _active_tape.get()
		recording = tape is not None and any(p.requires_grad for p in parents)
		if not np.all(np.isfinite(out.data)):
			node = len(tape.nodes) if recording else None
			raise NumericFailure(f"non-finite output in {cls.op_name}", node_id=node)
		if recording:
			out.requires_grad = True
			tape.record(fn, out)
		return out

	def forward(self, *arrays: np.ndarray, **kwargs: Any) -> np.ndarray:
		raise NotImplementedError

	def backward(self, grad: np.ndarray) -> Tuple[Optional[np.ndarray], ...]:
		raise NotImplementedError


@dataclass
class TapeNode:
	node_id: int
	op: str
	fn: Function
	output: Tensor


class Tape:
	"""Ordered op records of one forward pass; used as a context manager.

	A tape is single-writer: it belongs to the run (and thread) that opened it.
	"""

	def __init__(self) -> None:
		self.nodes: List[TapeNode] = []
		self._tokens: List[Any] = []

	def __enter__(self) -> "Tape":
		self._tokens.append(_active_tape.set(self))
		return self

	def __exit__(self, exc_type, exc, tb) -> bool:
		_active_tape.reset(self._tokens.pop())
		return False

	def __len__(self) -> int:
		return len(self.nodes)

	def record(self, fn: Function, out: Tensor) -> None:
		out.node_id = len(self.nodes)
		self.nodes.append(TapeNode(out.node_id, fn.op_name, fn, out))

	def backward(self, loss: Tensor, params: Iterable[Tensor] = ()) -> None:
		"""Populate `.grad` of every tensor reachable from the scalar `loss`.

		Every tensor in `params` starts from a zero gradient, so parameters the loss
		does not depend on end with exactly zero gradient.
		"""
		if loss.size != 1:
			raise ContractViolation(f"loss must be scalar, got shape {loss.shape}")
		for p in params:
			p.zero_grad()
		for node in self.nodes:
			node.output.grad = None
		if not loss.requires_grad or loss.node_id is None:
			return
		loss.grad = np.ones_like(loss.data)
		for node in reversed(self.nodes):
			out = node.output
			if out.grad is None:
				continue
			grads = node.fn.backward(out.grad)
			for parent, g in zip(node.fn.parents, grads):
				if g is None or not parent.requires_grad:
					continue
				if not np.all(np.isfinite(g)):
					raise NumericFailure(f"non-finite gradient flowing out of {node.op}", node_id=node.node_id)
				if parent.grad is None:
					parent.grad = np.array(g, dtype=np.float64)
				else:
					parent.grad = parent.grad + g


@contextmanager
def no_grad() -> Iterator[None]:
	"""Evaluate without recording, even inside an enclosing tape."""
	token = _active_tape.set(None)
	try:
		yield
	finally:
		_active_tape.reset(token)


def parameter(data: Any, name: Optional[str] = None) -> Tensor:
	return Tensor(data, requires_grad=True, name=name)


def grads_of(params: Dict[str, Tensor]) -> Dict[str, np.ndarray]:
	return {k: (p.grad if p.grad is not None else np.zeros_like(p.data)) for k, p in params.items()}


from lewisim.autodiff import ops  # noqa: E402

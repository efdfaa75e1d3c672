import numpy as np
import pytest

from lewisim.autodiff import ops
from lewisim.autodiff.gradcheck import grad_check, relative_error
from lewisim.autodiff.tensor import Function, Tensor, parameter


class _WrongSquare(Function):
	op_name = "wrong_square"

	def forward(self, a):
		self.a = a
		return a * a

	def backward(self, grad):
		return (grad * self.a,)


def test_relative_error_floor():
	assert relative_error(np.zeros(3), np.zeros(3)) == 0.0
	assert relative_error(np.array([1.0]), np.array([1.0])) == 0.0
	assert relative_error(np.array([1e-12]), np.array([0.0])) == pytest.approx(1e-4)


def test_relative_error_is_elementwise():
	analytic = np.ones(1000)
	numeric = analytic.copy()
	numeric[417] = 2.0
	assert relative_error(analytic, numeric) == 0.5
	assert relative_error(np.array([3.0, -4.0]), np.array([3.0, -2.0])) == 0.5


def test_grad_check_flags_a_wrong_backward(rng):
	x = parameter(rng.normal(size=4) + 2.0)
	report = grad_check(lambda: _WrongSquare.apply(x).sum(), {"x": x})
	assert not report.passed(1e-3)
	assert report.per_parameter["x"] > 0.4


def test_grad_check_on_random_instances(rng):
	for _ in range(20):
		p = {"a": parameter(rng.normal(size=(2, 3))), "b": parameter(rng.normal(size=(3, 4)))}
		w = rng.normal(size=(2, 4))
		report = grad_check(lambda: (ops.log_softmax(ops.tanh(p["a"] @ p["b"])) * Tensor(w)).sum(), p)
		assert report.passed(1e-4)

import numpy as np
import pytest

from lewisim.autodiff import ops
from lewisim.autodiff.gradcheck import grad_check
from lewisim.autodiff.tensor import Tape, Tensor, no_grad, parameter
from lewisim.core.errors import ContractViolation, NumericFailure

TOL = 1e-4


def _params(rng, **shapes):
	return {name: parameter(rng.normal(size=shape)) for name, shape in shapes.items()}


def _weighted(t, w):
	return (t * Tensor(w)).sum()


def test_matmul_add_tanh_gradients(rng):
	p = _params(rng, a=(3, 4), b=(4, 2), bias=(2,))
	w = rng.normal(size=(3, 2))
	report = grad_check(lambda: _weighted(ops.tanh(p["a"] @ p["b"] + p["bias"]), w), p)
	assert report.passed(TOL)


def test_sigmoid_exp_mul_sub_gradients(rng):
	p = _params(rng, a=(2, 3), b=(2, 3))
	w = rng.normal(size=(2, 3))
	report = grad_check(lambda: _weighted(ops.sigmoid(p["a"]) * ops.exp(p["b"] * 0.3) - p["a"], w), p)
	assert report.passed(TOL)


def test_log_softmax_gather_gradients(rng):
	p = _params(rng, logits=(4, 5))
	target = np.array([0, 4, 2, 2])
	report = grad_check(lambda: ops.gather(ops.log_softmax(p["logits"]), target).mean(), p)
	assert report.passed(TOL)


def test_layer_norm_gradients(rng):
	p = _params(rng, x=(3, 6), gain=(6,), bias=(6,))
	w = rng.normal(size=(3, 6))
	report = grad_check(lambda: _weighted(ops.layer_norm(p["x"], p["gain"], p["bias"]), w), p)
	assert report.passed(TOL)


def test_stack_getitem_reshape_broadcast_gradients(rng):
	p = _params(rng, a=(2, 3), b=(2, 3), v=(3,))
	w = rng.normal(size=(2, 3, 2))

	def fn():
		stacked = ops.stack([p["a"], p["b"] + ops.broadcast_to(p["v"], (2, 3))])
		sliced = stacked[:, 1:, :].reshape(2, 4)
		return (sliced * Tensor(w[:, 1:, :].reshape(2, 4))).sum()

	assert grad_check(fn, p).passed(TOL)


def test_embedding_gradients_accumulate_repeated_rows(rng):
	p = _params(rng, table=(5, 3))
	index = np.array([1, 1, 4])
	w = rng.normal(size=(3, 3))
	assert grad_check(lambda: _weighted(ops.embedding(p["table"], index), w), p).passed(TOL)


def test_batched_dot_gradients(rng):
	p = _params(rng, a=(2, 3), c=(2, 4, 3))
	w = rng.normal(size=(2, 4))
	assert grad_check(lambda: _weighted(ops.batched_dot(p["a"], p["c"]), w), p).passed(TOL)


def test_entropy_matches_closed_form(rng):
	logits = rng.normal(size=(3, 4))
	with no_grad():
		ent = ops.entropy_from_log_probs(ops.log_softmax(Tensor(logits))).data
	probs = ops.softmax_array(logits)
	np.testing.assert_allclose(ent, -(probs * np.log(probs)).sum(axis=1), atol=1e-12)


def test_cross_entropy_single_vector_and_batch():
	loss, log_probs = ops.log_softmax_cross_entropy(Tensor(np.zeros(4)), 2)
	assert loss.item() == pytest.approx(np.log(4))
	assert log_probs.shape == (4,)
	batch_loss, _ = ops.log_softmax_cross_entropy(Tensor(np.zeros((3, 2))), np.array([0, 1, 1]))
	np.testing.assert_allclose(batch_loss.data, np.log(2))


def test_gather_rejects_out_of_range_index():
	with pytest.raises(ContractViolation):
		ops.gather(Tensor(np.zeros((2, 3))), np.array([0, 3]))


def test_non_finite_output_reports_node():
	x = parameter(np.array([1.0, 1000.0]))
	with Tape() as tape:
		y = x * 2.0
		with pytest.raises(NumericFailure) as info:
			ops.exp(y)
	assert info.value.node_id == len(tape.nodes)


def test_unused_parameter_gets_zero_gradient(rng):
	used, unused = parameter(rng.normal(size=3)), parameter(rng.normal(size=3))
	with Tape() as tape:
		loss = (used * used).sum()
	tape.backward(loss, [used, unused])
	np.testing.assert_allclose(used.grad, 2 * used.data)
	np.testing.assert_array_equal(unused.grad, np.zeros(3))


def test_no_grad_records_nothing(rng):
	x = parameter(rng.normal(size=3))
	with Tape() as tape:
		with no_grad():
			y = ops.tanh(x)
	assert len(tape) == 0
	assert not y.requires_grad


def test_backward_needs_scalar_loss(rng):
	x = parameter(rng.normal(size=3))
	with Tape() as tape:
		y = x * 2.0
	with pytest.raises(ContractViolation):
		tape.backward(y)

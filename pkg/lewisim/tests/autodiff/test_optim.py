import numpy as np
import pytest

from lewisim.autodiff.optim import Adam, AdamState, adam_step
from lewisim.autodiff.tensor import Tape, parameter
from lewisim.core.errors import ContractViolation


def test_first_adam_step_moves_by_lr_times_sign():
	p = {"w": np.array([1.0, -2.0, 3.0])}
	state = AdamState(lr=0.1)
	adam_step(p, {"w": np.array([0.5, -4.0, 0.0])}, state)
	# bias-corrected first step is lr * g / (|g| + eps)
	np.testing.assert_allclose(p["w"], [0.9, -1.9, 3.0], atol=1e-7)
	assert state.t == 1


def test_decoupled_weight_decay_with_zero_gradient():
	p = {"w": np.array([2.0])}
	state = AdamState(lr=0.1, weight_decay=0.5)
	adam_step(p, {"w": np.array([0.0])}, state)
	np.testing.assert_allclose(p["w"], [2.0 - 0.1 * 0.5 * 2.0])


def test_shape_mismatch_is_rejected():
	with pytest.raises(ContractViolation):
		adam_step({"w": np.zeros(3)}, {"w": np.zeros(2)}, AdamState())


def test_nonpositive_learning_rate_is_rejected():
	with pytest.raises(ContractViolation):
		AdamState(lr=0.0)


def test_adam_minimises_a_quadratic():
	w = parameter(np.array([3.0, -1.0]))
	opt = Adam({"w": w}, lr=0.05)
	for _ in range(500):
		with Tape() as tape:
			loss = (w * w).sum()
		tape.backward(loss, [w])
		opt.step()
	assert np.all(np.abs(w.data) < 0.1)

import numpy as np
import pytest

from lewisim.core.errors import ContractViolation, NumericFailure
from lewisim.schemas.run_config import parse_run_config
from lewisim.services.training import regimes
from lewisim.services.training.recorder import MemoryRecorder
from lewisim.services.training.regimes import (
	RegimeState,
	TrainingSession,
	run_continuous,
	run_partial,
	run_training,
)
from lewisim.tests.conftest import tiny_config_data


def _config(**overrides):
	overrides.setdefault("evaluation", {"final_generalization": False})
	return parse_run_config(tiny_config_data(**overrides))


def test_continuous_run_records_on_schedule():
	recorder = MemoryRecorder()
	result = run_training(_config(), recorder)
	assert [row.update for row in recorder.metrics] == [0, 2, 4]
	assert [row.update for row in recorder.regime] == [0, 2, 4]
	assert result.updates == 4
	assert result.state.listener_updates == 4
	assert result.state.reinit_count == 0
	assert recorder.metrics[0].info_train is None
	final = recorder.metrics[-1]
	assert final.info_test is not None
	assert final.adapt_train == pytest.approx(recorder.probes[-1].adapt_train)
	assert result.toposim is not None
	assert set(recorder.checkpoints) == {"best", "final"}
	assert recorder.checkpoints["final"][2]["update"] == 4


def test_runs_are_reproducible_from_the_seed():
	first, second = MemoryRecorder(), MemoryRecorder()
	run_training(_config(), first)
	run_training(_config(), second)
	assert first.metrics == second.metrics
	assert first.probes == second.probes
	speaker_a, speaker_b = first.checkpoints["final"][0], second.checkpoints["final"][0]
	assert all(np.array_equal(speaker_a[k], speaker_b[k]) for k in speaker_a)


def test_different_seeds_diverge():
	first, second = MemoryRecorder(), MemoryRecorder()
	run_training(_config(), first)
	run_training(_config(seed=11), second)
	assert first.metrics != second.metrics


def test_partial_regime_reinitializes_before_every_speaker_update():
	recorder = MemoryRecorder()
	result = run_training(_config(regime={"kind": "partial", "n_step": 3}), recorder)
	assert result.state.reinit_count == 4
	assert result.state.listener_updates == 12
	assert recorder.regime[-1].inner_updates == 3
	assert recorder.regime[-1].reinit_count == 4


def test_early_stopping_regime_bounds_inner_loop():
	config = _config(regime={"kind": "early_stopping", "patience": 1, "eval_every": 2, "max_inner_updates": 6})
	recorder = MemoryRecorder()
	result = run_training(config, recorder)
	assert result.state.reinit_count == 4
	assert 1 <= result.state.last_inner_updates <= 6
	assert result.state.best_val_loss is not None
	assert recorder.regime[-1].best_val_loss == result.state.best_val_loss


def test_discrimination_game_skips_probes():
	recorder = MemoryRecorder()
	result = run_training(_config(game={"kind": "discrimination", "n_candidates": 3, "embed_dim": 4}), recorder)
	assert recorder.probes == []
	assert all(row.info_train is None for row in recorder.metrics)
	assert 0.0 <= result.acc_test <= 1.0
	assert result.state.listener_updates == 4


def test_alpha_below_half_trains_a_reward_probe():
	recorder = MemoryRecorder()
	session = TrainingSession(_config(alpha=0.25, alpha_probe_every=2), recorder)
	session.run()
	# fitted at update 1, refreshed at 2 and 4
	assert session._reward_probe_index == 3


def test_final_generalization_is_an_accuracy():
	result = run_training(_config(evaluation={"final_generalization": True}), MemoryRecorder())
	assert 0.0 <= result.generalization <= 1.0


def test_runner_rejects_the_wrong_regime():
	with pytest.raises(ContractViolation):
		run_partial(_config(), MemoryRecorder())
	with pytest.raises(ContractViolation):
		run_continuous(_config(regime={"kind": "partial", "n_step": 2}), MemoryRecorder())


def test_numeric_failure_names_the_update(monkeypatch):
	original = regimes.speaker_update
	calls = []

	def failing_update(*args, **kwargs):
		calls.append(1)
		if len(calls) == 2:
			raise NumericFailure("speaker loss is not finite")
		return original(*args, **kwargs)

	monkeypatch.setattr(regimes, "speaker_update", failing_update)
	with pytest.raises(NumericFailure) as info:
		run_training(_config(), MemoryRecorder())
	assert info.value.update == 2


def test_regime_state_refuses_negative_counters():
	with pytest.raises(ContractViolation):
		RegimeState(reinit_count=-1)

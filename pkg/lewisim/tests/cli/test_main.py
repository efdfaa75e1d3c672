import json
from pathlib import Path

import numpy as np
import pytest

from lewisim.domain.oracle.entities import TabularGame
from lewisim.domain.oracle.services import dump_game
from lewisim.main import main


def _json_out(capsys):
	return json.loads(capsys.readouterr().out)


def test_missing_config_exits_with_usage_code(tmp_path, capsys):
	assert main(["train", "--config", str(tmp_path / "nope.json")]) == 2
	assert "ConfigurationError" in capsys.readouterr().err


def test_invalid_config_value_exits_with_usage_code(config_file):
	assert main(["train", "--config", str(config_file(alpha=0.9))]) == 2


def test_unknown_subcommand_is_a_usage_error():
	with pytest.raises(SystemExit) as info:
		main(["dance"])
	assert info.value.code == 2


def test_train_probe_toposim_status(tmp_path, config_file, capsys):
	config = str(config_file(evaluation={"final_generalization": False}))
	run_dir = tmp_path / "run"
	assert main(["train", "--config", config, "--out", str(run_dir)]) == 0
	summary = _json_out(capsys)
	assert summary["updates"] == 4
	assert summary["run_dir"] == str(run_dir.resolve())
	checkpoint = str(run_dir / "checkpoints" / "final.npz")

	assert main(["probe", "--config", config, "--checkpoint", checkpoint, "--out", str(tmp_path / "probe")]) == 0
	report = _json_out(capsys)
	assert report["total_test"] == pytest.approx(report["info_test"] + report["adapt_test"])
	assert (tmp_path / "probe" / "probe_report.json").is_file()

	assert main(["toposim", "--config", config, "--checkpoint", checkpoint]) == 0
	assert set(_json_out(capsys)) == {"mean", "std", "repeats", "batch_size", "undefined"}

	assert main(["status", "--run", str(run_dir)]) == 0
	assert _json_out(capsys)["status"] == "completed"

	assert main(["plot", "--csv", str(run_dir / "metrics.csv"), "--kind", "losses", "--out", str(tmp_path / "losses.svg")]) == 0
	assert _json_out(capsys)["series"] == ["info_train", "info_test", "adapt_train", "adapt_test"]


def test_checkpoint_with_other_architecture_is_rejected(tmp_path, config_file, capsys):
	config = str(config_file(evaluation={"final_generalization": False}))
	assert main(["train", "--config", config, "--out", str(tmp_path / "run")]) == 0
	capsys.readouterr()
	other = tmp_path / "other.json"
	data = json.loads(Path(config).read_text(encoding="utf-8"))
	data["speaker"]["hidden_size"] = 6
	other.write_text(json.dumps(data), encoding="utf-8")
	checkpoint = str(tmp_path / "run" / "checkpoints" / "final.npz")
	assert main(["toposim", "--config", str(other), "--checkpoint", checkpoint]) == 2


def test_oracle_commands(tmp_path, capsys):
	assert main(["oracle", "verify", "--games", "5", "--seed", "2"]) == 0
	assert _json_out(capsys)["passed"] is True
	path = tmp_path / "game.txt"
	path.write_text(dump_game(TabularGame(np.array([0.5, 0.5]), np.eye(2), np.eye(2))), encoding="utf-8")
	assert main(["oracle", "decompose", "--game", str(path)]) == 0
	out = _json_out(capsys)
	assert out["loglik"]["total"] == 0.0
	assert out["unambiguous"] is True


def test_sweep_command(tmp_path, config_file, capsys):
	config = str(config_file(
		regime={"kind": "partial", "n_step": 1},
		evaluation={"final_generalization": False},
		max_speaker_updates=2,
	))
	out = tmp_path / "sweep"
	code = main(["sweep", "--config", config, "--param", "regime.n_step", "--values", "1,2", "--seeds", "0", "--out", str(out), "--workers", "1"])
	assert code == 0
	cells = _json_out(capsys)["cells"]
	assert [c["status"] for c in cells] == ["completed", "completed"]
	assert (out / "summary.csv").is_file()
	assert main(["plot", "--csv", str(out / "summary.csv"), "--kind", "toposim-vs-gen", "--out", str(tmp_path / "s.svg")]) == 0
	assert _json_out(capsys)["points"] <= 2


def test_ragged_game_file_exits_with_usage_code(tmp_path, capsys):
	path = tmp_path / "game.txt"
	path.write_text("tabular-game v1 X=2 M=2\n#prior\n0.5 0.5\n#speaker\n1 0\n0\n#listener\n1 0\n0 1\n", encoding="utf-8")
	assert main(["oracle", "decompose", "--game", str(path)]) == 2
	assert "ArtifactError" in capsys.readouterr().err

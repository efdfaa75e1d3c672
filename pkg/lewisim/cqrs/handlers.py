from __future__ import annotations

from pathlib import Path
from typing import Any, Dict

import numpy as np

from lewisim.core.errors import ArtifactError
from lewisim.core.rng import RngStreams
from lewisim.domain.metrics.entities import TopoSimEstimate
from lewisim.domain.oracle.rewards import AccuracyReward
from lewisim.domain.oracle.services import (
	OracleVerification,
	conditional_entropy,
	decompose_general,
	decompose_loglik,
	is_unambiguous,
	load_game,
	mutual_information,
	prior_entropy,
	verify_random_games,
)
from lewisim.events.handlers import register_event_handlers
from lewisim.schemas.artifacts import ProbeReport
from lewisim.services.checkpoint_service import load_for_evaluation
from lewisim.services.evaluation_service import toposim_of
from lewisim.services.plot_service import PlotResult, plot
from lewisim.services.probe_service import probe_run
from lewisim.services.run_service import RunOutcome, RunService
from lewisim.services.storage import get_artifact_store
from lewisim.services.sweep_service import SweepService
from lewisim.services.training.factory import object_space_of

# Import base classes
from lewisim.cqrs.commands.base import Command
from lewisim.cqrs.queries.base import Query

# Import command and query classes
from lewisim.cqrs.commands.run_commands import ProbeCheckpoint, RenderPlot, RunSweep, TrainRun
from lewisim.cqrs.queries.metric_queries import RunStatus, TopoSimOfCheckpoint
from lewisim.cqrs.queries.oracle_queries import DecomposeGame, VerifyOracle


def handle_train_run(command: TrainRun) -> RunOutcome:
	return RunService(get_artifact_store(command.out)).train(command.config)


def handle_probe_checkpoint(command: ProbeCheckpoint) -> ProbeReport:
	config = command.config
	speaker, listener, split = load_for_evaluation(config, command.checkpoint)
	report, _ = probe_run(speaker, listener, object_space_of(config), split, config, RngStreams(command.seed))
	if command.out:
		get_artifact_store(command.out).write_text("probe_report.json", report.model_dump_json(indent=2) + "\n")
	return report


def handle_toposim(query: TopoSimOfCheckpoint) -> TopoSimEstimate:
	config = query.config
	speaker, _, _ = load_for_evaluation(config, query.checkpoint)
	return toposim_of(speaker, object_space_of(config), config, RngStreams(query.seed).generator("toposim"))


def handle_decompose_game(query: DecomposeGame) -> Dict[str, Any]:
	try:
		text = Path(query.path).read_text(encoding="utf-8")
	except OSError as exc:
		raise ArtifactError(f"cannot read game file {query.path}: {exc}") from exc
	game = load_game(text)
	loglik = decompose_loglik(game)
	accuracy, _ = decompose_general(game, AccuracyReward())
	return {
		"objects": game.n_objects,
		"messages": game.n_messages,
		"entropy_x": prior_entropy(game),
		"conditional_entropy": conditional_entropy(game),
		"mutual_information": mutual_information(game),
		"unambiguous": is_unambiguous(game),
		"loglik": {"total": loglik.total, "info": loglik.info, "adapt": loglik.adapt, "residual": loglik.residual, "infinite": loglik.infinite},
		"accuracy": {"total": accuracy.total, "info": accuracy.info, "adapt": accuracy.adapt, "offset": accuracy.offset, "residual": accuracy.residual},
	}


def handle_run_status(query: RunStatus) -> Dict[str, Any]:
	service = RunService(get_artifact_store(query.run_dir))
	return {"status": service.status(), "failure": service.failure()}


def handle_command(command: Command) -> Any:
	register_event_handlers()
	if isinstance(command, TrainRun):
		return handle_train_run(command)
	if isinstance(command, RunSweep):
		return SweepService(get_artifact_store(command.out)).run(
			command.config, command.param, command.values, command.seeds, command.workers
		)
	if isinstance(command, ProbeCheckpoint):
		return handle_probe_checkpoint(command)
	if isinstance(command, RenderPlot):
		return plot(command.csv, command.kind, command.out)
	raise ValueError(f"Unknown command: {type(command).__name__}")


def handle_query(query: Query) -> Any:
	if isinstance(query, VerifyOracle):
		return verify_random_games(np.random.default_rng(query.seed), n_games=query.games)
	if isinstance(query, DecomposeGame):
		return handle_decompose_game(query)
	if isinstance(query, TopoSimOfCheckpoint):
		return handle_toposim(query)
	if isinstance(query, RunStatus):
		return handle_run_status(query)
	raise ValueError(f"Unknown query: {type(query).__name__}")


__all__ = ["handle_command", "handle_query", "OracleVerification", "PlotResult"]

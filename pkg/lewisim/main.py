from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path
from typing import Any, List, Optional

from lewisim.core.config import settings
from lewisim.core.logger import configure_logging
from lewisim.cqrs.commands.run_commands import ProbeCheckpoint, RenderPlot, RunSweep, TrainRun
from lewisim.cqrs.handlers import handle_command, handle_query
from lewisim.cqrs.queries.metric_queries import RunStatus, TopoSimOfCheckpoint
from lewisim.cqrs.queries.oracle_queries import DecomposeGame, VerifyOracle
from lewisim.schemas.run_config import RunConfig, load_run_config, parse_run_config
from lewisim.services.plot_service import PLOT_KINDS
from lewisim.services.run_service import run_id_of
from lewisim.services.sweep_service import parse_seeds, parse_values
from lewisim.utils.error_handlers import EXIT_OK, EXIT_UNEXPECTED, describe_error, error_to_exit_code


def _emit(payload: Any) -> None:
	print(json.dumps(payload, indent=2, sort_keys=True, default=str))


def _config(path: str, seed: Optional[int]) -> RunConfig:
	config = load_run_config(path)
	if seed is None:
		return config
	return parse_run_config({**config.model_dump(mode="json"), "seed": seed})


def cmd_train(args: argparse.Namespace) -> int:
	config = _config(args.config, args.seed)
	out = args.out or str(Path(settings.output_root) / run_id_of(config))
	outcome = handle_command(TrainRun(config=config, out=out))
	result = outcome.result
	_emit({
		"run_id": outcome.run_id,
		"run_dir": outcome.location,
		"updates": result.updates,
		"acc_train": result.acc_train,
		"acc_test": result.acc_test,
		"generalization": result.generalization,
		"toposim": None if result.toposim is None else result.toposim.to_dict(),
	})
	return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
	config = load_run_config(args.config)
	out = args.out or str(Path(settings.output_root) / f"sweep-{args.param}")
	rows = handle_command(RunSweep(
		config=config,
		param=args.param,
		values=parse_values(args.values),
		seeds=parse_seeds(args.seeds) if args.seeds else [config.seed],
		out=out,
		workers=args.workers,
	))
	_emit({"sweep_dir": out, "cells": [r.model_dump(mode="json") for r in rows]})
	return EXIT_OK


def cmd_probe(args: argparse.Namespace) -> int:
	config = load_run_config(args.config)
	seed = config.seed if args.seed is None else args.seed
	report = handle_command(ProbeCheckpoint(config=config, checkpoint=args.checkpoint, seed=seed, out=args.out))
	_emit(report.model_dump(mode="json", exclude={"curve_train", "curve_test"}))
	return EXIT_OK


def cmd_oracle(args: argparse.Namespace) -> int:
	if args.oracle_command == "verify":
		report = handle_query(VerifyOracle(games=args.games, seed=args.seed))
		_emit({**dataclasses.asdict(report), "passed": report.passed})
		return EXIT_OK if report.passed else EXIT_UNEXPECTED
	_emit(handle_query(DecomposeGame(path=args.game)))
	return EXIT_OK


def cmd_toposim(args: argparse.Namespace) -> int:
	config = load_run_config(args.config)
	seed = config.seed if args.seed is None else args.seed
	estimate = handle_query(TopoSimOfCheckpoint(config=config, checkpoint=args.checkpoint, seed=seed))
	_emit(estimate.to_dict())
	return EXIT_OK


def cmd_plot(args: argparse.Namespace) -> int:
	result = handle_command(RenderPlot(csv=list(args.csv), kind=args.kind, out=args.out))
	_emit({"path": result.path, "series": result.series, "points": result.points})
	return EXIT_OK


def cmd_status(args: argparse.Namespace) -> int:
	_emit(handle_query(RunStatus(run_dir=args.run)))
	return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
	parser = argparse.ArgumentParser(prog="lewisim", description="Lewis signaling game lab")
	parser.add_argument("--log-level", default=None, help="override LEWISIM_LOG_LEVEL")
	parser.add_argument("--log-json", action="store_true", help="serialize log records as JSON")
	sub = parser.add_subparsers(dest="command", required=True)

	p = sub.add_parser("train", help="train one run")
	p.add_argument("--config", required=True)
	p.add_argument("--seed", type=int, default=None)
	p.add_argument("--out", default=None)
	p.set_defaults(func=cmd_train)

	p = sub.add_parser("sweep", help="values x seeds over one config parameter")
	p.add_argument("--config", required=True)
	p.add_argument("--param", required=True, help="dotted path, e.g. regime.n_step")
	p.add_argument("--values", required=True, help="comma separated values")
	p.add_argument("--seeds", default=None, help="comma separated seeds")
	p.add_argument("--out", default=None)
	p.add_argument("--workers", type=int, default=None)
	p.set_defaults(func=cmd_sweep)

	p = sub.add_parser("probe", help="probe a checkpointed speaker/listener pair")
	p.add_argument("--checkpoint", required=True)
	p.add_argument("--config", required=True)
	p.add_argument("--seed", type=int, default=None)
	p.add_argument("--out", default=None)
	p.set_defaults(func=cmd_probe)

	p = sub.add_parser("oracle", help="exact checks on tabular games")
	oracle = p.add_subparsers(dest="oracle_command", required=True)
	v = oracle.add_parser("verify")
	v.add_argument("--games", type=int, default=1000)
	v.add_argument("--seed", type=int, default=0)
	d = oracle.add_parser("decompose")
	d.add_argument("--game", required=True)
	p.set_defaults(func=cmd_oracle)

	p = sub.add_parser("toposim", help="topographic similarity of a checkpointed speaker")
	p.add_argument("--checkpoint", required=True)
	p.add_argument("--config", required=True)
	p.add_argument("--seed", type=int, default=None)
	p.set_defaults(func=cmd_toposim)

	p = sub.add_parser("plot", help="SVG chart from metric or sweep CSVs")
	p.add_argument("--csv", nargs="+", required=True)
	p.add_argument("--kind", required=True, choices=PLOT_KINDS)
	p.add_argument("--out", required=True)
	p.set_defaults(func=cmd_plot)

	p = sub.add_parser("status", help="state of a run directory")
	p.add_argument("--run", required=True)
	p.set_defaults(func=cmd_status)
	return parser


def main(argv: Optional[List[str]] = None) -> int:
	args = build_parser().parse_args(argv)
	if args.log_level or args.log_json:
		configure_logging(level=args.log_level, json=args.log_json or None)
	try:
		return args.func(args)
	except Exception as exc:
		code = error_to_exit_code(exc)
		print(describe_error(exc), file=sys.stderr)
		return code


if __name__ == "__main__":
	sys.exit(main())

"""
Static SVG charts over metric logs and sweep summaries.

Output is deterministic: fixed svg hash salt, no date metadata, Agg backend.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402

from lewisim.core.config import settings  # noqa: E402
from lewisim.core.errors import ConfigurationError  # noqa: E402
from lewisim.core.logger import logger  # noqa: E402
from lewisim.services.metrics_log import read_csv  # noqa: E402

PLOT_KINDS = ("losses", "nstep-sweep", "alpha-sweep", "toposim-vs-gen")

_LOSS_SERIES = ("info_train", "info_test", "adapt_train", "adapt_test")
_SWEEP_SERIES = ("acc_train", "acc_test", "generalization")


@dataclass
class PlotResult:
	path: str
	series: List[str] = field(default_factory=list)
	points: int = 0


def _label(path: str | Path, n_inputs: int, name: str) -> str:
	return name if n_inputs == 1 else f"{Path(path).stem}:{name}"


def _losses(ax, paths: Sequence[str]) -> PlotResult:
	result = PlotResult(path="")
	for path in paths:
		frame = read_csv(path, ("update",) + _LOSS_SERIES)
		for column in _LOSS_SERIES:
			rows = frame[["update", column]].dropna()
			label = _label(path, len(paths), column)
			ax.plot(rows["update"], rows[column], marker="o", markersize=3, label=label)
			result.series.append(label)
			result.points += len(rows)
	ax.set_xlabel("speaker updates")
	ax.set_ylabel("loss (nats)")
	return result


def _sweep(ax, paths: Sequence[str], series: Sequence[str], xlabel: str) -> PlotResult:
	result = PlotResult(path="")
	for path in paths:
		frame = read_csv(path, ("value", "status") + tuple(series))
		frame = frame[frame["status"] == "completed"]
		grouped = frame.groupby("value", sort=True)[list(series)]
		means, stds = grouped.mean(), grouped.std().fillna(0.0)
		for column in series:
			label = _label(path, len(paths), column)
			ax.errorbar(means.index, means[column], yerr=stds[column], marker="o", capsize=3, label=label)
			result.series.append(label)
			result.points += int(means[column].notna().sum())
	ax.set_xlabel(xlabel)
	ax.set_ylabel("accuracy")
	return result


def _toposim_vs_gen(ax, paths: Sequence[str]) -> PlotResult:
	result = PlotResult(path="")
	for path in paths:
		frame = read_csv(path, ("value", "seed", "generalization", "toposim"))
		frame = frame.dropna(subset=["generalization", "toposim"])
		label = _label(path, len(paths), "cells")
		ax.scatter(frame["toposim"], frame["generalization"], label=label)
		result.series.append(label)
		result.points += len(frame)
	ax.set_xlabel("topographic similarity")
	ax.set_ylabel("generalization")
	return result


def plot(paths: Sequence[str], kind: str, out: str | Path) -> PlotResult:
	"""Render one chart of `kind` from the CSVs in `paths` into the SVG file `out`."""
	if kind not in PLOT_KINDS:
		raise ConfigurationError(f"unknown plot kind {kind!r}; expected one of {', '.join(PLOT_KINDS)}", field="kind")
	if not paths:
		raise ConfigurationError("at least one CSV is required", field="csv")
	plt.rcParams["svg.hashsalt"] = settings.svg_hashsalt
	fig, ax = plt.subplots(figsize=(7, 4.5))
	try:
		if kind == "losses":
			result = _losses(ax, paths)
		elif kind == "nstep-sweep":
			result = _sweep(ax, paths, _SWEEP_SERIES, "listener updates per speaker update (N_step)")
			ax.set_xscale("symlog")
		elif kind == "alpha-sweep":
			result = _sweep(ax, paths, ("generalization", "acc_test"), "alpha")
		else:
			result = _toposim_vs_gen(ax, paths)
		ax.set_title(kind)
		ax.grid(True, alpha=0.3)
		ax.legend(loc="best", fontsize=8)
		out = Path(out)
		out.parent.mkdir(parents=True, exist_ok=True)
		fig.savefig(out, format="svg", metadata={"Date": None})
	finally:
		plt.close(fig)
	result.path = str(out)
	logger.info(f"wrote {kind} plot with {len(result.series)} series to {out}")
	return result


def sweep_means(path: str | Path) -> Dict[str, pd.Series]:
	"""Per-value means of the sweep accuracy columns (completed cells only)."""
	frame = read_csv(path, ("value", "status") + _SWEEP_SERIES)
	frame = frame[frame["status"] == "completed"]
	means = frame.groupby("value", sort=True)[list(_SWEEP_SERIES)].mean()
	return {c: means[c] for c in _SWEEP_SERIES}

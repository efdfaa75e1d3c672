from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Protocol, Tuple

from lewisim.schemas.artifacts import MetricsRow, ProbeReport, RegimeRow


class Recorder(Protocol):
	"""Sink for everything a training session emits."""

	def record_metrics(self, row: MetricsRow) -> None: ...

	def record_regime(self, row: RegimeRow) -> None: ...

	def record_probe(self, report: ProbeReport) -> None: ...

	def save_checkpoint(self, name: str, speaker, listener, meta: Dict[str, object]) -> None: ...


@dataclass
class MemoryRecorder:
	"""Keeps rows in memory; checkpoints are kept as state dicts."""

	metrics: List[MetricsRow] = field(default_factory=list)
	regime: List[RegimeRow] = field(default_factory=list)
	probes: List[ProbeReport] = field(default_factory=list)
	checkpoints: Dict[str, Tuple[dict, dict, Dict[str, object]]] = field(default_factory=dict)

	def record_metrics(self, row: MetricsRow) -> None:
		self.metrics.append(row)

	def record_regime(self, row: RegimeRow) -> None:
		self.regime.append(row)

	def record_probe(self, report: ProbeReport) -> None:
		self.probes.append(report)

	def save_checkpoint(self, name: str, speaker, listener, meta: Dict[str, object]) -> None:
		self.checkpoints[name] = (speaker.state_dict(), listener.state_dict(), dict(meta))

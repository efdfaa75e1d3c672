from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, List


@dataclass(frozen=True)
class TopoSimEstimate:
	"""Bootstrapped topographic similarity; mean/std are NaN when `undefined`."""

	mean: float
	std: float
	repeats: int
	batch_size: int
	undefined: bool = False
	values: List[float] = field(default_factory=list)

	def to_dict(self) -> Dict[str, Any]:
		return {
			"mean": self.mean,
			"std": self.std,
			"repeats": self.repeats,
			"batch_size": self.batch_size,
			"undefined": self.undefined,
		}

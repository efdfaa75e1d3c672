"""
CSV codec for metric logs and sweep summaries.

Columns are always written in their fixed order with `%.10g` floats; missing values
are blank cells.
"""
from __future__ import annotations

import io
from pathlib import Path
from typing import Any, Dict, Iterable, Sequence

import pandas as pd

from lewisim.core.errors import ArtifactError

FLOAT_FORMAT = "%.10g"


def to_csv(records: Iterable[Dict[str, Any]], columns: Sequence[str]) -> str:
	frame = pd.DataFrame(list(records), columns=list(columns))
	buf = io.StringIO()
	frame.to_csv(buf, index=False, float_format=FLOAT_FORMAT, na_rep="", lineterminator="\n")
	return buf.getvalue()


def read_csv(path: str | Path, required: Sequence[str]) -> pd.DataFrame:
	"""Load a CSV and check that every `required` column is present."""
	try:
		frame = pd.read_csv(path)
	except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
		raise ArtifactError(f"cannot read {path}: {exc}") from exc
	missing = [c for c in required if c not in frame.columns]
	if missing:
		raise ArtifactError(f"{path} is missing column {missing[0]!r}")
	return frame

from __future__ import annotations

import hashlib
import json
from copy import deepcopy
from pathlib import Path
from typing import Annotated, Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from lewisim.core.config import settings
from lewisim.core.errors import ConfigurationError


class _Strict(BaseModel):
	model_config = ConfigDict(extra="forbid")


class ObjectSpaceConfig(_Strict):
	cardinalities: List[int] = Field(default_factory=lambda: [10] * 6)

	@field_validator("cardinalities")
	@classmethod
	def _at_least_two(cls, v: List[int]) -> List[int]:
		if not v:
			raise ValueError("at least one attribute is required")
		if any(c < 2 for c in v):
			raise ValueError("every attribute needs at least 2 values")
		return v

	@property
	def size(self) -> int:
		size = 1
		for c in self.cardinalities:
			size *= c
		return size


class SplitConfig(_Strict):
	train: int = Field(4000, ge=1)
	val: int = Field(1000, ge=1)
	test: int = Field(1000, ge=1)


class ChannelConfig(_Strict):
	max_len: int = Field(10, ge=1)
	vocab_size: int = Field(10, ge=2)


# listener dropout / weight decay per the regularisation ablation, speaker weight decay
_LISTENER_DROPOUT = 0.2
_LISTENER_WEIGHT_DECAY = 0.01
_SPEAKER_WEIGHT_DECAY = 0.005


class RegularizerConfig(_Strict):
	dropout: float = Field(0.0, ge=0.0, lt=1.0)
	weight_decay: float = Field(0.0, ge=0.0)
	layer_norm: bool = True

	@classmethod
	def preset(cls, name: str, agent: Literal["speaker", "listener"] = "listener") -> "RegularizerConfig":
		"""Named ablation presets: none, no_ln, weight_decay, no_ln_wd, dropout."""
		wd = _SPEAKER_WEIGHT_DECAY if agent == "speaker" else _LISTENER_WEIGHT_DECAY
		presets: Dict[str, Dict[str, Any]] = {
			"none": {},
			"no_ln": {"layer_norm": False},
			"weight_decay": {"weight_decay": wd},
			"no_ln_wd": {"layer_norm": False, "weight_decay": wd},
			"dropout": {"dropout": _LISTENER_DROPOUT},
		}
		if name not in presets:
			raise ConfigurationError(f"unknown regularizer preset {name!r}", field=f"{agent}.regularizer")
		return cls(**presets[name])


class AgentConfig(_Strict):
	hidden_size: int = Field(128, ge=1)
	lr: float = Field(5e-4, gt=0.0)
	beta1: float = Field(0.9, ge=0.0, lt=1.0)
	beta2: float = Field(0.999, ge=0.0, lt=1.0)
	eps: float = Field(1e-8, gt=0.0)
	regularizer: RegularizerConfig = Field(default_factory=RegularizerConfig)


class ContinuousRegime(_Strict):
	kind: Literal["continuous"] = "continuous"


class PartialRegime(_Strict):
	kind: Literal["partial"] = "partial"
	n_step: int = Field(..., ge=1)


class EarlyStoppingRegime(_Strict):
	kind: Literal["early_stopping"] = "early_stopping"
	patience: int = Field(5, ge=1)
	eval_every: int = Field(10, ge=1)
	min_delta: float = Field(1e-4, ge=0.0)
	max_inner_updates: int = Field(2000, ge=1)


Regime = Annotated[Union[ContinuousRegime, PartialRegime, EarlyStoppingRegime], Field(discriminator="kind")]


class GameConfig(_Strict):
	kind: Literal["reconstruction", "discrimination"] = "reconstruction"
	n_candidates: int = Field(16, ge=1)
	embed_dim: int = Field(64, ge=1)


class ProbeConfig(_Strict):
	patience: int = Field(10, ge=1)
	eval_every: int = Field(20, ge=1)
	min_delta: float = Field(1e-4, ge=0.0)
	max_updates: int = Field(5000, ge=1)
	heldout_size: int = Field(1024, ge=1)
	n_samples: int = Field(default_factory=lambda: settings.mc_samples, ge=1)
	every: int = Field(default_factory=lambda: settings.probe_every, ge=1)
	enabled: bool = True


class EvaluationConfig(_Strict):
	eval_every: int = Field(50, ge=1)
	toposim_batch: int = Field(default_factory=lambda: settings.toposim_batch, ge=2)
	toposim_repeats: int = Field(default_factory=lambda: settings.toposim_repeats, ge=1)
	toposim_every_probe: bool = True
	final_generalization: bool = True


class RunConfig(_Strict):
	space: ObjectSpaceConfig = Field(default_factory=ObjectSpaceConfig)
	split: SplitConfig = Field(default_factory=SplitConfig)
	channel: ChannelConfig = Field(default_factory=ChannelConfig)
	speaker: AgentConfig = Field(default_factory=AgentConfig)
	listener: AgentConfig = Field(default_factory=AgentConfig)
	regime: Regime = Field(default_factory=ContinuousRegime)
	game: GameConfig = Field(default_factory=GameConfig)
	probe: ProbeConfig = Field(default_factory=ProbeConfig)
	evaluation: EvaluationConfig = Field(default_factory=EvaluationConfig)
	batch_size: int = Field(1024, ge=1)
	entropy_coef: float = Field(0.01, ge=0.0)
	alpha: float = Field(0.5, ge=0.0, le=0.5)
	alpha_probe_every: int = Field(100, ge=1)
	seed: int = Field(0, ge=0)
	max_speaker_updates: int = Field(1000, ge=1)
	name: Optional[str] = None

	@model_validator(mode="after")
	def _consistent(self) -> "RunConfig":
		total = self.split.train + self.split.val + self.split.test
		if total > self.space.size:
			raise ValueError(f"split sizes total {total} exceeds the object space of {self.space.size}")
		if self.game.kind == "discrimination" and self.game.n_candidates > self.split.train:
			raise ValueError("n_candidates exceeds the training split size")
		if self.game.kind == "discrimination" and self.regime.kind != "continuous":
			raise ValueError(f"the discrimination game trains jointly; regime {self.regime.kind!r} is not supported")
		return self

	def config_hash(self) -> str:
		"""sha256 of the canonical (sorted-key) JSON of the resolved config."""
		canonical = json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
		return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _dotted(loc: Any) -> str:
	return ".".join(str(p) for p in loc)


def parse_run_config(data: Dict[str, Any]) -> RunConfig:
	"""Validate a config dict; pydantic errors become ConfigurationError naming the field."""
	try:
		return RunConfig.model_validate(data)
	except ValidationError as exc:
		first = exc.errors()[0]
		field = _dotted(first.get("loc", ())) or None
		raise ConfigurationError(first.get("msg", "invalid value"), field=field) from exc


def load_run_config(path: str | Path) -> RunConfig:
	p = Path(path)
	try:
		text = p.read_text(encoding="utf-8")
	except OSError as exc:
		raise ConfigurationError(f"cannot read config file: {exc}", field="config") from exc
	try:
		data = json.loads(text)
	except json.JSONDecodeError as exc:
		raise ConfigurationError(f"config is not valid JSON: {exc}", field="config") from exc
	if not isinstance(data, dict):
		raise ConfigurationError("config must be a JSON object", field="config")
	return parse_run_config(data)


def set_by_path(data: Dict[str, Any], path: str, value: Any) -> Dict[str, Any]:
	"""Copy of `data` with the dotted `path` set to `value`.

	Intermediate objects must exist in the resolved config; the leaf may be new only
	when its parent is an object (so regime.n_step can be set on a partial regime).
	"""
	out = deepcopy(data)
	keys = path.split(".")
	node = out
	for i, key in enumerate(keys[:-1]):
		if not isinstance(node, dict) or key not in node:
			raise ConfigurationError("no such parameter path", field=".".join(keys[:i + 1]))
		node = node[key]
	if not isinstance(node, dict):
		raise ConfigurationError("parent of the parameter is not an object", field=path)
	node[keys[-1]] = value
	return out

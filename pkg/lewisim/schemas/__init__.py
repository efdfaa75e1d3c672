from lewisim.schemas.run_config import (
	RunConfig,
	AgentConfig,
	ChannelConfig,
	ContinuousRegime,
	EarlyStoppingRegime,
	EvaluationConfig,
	GameConfig,
	ObjectSpaceConfig,
	PartialRegime,
	ProbeConfig,
	RegularizerConfig,
	SplitConfig,
	load_run_config,
	parse_run_config,
	set_by_path,
)
from lewisim.schemas.artifacts import (
	CSV_COLUMNS,
	REGIME_COLUMNS,
	SUMMARY_COLUMNS,
	MetricsRow,
	ProbeReport,
	RegimeRow,
	RunManifest,
	SweepSummaryRow,
)

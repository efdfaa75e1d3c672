from __future__ import annotations

from lewisim.core.errors import (
	ArtifactError,
	ConfigurationError,
	ContractViolation,
	NumericFailure,
	UndefinedCorrelation,
)
from lewisim.core.logger import logger

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3


def error_to_exit_code(exc: BaseException) -> int:
	if isinstance(exc, NumericFailure):
		return EXIT_NUMERIC
	if isinstance(exc, (ConfigurationError, ArtifactError, ContractViolation, UndefinedCorrelation)):
		return EXIT_USAGE
	logger.opt(exception=exc).error(f"Unexpected error: {exc}")
	return EXIT_UNEXPECTED


def describe_error(exc: BaseException) -> str:
	"""One-line message for the terminal; numeric failures name the failing update."""
	if isinstance(exc, NumericFailure) and exc.update is not None:
		return f"numeric failure at update {exc.update}: {exc}"
	return f"{type(exc).__name__}: {exc}"

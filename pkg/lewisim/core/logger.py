from loguru import logger
import sys

from lewisim.core.config import settings

_FORMAT = "<green>{time}</green> | <level>{level}</level> | <cyan>{name}</cyan>:<cyan>{function}</cyan>:<cyan>{line}</cyan> - <level>{message}</level>"


def configure_logging(level: str | None = None, json: bool | None = None) -> None:
	"""Install the single stderr sink used by the library and the CLI."""
	logger.remove()
	logger.add(
		sys.stderr,
		level=(level or settings.log_level).upper(),
		format=_FORMAT,
		serialize=settings.log_json if json is None else json,
	)


configure_logging()

__all__ = ["logger", "configure_logging"]

from pydantic_settings import BaseSettings
from dotenv import load_dotenv

load_dotenv()

class Settings(BaseSettings):
	"""Process settings loaded from environment variables (prefix LEWISIM_)."""

	app_name: str = "lewisim"
	environment: str = "development"

	# Logging
	log_level: str = "INFO"
	log_json: bool = False

	# Artifacts
	output_root: str = "./runs"
	storage_backend: str = "local"

	# Sweeps: 0 means one worker per available core
	sweep_workers: int = 0

	# Estimation defaults
	mc_samples: int = 10_000
	probe_every: int = 200
	toposim_batch: int = 1000
	toposim_repeats: int = 100

	# Plotting
	svg_hashsalt: str = "lewisim"

	class Config:
		env_prefix = "LEWISIM_"
		env_file = ".env"
		env_file_encoding = "utf-8"


settings = Settings()

from typing import Optional

from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    # Output
    output_root: str = "runs"
    charts_enabled: bool = True

    # Sweep Configuration
    default_jobs: int = 1
    default_seeds: str = "0,1,2"

    # Logging
    log_level: str = "INFO"
    structured_logging: bool = True
    log_file: Optional[str] = None

    # Application
    app_name: str = "dstlab"
    version: str = "1.0.0"

    class Config:
        env_file = ".env"
        env_prefix = "DSTLAB_"
        case_sensitive = False
        extra = "ignore"


settings = Settings()

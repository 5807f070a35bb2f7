"""Process-level settings"""

from pydantic_settings import BaseSettings, SettingsConfigDict
from typing import Optional


class Settings(BaseSettings):
    """Settings loaded from environment variables (prefix ``TOTM_``) or ``.env``"""

    model_config = SettingsConfigDict(
        env_prefix="TOTM_",
        env_file=".env",
        case_sensitive=False,
        extra="ignore",
    )

    # Application
    app_name: str = "totmnet"
    debug: bool = False

    # Logging
    log_level: str = "INFO"
    log_file: Optional[str] = None

    # Numerics
    num_threads: int = 1
    default_seed: int = 0


settings = Settings()

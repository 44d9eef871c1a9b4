from typing import List, Tuple
from pydantic_settings import BaseSettings

class Settings(BaseSettings):
    PROJECT_NAME: str = "Anti-Stochastic Graph Toolkit"
    API_V1_STR: str = "/api/v1"

    # Server
    HOST: str = "0.0.0.0"
    PORT: int = 8000
    ENV: str = "development"

    LOG_LEVEL: str = "INFO"
    CORS_ORIGINS: List[str] = ["*"]

    # Q_k schedule: (N_k, k) pairs, strictly increasing in both coordinates
    DEFAULT_K_SCHEDULE: List[Tuple[int, int]] = [(5000, 13)]

    # Guards
    MIN_WINDOW_N: int = 150
    COVER_VERIFY_MAX_LEN: int = 24
    MIN_COVER_MAX_LEN: int = 5
    MAX_ITERATED_DEGREE: int = 8
    EXHAUSTIVE_ATTACK_MAX_N: int = 40

    # Monte Carlo
    WILSON_Z: float = 1.96
    JOBS: int = 1
    CODE_CACHE_SIZE: int = 256

    class Config:
        env_file = ".env"
        env_prefix = "ASG_"
        case_sensitive = True

# Create global settings instance
settings = Settings()

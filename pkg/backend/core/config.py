import os
from functools import lru_cache
from typing import Mapping, Optional

from pydantic import BaseModel, Field, ValidationError, field_validator

from .errors import ConfigurationError

_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


def _default_threads() -> int:
    return max(1, min(os.cpu_count() or 1, 8))


class Settings(BaseModel):
    """Engine settings read from OPFORGE_* environment variables"""

    max_threads: int = Field(default_factory=_default_threads)
    max_arity_twisted: int = 6
    max_arity_operad: int = 5
    max_arity_ns: int = 6
    max_degree: int = 10
    cache_path: str = "data/opforge_cache.db"
    cache_enabled: bool = True
    log_level: str = "INFO"

    @field_validator("max_threads", "max_arity_twisted", "max_arity_operad", "max_arity_ns", "max_degree")
    @classmethod
    def _positive(cls, value: int) -> int:
        if value < 1:
            raise ValueError("must be a positive integer")
        return value

    @field_validator("log_level")
    @classmethod
    def _known_level(cls, value: str) -> str:
        value = value.upper()
        if value not in _LEVELS:
            raise ValueError(f"unknown log level {value}")
        return value

    @classmethod
    def from_env(cls, environ: Optional[Mapping[str, str]] = None) -> "Settings":
        environ = os.environ if environ is None else environ
        mapping = {
            "OPFORGE_MAX_THREADS": "max_threads",
            "OPFORGE_MAX_ARITY_TWISTED": "max_arity_twisted",
            "OPFORGE_MAX_ARITY_OPERAD": "max_arity_operad",
            "OPFORGE_MAX_ARITY_NS": "max_arity_ns",
            "OPFORGE_MAX_DEGREE": "max_degree",
            "OPFORGE_CACHE_PATH": "cache_path",
            "OPFORGE_LOG_LEVEL": "log_level",
        }
        values = {field: environ[var] for var, field in mapping.items() if environ.get(var, "") != ""}
        if "OPFORGE_CACHE" in environ:
            values["cache_enabled"] = environ["OPFORGE_CACHE"].strip() not in ("0", "false", "no", "")
        try:
            return cls(**values)
        except ValidationError as e:
            raise ConfigurationError(f"Invalid configuration: {str(e)}")

    def max_arity_for(self, kind: str) -> int:
        if kind == "twisted":
            return self.max_arity_twisted
        if kind == "operad":
            return self.max_arity_operad
        return self.max_arity_ns


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    return Settings.from_env()

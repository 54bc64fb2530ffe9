import json
import os
from typing import Any, Dict, Optional

from dotenv import load_dotenv
from pydantic import BaseModel, Field

from .errors import ConfigError


def load_config(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def merge_overrides(base: Dict[str, Any], overrides: Dict[str, Any]) -> Dict[str, Any]:
    """Nested dict merge; ``None`` values in ``overrides`` leave ``base`` untouched."""
    out = dict(base)
    for key, value in overrides.items():
        if value is None:
            continue
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = merge_overrides(out[key], value)
        else:
            out[key] = value
    return out


class Settings(BaseModel):
    threads: int = Field(default_factory=lambda: os.cpu_count() or 1, ge=1)
    config_path: Optional[str] = None
    log_level: str = "INFO"
    log_json: bool = False
    transport: str = "stdio"
    host: str = "127.0.0.1"
    port: int = 8000

    @classmethod
    def from_env(cls, dotenv: bool = True) -> "Settings":
        if dotenv:
            load_dotenv()
        values: Dict[str, Any] = {
            "config_path": os.getenv("IRSQR_CONFIG"),
            "log_level": os.getenv("IRSQR_LOG_LEVEL", "INFO"),
            "log_json": os.getenv("IRSQR_LOG_JSON", "0").strip().lower() in ("1", "true", "yes"),
            "transport": os.getenv("MCP_TRANSPORT", "stdio"),
            "host": os.getenv("MCP_HOST", "127.0.0.1"),
            "port": _env_int("MCP_HTTP_PORT", os.getenv("MCP_PORT") or "8000"),
        }
        if os.getenv("IRSQR_THREADS"):
            values["threads"] = max(1, _env_int("IRSQR_THREADS", "1"))
        return cls(**values)


def _env_int(name: str, default: str) -> int:
    raw = os.getenv(name) or default
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{name} must be an integer, got {raw!r}") from None


def worker_count(settings: Optional[Settings] = None) -> int:
    s = settings or Settings.from_env(dotenv=False)
    return s.threads

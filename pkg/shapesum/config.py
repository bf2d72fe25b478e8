"""
Runtime configuration: .env loading, environment variables and JSON
settings files.
"""

import json
import logging
import os
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, Dict, Optional

import psutil

from .errors import ConfigurationError

logger = logging.getLogger(__name__)

LOG_LEVELS = ('DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL')


def load_env_file(path: str = '.env') -> None:
    """Load environment variables from a .env file if it exists."""
    env_path = Path(path)
    if env_path.exists():
        with open(env_path, 'r', encoding='utf-8') as f:
            for line in f:
                line = line.strip()
                if line and not line.startswith('#') and '=' in line:
                    key, value = line.split('=', 1)
                    os.environ.setdefault(key.strip(), value.strip())


def max_threads() -> int:
    return (psutil.cpu_count() or 1) * 4


def parse_threads(raw: Any) -> int:
    try:
        threads = int(str(raw).strip())
    except ValueError:
        raise ConfigurationError(f"SHAPESUM_THREADS must be a positive integer, got {raw!r}")
    if threads < 1:
        raise ConfigurationError(f"SHAPESUM_THREADS must be a positive integer, got {raw!r}")
    cap = max_threads()
    if threads > cap:
        logger.warning(f"SHAPESUM_THREADS={threads} clamped to {cap}")
        threads = cap
    return threads


@dataclass(frozen=True)
class RuntimeSettings:
    """Process-wide settings shared by the CLI and worker pools."""
    threads: int = 1
    log_level: str = 'WARNING'
    audit_log_path: str = ''

    def __post_init__(self):
        if self.log_level.upper() not in LOG_LEVELS:
            raise ConfigurationError(f"unknown log level {self.log_level!r}")

    @classmethod
    def from_env(cls, base: Optional['RuntimeSettings'] = None) -> 'RuntimeSettings':
        """Create settings from environment variables, falling back to `base`."""
        base = base or cls()
        threads = os.getenv('SHAPESUM_THREADS')
        return cls(
            threads=parse_threads(threads) if threads not in (None, '') else base.threads,
            log_level=os.getenv('SHAPESUM_LOG_LEVEL', base.log_level).upper(),
            audit_log_path=os.getenv('SHAPESUM_AUDIT_LOG', base.audit_log_path),
        )

    @classmethod
    def from_file(cls, config_path: str) -> 'RuntimeSettings':
        """Load settings from a JSON document keyed like the environment."""
        try:
            with open(config_path, 'r', encoding='utf-8') as f:
                data = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigurationError(f"cannot read settings file {config_path}: {e}")
        return cls(
            threads=parse_threads(data.get('SHAPESUM_THREADS', 1)),
            log_level=str(data.get('SHAPESUM_LOG_LEVEL', 'WARNING')).upper(),
            audit_log_path=str(data.get('SHAPESUM_AUDIT_LOG', '')),
        )

    @classmethod
    def resolve(cls, config_path: Optional[str] = None) -> 'RuntimeSettings':
        """File settings, overridden by the environment."""
        load_env_file()
        base = cls.from_file(config_path) if config_path else None
        return cls.from_env(base)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

"""
Configuration management for the synchronverter toolkit.

Runtime settings come from the environment (optionally a ``.env`` file);
model parameters come from a JSON file.
"""

import json
import logging
import math
import os
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

from dotenv import load_dotenv

from .error_handler import ConfigError
from .models import GridParams, SynchronverterParams

# Load environment variables from .env file
load_dotenv()

logger = logging.getLogger(__name__)

# JSON key -> (record, attribute)
PARAMETER_KEYS: Dict[str, Tuple[str, str]] = {
    'Rs': ('machine', 'R_s'),
    'Ls': ('machine', 'L_s'),
    'n': ('machine', 'n'),
    'J': ('machine', 'J'),
    'Dp': ('machine', 'D_p'),
    'Dq': ('machine', 'D_q'),
    'm': ('machine', 'm'),
    'K': ('machine', 'K'),
    'Tm': ('machine', 'T_m'),
    'Qset': ('machine', 'Q_set'),
    'vset': ('machine', 'v_set'),
    'umin': ('machine', 'u_min'),
    'umax': ('machine', 'u_max'),
    'eps': ('machine', 'eps'),
    'V': ('grid', 'V'),
    'wg': ('grid', 'w_g'),
    'wn': ('grid', 'w_n'),
}

NULLABLE_KEYS = frozenset({'umin', 'umax', 'eps'})


class AppConfig:
    """Runtime configuration loaded from environment variables."""

    def __init__(self):
        self.log_level = os.getenv('LOG_LEVEL', 'INFO')
        self.threads = self._get_int('SYNCH_THREADS', 1)
        self.output_dir = os.getenv('SYNCH_OUTPUT_DIR', 'results')
        self.error_log: Optional[str] = os.getenv('SYNCH_ERROR_LOG') or None
        self.tol_margin = self._get_float('SYNCH_TOL_MARGIN', 1e-6)

    @staticmethod
    def _get_int(key: str, default: int) -> int:
        raw = os.getenv(key)
        if raw is None or raw == '':
            return default
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"{key} must be an integer, got {raw!r}")

    @staticmethod
    def _get_float(key: str, default: float) -> float:
        raw = os.getenv(key)
        if raw is None or raw == '':
            return default
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(f"{key} must be a number, got {raw!r}")

    def validate(self) -> None:
        """Validate the configuration."""
        if self.threads <= 0:
            raise ConfigError("SYNCH_THREADS must be a positive integer")

        if not (self.tol_margin >= 0 and math.isfinite(self.tol_margin)):
            raise ConfigError("SYNCH_TOL_MARGIN must be a non-negative number")

        valid_log_levels = ['DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL']
        if self.log_level.upper() not in valid_log_levels:
            raise ConfigError(f"LOG_LEVEL must be one of: {', '.join(valid_log_levels)}")


def parse_model_config(data: Dict[str, Any], source: str = '<dict>') -> Tuple[SynchronverterParams, GridParams]:
    """Build validated parameter records from a decoded JSON document."""
    if not isinstance(data, dict):
        raise ConfigError(f"{source}: top-level JSON value must be an object")

    missing = sorted(set(PARAMETER_KEYS) - set(data))
    unknown = sorted(set(data) - set(PARAMETER_KEYS))
    if missing:
        raise ConfigError(f"{source}: missing keys: {', '.join(missing)}")
    if unknown:
        raise ConfigError(f"{source}: unknown keys: {', '.join(unknown)}")

    fields: Dict[str, Dict[str, Optional[float]]] = {'machine': {}, 'grid': {}}
    for key, (record, attribute) in PARAMETER_KEYS.items():
        value = data[key]
        if value is None and key in NULLABLE_KEYS:
            fields[record][attribute] = None
            continue
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{source}: key {key} must be a number, got {value!r}")
        if not math.isfinite(value):
            raise ConfigError(f"{source}: key {key} must be finite")
        fields[record][attribute] = float(value)

    params = SynchronverterParams(**fields['machine'])
    grid = GridParams(**fields['grid'])
    params.validate()
    grid.validate()
    return params, grid


def load_model_config(path: Union[str, Path]) -> Tuple[SynchronverterParams, GridParams]:
    """Read a JSON parameter file."""
    path = Path(path)
    try:
        with path.open('r', encoding='utf-8') as handle:
            data = json.load(handle)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON: {e}")

    params, grid = parse_model_config(data, source=str(path))
    logger.info(f"Loaded model configuration from {path}")
    return params, grid


def model_config_to_dict(params: SynchronverterParams, grid: GridParams) -> Dict[str, Optional[float]]:
    """Inverse of parse_model_config."""
    records = {'machine': params, 'grid': grid}
    return {key: getattr(records[record], attribute) for key, (record, attribute) in PARAMETER_KEYS.items()}


# Global configuration instance
config = AppConfig()

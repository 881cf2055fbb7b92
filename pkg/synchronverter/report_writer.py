"""
Deterministic serialization of results: 9 significant digits, sorted JSON
keys, '\\n' line endings and the parameter hash in every file.
"""

import csv
import hashlib
import json
import logging
import math
import numbers
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

from .config import model_config_to_dict
from .models import GridParams, SynchronverterParams

logger = logging.getLogger(__name__)

SIGNIFICANT_DIGITS = 9


def format_number(value: Any) -> str:
    """Locale-independent text for a CSV cell."""
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, Enum):
        return str(value.value)
    if isinstance(value, numbers.Real):
        value = float(value)
        if math.isnan(value):
            return 'nan'
        if math.isinf(value):
            return 'inf' if value > 0 else '-inf'
        if value == 0.0:
            return '0'
        return f"{value:.{SIGNIFICANT_DIGITS}g}"
    return str(value)


def round_floats(document: Any) -> Any:
    """Round every float of a JSON-like document to 9 significant digits; NaN/inf become null."""
    if isinstance(document, bool) or document is None:
        return document
    if isinstance(document, Enum):
        return document.value
    if isinstance(document, float):
        if not math.isfinite(document):
            return None
        rounded = float(f"{document:.{SIGNIFICANT_DIGITS}g}")
        return 0.0 if rounded == 0.0 else rounded
    if isinstance(document, complex):
        return [round_floats(document.real), round_floats(document.imag)]
    if isinstance(document, dict):
        return {str(key): round_floats(value) for key, value in document.items()}
    if isinstance(document, (list, tuple)):
        return [round_floats(item) for item in document]
    if hasattr(document, 'item'):
        return round_floats(document.item())
    return document


def parameter_hash(params: SynchronverterParams, grid: GridParams, subcommand: str,
                   options: Optional[Dict[str, Any]] = None) -> str:
    """sha256 over the canonical parameter set, the subcommand and its options."""
    payload = {
        'parameters': round_floats(model_config_to_dict(params, grid)),
        'subcommand': subcommand,
        'options': round_floats(options or {}),
    }
    canonical = json.dumps(payload, sort_keys=True, separators=(',', ':'))
    return hashlib.sha256(canonical.encode('utf-8')).hexdigest()


@dataclass
class RunManifest:
    """Provenance of one CLI run."""
    config_path: str
    subcommand: str
    parameter_hash: str
    tool_version: str
    outputs: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'config_path': self.config_path,
            'subcommand': self.subcommand,
            'parameter_hash': self.parameter_hash,
            'tool_version': self.tool_version,
            'outputs': sorted(self.outputs),
        }


class ReportWriter:
    """Writes the files of one run into an output directory and records them in the manifest."""

    def __init__(self, out_dir: Union[str, Path], manifest: RunManifest):
        self.out_dir = Path(out_dir)
        self.manifest = manifest

    def _path(self, name: str) -> Path:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        return self.out_dir / name

    def write_json(self, name: str, document: Dict[str, Any]) -> Path:
        path = self._path(name)
        body = dict(document)
        body['parameter_hash'] = self.manifest.parameter_hash
        text = json.dumps(round_floats(body), sort_keys=True, indent=2, ensure_ascii=False) + '\n'
        with path.open('w', encoding='utf-8', newline='\n') as handle:
            handle.write(text)
        self._register(name)
        logger.info(f"Wrote {path}")
        return path

    def write_csv(self, name: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
        path = self._path(name)
        with path.open('w', encoding='utf-8', newline='') as handle:
            handle.write(f"# parameter_hash: {self.manifest.parameter_hash}\n")
            writer = csv.writer(handle, lineterminator='\n')
            writer.writerow(header)
            for row in rows:
                writer.writerow([format_number(value) for value in row])
        self._register(name)
        logger.info(f"Wrote {path}")
        return path

    def _register(self, name: str) -> None:
        if name not in self.manifest.outputs:
            self.manifest.outputs.append(name)

    def write_manifest(self) -> Path:
        path = self._path('manifest.json')
        text = json.dumps(self.manifest.to_dict(), sort_keys=True, indent=2) + '\n'
        with path.open('w', encoding='utf-8', newline='\n') as handle:
            handle.write(text)
        return path

# src/ui/output.py
"""JSON and CSV emission with a fixed layout so identical runs diff clean"""
from dataclasses import asdict, is_dataclass
from enum import Enum
from typing import Any, Dict, Optional
import json
import sys

import numpy as np
import pandas as pd

from src.core.config import RunManifest
from src.utils import finite_or_none


def to_jsonable(obj: Any) -> Any:
    """Dataclasses, enums, tuples and numpy scalars to plain JSON values (field order kept)"""
    if is_dataclass(obj) and not isinstance(obj, type):
        return to_jsonable(asdict(obj))
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, dict):
        return {str(key): to_jsonable(value) for key, value in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(value) for value in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(value) for value in obj.tolist()]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return finite_or_none(float(obj))
    return obj


def manifest_dict(manifest: RunManifest) -> Dict[str, Any]:
    return {
        "subcommand": manifest.subcommand,
        "params": to_jsonable(manifest.params),
        "cfg": to_jsonable(manifest.cfg.resolved(manifest.params.omega)),
        "tolerances": to_jsonable(manifest.tolerances),
        "output_path": manifest.output_path,
        "format": manifest.format,
        "options": to_jsonable(manifest.options),
    }


def _write_text(text: str, path: str) -> None:
    if path in ("-", ""):
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(text)


def render_json(manifest: RunManifest, result: Any, diagnostics: Optional[Dict[str, Any]] = None) -> str:
    document = {
        "manifest": manifest_dict(manifest),
        "result": to_jsonable(result),
        "diagnostics": to_jsonable(diagnostics or {}),
    }
    return json.dumps(document, indent=2, allow_nan=False) + "\n"


def render_csv(manifest: RunManifest, frame: pd.DataFrame) -> str:
    """Manifest as '# '-prefixed JSON comment lines, then the header and rows; NaN -> empty field"""
    header = json.dumps(manifest_dict(manifest), allow_nan=False)
    body = frame.to_csv(index=False, na_rep="", lineterminator="\n")
    return f"# manifest: {header}\n{body}"


def write_output(
    manifest: RunManifest,
    result: Any,
    frame: pd.DataFrame,
    diagnostics: Optional[Dict[str, Any]] = None,
) -> None:
    """Emit in the manifest's format to its output path ('-' is stdout)"""
    if manifest.format == "csv":
        text = render_csv(manifest, frame)
    else:
        text = render_json(manifest, result, diagnostics)
    _write_text(text, manifest.output_path)

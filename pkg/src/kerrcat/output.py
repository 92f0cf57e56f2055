"""Data-file emission with sidecar metadata."""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .config import config_hash


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    v = float(v)
    if math.isnan(v):
        return ""
    return "%.17g" % v


def _json_value(v):
    if isinstance(v, str):
        return v
    v = float(v)
    return None if math.isnan(v) else v


def write_table(out_dir: Path, stem: str, columns: dict, cfg: dict, command: str,
                fmt: str = "csv") -> Path:
    """Write equal-length columns as CSV or JSON plus ``<file>.meta.json``.

    CSV values use 17 significant digits and an empty field for NaN; JSON
    uses ``null``. The sidecar holds the resolved config and its SHA-256 so
    the data file itself stays free of run-specific text.
    """
    out_dir.mkdir(parents=True, exist_ok=True)
    names = list(columns)
    cols = [c if isinstance(c, list) else np.asarray(c).tolist() for c in columns.values()]
    n = len(cols[0]) if cols else 0
    if any(len(c) != n for c in cols):
        raise ValueError(f"{stem}: columns differ in length")
    path = out_dir / f"{stem}.{fmt}"
    if fmt == "csv":
        lines = [",".join(names)]
        lines += [",".join(_fmt(c[i]) for c in cols) for i in range(n)]
        path.write_text("\n".join(lines) + "\n")
    elif fmt == "json":
        body = {name: [_json_value(v) for v in c] for name, c in zip(names, cols)}
        path.write_text(json.dumps(body, indent=1) + "\n")
    else:
        raise ValueError(f"unknown format {fmt!r}")
    write_meta(path, cfg, command, {"columns": names, "rows": n})
    return path


def write_json(out_dir: Path, name: str, payload: dict, cfg: dict, command: str) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / name
    path.write_text(json.dumps(_clean(payload), indent=2, sort_keys=True) + "\n")
    write_meta(path, cfg, command, {})
    return path


def write_meta(path: Path, cfg: dict, command: str, extra: dict) -> Path:
    from . import __version__

    meta = {"command": command, "config": cfg, "config_hash": config_hash(cfg),
            "version": __version__, **extra}
    meta_path = path.with_name(path.name + ".meta.json")
    meta_path.write_text(json.dumps(_clean(meta), indent=2, sort_keys=True) + "\n")
    return meta_path


def _clean(obj):
    """Recursively turn numpy scalars into Python ones and NaN into None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return None if math.isnan(f) else f
    return obj

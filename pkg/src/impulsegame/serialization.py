"""JSON config ingestion and deterministic JSON/CSV export."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .errors import ParameterError, ScheduleError
from .model import GameParameters, params_from_mapping


def parse_config(doc) -> tuple:
    """(params, instants) from a ``{"params": {...}, "instants": [...]}`` mapping."""
    if not isinstance(doc, dict):
        raise ParameterError("config must be a JSON object")
    unknown = set(doc) - {"params", "instants"}
    if unknown:
        raise ParameterError(f"unknown config keys: {sorted(unknown)}")
    if "params" not in doc:
        raise ParameterError("config needs a 'params' object")
    p = params_from_mapping(doc["params"])
    instants = doc.get("instants", [])
    if not isinstance(instants, list) or not all(
            isinstance(t, (int, float)) and not isinstance(t, bool) for t in instants):
        raise ScheduleError("'instants' must be a list of numbers")
    return p, [float(t) for t in instants]


def load_config(path) -> tuple:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParameterError(f"config is not valid JSON: {exc}") from exc
    return parse_config(doc)


def config_document(p: GameParameters, instants=()) -> dict:
    doc = {"params": p.to_dict()}
    if instants:
        doc["instants"] = [float(t) for t in instants]
    return doc


def _clean(obj):
    # json has no NaN/inf; numpy scalars are not serializable as-is
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), indent=2, allow_nan=False) + "\n"


def solution_document(sol, mode: str) -> dict:
    doc = sol.to_dict()
    doc["mode"] = mode
    return doc


def alpha2_band_csv(sol, n_per_segment: int = 200) -> str:
    """alpha2 samples with the +-gamma impulse thresholds alongside."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "alpha2", "lower", "upper", "side"])
    for t, value, side in sol.alpha2.sample_rows(n_per_segment):
        w.writerow([repr(float(t)), repr(float(value)), repr(-sol.gamma), repr(sol.gamma), side])
    return buf.getvalue()

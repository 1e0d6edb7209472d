"""Dataset, moment, trace and report files.

Trace CSV columns: ``step``, the sample (``state_index`` for enumerable spaces, otherwise one
column per variable), ``w_norm``, ``w_inf_norm``, ``pct`` and the weight components
``w0..w{K-1}`` which are only filled on snapshot rows. Row 0 carries the initial weights and no
sample. A sidecar ``<path>.meta.json`` holds the run config, the running feature sum and the
state space. Floats are written in shortest round-trip form.
"""

from __future__ import annotations

import json
import logging
import re
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd

from .conditional import LabeledDataset
from .config import RunConfig
from .exceptions import DatasetParseError, DimensionMismatchError
from .state_space import StateSpace
from .trace import HerdingTrace

log = logging.getLogger(__name__)

META_SUFFIX = ".meta.json"
_LINE_PATTERN = re.compile(r"line (\d+)")


def meta_path(path: Path) -> Path:
    return path.with_name(path.name + META_SUFFIX)


def _read_csv(path: Path) -> pd.DataFrame:
    try:
        frame = pd.read_csv(path, skipinitialspace=True)
    except pd.errors.ParserError as e:
        match = _LINE_PATTERN.search(str(e))
        line = int(match.group(1)) if match else None
        log.error("Could not parse %s: %s", path, e)
        raise DatasetParseError(f"{path}: ragged or malformed row", line=line) from e
    except pd.errors.EmptyDataError as e:
        raise DatasetParseError(f"{path}: file is empty") from e
    missing = frame.isna().any(axis=1).to_numpy()
    if missing.any():
        # header is line 1
        line = int(np.flatnonzero(missing)[0]) + 2
        log.error("Missing values in %s at line %d", path, line)
        raise DatasetParseError(f"{path}: missing values", line=line)
    return frame


def _numeric(frame: pd.DataFrame, path: Path) -> pd.DataFrame:
    converted = frame.apply(pd.to_numeric, errors="coerce")
    bad = converted.isna().any(axis=1).to_numpy()
    if bad.any():
        line = int(np.flatnonzero(bad)[0]) + 2
        raise DatasetParseError(f"{path}: non-numeric value", line=line)
    return converted


def read_dataset(path: Path | str) -> LabeledDataset | np.ndarray:
    """Labelled CSV (first column ``label``) or an unlabelled +-1 matrix.

    The +-1 matrix is returned as variable values (-1 -> 0, +1 -> 1) for POMRF herding.

    Raises:
        DatasetParseError: malformed rows; the message names the line
        DimensionMismatchError: no feature columns
    """
    path = Path(path)
    frame = _numeric(_read_csv(path), path)
    if len(frame.columns) == 0 or (frame.columns[0] == "label" and len(frame.columns) < 2):
        raise DimensionMismatchError(f"{path}: no feature columns")
    if frame.columns[0] == "label":
        labels = frame["label"].to_numpy()
        if not np.all(labels == np.round(labels)) or np.any(labels < 0):
            line = int(np.flatnonzero((labels != np.round(labels)) | (labels < 0))[0]) + 2
            raise DatasetParseError(f"{path}: labels must be nonnegative integers", line=line)
        dataset = LabeledDataset(frame.iloc[:, 1:].to_numpy(dtype=np.float64), labels.astype(np.int64))
        log.info("Read %d labelled cases with %d features from %s", len(dataset), dataset.input_dim, path)
        return dataset
    values = frame.to_numpy()
    invalid = ~np.isin(values, (-1, 1)).all(axis=1)
    if invalid.any():
        raise DatasetParseError(f"{path}: visible data must be -1/+1", line=int(np.flatnonzero(invalid)[0]) + 2)
    log.info("Read %d visible cases with %d variables from %s", len(values), values.shape[1], path)
    return ((values.astype(np.int64) + 1) // 2).astype(np.int64)


def read_moments(path: Path | str) -> tuple[tuple[str, ...], np.ndarray]:
    """CSV with columns ``name,value``, one row per moment."""
    path = Path(path)
    frame = _read_csv(path)
    if list(frame.columns[:2]) != ["name", "value"]:
        raise DatasetParseError(f"{path}: expected header 'name,value'", line=1)
    values = _numeric(frame[["value"]], path)["value"].to_numpy(dtype=np.float64)
    return tuple(str(name) for name in frame["name"]), values


def write_trace(
    trace: HerdingTrace, path: Path | str, config: RunConfig | None = None, **metadata: Any
) -> Path:
    path = Path(path)
    columns = _trace_frame(trace)
    columns.to_csv(path, index=False, lineterminator="\n")
    meta = {
        "config": config.to_dict() if config is not None else None,
        "cardinalities": list(trace.space.cardinalities),
        "names": list(trace.space.names),
        "steps": trace.steps,
        "dim": int(len(trace.initial_weights)),
        "running_feature_sum": trace.running_feature_sum.tolist(),
        "pct_violations": list(trace.pct_violations),
        "trace_metadata": trace.metadata,
        "created": datetime.now(timezone.utc).isoformat(),
        **metadata,
    }
    meta_path(path).write_text(json.dumps(meta, indent=2, default=_json_default), encoding="utf-8")
    log.info("Wrote trace with %d steps to %s", trace.steps, path)
    return path


def _trace_frame(trace: HerdingTrace) -> pd.DataFrame:
    dim = len(trace.initial_weights)
    weight_columns = [f"w{k}" for k in range(dim)]
    if trace.space.enumerable:
        sample_columns = ["state_index"]
    else:
        sample_columns = list(trace.space.names)
    header = ["step", *sample_columns, "w_norm", "w_inf_norm", "pct", *weight_columns]
    if trace.steps == 0:
        return pd.DataFrame(columns=header)

    n_rows = trace.steps + 1
    frame = pd.DataFrame({"step": np.arange(n_rows)})
    if trace.space.enumerable:
        frame["state_index"] = pd.array(np.concatenate([[0], trace.state_indices]), dtype="Int64")
        frame.loc[0, "state_index"] = pd.NA
    else:
        for position, name in enumerate(sample_columns):
            frame[name] = pd.array(np.concatenate([[0], trace.samples[:, position]]), dtype="Int64")
            frame.loc[0, name] = pd.NA
    frame["w_norm"] = trace.weight_norms
    frame["w_inf_norm"] = trace.weight_inf_norms
    pct = np.zeros(n_rows, dtype=np.int64)
    pct[np.asarray(trace.pct_violations, dtype=np.int64)] = 1
    frame["pct"] = pct
    weights = np.full((n_rows, dim), np.nan)
    weights[trace.snapshot_steps] = trace.snapshot_weights
    for k, name in enumerate(weight_columns):
        frame[name] = weights[:, k]
    return frame[header]


def read_trace(path: Path | str) -> tuple[HerdingTrace, dict[str, Any]]:
    """Inverse of ``write_trace``; returns the trace and the sidecar metadata."""
    path = Path(path)
    meta = json.loads(meta_path(path).read_text(encoding="utf-8"))
    space = StateSpace(meta["cardinalities"], meta.get("names"))
    dim = int(meta["dim"])
    frame = pd.read_csv(path, float_precision="round_trip")
    weight_columns = [f"w{k}" for k in range(dim)]
    if len(frame) == 0:
        empty = np.zeros((0, dim))
        trace = HerdingTrace(
            space=space,
            samples=np.zeros((0, space.n_variables), dtype=np.int64),
            running_feature_sum=np.asarray(meta["running_feature_sum"], dtype=np.float64),
            snapshot_steps=np.zeros(0, dtype=np.int64),
            snapshot_weights=empty,
            pct_violations=list(meta["pct_violations"]),
            weight_norms=np.zeros(0),
            weight_inf_norms=np.zeros(0),
            initial_weights=np.zeros(dim),
            final_weights=np.zeros(dim),
            metadata=meta.get("trace_metadata") or {},
        )
        return trace, meta
    body = frame.iloc[1:]
    if "state_index" in frame.columns:
        samples = space.assignments[body["state_index"].to_numpy(dtype=np.int64)]
    else:
        samples = body[list(space.names)].to_numpy(dtype=np.int64)
    if not set(weight_columns) <= set(frame.columns):
        raise DimensionMismatchError(f"{path}: expected {dim} weight columns")
    weights = frame[weight_columns].to_numpy(dtype=np.float64)
    snapshot_rows = np.flatnonzero(~np.isnan(weights).any(axis=1))
    trace = HerdingTrace(
        space=space,
        samples=np.ascontiguousarray(samples, dtype=np.int64),
        running_feature_sum=np.asarray(meta["running_feature_sum"], dtype=np.float64),
        snapshot_steps=frame["step"].to_numpy(dtype=np.int64)[snapshot_rows],
        snapshot_weights=weights[snapshot_rows],
        pct_violations=list(meta["pct_violations"]),
        weight_norms=frame["w_norm"].to_numpy(dtype=np.float64),
        weight_inf_norms=frame["w_inf_norm"].to_numpy(dtype=np.float64),
        initial_weights=weights[0].copy(),
        final_weights=weights[-1].copy(),
        metadata=meta.get("trace_metadata") or {},
    )
    return trace, meta


def write_table(frame: pd.DataFrame, path: Path | str, config: RunConfig | None = None, **metadata: Any) -> Path:
    """Plain CSV result table with a metadata sidecar."""
    path = Path(path)
    frame.to_csv(path, index=False, lineterminator="\n")
    meta = {
        "config": config.to_dict() if config is not None else None,
        "created": datetime.now(timezone.utc).isoformat(),
        **metadata,
    }
    meta_path(path).write_text(json.dumps(meta, indent=2, default=_json_default), encoding="utf-8")
    log.info("Wrote %d rows to %s", len(frame), path)
    return path


def write_report(report: dict[str, Any], path: Path | str, config: RunConfig | None = None) -> Path:
    path = Path(path)
    content = dict(report)
    if config is not None:
        content["config"] = config.to_dict()
    path.write_text(json.dumps(content, indent=2, default=_json_default), encoding="utf-8")
    log.info("Wrote report to %s", path)
    return path


def _json_default(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")

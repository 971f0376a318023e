"""On-disk formats: dataset CSV (+ JSON sidecar), model files, sweep result files.

Floats are written with ``repr``, the shortest decimal string that parses back
to the same double, so every matrix round-trips bit-exactly.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import asdict
from pathlib import Path
from typing import Optional

import numpy as np

from .core import ApcaModel
from .data import Dataset
from .errors import DataFormatError
from .evaluation import ComparisonRow, SweepRecord, SweepResult

MODEL_FORMAT = "apca-model"
MODEL_VERSION = 1
RESULT_FORMAT = "apca-sweep"
RESULT_VERSION = 1
LABEL_COLUMNS = {"target": "labels", "confound": "confound_labels"}


def _fmt(x: float) -> str:
    return repr(float(x))


# --------------------------------------------------------------------------
# datasets


def dataset_to_csv(dataset: Dataset) -> str:
    xnames = dataset.primary_names or [f"x{i}" for i in range(dataset.d_primary)]
    ynames = dataset.concomitant_names or [f"y{i}" for i in range(dataset.d_concomitant)]
    header = [f"primary:{n}" for n in xnames] + [f"concomitant:{n}" for n in ynames]
    label_cols = [(name, getattr(dataset, attr)) for name, attr in LABEL_COLUMNS.items()
                  if getattr(dataset, attr) is not None]
    header += [f"label:{name}" for name, _ in label_cols]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for j in range(dataset.n_samples):
        row = [_fmt(v) for v in dataset.primary[:, j]] + [_fmt(v) for v in dataset.concomitant[:, j]]
        row += [str(int(lab[j])) for _, lab in label_cols]
        writer.writerow(row)
    return buf.getvalue()


def write_dataset(dataset: Dataset, path, sidecar: Optional[dict] = None) -> None:
    path = Path(path)
    path.write_text(dataset_to_csv(dataset))
    if sidecar is not None:
        Path(str(path) + ".json").write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n")


def read_dataset(path) -> Dataset:
    """Parse a dataset CSV; errors carry the offending line number."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise DataFormatError(f"{path}: {exc}") from exc
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise DataFormatError(f"{path}: empty file")
    header = rows[0]
    kinds = []
    for col, name in enumerate(header):
        kind, sep, rest = name.partition(":")
        if not sep or kind not in ("primary", "concomitant", "label"):
            raise DataFormatError(f"{path}:1: column {col + 1} header {name!r} lacks a "
                                  "primary:/concomitant:/label: prefix")
        if kind == "label" and rest not in LABEL_COLUMNS:
            raise DataFormatError(f"{path}:1: unknown label column {name!r}")
        kinds.append((kind, rest))
    values = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise DataFormatError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
        try:
            values.append([float(v) for v in row])
        except ValueError as exc:
            raise DataFormatError(f"{path}:{lineno}: {exc}") from exc
    if not values:
        raise DataFormatError(f"{path}: no data rows")
    M = np.array(values)
    if not np.isfinite(M).all():
        bad = int(np.argwhere(~np.isfinite(M))[0, 0]) + 2
        raise DataFormatError(f"{path}:{bad}: non-finite value")
    cols = {k: [i for i, (kind, _) in enumerate(kinds) if kind == k]
            for k in ("primary", "concomitant", "label")}
    if not cols["primary"] or not cols["concomitant"]:
        raise DataFormatError(f"{path}:1: need at least one primary and one concomitant column")
    labels = {}
    for i in cols["label"]:
        labels[LABEL_COLUMNS[kinds[i][1]]] = M[:, i].astype(int)
    try:
        return Dataset(
            primary=M[:, cols["primary"]].T,
            concomitant=M[:, cols["concomitant"]].T,
            primary_names=[kinds[i][1] for i in cols["primary"]],
            concomitant_names=[kinds[i][1] for i in cols["concomitant"]],
            **labels,
        )
    except ValueError as exc:
        raise DataFormatError(f"{path}: {exc}") from exc


def dataset_digest(dataset: Dataset) -> str:
    return hashlib.sha256(dataset_to_csv(dataset).encode()).hexdigest()


# --------------------------------------------------------------------------
# models


def _matrix(a: np.ndarray) -> dict:
    a = np.asarray(a, dtype=float)
    return {"shape": list(a.shape), "data": [float(v) for v in a.ravel()]}


def _unmatrix(entry, name: str) -> np.ndarray:
    try:
        shape = tuple(int(s) for s in entry["shape"])
        data = np.array(entry["data"], dtype=float)
        return data.reshape(shape)
    except (KeyError, TypeError, ValueError) as exc:
        raise DataFormatError(f"model field {name!r} is malformed: {exc}") from exc


_MODEL_MATRICES = ("encoder", "primary_loadings", "adversary_loadings",
                   "center_primary", "center_concomitant", "eigenvalues")


def model_to_json(model: ApcaModel, provenance: Optional[dict] = None) -> str:
    doc = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "mu": float(model.mu),
        "mu_star": float(model.mu_star),
        "n_factors": int(model.n_factors),
        "joint_loadings": _matrix(model.joint_loadings),
        "provenance": provenance or {},
    }
    for name in _MODEL_MATRICES:
        doc[name] = _matrix(getattr(model, name))
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def save_model(model: ApcaModel, path, provenance: Optional[dict] = None) -> None:
    Path(path).write_text(model_to_json(model, provenance))


def load_model(path) -> ApcaModel:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise DataFormatError(f"{path}: {exc}") from exc
    if doc.get("format") != MODEL_FORMAT:
        raise DataFormatError(f"{path}: not an {MODEL_FORMAT} file")
    if doc.get("version") != MODEL_VERSION:
        raise DataFormatError(
            f"{path}: model format version {doc.get('version')!r} != supported {MODEL_VERSION}")
    kwargs = {name: _unmatrix(doc.get(name), name) for name in _MODEL_MATRICES}
    try:
        return ApcaModel(mu=float(doc["mu"]), n_factors=int(doc["n_factors"]), **kwargs)
    except (KeyError, ValueError) as exc:
        raise DataFormatError(f"{path}: {exc}") from exc


# --------------------------------------------------------------------------
# sweep results


def _record_to_dict(r: SweepRecord) -> dict:
    d = asdict(r)
    d["factor_confound_correlations"] = [list(row) for row in r.factor_confound_correlations]
    return d


def _record_from_dict(d: dict) -> SweepRecord:
    d = dict(d)
    d["factor_confound_correlations"] = tuple(tuple(float(v) for v in row)
                                              for row in d["factor_confound_correlations"])
    return SweepRecord(**d)


def result_to_json(result: SweepResult, comparison=None, extra_metadata: Optional[dict] = None) -> str:
    metadata = dict(result.metadata)
    metadata.update(extra_metadata or {})
    doc = {
        "format": RESULT_FORMAT,
        "version": RESULT_VERSION,
        "experiment": result.experiment,
        "metadata": metadata,
        "n_records": len(result.records),
        "records": [_record_to_dict(r) for r in result.records],
    }
    if comparison is not None:
        doc["comparison"] = [asdict(row) for row in comparison]
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def save_result(result: SweepResult, path, comparison=None, extra_metadata=None) -> None:
    Path(path).write_text(result_to_json(result, comparison, extra_metadata))


def load_result(path):
    """Return ``(SweepResult, comparison_rows_or_None)``."""
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise DataFormatError(f"{path}: {exc}") from exc
    if doc.get("format") != RESULT_FORMAT or doc.get("version") != RESULT_VERSION:
        raise DataFormatError(f"{path}: unsupported result format/version")
    records = tuple(_record_from_dict(r) for r in doc["records"])
    if len(records) != doc.get("n_records"):
        raise DataFormatError(f"{path}: record count mismatch")
    result = SweepResult(experiment=doc["experiment"], records=records, metadata=doc["metadata"])
    comparison = doc.get("comparison")
    if comparison is not None:
        comparison = [ComparisonRow(**row) for row in comparison]
    return result, comparison


CURVE_SERIES = ("auc_target", "auc_confound", "primary_recon_error",
                "concomitant_recon_error", "max_abs_correlation")


def curves_to_csv(result: SweepResult) -> str:
    """Tidy long-format curves with columns ``mu, series, value``."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["mu", "series", "value"])
    for series in CURVE_SERIES:
        for r in result.records:
            value = getattr(r, series)
            if value is None:
                continue
            writer.writerow([_fmt(r.mu), series, _fmt(value)])
    return buf.getvalue()

"""Tensor files, CSV predictions and canonical JSON reports.

Tensor file layout (little endian)::

    8 bytes   b"CALIMTR1"
    4 bytes   uint32 header length H
    H bytes   UTF-8 JSON {"dtype": "f32"|"i32", "shape": [...], "role": ..., "class_names": [...]}
    payload   row-major values, prod(shape) * 4 bytes
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import struct
from pathlib import Path
from typing import Any, Optional

import jsonschema
import numpy as np

from .core import CalibrationDataError, PredictionSet, validate

MAGIC = b"CALIMTR1"
DTYPES = {"f32": np.dtype("<f4"), "i32": np.dtype("<i4")}
ROLES = ("logits", "probs", "labels")


class TensorFileError(CalibrationDataError):
    pass


class BadMagic(TensorFileError):
    pass


class HeaderParse(TensorFileError):
    pass


class PayloadSizeMismatch(TensorFileError):
    pass


class CsvFormatError(CalibrationDataError):
    pass


class RaggedRows(CsvFormatError):
    pass


class NonNumericCell(CsvFormatError):
    pass


class UnknownHeader(CsvFormatError):
    pass


class UnwritablePath(OSError):
    pass


# -- tensors ---------------------------------------------------------------


def encode_tensor(array, role: str, class_names=None, meta: Optional[dict] = None) -> bytes:
    if role not in ROLES:
        raise ValueError(f"unknown role {role!r}")
    if role == "labels":
        a = np.asarray(array)
        if a.ndim != 1:
            raise ValueError("labels tensors are 1-D")
        dtype = "i32"
    else:
        a = np.asarray(array)
        if a.ndim != 2:
            raise ValueError(f"{role} tensors are 2-D")
        dtype = "f32"
    header: dict[str, Any] = {"dtype": dtype, "role": role, "shape": list(a.shape)}
    if class_names is not None:
        header["class_names"] = [str(c) for c in class_names]
    if meta:
        header["meta"] = meta
    hbytes = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    payload = np.ascontiguousarray(a, dtype=DTYPES[dtype]).tobytes()
    return MAGIC + struct.pack("<I", len(hbytes)) + hbytes + payload


def decode_tensor(buf: bytes) -> tuple[np.ndarray, dict]:
    if len(buf) < 12 or buf[:8] != MAGIC:
        raise BadMagic("not a CALIMTR1 tensor file")
    (hlen,) = struct.unpack("<I", buf[8:12])
    if 12 + hlen > len(buf):
        raise HeaderParse("header runs past end of file")
    try:
        header = json.loads(buf[12 : 12 + hlen].decode("utf-8"))
        dtype = DTYPES[header["dtype"]]
        shape = [int(d) for d in header["shape"]]
        role = header["role"]
    except (UnicodeDecodeError, json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
        raise HeaderParse(f"bad tensor header: {e}") from e
    if role not in ROLES or any(d < 0 for d in shape):
        raise HeaderParse(f"bad role or shape in header: {role!r}, {shape}")
    if (role == "labels") != (len(shape) == 1) or len(shape) not in (1, 2):
        raise HeaderParse(f"role {role!r} does not fit shape {shape}")
    if (role == "labels") != (header["dtype"] == "i32"):
        raise HeaderParse(f"role {role!r} does not fit dtype {header['dtype']!r}")
    payload = buf[12 + hlen :]
    expected = math.prod(shape) * dtype.itemsize
    if len(payload) != expected:
        raise PayloadSizeMismatch(f"payload has {len(payload)} bytes, header implies {expected}")
    return np.frombuffer(payload, dtype=dtype).reshape(shape).copy(), header


def write_tensor(path, array, role: str, class_names=None, meta: Optional[dict] = None) -> None:
    _write_bytes(Path(path), encode_tensor(array, role, class_names, meta))


def read_tensor(path) -> tuple[np.ndarray, dict]:
    """Array (float32 or int32, native order) and its header."""
    return decode_tensor(Path(path).read_bytes())


def load_prediction_files(paths) -> list[tuple[np.ndarray, dict]]:
    return [read_tensor(p) for p in paths]


def predictions_from_tensors(scores: np.ndarray, header: dict, labels: np.ndarray) -> PredictionSet:
    kw = {header["role"]: scores.astype(np.float64)}
    return validate(PredictionSet(labels=labels.astype(np.int64), class_names=header.get("class_names"), **kw))


def write_prediction_set(directory, s: PredictionSet, meta: Optional[dict] = None, role: str = "logits") -> tuple[Path, Path]:
    """Write ``preds.cal`` and ``labels.cal`` into ``directory``."""
    d = Path(directory)
    scores = s.logits if role == "logits" else s.probs
    pp, lp = d / "preds.cal", d / "labels.cal"
    write_tensor(pp, scores, role, s.class_names, meta)
    write_tensor(lp, s.labels, "labels", None, meta)
    return pp, lp


# -- csv -------------------------------------------------------------------


def read_csv_predictions(path) -> PredictionSet:
    """CSV with header ``label,p0,...`` (probabilities) or ``label,l0,...`` (logits)."""
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    if not rows:
        raise UnknownHeader("empty CSV")
    head = [h.strip() for h in rows[0]]
    k = len(head) - 1
    kind = None
    for prefix, role in (("p", "probs"), ("l", "logits")):
        if k >= 1 and head[0] == "label" and head[1:] == [f"{prefix}{i}" for i in range(k)]:
            kind = role
    if kind is None:
        raise UnknownHeader(f"unrecognised header {','.join(head)!r}")
    labels, values = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != k + 1:
            raise RaggedRows(f"line {lineno}: expected {k + 1} cells, got {len(row)}")
        try:
            lab = float(row[0])
            vals = [float(c) for c in row[1:]]
        except ValueError as e:
            raise NonNumericCell(f"line {lineno}: {e}") from e
        if lab != int(lab):
            raise NonNumericCell(f"line {lineno}: label {row[0]!r} is not an integer")
        labels.append(int(lab))
        values.append(vals)
    if not labels:
        raise RaggedRows("CSV has no data rows")
    return validate(PredictionSet(labels=np.array(labels), **{kind: np.array(values, dtype=np.float64)}))


# -- reports ---------------------------------------------------------------

REPORT_SCHEMA: dict = {
    "type": "object",
    "required": ["provenance"],
    "additionalProperties": False,
    "properties": {
        "metrics": {"type": "object", "additionalProperties": {"type": ["number", "null"]}},
        "reliability": {
            "type": "object",
            "additionalProperties": {
                "type": "object",
                "required": ["mode", "bins"],
                "properties": {
                    "mode": {"enum": ["confidence", "uncertainty"]},
                    "skewness": {"type": ["number", "null"]},
                    "bins": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "required": ["lo", "hi", "count", "mean_measure", "outcome_rate", "empty"],
                        },
                    },
                },
            },
        },
        "sparsification": {
            "type": "object",
            "additionalProperties": {
                "type": "object",
                "required": ["ause", "sorter", "merit", "fractions", "oracle", "method", "negative_area_flag"],
            },
        },
        "sweep": {
            "type": "object",
            "required": ["grid", "metrics", "normalized", "argmin_t"],
        },
        "classwise": {"type": "object"},
        "decoupling": {"type": "array"},
        "decomposition": {
            "type": "object",
            "required": ["means"],
            "properties": {
                "means": {
                    "type": "object",
                    "required": ["total", "aleatoric", "epistemic"],
                }
            },
        },
        "synth": {"type": "object"},
        "provenance": {
            "type": "object",
            "required": ["tool", "version", "config", "inputs", "prng"],
            "properties": {
                "inputs": {
                    "type": "array",
                    "items": {"type": "object", "required": ["path", "sha256"]},
                }
            },
        },
    },
}


def validate_report(report: dict) -> None:
    jsonschema.validate(report, REPORT_SCHEMA)


def _canon(obj, out: list[str]) -> None:
    if obj is None:
        out.append("null")
    elif obj is True or obj is False:
        out.append("true" if obj else "false")
    elif isinstance(obj, (bool, np.bool_)):
        out.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            raise ValueError(f"non-finite number {x} in report")
        out.append("0" if x == 0 else format(x, ".6g"))
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=False))
    elif isinstance(obj, dict):
        out.append("{")
        for i, key in enumerate(sorted(obj, key=str)):
            if i:
                out.append(",")
            out.append(json.dumps(str(key), ensure_ascii=False))
            out.append(":")
            _canon(obj[key], out)
        out.append("}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        out.append("[")
        for i, v in enumerate(obj.tolist() if isinstance(obj, np.ndarray) else obj):
            if i:
                out.append(",")
            _canon(v, out)
        out.append("]")
    else:
        raise TypeError(f"cannot serialise {type(obj).__name__} in a report")


def dumps_report(report: dict) -> str:
    """Canonical JSON: sorted keys, no whitespace, floats as ``%.6g``."""
    out: list[str] = []
    _canon(report, out)
    return "".join(out) + "\n"


def write_report(report: dict, path) -> None:
    validate_report(json.loads(dumps_report(report)))
    _write_bytes(Path(path), dumps_report(report).encode("utf-8"))


def read_report(path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_bytes(path: Path, data: bytes) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "wb") as f:
            f.write(data)
    except OSError as e:
        raise UnwritablePath(f"cannot write {path}: {e.strerror or e}") from e


def write_text(path, text: str) -> None:
    _write_bytes(Path(path), text.encode("utf-8"))

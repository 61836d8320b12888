"""JSON and CSV files for grid objects, results and reports.

Every document carries ``"schema": 1`` and a ``"type"`` tag. Infinite values
are written as the string ``"inf"`` so the files stay strict JSON. Writes go to
a temporary file in the target directory and are renamed into place.
"""

from __future__ import annotations

import json
import math
import os
import tempfile

import numpy as np

from . import __version__
from .geometry import GridFunction, GridSet

SCHEMA_VERSION = 1
ENCODINGS = ("rle", "dense")


class SchemaError(ValueError):
    """Document does not match the expected schema."""


def _num(x: float):
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return x


def _parse_num(x) -> float:
    if isinstance(x, str):
        if x in ("inf", "-inf", "nan"):
            return float(x)
        raise SchemaError(f"bad number {x!r}")
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise SchemaError(f"bad number {x!r}")
    return float(x)


def jsonable(obj):
    """Recursively replace non-finite floats and numpy scalars with JSON-safe values."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    return obj


def _runs(arr: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Start values and lengths of the maximal constant runs of ``arr``."""
    if arr.size == 0:
        return arr[:0], np.zeros(0, dtype=np.int64)
    change = np.flatnonzero(arr[1:] != arr[:-1]) + 1
    starts = np.concatenate([[0], change])
    lengths = np.diff(np.concatenate([starts, [arr.size]]))
    return arr[starts], lengths


def set_to_dict(E: GridSet, encoding: str = "rle") -> dict:
    """``rle`` data alternates run lengths of absent and present cells, starting absent."""
    doc = {"schema": SCHEMA_VERSION, "type": "GridSet", "n": E.n, "L": E.L, "encoding": encoding,
           "digest": E.digest()}
    if encoding == "dense":
        doc["data"] = E.cells.astype(int).tolist()
    elif encoding == "rle":
        vals, lengths = _runs(E.cells)
        data = lengths.tolist()
        if vals.size and vals[0]:
            data = [0] + data
        doc["data"] = data
    else:
        raise SchemaError(f"unknown encoding {encoding!r}; expected one of {ENCODINGS}")
    return doc


def function_to_dict(f: GridFunction, encoding: str = "dense") -> dict:
    """``rle`` data is a list of ``[value, count]`` pairs in row-major order."""
    doc = {"schema": SCHEMA_VERSION, "type": "GridFunction", "n": f.n, "L": f.L, "encoding": encoding,
           "digest": f.digest()}
    if encoding == "dense":
        doc["data"] = [_num(v) for v in f.values.tolist()]
    elif encoding == "rle":
        vals, lengths = _runs(f.values)
        doc["data"] = [[_num(v), int(k)] for v, k in zip(vals.tolist(), lengths.tolist())]
    else:
        raise SchemaError(f"unknown encoding {encoding!r}; expected one of {ENCODINGS}")
    return doc


def _header(doc: dict, kind: str) -> None:
    if not isinstance(doc, dict):
        raise SchemaError("document must be a JSON object")
    if doc.get("schema") != SCHEMA_VERSION:
        raise SchemaError(f"unsupported schema version {doc.get('schema')!r}; expected {SCHEMA_VERSION}")
    if doc.get("type") != kind:
        raise SchemaError(f"expected a {kind} document, got type {doc.get('type')!r}")
    for key in ("n", "L", "encoding", "data"):
        if key not in doc:
            raise SchemaError(f"{kind} document is missing {key!r}")
    if doc["encoding"] not in ENCODINGS:
        raise SchemaError(f"unknown encoding {doc['encoding']!r}; expected one of {ENCODINGS}")


def _check_digest(doc: dict, obj) -> None:
    if "digest" in doc and doc["digest"] != obj.digest():
        raise SchemaError("digest does not match the decoded data")


def set_from_dict(doc: dict) -> GridSet:
    _header(doc, "GridSet")
    n, L = int(doc["n"]), int(doc["L"])
    size = 1 << (n * L)
    data = doc["data"]
    if doc["encoding"] == "dense":
        cells = np.asarray(data, dtype=np.int64)
        if cells.size != size or not np.isin(cells, (0, 1)).all():
            raise SchemaError(f"dense GridSet data must be {size} zeros and ones")
        cells = cells.astype(bool)
    else:
        lengths = np.asarray(data, dtype=np.int64)
        if (lengths < 0).any() or lengths.sum() != size:
            raise SchemaError(f"rle GridSet run lengths must be nonnegative and sum to {size}")
        cells = np.repeat(np.arange(lengths.size) % 2 == 1, lengths)
    E = GridSet(n, L, cells)
    _check_digest(doc, E)
    return E


def function_from_dict(doc: dict) -> GridFunction:
    _header(doc, "GridFunction")
    n, L = int(doc["n"]), int(doc["L"])
    size = 1 << (n * L)
    if doc["encoding"] == "dense":
        vals = np.array([_parse_num(v) for v in doc["data"]], dtype=float)
    else:
        pairs = doc["data"]
        vals = np.repeat([_parse_num(v) for v, _ in pairs], [int(k) for _, k in pairs])
    if vals.size != size:
        raise SchemaError(f"GridFunction data has {vals.size} values, expected {size}")
    if (vals < 0).any() or np.isnan(vals).any():
        raise SchemaError("GridFunction values must be nonnegative numbers or 'inf'")
    f = GridFunction(n, L, vals)
    _check_digest(doc, f)
    return f


def load_grid(doc: dict) -> GridSet | GridFunction:
    """Decode a GridSet or GridFunction; operator results yield their output."""
    kind = doc.get("type") if isinstance(doc, dict) else None
    if kind == "OperatorResult" and isinstance(doc.get("output"), dict):
        return function_from_dict(doc["output"])
    if kind == "GridSet":
        return set_from_dict(doc)
    if kind == "GridFunction":
        return function_from_dict(doc)
    raise SchemaError(f"expected a GridSet or GridFunction document, got type {kind!r}")


def artifact(kind: str, body: dict, config: dict, input_digests: dict | None = None) -> dict:
    """Wrap a result with schema version, tool version, effective config and input digests."""
    doc = {"schema": SCHEMA_VERSION, "type": kind, "tool_version": __version__,
           "config": config, "input_digests": input_digests or {}}
    doc.update(body)
    return jsonable(doc)


def dumps(doc: dict) -> str:
    return json.dumps(jsonable(doc), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_text(path: str, text: str) -> None:
    """Atomic write: temporary file in the same directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path: str, doc: dict) -> None:
    write_text(path, dumps(doc))


def read_json(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: invalid JSON ({exc})") from exc

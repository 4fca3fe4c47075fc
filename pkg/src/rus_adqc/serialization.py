"""JSON forms of operators and states, and a byte-stable JSON writer."""
from __future__ import annotations

import json
import math

import numpy as np

SCHEMA_VERSION = "rus-adqc/1"


def operator_to_json(u: np.ndarray) -> dict:
    u = np.asarray(u, dtype=complex)
    return {"dim": int(u.shape[0]),
            "entries": [[float(z.real), float(z.imag)] for z in u.ravel()]}


def operator_from_json(obj: dict) -> np.ndarray:
    dim = int(obj["dim"])
    entries = obj["entries"]
    if dim not in (2, 4) or len(entries) != dim * dim:
        raise ValueError("operator JSON needs dim in {2, 4} and dim*dim entries")
    vals = np.array([complex(re, im) for re, im in entries])
    if not np.all(np.isfinite(vals)):
        raise ValueError("operator entries must be finite")
    return vals.reshape(dim, dim)


def state_to_json(psi: np.ndarray) -> dict:
    psi = np.asarray(psi, dtype=complex)
    n = int(round(math.log2(len(psi))))
    return {"n_qubits": n, "entries": [[float(z.real), float(z.imag)] for z in psi]}


def state_from_json(obj: dict) -> np.ndarray:
    n = int(obj["n_qubits"])
    entries = obj["entries"]
    if len(entries) != 2**n:
        raise ValueError("state JSON needs 2**n_qubits entries")
    psi = np.array([complex(re, im) for re, im in entries])
    if abs(np.linalg.norm(psi) - 1.0) > 1e-12:
        raise ValueError("state must be normalized")
    return psi


def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return format(x, ".17g")


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON text with every float written as 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{_str(k)}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, np.number)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, str):
        return _str(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _str(s: str) -> str:
    return json.dumps(s)

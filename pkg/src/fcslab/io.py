"""System files and the report emitter.

System file (JSON):
    {"schema_version": 1, "d": 3, "k": 2,
     "kraus": [[[[re, im], ...] k rows] x d],
     "symmetry": {"group": "su2", "spin": 1},     optional
     "models": ["aklt:1"]}                         optional
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np

from .errors import ParseError
from .popescu import PopescuSystem, validate_system

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class SystemFile:
    system: PopescuSystem
    symmetry: dict | None = None
    models: list[str] = field(default_factory=list)
    source: str = "<memory>"

    def echo(self) -> dict:
        return system_to_dict(self.system.kraus, self.symmetry, self.models)

    def digest(self) -> str:
        return hashlib.sha256(dumps(self.echo()).encode()).hexdigest()


def _complex_entry(value: Any, where: str) -> complex:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return complex(value)
    if isinstance(value, list) and len(value) == 2 and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in value):
        return complex(value[0], value[1])
    raise ParseError(f"{where}: expected [re, im], got {value!r}")


def parse_system(data: Any, source: str = "<memory>", tol: float = 1e-10) -> SystemFile:
    if not isinstance(data, dict):
        raise ParseError(f"{source}: top level must be an object")
    version = data.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ParseError(f"{source}: unsupported schema_version {version!r}")
    for key in ("d", "k", "kraus"):
        if key not in data:
            raise ParseError(f"{source}: missing field {key!r}")
    d, k, kraus = data["d"], data["k"], data["kraus"]
    if not isinstance(d, int) or not isinstance(k, int) or d < 1 or k < 1:
        raise ParseError(f"{source}: d and k must be positive integers")
    if not isinstance(kraus, list) or len(kraus) != d:
        raise ParseError(f"{source}: kraus must list d = {d} matrices, found {len(kraus) if isinstance(kraus, list) else kraus!r}")
    mats = np.zeros((d, k, k), dtype=complex)
    for i, mat in enumerate(kraus):
        if not isinstance(mat, list) or len(mat) != k:
            raise ParseError(f"{source}: kraus[{i}] must have k = {k} rows")
        for a, row in enumerate(mat):
            if not isinstance(row, list) or len(row) != k:
                n = len(row) if isinstance(row, list) else "non-list"
                raise ParseError(f"{source}: kraus[{i}] row {a} has {n} entries, expected {k} (matrix must be square)")
            for b, entry in enumerate(row):
                mats[i, a, b] = _complex_entry(entry, f"{source}: kraus[{i}][{a}][{b}]")
    symmetry = data.get("symmetry")
    if symmetry is not None and (not isinstance(symmetry, dict) or symmetry.get("group") not in ("su2", "u1")):
        raise ParseError(f"{source}: symmetry must be {{'group': 'su2'|'u1', ...}}")
    models = data.get("models", [])
    if not isinstance(models, list) or not all(isinstance(m, str) for m in models):
        raise ParseError(f"{source}: models must be a list of strings")
    return SystemFile(validate_system(mats, tol), symmetry, list(models), source)


def load_system(path: str | Path, tol: float = 1e-10) -> SystemFile:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc})") from None
    except OSError as exc:
        raise ParseError(f"{path}: cannot read ({exc.strerror})") from None
    return parse_system(data, str(path), tol)


def bundled_path(name: str) -> Path:
    """Path of a bundled system file, e.g. 'aklt.json'."""
    return Path(str(resources.files("fcslab") / "data" / name))


def system_to_dict(kraus: np.ndarray, symmetry: dict | None = None, models: list[str] | None = None) -> dict:
    kraus = np.asarray(kraus, dtype=complex)
    out: dict[str, Any] = {
        "schema_version": SCHEMA_VERSION,
        "d": int(kraus.shape[0]),
        "k": int(kraus.shape[1]),
        "kraus": [[[[float(z.real), float(z.imag)] for z in row] for row in mat] for mat in kraus],
    }
    if symmetry is not None:
        out["symmetry"] = symmetry
    if models:
        out["models"] = list(models)
    return out


# ---------------------------------------------------------------------------
# JSON with 17 significant digits


def to_plain(obj: Any) -> Any:
    """numpy / complex / tuple values -> JSON-compatible Python values."""
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    return obj


def _emit(obj: Any, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return "null"
        text = format(obj, ".17g")
        # keep floats recognisable as floats after a round trip
        return text if any(c in text for c in ".en") else text + ".0"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {_emit(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        # numeric leaves stay on one line
        if all(not isinstance(v, (dict, list)) for v in obj):
            return "[" + ", ".join(_emit(v, indent, level + 1) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + _emit(v, indent, level + 1) for v in obj) + "\n" + end + "]"
    return json.dumps(obj)


def dumps(obj: Any, indent: int = 2) -> str:
    """Deterministic JSON; every float printed with 17 significant digits."""
    return _emit(to_plain(obj), indent, 0)

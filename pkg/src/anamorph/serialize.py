"""Deterministic JSON for matrices, keys, ciphertexts, plans and shares.

Floats are written with 17 significant digits, so parsing and re-emitting a
file reproduces it byte for byte.  Every loader validates against a JSON
schema first and reports the offending field as a JSON pointer.
"""
import json
import math
from pathlib import Path

import jsonschema
import numpy as np

from .errors import SchemaViolation
from .qass import COMPONENTS, EtaDomain, ShareBundle
from .qops import PermSpec, QotpKey
from .qudit_code import EVAL_POINTS, EncodedQuantumState
from .scheme import AnamorphicKey, Ciphertext
from .shamir import FieldElement
from .tomography import TomographyPlan

# ---------------------------------------------------------------- emitting


def format_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError("non-finite floats cannot be serialized")
    s = format(float(x), ".17g")
    if "e" not in s and "." not in s and "inf" not in s and "nan" not in s:
        s += ".0"
    return s


def _emit(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_emit(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        # short numeric rows stay on one line
        if all(isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(_emit(v, indent, level + 1) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + _emit(v, indent, level + 1) for v in obj) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> str:
    return _emit(obj, 2, 0) + "\n"


def write_json(path, obj) -> bytes:
    data = dumps(obj).encode("utf-8")
    Path(path).write_bytes(data)
    return data


# ---------------------------------------------------------------- schemas

_INT = {"type": "integer"}
_NUM = {"type": "number"}
_MATRIX = {
    "type": "object",
    "required": ["rows", "cols", "entries"],
    "properties": {
        "rows": {"type": "integer", "minimum": 1},
        "cols": {"type": "integer", "minimum": 1},
        "entries": {
            "type": "array",
            "items": {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2},
        },
    },
    "additionalProperties": False,
}
_BITS = {"type": "string", "pattern": "^[01]*$"}
_PERM = {
    "type": "object",
    "required": ["size", "mapping", "lehmer"],
    "properties": {
        "size": {"type": "integer", "minimum": 1},
        "mapping": {"type": "array", "items": {"type": "integer", "minimum": 0}},
        "lehmer": {"type": ["integer", "null"], "minimum": 0},
    },
    "additionalProperties": False,
}
_FIELD_SHARE = {
    "type": "object",
    "required": ["p", "x", "y"],
    "properties": {"p": {"type": "integer", "minimum": 2}, "x": _INT, "y": _INT},
    "additionalProperties": False,
}

SCHEMAS = {
    "matrix": _MATRIX,
    "key": {
        "type": "object",
        "required": ["d1", "d2", "k", "k_prime", "perm", "eta"],
        "properties": {
            "d1": {"type": "integer", "minimum": 0},
            "d2": {"type": "integer", "minimum": 0},
            "k": _BITS,
            "k_prime": _BITS,
            "perm": _PERM,
            "eta": {"type": "integer", "minimum": 1},
        },
        "additionalProperties": False,
    },
    "ciphertext": {
        "type": "object",
        "required": ["d1", "dm"],
        "properties": {"d1": {"type": "integer", "minimum": 0}, "dm": _MATRIX},
        "additionalProperties": False,
    },
    "plan": {
        "type": "object",
        "required": ["d", "epsilon", "delta", "design", "n_shots", "allocation"],
        "properties": {
            "d": {"type": "integer", "minimum": 2},
            "epsilon": _NUM,
            "delta": _NUM,
            "design": {"enum": ["frames", "singleton"]},
            "n_shots": {"type": "integer", "minimum": 1},
            "allocation": {"type": "array", "items": {"type": "integer", "minimum": 0}},
        },
        "additionalProperties": False,
    },
    "bundle": {
        "type": "object",
        "required": ["player", "classical", "qudit_index"],
        "properties": {
            "player": {"type": "integer", "minimum": 1, "maximum": 3},
            "classical": {
                "type": "object",
                "properties": {c: _FIELD_SHARE for c in COMPONENTS},
                "required": ["k1", "k2", "k3"],
                "additionalProperties": False,
            },
            "qudit_index": {"type": "integer", "minimum": 0, "maximum": 2},
        },
        "additionalProperties": False,
    },
    "encoded": {
        "type": "object",
        "required": ["q", "n", "eval_points", "embed_dim", "eta_domain", "global"],
        "properties": {
            "q": {"type": "integer", "minimum": 5},
            "n": {"const": 3},
            "eval_points": {"type": "array", "items": _INT},
            "embed_dim": {"type": "integer", "minimum": 1},
            "eta_domain": {"type": "array", "items": {"type": "integer", "minimum": 2}, "minItems": 1},
            "global": _MATRIX,
        },
        "additionalProperties": False,
    },
}


def validate(doc, kind: str):
    validator = jsonschema.Draft202012Validator(SCHEMAS[kind])
    err = jsonschema.exceptions.best_match(validator.iter_errors(doc))
    if err is not None:
        pointer = "".join(f"/{p}" for p in err.absolute_path)
        raise SchemaViolation(err.message, pointer)
    return doc


def parse(text: str, kind: str):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaViolation(f"invalid JSON ({exc.msg} at line {exc.lineno})", "") from None
    validate(doc, kind)
    return FROM_JSON[kind](doc)


def read_json(path, kind: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise SchemaViolation(f"cannot read {path}: {exc.strerror}", "") from None
    return parse(text, kind)


# ---------------------------------------------------------------- converters


def matrix_to_json(m) -> dict:
    m = np.asarray(m, dtype=np.complex128)
    return {
        "rows": int(m.shape[0]),
        "cols": int(m.shape[1]),
        "entries": [[float(z.real), float(z.imag)] for z in m.reshape(-1)],
    }


def matrix_from_json(doc, pointer: str = "") -> np.ndarray:
    rows, cols, entries = doc["rows"], doc["cols"], doc["entries"]
    if len(entries) != rows * cols:
        raise SchemaViolation(f"expected {rows * cols} entries, found {len(entries)}", pointer + "/entries")
    arr = np.array([complex(re, im) for re, im in entries], dtype=np.complex128).reshape(rows, cols)
    if not np.all(np.isfinite(arr)):
        raise SchemaViolation("non-finite entry", pointer + "/entries")
    return arr


def perm_to_json(p: PermSpec) -> dict:
    return {"size": p.size, "mapping": list(p.mapping), "lehmer": p.lehmer}


def perm_from_json(doc, pointer: str = "/perm") -> PermSpec:
    if len(doc["mapping"]) != doc["size"]:
        raise SchemaViolation("mapping length differs from size", pointer + "/mapping")
    try:
        p = PermSpec(tuple(doc["mapping"]))
    except ValueError as exc:
        raise SchemaViolation(str(exc), pointer + "/mapping") from None
    if doc["lehmer"] != p.lehmer:
        raise SchemaViolation("Lehmer index does not match the mapping", pointer + "/lehmer")
    return p


def key_to_json(key: AnamorphicKey) -> dict:
    return {
        "d1": key.d1,
        "d2": key.d2,
        "k": key.k.to_bitstring(),
        "k_prime": key.k_prime.to_bitstring(),
        "perm": perm_to_json(key.perm),
        "eta": int(key.eta),
    }


def key_from_json(doc) -> AnamorphicKey:
    perm = perm_from_json(doc["perm"])
    for name in ("k", "k_prime"):
        if len(doc[name]) % 2:
            raise SchemaViolation("QOTP key needs an even number of bits", f"/{name}")
    try:
        return AnamorphicKey(
            doc["d1"], doc["d2"], QotpKey.from_bitstring(doc["k"]), QotpKey.from_bitstring(doc["k_prime"]), perm, doc["eta"]
        )
    except ValueError as exc:
        raise SchemaViolation(str(exc), "") from None


def ciphertext_to_json(ct: Ciphertext) -> dict:
    return {"d1": ct.d1, "dm": matrix_to_json(ct.dm)}


def ciphertext_from_json(doc) -> Ciphertext:
    dm = matrix_from_json(doc["dm"], "/dm")
    try:
        return Ciphertext(doc["d1"], dm)
    except ValueError as exc:
        raise SchemaViolation(str(exc), "/dm") from None


def plan_to_json(plan: TomographyPlan) -> dict:
    return {
        "d": plan.d,
        "epsilon": plan.epsilon,
        "delta": plan.delta,
        "design": plan.design,
        "n_shots": plan.n_shots,
        "allocation": list(plan.allocation),
    }


def plan_from_json(doc) -> TomographyPlan:
    if sum(doc["allocation"]) != doc["n_shots"]:
        raise SchemaViolation("allocation does not sum to n_shots", "/allocation")
    return TomographyPlan(doc["d"], float(doc["epsilon"]), float(doc["delta"]), doc["design"], doc["n_shots"], tuple(doc["allocation"]))


def bundle_to_json(b: ShareBundle) -> dict:
    return {
        "player": b.player,
        "classical": {c: {"p": x.p, "x": x.value, "y": y.value} for c, (x, y) in b.classical.items()},
        "qudit_index": b.qudit_index,
    }


def bundle_from_json(doc) -> ShareBundle:
    classical = {}
    for name, entry in doc["classical"].items():
        try:
            classical[name] = (FieldElement(entry["x"], entry["p"]), FieldElement(entry["y"], entry["p"]))
        except ValueError as exc:
            raise SchemaViolation(str(exc), f"/classical/{name}") from None
    try:
        return ShareBundle(doc["player"], classical, doc["qudit_index"])
    except ValueError as exc:
        raise SchemaViolation(str(exc), "/classical") from None


def encoded_to_json(enc: EncodedQuantumState, eta_domain: EtaDomain) -> dict:
    return {
        "q": enc.q,
        "n": enc.n,
        "eval_points": list(enc.eval_points),
        "embed_dim": enc.embed_dim,
        "eta_domain": list(eta_domain.values),
        "global": matrix_to_json(enc.global_state),
    }


def encoded_from_json(doc):
    g = matrix_from_json(doc["global"], "/global")
    q = doc["q"]
    if g.shape != (q**3, q**3):
        raise SchemaViolation(f"global state must be {q**3}x{q**3}", "/global")
    if tuple(doc["eval_points"]) != EVAL_POINTS:
        raise SchemaViolation("evaluation points must be [1, 2, 3]", "/eval_points")
    try:
        domain = EtaDomain(tuple(doc["eta_domain"]))
    except ValueError as exc:
        raise SchemaViolation(str(exc), "/eta_domain") from None
    return EncodedQuantumState(q, doc["embed_dim"], g), domain


TO_JSON = {
    "matrix": matrix_to_json,
    "key": key_to_json,
    "ciphertext": ciphertext_to_json,
    "plan": plan_to_json,
    "bundle": bundle_to_json,
    "encoded": encoded_to_json,
}
FROM_JSON = {
    "matrix": matrix_from_json,
    "key": key_from_json,
    "ciphertext": ciphertext_from_json,
    "plan": plan_from_json,
    "bundle": bundle_from_json,
    "encoded": encoded_from_json,
}


def roundtrip_state(path, kind: str) -> bool:
    """True when parsing ``path`` and serializing the result again gives back
    the same bytes."""
    obj = read_json(path, kind)
    doc = TO_JSON[kind](*obj) if kind == "encoded" else TO_JSON[kind](obj)
    return dumps(doc).encode("utf-8") == Path(path).read_bytes()

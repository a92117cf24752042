"""JSON configuration documents for weight families.

POD document::

    {"gamma": {"kind": "factorial_power", "sigma": 1},
     "upsilon": {"kind": "poly_decay", "c": 1, "rho": 2}}

SPOD document::

    {"alpha": 2,
     "gamma": {"kind": "factorial_power", "sigma": 0},
     "upsilon": [{"kind": "poly_decay", "c": 1, "rho": 2},
                 {"kind": "poly_decay", "c": 1, "rho": 4}]}

Order profile kinds: ``factorial_power`` (``sigma``), ``explicit``
(``values``, Gamma_0 first). Sequence kinds: ``zero``, ``explicit``
(``values``), ``poly_decay`` (``c``, ``rho > 1``) and ``power_law`` (``c``,
``rho > 0``, not required to be summable).
"""

from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path

from .weights import (
    Explicit,
    ExplicitOrder,
    FactorialPower,
    OrderProfile,
    PODSpec,
    PolyDecay,
    PowerLaw,
    SPODSpec,
    WeightSequence,
    Zero,
)


class ConfigError(ValueError):
    """Malformed spec document; ``path`` names the offending field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


def _number(doc, key, path, *, integer=False):
    if key not in doc:
        raise ConfigError(f"{path}.{key}", "missing field")
    v = doc[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{path}.{key}", f"expected a number, got {v!r}")
    if integer and int(v) != v:
        raise ConfigError(f"{path}.{key}", f"expected an integer, got {v!r}")
    if not math.isfinite(v):
        raise ConfigError(f"{path}.{key}", f"expected a finite number, got {v!r}")
    return int(v) if integer else float(v)


def _values(doc, path):
    if "values" not in doc:
        raise ConfigError(f"{path}.values", "missing field")
    vals = doc["values"]
    if not isinstance(vals, list):
        raise ConfigError(f"{path}.values", "expected a list")
    for i, v in enumerate(vals):
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v) or v < 0:
            raise ConfigError(f"{path}.values[{i}]", f"expected a finite nonnegative number, got {v!r}")
    return tuple(float(v) for v in vals)


def _kind(doc, path):
    if not isinstance(doc, dict):
        raise ConfigError(path, "expected an object")
    kind = doc.get("kind")
    if kind is None:
        raise ConfigError(f"{path}.kind", "missing field")
    return kind


def parse_sequence(doc, path="upsilon") -> WeightSequence:
    kind = _kind(doc, path)
    try:
        if kind == "zero":
            return Zero()
        if kind == "explicit":
            return Explicit(_values(doc, path))
        if kind in ("poly_decay", "power_law"):
            c = _number(doc, "c", path)
            rho = _number(doc, "rho", path)
            if kind == "poly_decay" and not rho > 1:
                raise ConfigError(f"{path}.rho", f"poly_decay requires rho > 1, got {rho}")
            return PolyDecay(c, rho) if kind == "poly_decay" else PowerLaw(c, rho)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from None
    raise ConfigError(f"{path}.kind", f"unknown sequence kind {kind!r}")


def parse_profile(doc, path="gamma") -> OrderProfile:
    kind = _kind(doc, path)
    if kind == "factorial_power":
        sigma = _number(doc, "sigma", path)
        if sigma < 0:
            raise ConfigError(f"{path}.sigma", f"expected sigma >= 0, got {sigma}")
        return FactorialPower(sigma)
    if kind == "explicit":
        vals = _values(doc, path)
        if not vals:
            raise ConfigError(f"{path}.values", "needs at least Gamma_0")
        return ExplicitOrder(vals)
    raise ConfigError(f"{path}.kind", f"unknown order profile kind {kind!r}")


def parse_spec(doc) -> PODSpec | SPODSpec:
    if not isinstance(doc, dict):
        raise ConfigError("$", "expected a JSON object")
    if "gamma" not in doc:
        raise ConfigError("gamma", "missing field")
    if "upsilon" not in doc:
        raise ConfigError("upsilon", "missing field")
    gamma = parse_profile(doc["gamma"])
    if "alpha" not in doc:
        return PODSpec(gamma, parse_sequence(doc["upsilon"]))
    alpha = _number(doc, "alpha", "$", integer=True)
    if alpha < 1:
        raise ConfigError("alpha", f"expected alpha >= 1, got {alpha}")
    grid = doc["upsilon"]
    if not isinstance(grid, list):
        raise ConfigError("upsilon", "SPOD documents need a list of sequences")
    if len(grid) != alpha:
        raise ConfigError("upsilon", f"expected {alpha} sequences, got {len(grid)}")
    seqs = tuple(parse_sequence(g, f"upsilon[{i}]") for i, g in enumerate(grid))
    return SPODSpec(alpha, gamma, seqs)


def load_spec(path) -> PODSpec | SPODSpec:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("$", f"invalid JSON: {exc}") from None
    return parse_spec(doc)


def sequence_to_dict(seq: WeightSequence) -> dict:
    if isinstance(seq, Zero):
        return {"kind": "zero"}
    if isinstance(seq, Explicit):
        return {"kind": "explicit", "values": [float(v) for v in seq.values]}
    if isinstance(seq, PolyDecay):
        return {"kind": "poly_decay", "c": float(seq.c), "rho": float(seq.rho)}
    if isinstance(seq, PowerLaw):
        return {"kind": "power_law", "c": float(seq.c), "rho": float(seq.rho)}
    raise TypeError(f"no document form for {type(seq).__name__}")


def profile_to_dict(gamma: OrderProfile) -> dict:
    if isinstance(gamma, FactorialPower):
        return {"kind": "factorial_power", "sigma": float(gamma.sigma)}
    if isinstance(gamma, ExplicitOrder):
        return {"kind": "explicit", "values": [float(v) for v in gamma.values]}
    raise TypeError(f"no document form for {type(gamma).__name__}")


def spec_to_dict(spec: PODSpec | SPODSpec) -> dict:
    if isinstance(spec, SPODSpec):
        return {
            "alpha": spec.alpha,
            "gamma": profile_to_dict(spec.gamma),
            "upsilon": [sequence_to_dict(s) for s in spec.upsilon_grid],
        }
    return {"gamma": profile_to_dict(spec.gamma), "upsilon": sequence_to_dict(spec.upsilon)}


def spec_digest(spec: PODSpec | SPODSpec) -> str:
    """sha256 of the canonical JSON form (numbers as floats, sorted keys)."""
    canon = json.dumps(spec_to_dict(spec), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()

"""JSON forms of programs, reductions and binarizations.

Rationals are written as strings (``"3"``, ``"7/2"``); integers and decimal
strings are accepted on input. Coefficient maps are keyed by variable id.
"""
from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Any, Mapping

from .encode import Binarization
from .model import IntegerProgram, LinearConstraint, ModelError, Variable
from .presolve import Reduction

SCHEMA_VERSION = 1


def _q(value: Fraction) -> str:
    return str(Fraction(value))


def _coeffs_out(coeffs: Mapping[int, Fraction]) -> dict[str, str]:
    return {str(k): _q(v) for k, v in sorted(coeffs.items())}


def _coeffs_in(raw: Mapping[str, Any]) -> dict[int, Fraction]:
    return {int(k): Fraction(str(v)) for k, v in raw.items()}


def program_to_dict(ip: IntegerProgram) -> dict:
    return {
        "version": SCHEMA_VERSION,
        "name": ip.name,
        "sense": ip.sense,
        "objective": _coeffs_out(ip.objective),
        "constraints": [
            {"name": c.name, "coeffs": _coeffs_out(c.coefficients), "rel": c.relation, "rhs": _q(c.rhs)}
            for c in ip.constraints
        ],
        "vars": [{"name": v.name, "lo": v.lower, "hi": v.upper} for v in ip.variables],
    }


def program_from_dict(data: Mapping[str, Any]) -> IntegerProgram:
    version = data.get("version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ModelError(f"unsupported instance schema version {version}")
    try:
        variables = [Variable(k, v["name"], int(v["lo"]), int(v["hi"])) for k, v in enumerate(data["vars"])]
        constraints = [
            LinearConstraint(_coeffs_in(c["coeffs"]), c["rel"], Fraction(str(c["rhs"])), c.get("name", f"c{k}"))
            for k, c in enumerate(data["constraints"])
        ]
        return IntegerProgram(data["sense"], _coeffs_in(data["objective"]), constraints, variables, data.get("name", ""))
    except KeyError as exc:
        raise ModelError(f"instance is missing field {exc}") from None


def binarization_to_dict(bz: Binarization) -> dict:
    return {
        "bits": {str(k): [[b, w] for b, w in pairs] for k, pairs in sorted(bz.bits.items())},
        "lower": {str(k): v for k, v in sorted(bz.lower.items())},
    }


def binarization_from_dict(data: Mapping[str, Any]) -> Binarization:
    bits = {int(k): [(int(b), int(w)) for b, w in pairs] for k, pairs in data["bits"].items()}
    lower = {int(k): int(v) for k, v in data["lower"].items()}
    return Binarization(bits, lower, sum(len(p) for p in bits.values()))


def reduction_to_dict(red: Reduction, binarization: Binarization | None = None) -> dict:
    out = {
        "version": SCHEMA_VERSION,
        "policy": red.policy,
        "status": red.status,
        "conflicts": list(red.conflicts),
        "n_original": red.n_original,
        "fixed": {str(k): v for k, v in sorted(red.fixed.items())},
        "lift": {str(r): o for r, o in sorted(red.lift.items())},
        "offset": _q(red.offset),
        "residual": program_to_dict(red.residual),
    }
    if binarization is not None:
        out["binarization"] = binarization_to_dict(binarization)
    return out


def reduction_from_dict(data: Mapping[str, Any]) -> Reduction:
    return Reduction(
        fixed={int(k): int(v) for k, v in data["fixed"].items()},
        residual=program_from_dict(data["residual"]),
        lift={int(k): int(v) for k, v in data["lift"].items()},
        offset=Fraction(data["offset"]),
        status=data["status"],
        n_original=int(data["n_original"]),
        policy=data["policy"],
        conflicts=tuple(data.get("conflicts", ())),
    )


def dumps(data: Any) -> str:
    """Canonical JSON text: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(data, indent=2, sort_keys=True, default=_default) + "\n"


def _default(obj):
    if isinstance(obj, Fraction):
        return _q(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_json(path: str | Path, data: Any) -> None:
    Path(path).write_text(dumps(data))


def read_json(path: str | Path) -> Any:
    return json.loads(Path(path).read_text())


def load_program(path: str | Path) -> IntegerProgram:
    return program_from_dict(read_json(path))

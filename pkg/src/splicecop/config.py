"""Section configs: JSON load/dump and the built-in named sections.

A config looks like::

    {"name": "example-1",
     "phi":   {"pieces": [{"domain": [0, 1], "kind": "power-sum",
                           "terms": [[1, 2]]}]},
     "gamma": {"pieces": [{"domain": [0, 1], "kind": "power-sum",
                           "terms": [[1, 3]]}]}}

Exponents may be written as ``[num, den]`` pairs.
"""
from __future__ import annotations

from fractions import Fraction
import json
import math
from pathlib import Path

from .errors import ConfigError
from .model import SectionPair, interval_family_section, validate_curve, validate_section
from .piecewise import POWER_SUM, TABLE, Piece, PiecewiseFunction, as_exponent

SECTION_SAMPLES = 4096


def _exponent_json(e: Fraction):
    e = Fraction(e)
    return int(e) if e.denominator == 1 else [e.numerator, e.denominator]


def function_from_json(obj) -> PiecewiseFunction:
    try:
        raw = obj["pieces"]
        pieces = []
        for p in raw:
            kind = p.get("kind", POWER_SUM)
            mono = p.get("monotonicity")
            if kind == POWER_SUM:
                a, b = p["domain"]
                terms = [(float(c), as_exponent(e)) for c, e in p["terms"]]
                pieces.append(Piece.power_sum(float(a), float(b), terms, mono))
            elif kind == TABLE:
                pieces.append(Piece.table([(float(t), float(v)) for t, v in p["knots"]], mono))
            else:
                raise ConfigError(f"unknown piece kind {kind!r}")
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed function: {exc}") from exc
    if not pieces:
        raise ConfigError("function needs at least one piece")
    return PiecewiseFunction(tuple(pieces))


def function_to_json(f: PiecewiseFunction) -> dict:
    out = []
    for p in f.pieces:
        if p.kind == POWER_SUM:
            item = {"domain": list(p.domain), "kind": POWER_SUM,
                    "terms": [[float(c), _exponent_json(e)] for c, e in p.terms]}
        else:
            item = {"kind": TABLE, "knots": [list(kv) for kv in p.knots]}
        if p.monotonicity is not None:
            item["monotonicity"] = p.monotonicity
        out.append(item)
    return {"pieces": out}


def section_from_dict(obj, samples: int = SECTION_SAMPLES) -> SectionPair:
    """Validate a parsed config.  Raises ConfigError or AdmissibilityError."""
    if not isinstance(obj, dict) or "phi" not in obj or "gamma" not in obj:
        raise ConfigError("config needs 'phi' and 'gamma'")
    phi = validate_curve(function_from_json(obj["phi"]))
    gamma = function_from_json(obj["gamma"])
    return validate_section(phi, gamma, samples=samples, name=str(obj.get("name", "section")))


def section_to_dict(sec: SectionPair) -> dict:
    return {"name": sec.name, "phi": function_to_json(sec.phi.f),
            "gamma": function_to_json(sec.gamma)}


def load_section(path, samples: int = SECTION_SAMPLES) -> SectionPair:
    try:
        text = Path(path).read_text(encoding="utf-8")
        obj = json.loads(text)
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return section_from_dict(obj, samples)


def dump_section(sec: SectionPair, path) -> None:
    Path(path).write_text(json.dumps(section_to_dict(sec), indent=2, sort_keys=True) + "\n",
                          encoding="utf-8")


# builtins ------------------------------------------------------------------

# knot where the flat part at 26/225 meets t + t^2 - 1
T0 = (-1.0 + math.sqrt(1229.0) / 15.0) / 2.0


def _example_1():
    return {"name": "example-1",
            "phi": {"pieces": [{"domain": [0, 1], "kind": POWER_SUM, "terms": [[1, 2]]}]},
            "gamma": {"pieces": [{"domain": [0, 1], "kind": POWER_SUM, "terms": [[1, 3]]}]}}


def _example_2():
    third, two_fifths = 1.0 / 3.0, 0.4
    return {"name": "example-2",
            "phi": {"pieces": [{"domain": [0, 1], "kind": POWER_SUM, "terms": [[1, 2]]}]},
            "gamma": {"pieces": [
                {"domain": [0, third], "kind": POWER_SUM, "terms": [[0, 0]]},
                {"domain": [third, two_fifths], "kind": POWER_SUM,
                 "terms": [[1, 1], [1, 2], [-4 / 9, 0]]},
                {"domain": [two_fifths, T0], "kind": POWER_SUM, "terms": [[26 / 225, 0]]},
                {"domain": [T0, 1], "kind": POWER_SUM, "terms": [[1, 1], [1, 2], [-1, 0]]},
            ]}}


def _example_5ii():
    return {"name": "example-5ii",
            "phi": {"pieces": [
                {"domain": [0, 0.25], "kind": POWER_SUM, "terms": [[0.5, [1, 2]]]},
                {"domain": [0.25, 0.75], "kind": POWER_SUM, "terms": [[1, 1]]},
                {"domain": [0.75, 1], "kind": POWER_SUM, "terms": [[4 / 7, 2], [3 / 7, 0]]},
            ]},
            "gamma": {"pieces": [
                {"domain": [0, 0.25], "kind": POWER_SUM, "terms": [[1, 1], [-1, 2]]},
                {"domain": [0.25, 0.5], "kind": POWER_SUM, "terms": [[9 / 8, 1], [-3 / 32, 0]]},
                {"domain": [0.5, 0.75], "kind": POWER_SUM, "terms": [[1, 1], [-1 / 32, 0]]},
                {"domain": [0.75, 0.875], "kind": POWER_SUM, "terms": [[0.25, 1], [17 / 32, 0]]},
                {"domain": [0.875, 1], "kind": POWER_SUM, "terms": [[2, 1], [-1, 0]]},
            ]}}


def _diag_pi():
    return {"name": "diag-pi",
            "phi": {"pieces": [{"domain": [0, 1], "kind": POWER_SUM, "terms": [[1, 1]]}]},
            "gamma": {"pieces": [{"domain": [0, 1], "kind": POWER_SUM, "terms": [[1, 2]]}]}}


_BUILTIN_DICTS = {
    "example-1": _example_1,
    "example-2": _example_2,
    "example-5ii": _example_5ii,
    "diag-pi": _diag_pi,
}
# the piecewise section is also referred to by its example number
ALIASES = {"example-3": "example-2"}
INTERVAL_FAMILY = "interval-family"

BUILTIN_NAMES = tuple(_BUILTIN_DICTS) + (INTERVAL_FAMILY,)


def builtin_dict(name: str) -> dict:
    key = ALIASES.get(name, name)
    if key not in _BUILTIN_DICTS:
        raise ConfigError(f"unknown builtin {name!r}; choose from {', '.join(BUILTIN_NAMES)}")
    return _BUILTIN_DICTS[key]()


def builtin_section(name: str, samples: int = SECTION_SAMPLES) -> SectionPair:
    """Named section.  ``interval-family`` is phi = t^2 with the single interval (0, 1)."""
    if name == INTERVAL_FAMILY:
        phi = validate_curve(PiecewiseFunction.from_terms([(1.0, 2)]))
        return interval_family_section(phi, [(0.0, 1.0)], samples=samples)
    sec = section_from_dict(builtin_dict(name), samples)
    return sec

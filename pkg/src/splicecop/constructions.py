"""Surfaces built from a curvilinear section.

Every evaluator takes arrays ``x`` and ``y`` (broadcast together) and
returns values on [0, 1].  Write ``u = phi^{-1}(y)``, ``hat = id - gamma``
and ``tilde = phi - gamma``.  Then

* ``F1 = x - (V(u, x; hat) + hat(x) + hat(u)) / 2``
* ``F2 = y - (V(x, u; tilde) + tilde(x) + tilde(u)) / 2``
* ``C1 = min(x, y, F1)``, ``C2 = min(x, y, F2)``
* ``SPLICE`` is ``C1`` on or below the curve ``y = phi(x)`` and ``C2`` above it;
  it is the pointwise supremum of all copulas with the given section
* ``BERTINO`` subtracts the interval minimum of a gap function,
  ``A_UPPER`` the interval maximum
* ``K = min(x, y, (gamma(x) + gamma(u)) / 2)``

``V`` is the signed total variation, so ``u > x`` needs no special case.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import cached_property

import numpy as np

from .errors import DomainError
from .model import SectionPair
from .variation import MonotoneProfile


class SurfaceKind(str, Enum):
    F1 = "F1"
    F2 = "F2"
    C1 = "C1"
    C2 = "C2"
    SPLICE = "SPLICE"
    BERTINO = "BERTINO"
    A_UPPER = "A_UPPER"
    K = "K"
    W = "W"
    M = "M"
    PI = "PI"

    @classmethod
    def parse(cls, name) -> "SurfaceKind":
        if isinstance(name, cls):
            return name
        key = str(name).strip().upper().replace("-", "_")
        aliases = {"A": "A_UPPER", "B": "BERTINO", "Π": "PI", "PRODUCT": "PI"}
        key = aliases.get(key, key)
        try:
            return cls[key]
        except KeyError:
            raise ValueError(f"unknown surface kind {name!r}") from None


# surfaces that reproduce the section along the curve
SECTION_SURFACES = (SurfaceKind.C1, SurfaceKind.C2, SurfaceKind.SPLICE,
                    SurfaceKind.BERTINO, SurfaceKind.A_UPPER)


@dataclass(frozen=True, eq=False)
class EvalContext:
    """A section plus its precomputed monotone profiles.

    The profiles are the memo: prefix variations and range extrema over the
    monotone knots of ``hat`` and ``tilde``, built once and shared read-only.
    """

    section: SectionPair

    @cached_property
    def hat(self) -> MonotoneProfile:
        return MonotoneProfile.of(self.section.hat)

    @cached_property
    def tilde(self) -> MonotoneProfile:
        return MonotoneProfile.of(self.section.tilde)

    @property
    def phi(self):
        return self.section.phi

    @property
    def gamma(self):
        return self.section.gamma

    def warm(self) -> "EvalContext":
        """Force every lazy table so later evaluation is read-only."""
        for prof in (self.hat, self.tilde):
            prof.cumvar
            prof._min_table
            prof._max_table
        return self


def _prepare(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    x, y = np.broadcast_arrays(x, y)
    for arr in (x, y):
        if arr.size and (np.isnan(arr).any() or arr.min() < 0.0 or arr.max() > 1.0):
            raise DomainError("surface arguments must lie in [0, 1]")
    return x, y


def _out(v):
    v = np.asarray(v, dtype=float)
    return float(v) if v.ndim == 0 else v


def f1(ctx: EvalContext, x, y):
    x, y = _prepare(x, y)
    u = ctx.phi.inverse(y)
    h = ctx.hat
    var = h.variation(u, x)
    return _out(x - 0.5 * (var + ctx.section.hat(x) + ctx.section.hat(u)))


def f2(ctx: EvalContext, x, y):
    x, y = _prepare(x, y)
    u = ctx.phi.inverse(y)
    t = ctx.tilde
    var = t.variation(x, u)
    return _out(y - 0.5 * (var + ctx.section.tilde(x) + ctx.section.tilde(u)))


def c1(ctx, x, y):
    x, y = _prepare(x, y)
    return _out(np.minimum(np.minimum(x, y), f1(ctx, x, y)))


def c2(ctx, x, y):
    x, y = _prepare(x, y)
    return _out(np.minimum(np.minimum(x, y), f2(ctx, x, y)))


def below_curve(ctx, x, y):
    """``y <= phi(x)``; points on the curve count as below (C1 side)."""
    return np.asarray(y) <= np.asarray(ctx.phi(x))


def splice(ctx, x, y):
    x, y = _prepare(x, y)
    below = below_curve(ctx, x, y)
    return _out(np.where(below, c1(ctx, x, y), c2(ctx, x, y)))


def bertino(ctx, x, y):
    x, y = _prepare(x, y)
    u = ctx.phi.inverse(y)
    below = below_curve(ctx, x, y)
    lo_tilde = ctx.tilde.interval_min(u, x)
    lo_hat = ctx.hat.interval_min(x, u)
    return _out(np.where(below, y - lo_tilde, x - lo_hat))


def a_upper(ctx, x, y):
    x, y = _prepare(x, y)
    u = ctx.phi.inverse(y)
    below = below_curve(ctx, x, y)
    hi_hat = ctx.hat.interval_max(u, x)
    hi_tilde = ctx.tilde.interval_max(x, u)
    return _out(np.where(below, np.minimum(y, x - hi_hat), np.minimum(x, y - hi_tilde)))


def k_surface(ctx, x, y):
    x, y = _prepare(x, y)
    u = ctx.phi.inverse(y)
    mid = 0.5 * (np.asarray(ctx.gamma(x)) + np.asarray(ctx.gamma(u)))
    return _out(np.minimum(np.minimum(x, y), mid))


def w_surface(ctx, x, y):
    x, y = _prepare(x, y)
    return _out(np.maximum(x + y - 1.0, 0.0))


def m_surface(ctx, x, y):
    x, y = _prepare(x, y)
    return _out(np.minimum(x, y))


def pi_surface(ctx, x, y):
    x, y = _prepare(x, y)
    return _out(x * y)


_EVALUATORS = {
    SurfaceKind.F1: f1,
    SurfaceKind.F2: f2,
    SurfaceKind.C1: c1,
    SurfaceKind.C2: c2,
    SurfaceKind.SPLICE: splice,
    SurfaceKind.BERTINO: bertino,
    SurfaceKind.A_UPPER: a_upper,
    SurfaceKind.K: k_surface,
    SurfaceKind.W: w_surface,
    SurfaceKind.M: m_surface,
    SurfaceKind.PI: pi_surface,
}


def surface(ctx: EvalContext, kind, x, y):
    """Evaluate the surface ``kind`` at ``(x, y)`` (scalars or arrays)."""
    return _EVALUATORS[SurfaceKind.parse(kind)](ctx, x, y)


def context(section: SectionPair) -> EvalContext:
    return EvalContext(section).warm()

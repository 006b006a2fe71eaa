"""Piecewise scalar functions on [0, 1].

A :class:`PiecewiseFunction` is an ordered tuple of :class:`Piece` objects
whose domains tile [0, 1].  Each piece is either a *power sum*
``sum(c * t**e)`` with rational exponents ``e >= 0`` or a *table* of knots
interpolated linearly.  Tables are expanded into affine power sums before
any arithmetic, so every derived function (sums, differences, pointwise
min/max) is again a piecewise power sum.

Evaluation is vectorised with numpy.  At an interior junction the left
piece is used; continuity makes the choice immaterial up to ``1e-12``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
import math

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError

INCREASING = "increasing"
DECREASING = "decreasing"
NON_MONOTONE = "non-monotone"
MONOTONICITY_FLAGS = (INCREASING, DECREASING, NON_MONOTONE)

POWER_SUM = "power-sum"
TABLE = "table"

CONTINUITY_TOL = 1e-12
FLAG_TOL = 1e-12
# arguments this far outside [0, 1] are clipped rather than rejected
DOMAIN_SLACK = 1e-12
# coefficients below this after cancellation are treated as zero
COEF_EPS = 1e-14
SCAN_POINTS = 1024


def as_exponent(e) -> Fraction:
    """Coerce ``e`` (int, float, Fraction or ``[num, den]``) to a Fraction."""
    if isinstance(e, Fraction):
        out = e
    elif isinstance(e, (list, tuple)):
        if len(e) != 2:
            raise DomainError(f"rational exponent must be [num, den], got {e!r}")
        out = Fraction(int(e[0]), int(e[1]))
    elif isinstance(e, (int, np.integer)):
        out = Fraction(int(e))
    else:
        x = float(e)
        if not math.isfinite(x):
            raise DomainError(f"non-finite exponent {e!r}")
        out = Fraction(x).limit_denominator(10**6)
    if out < 0:
        raise DomainError(f"negative exponent {e!r}")
    return out


def normalize_terms(terms) -> tuple[tuple[float, Fraction], ...]:
    """Merge equal exponents, drop zero coefficients and sort by exponent."""
    acc: dict[Fraction, float] = {}
    for c, e in terms:
        c = float(c)
        if not math.isfinite(c):
            raise DomainError(f"non-finite coefficient {c!r}")
        e = as_exponent(e)
        acc[e] = acc.get(e, 0.0) + c
    scale = max((abs(c) for c in acc.values()), default=0.0)
    cut = COEF_EPS * max(scale, 1.0)
    return tuple((c, e) for e, c in sorted(acc.items()) if abs(c) > cut)


def eval_terms(terms, t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    for c, e in terms:
        if e == 0:
            out = out + c
        elif e == 1:
            out = out + c * t
        else:
            out = out + c * np.power(t, float(e))
    return out


def derivative_terms(terms):
    return tuple((c * float(e), e - 1) for c, e in terms if e != 0)


def polynomial_degree(terms) -> int | None:
    """Degree if every exponent is a non-negative integer, else ``None``."""
    if any(e.denominator != 1 for _, e in terms):
        return None
    return max((int(e) for _, e in terms), default=0)


def _poly_coeffs(terms, degree):
    coeffs = [0.0] * (degree + 1)
    for c, e in terms:
        coeffs[int(e)] += c
    return coeffs  # coeffs[k] multiplies t**k


def _quadratic_roots(c0, c1, c2):
    if c2 == 0.0:
        if c1 == 0.0:
            return []
        return [-c0 / c1]
    disc = c1 * c1 - 4.0 * c2 * c0
    if disc < 0.0:
        return []
    sq = math.sqrt(disc)
    q = -0.5 * (c1 + math.copysign(sq, c1))
    if q == 0.0:
        return [0.0]
    return [q / c2, c0 / q]


def _scan_roots(func, a, b, samples=SCAN_POINTS):
    ts = np.linspace(a, b, samples + 2)
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = np.asarray(func(ts), dtype=float)
    # fractional exponents of derivatives may blow up at t = 0
    ok = np.isfinite(vals)
    ts, vals = ts[ok], vals[ok]
    roots = [float(t) for t, v in zip(ts, vals) if v == 0.0]
    sgn = np.sign(vals)
    for k in np.nonzero(sgn[:-1] * sgn[1:] < 0)[0]:
        roots.append(brentq(func, ts[k], ts[k + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps))
    return roots


def roots_in(terms, a, b, samples=SCAN_POINTS):
    """Roots of the power sum ``terms`` strictly inside ``(a, b)``.

    Polynomials of degree <= 3 are solved in closed form (quadratic formula,
    or the companion matrix for cubics); anything else falls back to a
    sign-change scan refined with Brent's method.
    """
    if not terms:
        return []
    deg = polynomial_degree(terms)
    if deg is not None and deg <= 3:
        co = _poly_coeffs(terms, deg)
        if deg <= 2:
            co = co + [0.0] * (3 - len(co))
            cands = _quadratic_roots(co[0], co[1], co[2])
        else:
            r = np.roots(co[::-1])
            cands = [float(z.real) for z in r if abs(z.imag) <= 1e-12 * max(1.0, abs(z))]
            # polish against the power-sum itself
            polished = []
            for z in cands:
                for _ in range(3):
                    fz = float(eval_terms(terms, z))
                    dz = float(eval_terms(derivative_terms(terms), z))
                    if dz == 0.0:
                        break
                    z = z - fz / dz
                polished.append(z)
            cands = polished
    else:
        cands = _scan_roots(lambda x: eval_terms(terms, x), a, b, samples)
    span = b - a
    eps = 1e-13 * max(1.0, span)
    return sorted({float(r) for r in cands if a + eps < r < b - eps})


@dataclass(frozen=True)
class Piece:
    """One piece of a piecewise function on ``domain = (a, b)``."""

    domain: tuple[float, float]
    kind: str = POWER_SUM
    terms: tuple = ()
    knots: tuple = ()
    monotonicity: str | None = None

    def __post_init__(self):
        a, b = (float(v) for v in self.domain)
        if not (math.isfinite(a) and math.isfinite(b)) or not 0.0 <= a < b <= 1.0:
            raise DomainError(f"bad piece domain {self.domain!r}")
        object.__setattr__(self, "domain", (a, b))
        if self.monotonicity is not None and self.monotonicity not in MONOTONICITY_FLAGS:
            raise DomainError(f"unknown monotonicity flag {self.monotonicity!r}")
        if self.kind == POWER_SUM:
            object.__setattr__(self, "terms", normalize_terms(self.terms))
        elif self.kind == TABLE:
            knots = tuple((float(t), float(v)) for t, v in self.knots)
            if len(knots) < 2:
                raise DomainError("table piece needs at least two knots")
            ts = [t for t, _ in knots]
            if any(not math.isfinite(x) for kv in knots for x in kv):
                raise DomainError("non-finite table knot")
            if any(t2 <= t1 for t1, t2 in zip(ts, ts[1:])):
                raise DomainError("table knots must be strictly increasing in t")
            if abs(ts[0] - a) > 1e-15 or abs(ts[-1] - b) > 1e-15:
                raise DomainError("table knots must span the piece domain")
            object.__setattr__(self, "knots", knots)
        else:
            raise DomainError(f"unknown piece kind {self.kind!r}")

    @classmethod
    def power_sum(cls, a, b, terms, monotonicity=None):
        return cls((a, b), POWER_SUM, tuple(terms), (), monotonicity)

    @classmethod
    def table(cls, knots, monotonicity=None):
        knots = tuple(knots)
        return cls((knots[0][0], knots[-1][0]), TABLE, (), knots, monotonicity)

    @property
    def a(self) -> float:
        return self.domain[0]

    @property
    def b(self) -> float:
        return self.domain[1]

    def __call__(self, t):
        if self.kind == TABLE:
            ts, vs = zip(*self.knots)
            return np.interp(t, ts, vs)
        return eval_terms(self.terms, t)

    def derivative(self, t):
        if self.kind == TABLE:
            ts, vs = (np.array(v) for v in zip(*self.knots))
            slopes = np.diff(vs) / np.diff(ts)
            k = np.clip(np.searchsorted(ts, t, side="left") - 1, 0, len(slopes) - 1)
            return slopes[k]
        return eval_terms(derivative_terms(self.terms), t)

    def restricted(self, a, b) -> "Piece":
        """Power-sum piece on ``[a, b]`` (a table must be expanded first)."""
        if self.kind != POWER_SUM:
            raise DomainError("restrict table pieces after expansion")
        return Piece((a, b), POWER_SUM, self.terms)

    def expanded(self) -> list["Piece"]:
        """Equivalent list of power-sum pieces."""
        if self.kind == POWER_SUM:
            return [self]
        out = []
        for (t0, v0), (t1, v1) in zip(self.knots, self.knots[1:]):
            s = (v1 - v0) / (t1 - t0)
            out.append(Piece((t0, t1), POWER_SUM, ((v0 - s * t0, 0), (s, 1))))
        return out

    def critical_points(self) -> list[float]:
        """Interior points where the derivative changes sign (or vanishes)."""
        if self.kind == TABLE:
            return [t for t, _ in self.knots[1:-1]]
        dterms = derivative_terms(self.terms)
        if not dterms:
            return []
        return roots_in(dterms, self.a, self.b)


def _snap_points(points, tol=1e-15):
    pts = sorted(float(p) for p in points)
    out: list[float] = []
    for p in pts:
        if not out or p - out[-1] > tol:
            out.append(p)
    return out


@dataclass(frozen=True, eq=False)
class PiecewiseFunction:
    """A continuous function on [0, 1] made of ordered pieces."""

    pieces: tuple[Piece, ...]

    def __post_init__(self):
        pieces = tuple(self.pieces)
        if not pieces:
            raise DomainError("a piecewise function needs at least one piece")
        object.__setattr__(self, "pieces", pieces)
        if pieces[0].a != 0.0 or pieces[-1].b != 1.0:
            raise DomainError("pieces must cover [0, 1]")
        for left, right in zip(pieces, pieces[1:]):
            if abs(left.b - right.a) > 1e-15:
                raise DomainError(
                    f"non-contiguous pieces: {left.domain} followed by {right.domain}")
            jl, jr = float(left(left.b)), float(right(left.b))
            if abs(jl - jr) > CONTINUITY_TOL * max(1.0, abs(jl)):
                raise DomainError(
                    f"discontinuity at t={left.b!r}: {jl!r} vs {jr!r}")
        for p in pieces:
            if p.monotonicity in (INCREASING, DECREASING):
                ts = np.linspace(p.a, p.b, 66)[1:-1]
                d = np.diff(p(ts))
                bad = d < -FLAG_TOL if p.monotonicity == INCREASING else d > FLAG_TOL
                if np.any(bad):
                    raise DomainError(
                        f"piece on {p.domain} violates its '{p.monotonicity}' flag")

    # construction helpers -------------------------------------------------

    @classmethod
    def from_terms(cls, terms) -> "PiecewiseFunction":
        return cls((Piece.power_sum(0.0, 1.0, terms),))

    @classmethod
    def constant(cls, c) -> "PiecewiseFunction":
        return cls.from_terms([(c, 0)])

    @classmethod
    def identity(cls) -> "PiecewiseFunction":
        return cls.from_terms([(1.0, 1)])

    @classmethod
    def from_pieces(cls, spec) -> "PiecewiseFunction":
        """Build from ``[(a, b, terms), ...]`` tuples."""
        return cls(tuple(Piece.power_sum(a, b, terms) for a, b, terms in spec))

    # evaluation ------------------------------------------------------------

    @cached_property
    def edges(self) -> np.ndarray:
        return np.array([p.a for p in self.pieces] + [1.0])

    def _check_domain(self, t):
        t = np.asarray(t, dtype=float)
        if t.size and (np.nanmin(t) < -DOMAIN_SLACK or np.nanmax(t) > 1.0 + DOMAIN_SLACK
                       or np.isnan(t).any()):
            raise DomainError("argument outside [0, 1]")
        return np.clip(t, 0.0, 1.0)

    def _dispatch(self, t, method):
        t = self._check_domain(t)
        if len(self.pieces) == 1:
            out = getattr(self.pieces[0], method)(t)
            return float(out) if out.ndim == 0 else out
        idx = np.searchsorted(self.edges[1:-1], t, side="left")
        out = np.empty_like(t)
        for k, p in enumerate(self.pieces):
            m = idx == k
            if np.any(m):
                out[m] = getattr(p, method)(t[m])
        return float(out) if out.ndim == 0 else out

    def __call__(self, t):
        return self._dispatch(t, "__call__")

    def derivative(self, t):
        """One-sided (left-piece) derivative; ``inf`` where a root term blows up."""
        with np.errstate(divide="ignore", invalid="ignore"):
            return self._dispatch(t, "derivative")

    # structure ---------------------------------------------------------------

    @cached_property
    def expanded(self) -> "PiecewiseFunction":
        if all(p.kind == POWER_SUM for p in self.pieces):
            return self
        return PiecewiseFunction(tuple(q for p in self.pieces for q in p.expanded()))

    def refined(self, points) -> "PiecewiseFunction":
        """Same function with extra junctions at ``points`` (power sums only)."""
        base = self.expanded
        cuts = _snap_points(list(base.edges) + [p for p in points if 0.0 < p < 1.0])
        out = []
        k = 0
        for a, b in zip(cuts, cuts[1:]):
            while base.pieces[k].b <= a + 1e-15:
                k += 1
            out.append(base.pieces[k].restricted(a, b))
        return PiecewiseFunction(tuple(out))

    def pieces_between(self, a, b) -> list[Piece]:
        """Pieces whose domain lies inside ``[a, b]``."""
        return [p for p in self.pieces if p.a >= a - 1e-15 and p.b <= b + 1e-15]

    def _binary(self, other, op) -> "PiecewiseFunction":
        if not isinstance(other, PiecewiseFunction):
            other = PiecewiseFunction.constant(float(other))
        f = self.refined(other.expanded.edges)
        g = other.refined(f.edges)
        pieces = []
        for p, q in zip(f.pieces, g.pieces):
            pieces.append(Piece.power_sum(p.a, p.b, op(p.terms, q.terms)))
        return PiecewiseFunction(tuple(pieces))

    def __add__(self, other):
        return self._binary(other, lambda s, o: s + o)

    __radd__ = __add__

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self._binary(other, lambda s, o: s + tuple((-c, e) for c, e in o))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, scalar):
        s = float(scalar)
        base = self.expanded
        return PiecewiseFunction(tuple(
            Piece.power_sum(p.a, p.b, [(s * c, e) for c, e in p.terms]) for p in base.pieces))

    __rmul__ = __mul__

    def _pointwise(self, other, pick_self):
        if not isinstance(other, PiecewiseFunction):
            other = PiecewiseFunction.constant(float(other))
        f = self.refined(other.expanded.edges)
        g = other.refined(f.edges)
        out = []
        for p, q in zip(f.pieces, g.pieces):
            diff = normalize_terms(p.terms + tuple((-c, e) for c, e in q.terms))
            cuts = [p.a] + roots_in(diff, p.a, p.b) + [p.b]
            for a, b in zip(cuts, cuts[1:]):
                mid = 0.5 * (a + b)
                src = p if pick_self(float(p(mid)), float(q(mid))) else q
                out.append(src.restricted(a, b))
        return PiecewiseFunction(tuple(out)).merged()

    def minimum(self, other) -> "PiecewiseFunction":
        """Pointwise ``min(self, other)``, split exactly at crossings."""
        return self._pointwise(other, lambda u, v: u <= v)

    def maximum(self, other) -> "PiecewiseFunction":
        return self._pointwise(other, lambda u, v: u >= v)

    def merged(self) -> "PiecewiseFunction":
        """Fuse adjacent pieces that carry identical terms."""
        base = self.expanded
        out = [base.pieces[0]]
        for p in base.pieces[1:]:
            if p.terms == out[-1].terms:
                out[-1] = Piece.power_sum(out[-1].a, p.b, p.terms)
            else:
                out.append(p)
        return PiecewiseFunction(tuple(out))

    @cached_property
    def monotone_knots(self) -> np.ndarray:
        """Sorted knots, including 0 and 1, between which the function is monotone."""
        pts = list(self.edges)
        for p in self.pieces:
            pts.extend(p.critical_points())
        return np.array(_snap_points(pts))

    @cached_property
    def extrema(self) -> np.ndarray:
        """Interior points where the direction of monotonicity flips.

        Plateaus are reported at their left end.
        """
        knots = self.monotone_knots
        vals = np.asarray(self(knots))
        steps = np.diff(vals)
        scale = max(1.0, float(np.max(np.abs(vals))))
        dirs = np.where(np.abs(steps) <= 1e-13 * scale, 0, np.sign(steps)).astype(int)
        out = []
        last_dir, last_turn = 0, None
        for k, d in enumerate(dirs):
            if d == 0:
                if last_turn is None:
                    last_turn = knots[k]
                continue
            if last_dir != 0 and d != last_dir:
                out.append(float(last_turn if last_turn is not None else knots[k]))
            last_dir = d
            last_turn = None
        return np.array(out)

    def piece_flags(self) -> list[str]:
        """Declared flags, with undeclared ones inferred from the monotone knots."""
        out = []
        for p in self.pieces:
            if p.monotonicity is not None:
                out.append(p.monotonicity)
                continue
            inner = [c for c in self.monotone_knots if p.a < c < p.b]
            if p.kind == TABLE:
                vs = [v for _, v in p.knots]
                d = np.diff(vs)
            else:
                pts = [p.a] + inner + [p.b]
                d = np.diff(p(np.array(pts)))
            if np.all(d >= 0):
                out.append(INCREASING)
            elif np.all(d <= 0):
                out.append(DECREASING)
            else:
                out.append(NON_MONOTONE)
        return out

    def __repr__(self):
        return f"PiecewiseFunction({len(self.pieces)} pieces)"


def evaluate(f: PiecewiseFunction, t):
    """Value of ``f`` at ``t``; raises :class:`DomainError` off [0, 1]."""
    if np.any(np.asarray(t) < 0.0) or np.any(np.asarray(t) > 1.0):
        raise DomainError(f"t outside [0, 1]: {t!r}")
    return f(t)

"""Curve maps, curvilinear sections and their gap functions.

A curve map ``phi`` is a continuous, strictly increasing bijection of
[0, 1].  A section ``gamma`` is admissible for ``phi`` when

* ``max(0, t + phi(t) - 1) <= gamma(t) <= min(t, phi(t))``, and
* ``gamma`` is increasing while ``gamma - id - phi`` is decreasing.

From an admissible pair we derive the two gap functions
``hat = id - gamma`` and ``tilde = phi - gamma``; every surface in
:mod:`splicecop.constructions` is expressed through them.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.optimize import brentq

from .errors import AdmissibilityError, BracketingError, DomainError
from .piecewise import Piece, PiecewiseFunction

ADMISSIBILITY_TOL = 1e-10
STRICT_SLACK = 1e-12
CURVE_SAMPLES = 1024


def _closed_form_inverse(piece: Piece):
    """Return ``y -> t`` for pieces of the form ``c0 + c * t**e``, else None."""
    terms = piece.terms
    c0 = sum(c for c, e in terms if e == 0)
    rest = [(c, e) for c, e in terms if e != 0]
    if len(rest) != 1:
        return None
    c, e = rest[0]
    if c <= 0:
        return None
    inv_e = 1.0 / float(e)

    def inv(y):
        return np.power(np.maximum((y - c0) / c, 0.0), inv_e)

    return inv


@dataclass(frozen=True, eq=False)
class CurveMap:
    """A validated strictly increasing bijection ``phi`` of [0, 1]."""

    f: PiecewiseFunction
    name: str = "phi"

    def __call__(self, t):
        out = self.f(t)
        # endpoints are exact by contract
        if np.ndim(out) == 0:
            if t == 0.0:
                return 0.0
            if t == 1.0:
                return 1.0
            return out
        t = np.asarray(t)
        out = np.where(t == 0.0, 0.0, np.where(t == 1.0, 1.0, out))
        return out

    def derivative(self, t):
        return self.f.derivative(t)

    @cached_property
    def _pieces(self):
        base = self.f.expanded
        lo = np.array([float(base(p.a)) for p in base.pieces])
        hi = np.array([float(base(p.b)) for p in base.pieces])
        lo[0], hi[-1] = 0.0, 1.0
        invs = [_closed_form_inverse(p) for p in base.pieces]
        return base.pieces, lo, hi, invs

    def inverse(self, y):
        """``phi^{-1}(y)`` to ``|phi(t) - y| <= 1e-12``.

        Closed form on pieces ``c0 + c t**e``, bisection elsewhere.
        """
        y_arr = np.asarray(y, dtype=float)
        scalar = y_arr.ndim == 0
        y_arr = np.atleast_1d(y_arr)
        if np.any(y_arr < -1e-12) or np.any(y_arr > 1 + 1e-12) or np.isnan(y_arr).any():
            raise DomainError("inverse argument outside [0, 1]")
        y_arr = np.clip(y_arr, 0.0, 1.0)
        pieces, lo, hi, invs = self._pieces
        idx = np.clip(np.searchsorted(hi, y_arr, side="left"), 0, len(pieces) - 1)
        out = np.empty_like(y_arr)
        for k, p in enumerate(pieces):
            m = idx == k
            if not np.any(m):
                continue
            yk = y_arr[m]
            if not hi[k] > lo[k]:
                raise BracketingError(f"piece {p.domain} of {self.name} is not increasing")
            if invs[k] is not None:
                tk = invs[k](yk)
            else:
                a = np.full_like(yk, p.a)
                b = np.full_like(yk, p.b)
                for _ in range(200):
                    mid = 0.5 * (a + b)
                    below = p(mid) < yk
                    a = np.where(below, mid, a)
                    b = np.where(below, b, mid)
                    if np.all(b - a <= 4e-16):
                        break
                tk = 0.5 * (a + b)
            out[m] = np.clip(tk, p.a, p.b)
        out = np.where(y_arr == 0.0, 0.0, np.where(y_arr == 1.0, 1.0, out))
        return float(out[0]) if scalar else out


def validate_curve(f: PiecewiseFunction, samples: int = CURVE_SAMPLES, name="phi") -> CurveMap:
    """Check ``f(0) = 0``, ``f(1) = 1`` and strict increase on a sample grid."""
    if abs(f(0.0)) > 1e-12 or abs(f(1.0) - 1.0) > 1e-12:
        raise AdmissibilityError(
            f"{name} must fix 0 and 1 (got {f(0.0)!r}, {f(1.0)!r})", prop="endpoints")
    ts = np.union1d(np.linspace(0.0, 1.0, samples), f.edges)
    d = np.diff(f(ts))
    bad = np.nonzero(d <= STRICT_SLACK)[0]
    if bad.size:
        k = int(bad[0])
        raise AdmissibilityError(
            f"{name} is not strictly increasing on [{ts[k]!r}, {ts[k + 1]!r}]",
            where=(float(ts[k]), float(ts[k + 1])), prop="strict-increase")
    return CurveMap(f, name)


def inverse(phi: CurveMap, y):
    return phi.inverse(y)


@dataclass(frozen=True, eq=False)
class SectionPair:
    """A validated ``(phi, gamma)`` pair with its gap functions."""

    phi: CurveMap
    gamma: PiecewiseFunction
    hat: PiecewiseFunction
    tilde: PiecewiseFunction
    resolution: int = 0
    name: str = "section"
    meta: dict = field(default_factory=dict)

    @property
    def hat_breaks(self) -> np.ndarray:
        return self.hat.extrema

    @property
    def tilde_breaks(self) -> np.ndarray:
        return self.tilde.extrema

    @cached_property
    def breakpoints(self) -> np.ndarray:
        """Monotone knots of hat, tilde and phi merged."""
        pts = np.concatenate([self.hat.monotone_knots, self.tilde.monotone_knots,
                              self.phi.f.monotone_knots])
        return np.unique(pts)

    def gamma_of_inverse(self, y):
        return self.gamma(self.phi.inverse(y))


def _sample_points(f_list, samples):
    ts = np.linspace(0.0, 1.0, samples)
    for f in f_list:
        ts = np.union1d(ts, f.edges)
    return ts


def validate_section(phi: CurveMap, gamma: PiecewiseFunction, samples: int = 4096,
                     name: str = "section", tol: float = ADMISSIBILITY_TOL) -> SectionPair:
    """Validate ``gamma`` against ``phi`` at ``samples`` points and derive the gaps.

    Property (ii) is checked on adjacent sample pairs, which by telescoping
    covers every sampled pair.  The result is "valid at resolution
    ``samples``", not a proof over the continuum.
    """
    if samples < 256:
        raise ValueError("validation needs at least 256 samples")
    if abs(gamma(1.0) - 1.0) > tol:
        raise AdmissibilityError(f"gamma(1) = {gamma(1.0)!r} != 1", where=1.0, prop="endpoint")
    ts = _sample_points([phi.f, gamma], samples)
    g = np.asarray(gamma(ts))
    p = np.asarray(phi(ts))
    lower = np.maximum(0.0, ts + p - 1.0)
    upper = np.minimum(ts, p)
    for arr, label in ((g - lower, "lower"), (upper - g, "upper")):
        bad = np.nonzero(arr < -tol)[0]
        if bad.size:
            k = int(bad[np.argmin(arr[bad])])
            raise AdmissibilityError(
                f"property (i) {label} bound violated at t={float(ts[k])!r} "
                f"(gamma={float(g[k])!r}, "
                f"bound={float((lower if label == 'lower' else upper)[k])!r})",
                where=float(ts[k]), prop="i")
    dg = np.diff(g)
    room = np.diff(ts) + np.diff(p) - dg
    for arr, label in ((dg, "increase"), (room, "growth")):
        bad = np.nonzero(arr < -tol)[0]
        if bad.size:
            k = int(bad[np.argmin(arr[bad])])
            raise AdmissibilityError(
                f"property (ii) {label} violated on [{float(ts[k])!r}, {float(ts[k + 1])!r}]",
                where=(float(ts[k]), float(ts[k + 1])), prop="ii")
    hat = (PiecewiseFunction.identity() - gamma).merged()
    tilde = (phi.f - gamma).merged()
    return SectionPair(phi, gamma, hat, tilde, resolution=samples, name=name)


def _solve_increasing(func, a, b, target):
    """Root of ``func(t) = target`` on ``[a, b]`` for increasing ``func``."""
    fa, fb = func(a) - target, func(b) - target
    if fa > 0 or fb < 0:
        raise BracketingError(f"no solution on [{a}, {b}] for target {target!r}")
    if fa == 0:
        return a
    if fb == 0:
        return b
    return brentq(lambda t: func(t) - target, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def interval_family_section(phi: CurveMap, intervals, samples: int = 4096) -> SectionPair:
    """Section generated by disjoint open intervals ``(a_i, b_i)``.

    On each interval the section is flat at ``min(a_i, phi(a_i))`` up to the
    knot ``u_i``, then grows as ``phi(t) + t - max(b_i, phi(b_i))``;
    elsewhere it equals ``min(t, phi(t))``.  ``u_i`` solves
    ``phi(t) + t = min(a_i, phi(a_i)) + max(b_i, phi(b_i))``.
    """
    ivs = sorted((float(a), float(b)) for a, b in intervals)
    for a, b in ivs:
        if not 0.0 <= a < b <= 1.0:
            raise DomainError(f"bad interval ({a}, {b})")
    for (a1, b1), (a2, b2) in zip(ivs, ivs[1:]):
        if a2 < b1:
            raise DomainError("intervals must be pairwise disjoint")
    base = PiecewiseFunction.identity().minimum(phi.f)
    spec = []
    knots = []
    cursor = 0.0
    for a, b in ivs:
        lo = min(a, phi(a))
        hi = max(b, phi(b))
        u = _solve_increasing(lambda t: float(phi(t)) + t, a, b, lo + hi)
        knots.append(u)
        spec.append((cursor, a, None))
        spec.append((a, u, [(lo, 0)]))
        spec.append((u, b, "grow", hi))
        cursor = b
    spec.append((cursor, 1.0, None))
    phi_pieces = phi.f.expanded
    pieces = []
    for item in spec:
        a, b = item[0], item[1]
        if b - a <= 0:
            continue
        if item[2] is None:
            pieces.extend(base.refined([a, b]).pieces_between(a, b))
        elif item[2] == "grow":
            hi = item[3]
            seg = (phi_pieces + PiecewiseFunction.identity() - hi).refined([a, b])
            pieces.extend(seg.pieces_between(a, b))
        else:
            pieces.append(Piece.power_sum(a, b, item[2]))
    gamma = PiecewiseFunction(tuple(pieces)).merged()
    pair = validate_section(phi, gamma, samples=samples, name="interval-family")
    pair.meta["knots"] = tuple(knots)
    pair.meta["intervals"] = tuple(ivs)
    return pair


# random admissible sections ------------------------------------------------

def _random_phi(rng: np.random.Generator) -> PiecewiseFunction:
    choice = int(rng.integers(0, 6))
    if choice == 0:
        return PiecewiseFunction.identity()
    if choice == 1:
        e = float(rng.choice([2, 3, 0.5]))
        return PiecewiseFunction.from_terms([(1.0, e)])
    if choice == 2:
        w = float(rng.uniform(0.1, 0.9))
        return PiecewiseFunction.from_terms([(w, 1), (1 - w, 2)])
    if choice == 3:
        w = float(rng.uniform(0.1, 0.9))
        return PiecewiseFunction.from_terms([(w, 1), (1 - w, 3)])
    if choice == 4:
        w = float(rng.uniform(0.2, 0.8))
        return PiecewiseFunction.from_terms([(w, [1, 2]), (1 - w, 1)])
    # increasing broken line through random knots
    k = int(rng.integers(2, 5))
    xs = np.sort(rng.uniform(0.05, 0.95, k))
    ys = np.sort(rng.uniform(0.05, 0.95, k))
    xs = np.concatenate([[0.0], xs, [1.0]])
    ys = np.concatenate([[0.0], ys, [1.0]])
    if np.any(np.diff(xs) < 1e-3) or np.any(np.diff(ys) < 1e-3):
        return PiecewiseFunction.identity()
    return PiecewiseFunction((Piece.table(list(zip(xs, ys))),)).expanded


def random_section(rng, phi: CurveMap | None = None, cells: int | None = None,
                   samples: int = 1024) -> SectionPair:
    """Draw an admissible section, exact by construction.

    A rate ``lam`` in [0, 1], piecewise constant on random cells, defines
    ``raw(t) = 1 - int_t^1 lam(s) (1 + phi'(s)) ds``; the section is
    ``max(0, min(raw, id, phi))``.  ``raw`` is increasing with
    ``raw - id - phi`` decreasing and ``raw >= id + phi - 1``; min and max
    with functions sharing those properties keep them.
    """
    rng = np.random.default_rng(rng)
    if phi is None:
        phi = validate_curve(_random_phi(rng))
    if cells is None:
        cells = int(rng.integers(1, 7))
    cuts = np.sort(rng.uniform(0.02, 0.98, cells - 1))
    cuts = np.concatenate([[0.0], cuts, [1.0]])
    cuts = np.array([c for k, c in enumerate(cuts) if k == 0 or c - cuts[k - 1] > 1e-3])
    if cuts[-1] != 1.0:
        cuts[-1] = 1.0
    # rates: mix of extreme and interior values produce kinks and plateaus
    lam = rng.choice([0.0, 1.0, -1.0], size=len(cuts) - 1, p=[0.3, 0.3, 0.4])
    lam = np.where(lam < 0, rng.uniform(0.0, 1.0, size=lam.shape), lam)
    s = PiecewiseFunction.identity() + phi.f  # t + phi(t)
    s = s.refined(cuts[1:-1])
    pieces = []
    acc = 1.0
    # integrate backwards from t = 1
    for k in range(len(cuts) - 2, -1, -1):
        a, b = cuts[k], cuts[k + 1]
        sb = float(s(b))
        for p in reversed(s.pieces_between(a, b)):
            # raw(t) = acc - lam * (s(b) - s(t)) on this cell
            terms = [(acc - lam[k] * sb, 0)] + [(lam[k] * c, e) for c, e in p.terms]
            pieces.append(Piece.power_sum(p.a, p.b, terms))
        acc = acc - lam[k] * (sb - float(s(a)))
    raw = PiecewiseFunction(tuple(reversed(pieces)))
    gamma = raw.minimum(PiecewiseFunction.identity()).minimum(phi.f).maximum(0.0)
    return validate_section(phi, gamma, samples=max(samples, 256), name="random")

"""Total variation of piecewise functions on subintervals of [0, 1].

Three routes are provided:

``monotone-exact``
    Sum of absolute increments between the monotone knots of the function.
    Backed by a :class:`MonotoneProfile`, which also answers interval
    minimum/maximum queries.
``adaptive``
    Dyadic partition refinement, using evaluations only.
``alternating``
    The peak/valley form ``2*sum(peaks) - 2*sum(valleys) - f(a) - f(b)``
    maximised over candidate partitions; always a lower bound.

All routes honour the signed convention ``V(b, a) = -V(a, b)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ConvergenceError, DomainError
from .piecewise import PiecewiseFunction

MONOTONE_EXACT = "monotone-exact"
ADAPTIVE = "adaptive"
ALTERNATING = "alternating"
METHODS = (MONOTONE_EXACT, ADAPTIVE, ALTERNATING)

ADAPTIVE_TOL = 1e-9
ADAPTIVE_MAX_DEPTH = 24
ADAPTIVE_MIN_DEPTH = 10


class _SparseTable:
    """Static range-min/max over a 1-d array with vectorised queries."""

    def __init__(self, values, op):
        self.op = op
        levels = [np.asarray(values, dtype=float)]
        n = len(values)
        k = 1
        while (1 << k) <= n:
            prev = levels[-1]
            half = 1 << (k - 1)
            levels.append(op(prev[:-half], prev[half:]))
            k += 1
        self.levels = levels

    def query(self, lo, hi, empty):
        """Reduce ``values[lo:hi]``; ``empty`` where ``lo >= hi``."""
        lo = np.asarray(lo)
        hi = np.asarray(hi)
        length = hi - lo
        out = np.full(np.broadcast(lo, hi).shape, empty, dtype=float)
        ok = length > 0
        if not np.any(ok):
            return out
        lo_ok, hi_ok, len_ok = lo[ok], hi[ok], length[ok]
        lev = np.floor(np.log2(len_ok)).astype(int)
        res = np.empty(len_ok.shape)
        for k in np.unique(lev):
            m = lev == k
            table = self.levels[k]
            res[m] = self.op(table[lo_ok[m]], table[hi_ok[m] - (1 << k)])
        out[ok] = res
        return out


@dataclass(frozen=True, eq=False)
class MonotoneProfile:
    """Precomputed monotone structure of a function on [0, 1].

    ``knots`` split [0, 1] into segments on which ``f`` is monotone;
    ``cumvar[k]`` is the variation on ``[0, knots[k]]``.
    """

    f: PiecewiseFunction
    knots: np.ndarray

    @classmethod
    def of(cls, f: PiecewiseFunction, knots=None) -> "MonotoneProfile":
        if knots is None:
            knots = f.monotone_knots
        return cls(f, np.asarray(knots, dtype=float))

    @cached_property
    def values(self) -> np.ndarray:
        return np.asarray(self.f(self.knots), dtype=float)

    @cached_property
    def cumvar(self) -> np.ndarray:
        return np.concatenate([[0.0], np.cumsum(np.abs(np.diff(self.values)))])

    @cached_property
    def _min_table(self):
        return _SparseTable(self.values, np.minimum)

    @cached_property
    def _max_table(self):
        return _SparseTable(self.values, np.maximum)

    def cumulative(self, x):
        """``V(0, x)`` for scalar or array ``x``."""
        x = np.asarray(x, dtype=float)
        k = np.clip(np.searchsorted(self.knots, x, side="right") - 1, 0, len(self.knots) - 1)
        fx = np.asarray(self.f(x), dtype=float)
        out = self.cumvar[k] + np.abs(fx - self.values[k])
        return float(out) if out.ndim == 0 else out

    def variation(self, a, b):
        """Signed ``V(a, b)``."""
        out = np.asarray(self.cumulative(b)) - np.asarray(self.cumulative(a))
        return float(out) if out.ndim == 0 else out

    def _interval(self, a, b, table, reduce_pair, empty):
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        lo_pt = np.minimum(a, b)
        hi_pt = np.maximum(a, b)
        lo = np.searchsorted(self.knots, lo_pt, side="right")
        hi = np.searchsorted(self.knots, hi_pt, side="left")
        inner = table.query(lo, hi, empty)
        ends = reduce_pair(np.asarray(self.f(lo_pt)), np.asarray(self.f(hi_pt)))
        out = reduce_pair(inner, ends)
        return float(out) if out.ndim == 0 else out

    def interval_min(self, a, b):
        """``min f`` over the closed interval between ``a`` and ``b``."""
        return self._interval(a, b, self._min_table, np.minimum, np.inf)

    def interval_max(self, a, b):
        return self._interval(a, b, self._max_table, np.maximum, -np.inf)


@dataclass(frozen=True)
class VariationQuery:
    f: PiecewiseFunction
    a: float
    b: float
    method: str = MONOTONE_EXACT


def _check_interval(a, b):
    lo, hi = min(a, b), max(a, b)
    if lo < 0.0 or hi > 1.0:
        raise DomainError(f"interval [{lo}, {hi}] not inside [0, 1]")


def _turning_intervals(vals):
    """Indices ``k`` of intervals ``[k, k+1]`` touching a sampled turning point."""
    d = np.sign(np.diff(vals))
    turn = np.nonzero(d[:-1] != d[1:])[0] + 1
    return np.unique(np.concatenate([turn - 1, turn]))


def adaptive_variation(f, a, b, tol=ADAPTIVE_TOL, max_depth=ADAPTIVE_MAX_DEPTH):
    """Unsigned variation on ``[a, b]`` (``a < b``) by dyadic refinement.

    Starts from a uniform dyadic grid of depth ``ADAPTIVE_MIN_DEPTH``; each
    further level halves the intervals on both sides of every sampled
    turning point.  Estimates never decrease; the loop stops after two
    consecutive levels add less than ``tol``.
    """
    ts = np.linspace(a, b, (1 << ADAPTIVE_MIN_DEPTH) + 1)
    vals = np.asarray(f(ts), dtype=float)
    est = float(np.sum(np.abs(np.diff(vals))))
    prev, calm = est, 0
    for depth in range(ADAPTIVE_MIN_DEPTH + 1, max_depth + 1):
        ks = _turning_intervals(vals)
        if ks.size == 0:
            return est
        mids = 0.5 * (ts[ks] + ts[ks + 1])
        ts = np.concatenate([ts, mids])
        vals = np.concatenate([vals, np.asarray(f(mids), dtype=float)])
        order = np.argsort(ts, kind="stable")
        ts, vals = ts[order], vals[order]
        est = float(np.sum(np.abs(np.diff(vals))))
        calm = calm + 1 if est - prev < tol else 0
        if calm >= 2:
            return est
        prev = est
    raise ConvergenceError(
        f"adaptive variation did not settle on [{a}, {b}] by depth {max_depth}",
        estimates=(prev, est))


def total_variation(q: VariationQuery | PiecewiseFunction, a=None, b=None, method=None) -> float:
    """Signed total variation ``V(a, b)`` of ``q.f``.

    Accepts a :class:`VariationQuery` or ``(f, a, b[, method])``.
    """
    if not isinstance(q, VariationQuery):
        q = VariationQuery(q, float(a), float(b), method or MONOTONE_EXACT)
    f, a, b = q.f, float(q.a), float(q.b)
    _check_interval(a, b)
    if a == b:
        return 0.0
    sign = 1.0 if a < b else -1.0
    lo, hi = min(a, b), max(a, b)
    if q.method == MONOTONE_EXACT:
        knots = getattr(f, "monotone_knots", None)
        if knots is None:
            raise DomainError("monotone-exact needs monotone metadata")
        return sign * abs(MonotoneProfile.of(f).variation(lo, hi))
    if q.method == ADAPTIVE:
        return sign * adaptive_variation(f, lo, hi)
    if q.method == ALTERNATING:
        return sign * alternating_variation(f, lo, hi)
    raise ValueError(f"unknown variation method {q.method!r}")


def alternating_sum(values) -> float:
    """Peak/valley objective for values along an increasing partition.

    The partition is first reduced to its alternating skeleton
    ``a <= p_1 >= v_1 <= p_2 ... >= b``; the returned value
    ``2*sum(p) - 2*sum(v) - f(a) - f(b)`` equals the sum of absolute
    increments along the original partition.
    """
    v = [float(x) for x in values]
    if len(v) < 2:
        return 0.0
    peaks, valleys = [], []
    rising = True
    cur = v[0]
    for x in v[1:]:
        if rising:
            if x >= cur:
                cur = x
            else:
                peaks.append(cur)
                rising = False
                cur = x
        else:
            if x <= cur:
                cur = x
            else:
                valleys.append(cur)
                rising = True
                cur = x
    if rising:
        peaks.append(cur)
    return 2.0 * sum(peaks) - 2.0 * sum(valleys) - v[0] - v[-1]


def alternating_variation(f, a, b, partitions: int = 12) -> float:
    """Best peak/valley objective over candidate partitions of ``[a, b]``.

    Candidates are the known monotone knots inside ``[a, b]`` merged with
    dyadic grids of depth ``1..partitions``.  The result is a lower bound on
    the variation, exact once every local extremum is a candidate point.
    """
    if not a < b:
        raise DomainError("alternating_variation needs a < b")
    base = [a, b]
    knots = getattr(f, "monotone_knots", None)
    if knots is not None:
        base.extend(k for k in knots if a < k < b)
    best = -np.inf
    for depth in range(0, partitions + 1):
        pts = np.union1d(base, np.linspace(a, b, (1 << depth) + 1))
        best = max(best, alternating_sum(f(pts)))
    return float(best)

"""Grid fills and decision procedures for splice surfaces.

Every universally quantified condition is tested on a finite set of points
(or pairs of points) enriched with all monotone knots of ``hat``, ``tilde``
and ``phi``.  A passing verdict therefore reads ``pass-at-resolution``.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import json

import numpy as np

from .constructions import EvalContext, SurfaceKind, surface

PASS = "pass-at-resolution"
FAIL = "fail"
SUFFICIENT_PASS = "sufficient-pass"
INCONCLUSIVE = "inconclusive"

TOL = 1e-9
MAX_WITNESSES = 10
REFINE_ROUNDS = 20
COORD_MERGE_TOL = 1e-12


@dataclass(frozen=True)
class Witness:
    coords: tuple
    slack: float
    boundary: bool = False

    def to_dict(self):
        return {"coords": [float(c) for c in self.coords], "slack": float(self.slack),
                "boundary": bool(self.boundary)}


@dataclass
class VerdictReport:
    check: str
    verdict: str
    resolution: int
    tolerance: float
    witnesses: list = field(default_factory=list)
    # diagnostics kept out of the JSON record
    stats: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.verdict == FAIL and not any(w.slack < -self.tolerance for w in self.witnesses):
            raise ValueError("a failing verdict needs a witness below -tolerance")

    @property
    def passed(self) -> bool:
        return self.verdict == PASS

    @property
    def boundary_only(self) -> bool:
        """Passed, but only thanks to near-equalities inside the dead band."""
        return self.passed and any(w.boundary for w in self.witnesses)

    def to_dict(self):
        return {"check": self.check, "verdict": self.verdict,
                "resolution": int(self.resolution), "tolerance": float(self.tolerance),
                "witnesses": [w.to_dict() for w in self.witnesses]}

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), sort_keys=True, **kw)


def _select(coords, slacks, boundary=None, limit=MAX_WITNESSES):
    """Worst ``limit`` witnesses, ordered by slack then coordinates."""
    slacks = np.asarray(slacks, dtype=float)
    if boundary is None:
        boundary = np.zeros(slacks.shape, dtype=bool)
    rows = [(float(s), tuple(float(c) for c in cs), bool(b))
            for cs, s, b in zip(coords, slacks, boundary)]
    rows.sort(key=lambda r: (r[0], r[1]))
    return [Witness(cs, s, b) for s, cs, b in rows[:limit]]


# grids -----------------------------------------------------------------------

def merge_coords(*arrays, tol=COORD_MERGE_TOL) -> np.ndarray:
    """Sorted union of coordinates in [0, 1], fusing points closer than ``tol``."""
    pts = np.sort(np.clip(np.concatenate([np.atleast_1d(a) for a in arrays] + [[0.0, 1.0]]),
                          0.0, 1.0))
    keep = np.concatenate([[True], np.diff(pts) > tol])
    out = pts[keep]
    out[0], out[-1] = 0.0, 1.0
    if len(out) > 1 and out[-1] - out[-2] <= tol:
        out = np.delete(out, -2)
    return out


def uniform_axis(n: int) -> np.ndarray:
    """``n`` equispaced coordinates from 0 to 1."""
    return np.linspace(0.0, 1.0, n)


def knot_axes(ctx: EvalContext, n: int):
    """Uniform ``n``-point axes enriched so each uniform coordinate meets the curve."""
    base = uniform_axis(n)
    xs = merge_coords(base, ctx.phi.inverse(base))
    ys = merge_coords(base, ctx.phi(base))
    return xs, ys


def matched_axes(ctx: EvalContext, n: int):
    """``n + 1`` equispaced x-knots plus monotone knots; ``ys = phi(xs)``.

    Every curve-straddling grid cell is then a rectangle
    ``[x1, x2] x [phi(x1), phi(x2)]``, matching the pair scans.
    """
    xs = criterion_points(ctx, n)
    ys = np.asarray(ctx.phi(xs))
    ys = np.maximum.accumulate(ys)
    return xs, ys


@dataclass(frozen=True, eq=False)
class GridSurface:
    """Surface values on a rectangular grid: ``values[i, j] = S(xs[i], ys[j])``."""

    xs: np.ndarray
    ys: np.ndarray
    values: np.ndarray
    kind: str

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        ys = np.asarray(self.ys, dtype=float)
        vals = np.array(self.values, dtype=float)
        for axis in (xs, ys):
            if axis.ndim != 1 or len(axis) < 2 or axis[0] != 0.0 or axis[-1] != 1.0:
                raise ValueError("grid axes must run from 0 to 1")
            if np.any(np.diff(axis) <= 0):
                raise ValueError("grid axes must be strictly increasing")
        if vals.shape != (len(xs), len(ys)):
            raise ValueError("values shape does not match the axes")
        vals.setflags(write=False)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)
        object.__setattr__(self, "values", vals)

    @property
    def shape(self):
        return self.values.shape

    def mesh(self):
        return np.meshgrid(self.xs, self.ys, indexing="ij")

    def within_bounds(self, tol=TOL) -> bool:
        """Values inside the Frechet-Hoeffding band ``W <= S <= M``."""
        X, Y = self.mesh()
        v = self.values
        return bool(np.all(v >= np.maximum(X + Y - 1, 0) - tol) and np.all(v <= np.minimum(X, Y) + tol))


def fill_grid(ctx: EvalContext | None, kind, xs, ys, workers: int = 1) -> GridSurface:
    """Evaluate ``kind`` on ``xs x ys``; rows are split across ``workers`` threads."""
    kind = SurfaceKind.parse(kind)
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)

    def rows(chunk):
        X, Y = np.meshgrid(chunk, ys, indexing="ij")
        return np.asarray(surface(ctx, kind, X, Y), dtype=float).reshape(X.shape)

    if workers <= 1 or len(xs) < 2 * workers:
        vals = rows(xs)
    else:
        chunks = np.array_split(xs, workers)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            vals = np.vstack(list(pool.map(rows, chunks)))
    return GridSurface(xs, ys, vals, kind.value)


# quasi-copula and copula checks ---------------------------------------------

def check_quasi_copula(g: GridSurface, tol: float = TOL) -> VerdictReport:
    """Boundary condition, monotonicity and 1-Lipschitz on adjacent grid pairs."""
    v, xs, ys = g.values, g.xs, g.ys
    coords, slacks = [], []

    def add(mask, cfun, sl):
        idx = np.argwhere(mask)
        for ij in idx:
            coords.append(cfun(*ij))
            slacks.append(sl[tuple(ij)])

    # boundary: S(x, 0) = S(0, y) = 0, S(x, 1) = x, S(1, y) = y
    for sl, cfun in (
        (-np.abs(v[:, 0])[:, None], lambda i, j: (xs[i], 0.0)),
        (-np.abs(v[0, :])[None, :], lambda i, j: (0.0, ys[j])),
        (-np.abs(v[:, -1] - xs)[:, None], lambda i, j: (xs[i], 1.0)),
        (-np.abs(v[-1, :] - ys)[None, :], lambda i, j: (1.0, ys[j])),
    ):
        add(sl < -tol, cfun, sl)
    dx = np.diff(xs)[:, None]
    dy = np.diff(ys)[None, :]
    vx = np.diff(v, axis=0)
    vy = np.diff(v, axis=1)
    add(vx < -tol, lambda i, j: (xs[i], ys[j], xs[i + 1], ys[j]), vx)
    add(vy < -tol, lambda i, j: (xs[i], ys[j], xs[i], ys[j + 1]), vy)
    lx = dx - vx
    ly = dy - vy
    add(lx < -tol, lambda i, j: (xs[i], ys[j], xs[i + 1], ys[j]), lx)
    add(ly < -tol, lambda i, j: (xs[i], ys[j], xs[i], ys[j + 1]), ly)
    worst = min([0.0] + [float(np.min(a)) for a in (vx, vy, lx, ly)])
    verdict = FAIL if slacks else PASS
    return VerdictReport("quasi-copula", verdict, max(g.shape), tol,
                         _select(coords, slacks), {"worst_slack": worst})


def rectangle_volume(g: GridSurface, i1, i2, j1, j2):
    v = g.values
    return v[i2, j2] - v[i2, j1] - v[i1, j2] + v[i1, j1]


def check_two_increasing(g: GridSurface, tol: float = TOL, window: int = 8) -> VerdictReport:
    """Non-negative volume of every grid cell.

    On failure, rectangles spanning up to ``window`` cells on each side of
    the worst cell are searched and the most negative one is reported first.
    """
    vol = np.diff(np.diff(g.values, axis=0), axis=1)
    min_vol = float(vol.min()) if vol.size else 0.0
    stats = {"min_volume": min_vol}
    bad = np.argwhere(vol < -tol)
    if bad.size == 0:
        return VerdictReport("two-increasing", PASS, max(g.shape), tol, [], stats)
    xs, ys = g.xs, g.ys
    coords = [(xs[i], xs[i + 1], ys[j], ys[j + 1]) for i, j in bad]
    slacks = [vol[i, j] for i, j in bad]
    witnesses = _select(coords, slacks)
    i, j = np.unravel_index(np.argmin(vol), vol.shape)
    nx, ny = len(xs) - 1, len(ys) - 1
    i1s = np.arange(max(0, i - window), i + 1)
    i2s = np.arange(i + 1, min(nx, i + 1 + window) + 1)
    j1s = np.arange(max(0, j - window), j + 1)
    j2s = np.arange(j + 1, min(ny, j + 1 + window) + 1)
    I1, I2, J1, J2 = np.meshgrid(i1s, i2s, j1s, j2s, indexing="ij")
    vols = rectangle_volume(g, I1, I2, J1, J2)
    k = np.unravel_index(np.argmin(vols), vols.shape)
    best = float(vols[k])
    stats["most_negative_rectangle"] = best
    if best < min_vol:
        rect = (xs[I1[k]], xs[I2[k]], ys[J1[k]], ys[J2[k]])
        witnesses = [Witness(tuple(float(c) for c in rect), best)] + witnesses[:MAX_WITNESSES - 1]
    return VerdictReport("two-increasing", FAIL, max(g.shape), tol, witnesses, stats)


# pair scans ------------------------------------------------------------------

def criterion_points(ctx: EvalContext, n: int) -> np.ndarray:
    """``n + 1`` equispaced points merged with every monotone knot."""
    return merge_coords(np.linspace(0.0, 1.0, n + 1), ctx.section.breakpoints)


def _pairs(pts):
    i, j = np.triu_indices(len(pts), k=1)
    return pts[i], pts[j]


def copulahood_slacks(ctx: EvalContext, x1, x2) -> dict:
    """Slack of each inequality at pairs ``x1 < x2`` (non-negative = holds).

    ``s1``: gamma(x1) + gamma(x2) - x1 - phi(x1)
    ``s2``: V(hat) - hat(x1) - hat(x2)
    ``s3``: V(tilde) - tilde(x1) - tilde(x2)
    ``s4``: V(hat) + V(tilde) - (x2 - x1) - (phi(x2) - phi(x1))
    """
    sec = ctx.section
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    vh = ctx.hat.variation(x1, x2)
    vt = ctx.tilde.variation(x1, x2)
    h1, h2 = sec.hat(x1), sec.hat(x2)
    t1, t2 = sec.tilde(x1), sec.tilde(x2)
    p1, p2 = sec.phi(x1), sec.phi(x2)
    g1, g2 = sec.gamma(x1), sec.gamma(x2)
    return {
        "s1": g1 + g2 - x1 - p1,
        "s2": vh - h1 - h2,
        "s3": vt - t1 - t2,
        "s4": vh + vt - (x2 - x1) - (p2 - p1),
    }


def _best_slack(ctx, x1, x2):
    s = copulahood_slacks(ctx, x1, x2)
    return np.maximum(np.maximum(s["s2"], s["s3"]), s["s4"])


def _refine_pair(ctx, x1, x2, step, rounds=REFINE_ROUNDS):
    """Pattern search tightening a failing pair toward its worst slack."""
    best = float(_best_slack(ctx, x1, x2))
    for _ in range(rounds):
        cands = []
        for d1 in (-step, 0.0, step):
            for d2 in (-step, 0.0, step):
                a, b = x1 + d1, x2 + d2
                if 0.0 <= a < b <= 1.0:
                    cands.append((a, b))
        cand = np.array(cands)
        vals = _best_slack(ctx, cand[:, 0], cand[:, 1])
        k = int(np.argmin(vals))
        if vals[k] < best:
            best = float(vals[k])
            x1, x2 = (float(c) for c in cand[k])
        step *= 0.5
    return x1, x2, best


def copulahood_criterion(ctx: EvalContext, n: int = 400, tol: float = TOL,
                         refine: bool = True) -> VerdictReport:
    """Splice is a copula iff every pair ``x1 < x2`` meets s2, s3 or s4 >= 0.

    A failure proves the splice is not a copula (a rectangle with two
    vertices on the curve has negative volume); a pass holds at the tested
    pairs only.
    """
    pts = criterion_points(ctx, n)
    x1, x2 = _pairs(pts)
    s = copulahood_slacks(ctx, x1, x2)
    best = np.maximum(np.maximum(s["s2"], s["s3"]), s["s4"])
    stats = {
        "pairs": int(len(x1)),
        "worst": float(best.min()) if best.size else 0.0,
        "max_abs_s4_when_holding": float(np.max(np.abs(s["s4"][s["s4"] >= -tol]), initial=0.0)),
        "max_s4": float(np.max(s["s4"], initial=-np.inf)),
    }
    bad = best < -tol
    if not np.any(bad):
        return VerdictReport("copula", PASS, n, tol, [], stats)
    coords = list(zip(x1[bad], x2[bad]))
    witnesses = _select(coords, best[bad])
    if refine:
        w = witnesses[0]
        step = 1.0 / n
        r1, r2, rs = _refine_pair(ctx, w.coords[0], w.coords[1], step)
        if rs < w.slack:
            witnesses = [Witness((r1, r2), rs)] + witnesses[:MAX_WITNESSES - 1]
        stats["refined_worst"] = rs
    return VerdictReport("copula", FAIL, n, tol, witnesses, stats)


def derivative_slopes(ctx: EvalContext, samples: int = 2000, h: float = 1e-6):
    """Central-difference slopes of gamma on the strict set, away from knots.

    Returns ``(t, gamma_slope, phi_slope)`` arrays.
    """
    sec = ctx.section
    ts = np.linspace(0.0, 1.0, samples + 2)[1:-1]
    knots = merge_coords(sec.gamma.monotone_knots, sec.gamma.edges, sec.phi.f.edges)
    dist = np.min(np.abs(ts[:, None] - knots[None, :]), axis=1)
    ts = ts[dist > 2 * h]
    gap = np.minimum(ts, sec.phi(ts)) - sec.gamma(ts)
    ts = ts[gap > TOL]
    if ts.size == 0:
        return ts, ts, ts
    slope = (sec.gamma(ts + h) - sec.gamma(ts - h)) / (2 * h)
    phi_slope = np.asarray(sec.phi.derivative(ts), dtype=float)
    return ts, slope, phi_slope


def derivative_criterion(ctx: EvalContext, samples: int = 2000, tol: float = 1e-6) -> str:
    """Sufficient test: gamma' is 0 or 1 + phi' a.e. where gamma < min(id, phi).

    ``sufficient-pass`` means the splice is a copula by this criterion;
    ``inconclusive`` says nothing either way.
    """
    ts, slope, phi_slope = derivative_slopes(ctx, samples)
    if ts.size == 0:
        return SUFFICIENT_PASS
    ok = (np.abs(slope) <= tol) | (np.abs(slope - 1.0 - phi_slope) <= tol)
    return SUFFICIENT_PASS if np.all(ok) else INCONCLUSIVE


def coincidence_slacks(ctx: EvalContext, x, y, tol: float = TOL) -> dict:
    """Premises and slacks of the two interval conditions on ``[x, y]``.

    tilde condition: if tilde dips strictly inside [x, y], need
    ``phi(y) - x > max(tilde(x), tilde(y))``.  hat condition: if hat dips,
    need ``y - phi(x) > max(hat(x), hat(y))``.
    """
    sec = ctx.section
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    tx, ty = sec.tilde(x), sec.tilde(y)
    hx, hy = sec.hat(x), sec.hat(y)
    px, py = sec.phi(x), sec.phi(y)
    t_dip = np.minimum(tx, ty) - ctx.tilde.interval_min(x, y)
    h_dip = np.minimum(hx, hy) - ctx.hat.interval_min(x, y)
    return {
        "tilde_premise": t_dip > tol,
        "tilde_slack": (py - x) - np.maximum(tx, ty),
        "hat_premise": h_dip > tol,
        "hat_slack": (y - px) - np.maximum(hx, hy),
    }


def coincidence_criterion(ctx: EvalContext, n: int = 400, tol: float = TOL) -> VerdictReport:
    """Splice equals the greatest quasi-copula iff both interval conditions hold.

    Violations need slack below ``-tol``; slacks within ``+-tol`` under an
    active premise are flagged ``boundary`` and do not fail the check.
    """
    pts = criterion_points(ctx, n)
    x, y = _pairs(pts)
    s = coincidence_slacks(ctx, x, y, tol)
    coords, slacks, flags = [], [], []
    n_boundary = 0
    n_violation = 0
    for side in ("tilde", "hat"):
        prem = s[f"{side}_premise"]
        sl = s[f"{side}_slack"]
        viol = prem & (sl < -tol)
        bnd = prem & (np.abs(sl) <= tol)
        n_violation += int(viol.sum())
        n_boundary += int(bnd.sum())
        for m, flag in ((viol, False), (bnd, True)):
            coords.extend(zip(x[m], y[m]))
            slacks.extend(sl[m])
            flags.extend([flag] * int(m.sum()))
    stats = {"pairs": int(len(x)), "violations": n_violation, "boundary": n_boundary,
             "premises": int(s["tilde_premise"].sum() + s["hat_premise"].sum())}
    verdict = FAIL if n_violation else PASS
    return VerdictReport("coincidence", verdict, n, tol,
                         _select(coords, slacks, np.array(flags, dtype=bool)), stats)


def phi_simple_report(ctx: EvalContext, n: int = 400, tol: float = TOL) -> VerdictReport:
    """Pairs where a gap function dips below both endpoint values.

    The slack is ``interval_min - min(endpoints)``, negative on a dip.
    """
    pts = criterion_points(ctx, n)
    x, y = _pairs(pts)
    sec = ctx.section
    coords, slacks = [], []
    for f, prof in ((sec.hat, ctx.hat), (sec.tilde, ctx.tilde)):
        sl = prof.interval_min(x, y) - np.minimum(f(x), f(y))
        bad = sl < -tol
        coords.extend(zip(x[bad], y[bad]))
        slacks.extend(sl[bad])
    verdict = FAIL if slacks else PASS
    return VerdictReport("phi-simple", verdict, n, tol, _select(coords, slacks),
                         {"pairs": int(len(x))})


def phi_simple_check(ctx: EvalContext, n: int = 400, tol: float = TOL) -> bool:
    """Both gap functions attain interval minima at an endpoint, at every tested pair."""
    return phi_simple_report(ctx, n, tol).passed


def k_condition_report(ctx: EvalContext, samples: int = 4096, tol: float = TOL) -> VerdictReport:
    """Adjacent sample pairs where ``2t - gamma(t)`` or ``2t - gamma(phi^{-1}(t))`` drops."""
    sec = ctx.section
    ts = merge_coords(np.linspace(0.0, 1.0, samples), sec.breakpoints,
                      sec.phi(sec.breakpoints))
    coords, slacks = [], []
    for g in (2 * ts - sec.gamma(ts), 2 * ts - sec.gamma(sec.phi.inverse(ts))):
        d = np.diff(g)
        bad = d < -tol
        coords.extend(zip(ts[:-1][bad], ts[1:][bad]))
        slacks.extend(d[bad])
    verdict = FAIL if slacks else PASS
    return VerdictReport("k-condition", verdict, samples, tol, _select(coords, slacks),
                         {"samples": int(len(ts))})


def k_copula_condition(ctx: EvalContext, samples: int = 4096, tol: float = TOL) -> bool:
    """Both ``2t - gamma(t)`` and ``2t - gamma(phi^{-1}(t))`` non-decreasing."""
    return k_condition_report(ctx, samples, tol).passed


def m_behavior_scan(g: GridSurface, tol: float = TOL) -> list:
    """Interior grid nodes where the surface equals ``min(x, y)``."""
    X, Y = g.mesh()
    hit = np.abs(g.values - np.minimum(X, Y)) <= tol
    hit[0, :] = hit[-1, :] = False
    hit[:, 0] = hit[:, -1] = False
    return [(float(X[i, j]), float(Y[i, j])) for i, j in np.argwhere(hit)]


def max_abs_difference(a: GridSurface, b: GridSurface) -> float:
    return float(np.max(np.abs(a.values - b.values)))

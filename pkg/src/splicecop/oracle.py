"""Checkerboard linear programs bounding the supremum copula from above.

Grid knots are ``xs = i/n`` and ``ys = phi(i/n)``, so every curve knot
``(x_k, phi(x_k))`` is a grid node.  Variables are the cell masses
``m[i, j] >= 0`` of a checkerboard copula.  Constraints:

* row strip ``i`` carries mass ``xs[i+1] - xs[i]``
* column strip ``j`` carries mass ``ys[j+1] - ys[j]``
* mass of ``[0, x_k] x [0, phi(x_k)]`` equals ``gamma(x_k)``, ``0 < k < n``

Every copula with the given section induces a feasible mass, so the
maximal mass of ``[0, x_a] x [0, y_b]`` bounds the supremum from above.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog
from scipy.sparse import coo_matrix

from .constructions import EvalContext, splice
from .errors import DomainError, SolverError

MAX_N = 64
FEAS_TOL = 1e-10
GAP_FLOOR = -1e-7


@dataclass(frozen=True, eq=False)
class CheckerboardProblem:
    n: int
    xs: np.ndarray
    ys: np.ndarray
    targets: np.ndarray
    mass: np.ndarray | None = None

    @classmethod
    def from_context(cls, ctx: EvalContext, n: int) -> "CheckerboardProblem":
        if not 2 <= n <= MAX_N:
            raise DomainError(f"knot count must lie in [2, {MAX_N}], got {n}")
        xs = np.arange(n + 1) / n
        ys = np.asarray(ctx.phi(xs), dtype=float)
        ys[0], ys[-1] = 0.0, 1.0
        targets = np.asarray(ctx.gamma(xs[1:-1]), dtype=float)
        return cls(n, xs, ys, targets)

    @classmethod
    def independence(cls, n: int) -> "CheckerboardProblem":
        """Product copula on a uniform grid (section of Pi along the diagonal)."""
        xs = np.arange(n + 1) / n
        return cls(n, xs, xs.copy(), xs[1:-1] ** 2, np.full((n, n), 1.0 / n**2))

    def with_mass(self, mass) -> "CheckerboardProblem":
        return CheckerboardProblem(self.n, self.xs, self.ys, self.targets,
                                   np.asarray(mass, dtype=float))

    @property
    def mesh(self) -> float:
        return float(np.max(np.diff(self.xs) + np.diff(self.ys)))

    def constraints(self):
        """Sparse equality system ``A m = b`` over the row-major flattened mass."""
        n = self.n
        rows, cols = [], []
        r = 0
        idx = np.arange(n * n).reshape(n, n)
        for i in range(n):
            rows.extend([r] * n)
            cols.extend(idx[i, :])
            r += 1
        for j in range(n):
            rows.extend([r] * n)
            cols.extend(idx[:, j])
            r += 1
        for k in range(1, n):
            block = idx[:k, :k].ravel()
            rows.extend([r] * len(block))
            cols.extend(block)
            r += 1
        A = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(r, n * n)).tocsr()
        b = np.concatenate([np.diff(self.xs), np.diff(self.ys), self.targets])
        return A, b

    def objective(self, a: int, b: int) -> np.ndarray:
        c = np.zeros((self.n, self.n))
        c[:a, :b] = 1.0
        return c.ravel()

    def residual(self) -> float:
        if self.mass is None:
            raise DomainError("problem carries no mass")
        A, b = self.constraints()
        return float(np.max(np.abs(A @ self.mass.ravel() - b)))

    def check(self, tol: float = FEAS_TOL) -> None:
        if self.mass is None:
            raise DomainError("problem carries no mass")
        if np.any(self.mass < -tol):
            raise DomainError("negative cell mass")
        res = self.residual()
        if res > tol:
            raise DomainError(f"mass violates constraints by {res:.3e}")


def solve(p: CheckerboardProblem, a: int, b: int) -> tuple[float, CheckerboardProblem]:
    """Maximise the mass of ``[0, x_a] x [0, y_b]``; return the optimum and the optimal mass."""
    if not (0 < a < p.n and 0 < b < p.n):
        raise DomainError(f"node indices must lie in (0, {p.n})")
    A, rhs = p.constraints()
    res = linprog(-p.objective(a, b), A_eq=A, b_eq=rhs, bounds=(0, None), method="highs")
    if res.status != 0:
        raise SolverError(f"LP failed (status {res.status}): {res.message}")
    mass = np.maximum(res.x, 0.0).reshape(p.n, p.n)
    return float(-res.fun), p.with_mass(mass)


def lp_sup_at(ctx: EvalContext, n: int, a: int, b: int) -> float:
    """Upper bound on the supremum copula at ``(a/n, phi(b/n))``."""
    value, _ = solve(CheckerboardProblem.from_context(ctx, n), a, b)
    return value


def checkerboard_extend(p: CheckerboardProblem, x, y):
    """Distribution function of the mass spread uniformly within each cell."""
    if p.mass is None:
        raise DomainError("problem carries no mass")
    p.check(1e-8)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    wx = np.clip((x[..., None] - p.xs[:-1]) / np.diff(p.xs), 0.0, 1.0)
    wy = np.clip((y[..., None] - p.ys[:-1]) / np.diff(p.ys), 0.0, 1.0)
    out = np.einsum("...i,ij,...j->...", wx, p.mass, wy)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class OracleRow:
    a: int
    b: int
    x: float
    y: float
    splice: float
    lp: float

    @property
    def gap(self) -> float:
        return self.lp - self.splice

    @property
    def on_curve(self) -> bool:
        return self.a == self.b

    def to_dict(self, mesh):
        return {"a": self.a, "b": self.b, "x": self.x, "y": self.y, "splice": self.splice,
                "lp": self.lp, "gap": self.gap, "in_band": in_band(self.gap, mesh),
                "on_curve": self.on_curve}


def in_band(gap: float, mesh: float) -> bool:
    return GAP_FLOOR <= gap <= 2.0 * mesh


def compare(ctx: EvalContext, n: int, nodes) -> tuple[list[OracleRow], float]:
    """LP bound against the splice at each ``(a, b)`` node index pair."""
    p = CheckerboardProblem.from_context(ctx, n)
    rows = []
    for a, b in nodes:
        value, _ = solve(p, a, b)
        x, y = float(p.xs[a]), float(p.ys[b])
        rows.append(OracleRow(a, b, x, y, float(splice(ctx, x, y)), value))
    return rows, p.mesh


def default_nodes(n: int, count: int = 5) -> list[tuple[int, int]]:
    """Curve nodes plus up to ``count`` off-curve interior nodes."""
    if n < 2:
        return []
    curve = [(k, k) for k in range(1, n)]
    off = []
    for a, b in ((3 * n // 4, n // 4), (n // 4, 3 * n // 4), (n // 2, n // 4),
                 (n // 4, n // 2), (3 * n // 4, n // 2)):
        if 0 < a < n and 0 < b < n and a != b and (a, b) not in off:
            off.append((a, b))
    return off[:count] + curve


def tableau(p: CheckerboardProblem, a: int, b: int) -> str:
    """Plain-text LP instance: rows, cols, objective, constraints (dense rows)."""
    A, rhs = p.constraints()
    A = A.toarray()
    c = p.objective(a, b)
    lines = [f"rows {A.shape[0]}", f"cols {A.shape[1]}", "objective max",
             " ".join(repr(float(v)) for v in c), "constraints"]
    for row, r in zip(A, rhs):
        lines.append(" ".join(repr(float(v)) for v in row) + f" = {float(r)!r}")
    return "\n".join(lines) + "\n"

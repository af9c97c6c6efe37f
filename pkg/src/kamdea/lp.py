"""Dense two-phase primal simplex with Bland's anti-cycling rule.

Solves small problems of the form::

    max/min  c @ z
    s.t.     A @ z == b
             G @ z >= h
             z >= 0

Pivoting is fully deterministic: the entering column is the lowest-index
column with an improving reduced cost, and ratio-test ties go to the basic
variable with the lowest index.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import SolverError, StructuralError


class LpStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LinearProgram:
    objective: np.ndarray
    sense: str = "max"
    A_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None
    G_ge: np.ndarray | None = None
    h_ge: np.ndarray | None = None

    def __post_init__(self):
        c = np.asarray(self.objective, dtype=np.float64).reshape(-1)
        nvar = c.size
        if nvar == 0:
            raise StructuralError("linear program has no variables")
        if self.sense not in ("max", "min"):
            raise StructuralError(f"sense must be 'max' or 'min', got {self.sense!r}")
        A, b = _block(self.A_eq, self.b_eq, nvar, "equality")
        G, h = _block(self.G_ge, self.h_ge, nvar, "inequality")
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(A)) and np.all(np.isfinite(G))):
            raise StructuralError("linear program has non-finite coefficients")
        object.__setattr__(self, "objective", c)
        object.__setattr__(self, "A_eq", A)
        object.__setattr__(self, "b_eq", b)
        object.__setattr__(self, "G_ge", G)
        object.__setattr__(self, "h_ge", h)

    @property
    def n_vars(self) -> int:
        return self.objective.size

    @property
    def n_constraints(self) -> int:
        return self.A_eq.shape[0] + self.G_ge.shape[0]

    def residuals(self, z):
        """Worst equality residual and worst inequality / bound violation."""
        z = np.asarray(z, dtype=float)
        eq = np.max(np.abs(self.A_eq @ z - self.b_eq), initial=0.0)
        ge = np.max(self.h_ge - self.G_ge @ z, initial=0.0)
        lb = np.max(-z, initial=0.0)
        return eq, max(ge, lb, 0.0)


def _block(M, rhs, nvar, kind):
    if M is None and rhs is None:
        return np.zeros((0, nvar)), np.zeros(0)
    if M is None or rhs is None:
        raise StructuralError(f"{kind} constraints need both a matrix and a right-hand side")
    M = np.atleast_2d(np.asarray(M, dtype=np.float64))
    rhs = np.asarray(rhs, dtype=np.float64).reshape(-1)
    if M.size == 0 and rhs.size == 0:
        return np.zeros((0, nvar)), np.zeros(0)
    if M.shape[1] != nvar:
        raise StructuralError(f"{kind} matrix has {M.shape[1]} columns, expected {nvar}")
    if M.shape[0] != rhs.size:
        raise StructuralError(f"{kind} matrix has {M.shape[0]} rows but rhs has {rhs.size}")
    if not np.all(np.isfinite(rhs)):
        raise StructuralError(f"{kind} right-hand side has non-finite entries")
    return M, rhs


@dataclass(frozen=True)
class LpSolution:
    status: LpStatus
    x: np.ndarray | None = None
    objective: float | None = None
    iterations: int = 0

    @property
    def optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


class _Tableau:
    """Row-reduced tableau ``[B^-1 A | B^-1 b]`` with a reduced-cost row."""

    def __init__(self, A, b, basis, tol, cap):
        self.T = np.hstack([A, b[:, None]])
        self.basis = list(basis)
        self.tol = tol
        self.cap = cap
        self.iterations = 0

    def pivot(self, r, j):
        T = self.T
        T[r] /= T[r, j]
        col = T[:, j].copy()
        col[r] = 0.0
        T -= np.outer(col, T[r])
        T[:, j] = 0.0
        T[r, j] = 1.0
        self.basis[r] = j

    def reduced_costs(self, c):
        """``c_j - c_B B^-1 A_j`` for every column."""
        cb = c[self.basis]
        return c - cb @ self.T[:, :-1]

    def minimize(self, c, allowed):
        """Bland-rule minimisation of ``c @ z`` over columns flagged in ``allowed``.

        Returns ``True`` at optimality and ``False`` on an unbounded ray.
        """
        T = self.T
        tol = self.tol
        while True:
            d = self.reduced_costs(c)
            candidates = np.flatnonzero((d < -tol) & allowed)
            if candidates.size == 0:
                return True
            j = int(candidates[0])
            col = T[:, j]
            rows = np.flatnonzero(col > tol)
            if rows.size == 0:
                return False
            ratios = T[rows, -1] / col[rows]
            best = ratios.min()
            tied = rows[ratios <= best + tol * max(1.0, abs(best))]
            r = int(min(tied, key=lambda i: self.basis[i]))
            self.pivot(r, j)
            self.iterations += 1
            if self.iterations > self.cap:
                raise SolverError(
                    f"simplex exceeded {self.cap} iterations", iterations=self.iterations
                )


def solve_lp(lp: LinearProgram, tol: float = 1e-9) -> LpSolution:
    """Solve ``lp`` with the two-phase Bland simplex."""
    nvar = lp.n_vars
    n_eq, n_ge = lp.A_eq.shape[0], lp.G_ge.shape[0]
    cap = 50 * (nvar + lp.n_constraints)

    # G z - t = h with surplus t >= 0
    A = np.zeros((n_eq + n_ge, nvar + n_ge))
    A[:n_eq, :nvar] = lp.A_eq
    A[n_eq:, :nvar] = lp.G_ge
    A[n_eq:, nvar:] = -np.eye(n_ge)
    b = np.concatenate([lp.b_eq, lp.h_ge])
    neg = b < 0
    A[neg] *= -1.0
    b[neg] *= -1.0

    c = np.zeros(nvar + n_ge)
    c[:nvar] = -lp.objective if lp.sense == "max" else lp.objective

    nrow, ncol = A.shape
    if nrow == 0:
        return _solve_unconstrained(lp, c[:nvar], tol)

    scale = max(1.0, float(np.max(np.abs(b), initial=0.0)))

    # phase 1: one artificial per row
    tab = _Tableau(np.hstack([A, np.eye(nrow)]), b, range(ncol, ncol + nrow), tol, cap)
    c1 = np.concatenate([np.zeros(ncol), np.ones(nrow)])
    tab.minimize(c1, np.ones(ncol + nrow, dtype=bool))
    if tab.T[:, -1] @ c1[tab.basis] > tol * scale:
        return LpSolution(LpStatus.INFEASIBLE, iterations=tab.iterations)

    # drive zero-level artificials out of the basis; drop redundant rows
    r = 0
    while r < tab.T.shape[0]:
        if tab.basis[r] >= ncol:
            nz = np.flatnonzero(np.abs(tab.T[r, :ncol]) > tol)
            if nz.size:
                tab.pivot(r, int(nz[0]))
            else:
                tab.T = np.delete(tab.T, r, axis=0)
                del tab.basis[r]
                continue
        r += 1

    # phase 2 on the original columns only
    tab.T = np.hstack([tab.T[:, :ncol], tab.T[:, -1:]])
    bounded = tab.minimize(c, np.ones(ncol, dtype=bool))
    if not bounded:
        return LpSolution(LpStatus.UNBOUNDED, iterations=tab.iterations)

    z = np.zeros(ncol)
    z[tab.basis] = tab.T[:, -1]
    z = z[:nvar]
    z[np.abs(z) <= tol * scale] = 0.0
    z = np.maximum(z, 0.0)
    obj = float(lp.objective @ z)
    return LpSolution(LpStatus.OPTIMAL, z, obj, tab.iterations)


def _solve_unconstrained(lp, c_min, tol):
    # only z >= 0 bounds remain
    if np.any(c_min < -tol):
        return LpSolution(LpStatus.UNBOUNDED)
    z = np.zeros(lp.n_vars)
    return LpSolution(LpStatus.OPTIMAL, z, 0.0)

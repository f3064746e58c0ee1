"""Pluggable linear-programming interface.

Two interchangeable backends sit behind :func:`solve_lp`:

* ``highs`` (default) -- scipy's HiGHS dual simplex; used by the
  full-scale algorithms and the acceptance suite.
* ``simplex`` -- the in-tree dense two-phase simplex from
  :mod:`opgf.simplex`; slower, used to cross-check primal values and
  duals at desk scale so no result depends on a single solver's quirks.

Dual convention (verified by a finite-difference property test): the
dual of row i is the sensitivity d(optimal objective)/d(rhs_i). For an
equality row a.z = b, perturbing b by +delta changes the optimum by
dual*delta + o(delta).

All coefficients are equilibrated to O(1) magnitudes (power-of-two row
and column scaling) before the backend sees them; primal values and
duals are mapped back to the original units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog
from scipy.sparse import coo_matrix

from .linsys import ConstraintSystem

__all__ = ["LpSolution", "SolverError", "solve_lp"]

_STATUS = {0: "optimal", 1: "iteration-limit", 2: "infeasible",
           3: "unbounded", 4: "numerical-failure"}


class SolverError(RuntimeError):
    """Raised when a backend fails in a way the caller cannot act on."""


@dataclass
class LpSolution:
    status: str
    x: np.ndarray | None = None
    duals: np.ndarray | None = None          # one per row, original order
    objective: float | None = None
    feas_residual: float | None = None       # scaled infinity norm
    duality_gap: float | None = None         # relative
    infeasibility_hint: str | None = None

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


def _pow2_scale(v: np.ndarray) -> np.ndarray:
    """Nearest power of two to 1/max-abs, 1.0 for empty rows/cols."""
    out = np.ones_like(v)
    pos = v > 0
    out[pos] = 2.0 ** (-np.round(np.log2(v[pos])))
    return out


def _equilibrate(stacked) -> tuple[np.ndarray, np.ndarray]:
    """Two sweeps of geometric-mean row/column scaling (powers of two).

    Geometric means keep small coefficients from being scaled below
    solver drop tolerances, which max-norm scaling can do on rows whose
    entries span many orders of magnitude.
    """
    m, n = stacked.shape
    r = np.ones(m)
    cs = np.ones(n)
    if stacked.nnz == 0:
        return r, cs
    work = stacked.copy()
    for _ in range(2):
        rows = work.tocsr()
        logs = np.log2(np.abs(rows.data))
        gm = np.zeros(m)
        for i in range(m):
            lo, hi = rows.indptr[i], rows.indptr[i + 1]
            if hi > lo:
                gm[i] = logs[lo:hi].mean()
        ri = 2.0 ** (-np.round(gm))
        work = rows.multiply(ri[:, None]).tocsc()
        r *= ri
        logs = np.log2(np.abs(work.data))
        gm = np.zeros(n)
        for j in range(n):
            lo, hi = work.indptr[j], work.indptr[j + 1]
            if hi > lo:
                gm[j] = logs[lo:hi].mean()
        ci = 2.0 ** (-np.round(gm))
        work = work.multiply(ci[None, :]).tocsr()
        cs *= ci
    return r, cs


def _standard_form(system: ConstraintSystem):
    """Split rows into equalities and '<=' inequalities ('>=' rows are
    negated). Returns matrices plus the map back to original rows."""
    ri, ci, cv = system.triplets()
    n = system.n_cols
    senses = system.senses
    rhs = np.asarray(system.rhs, dtype=float)

    eq_rows = [i for i, s in enumerate(senses) if s == "="]
    ub_rows = [i for i, s in enumerate(senses) if s != "="]
    sign = np.ones(system.n_rows)
    for i, s in enumerate(senses):
        if s == ">=":
            sign[i] = -1.0
    pos = np.full(system.n_rows, -1, dtype=np.int64)
    for k, i in enumerate(eq_rows):
        pos[i] = k
    for k, i in enumerate(ub_rows):
        pos[i] = k

    kind = np.asarray([0 if s == "=" else 1 for s in senses])
    vals = cv * sign[ri]
    which = kind[ri]
    A_eq = coo_matrix((vals[which == 0], (pos[ri[which == 0]], ci[which == 0])),
                      shape=(len(eq_rows), n)).tocsr()
    A_ub = coo_matrix((vals[which == 1], (pos[ri[which == 1]], ci[which == 1])),
                      shape=(len(ub_rows), n)).tocsr()
    b_eq = rhs[eq_rows] * sign[eq_rows]
    b_ub = rhs[ub_rows] * sign[ub_rows]
    return A_eq, b_eq, A_ub, b_ub, eq_rows, ub_rows, sign


def solve_split(c, A_eq, b_eq, A_ub, b_ub, lb, ub, backend: str = "highs",
                scale: bool = True) -> LpSolution:
    """Low-level solve of  min c.x  s.t. A_eq x = b_eq, A_ub x <= b_ub,
    lb <= x <= ub. Duals come back in split order [eq rows; ub rows].
    Equilibration happens here; results are in the caller's units.
    """
    c = np.asarray(c, dtype=float)
    b_eq = np.asarray(b_eq, dtype=float)
    b_ub = np.asarray(b_ub, dtype=float)
    lb = np.asarray(lb, dtype=float)
    ub = np.asarray(ub, dtype=float)
    m_eq = A_eq.shape[0]

    if scale:
        from scipy.sparse import vstack
        stacked = vstack([A_eq, A_ub]).tocsr() if A_ub.shape[0] else A_eq.tocsr()
        r, cs = _equilibrate(stacked)
        A = stacked.multiply(r[:, None]).multiply(cs[None, :]).tocsr()
        A_eq_s, A_ub_s = A[:m_eq], A[m_eq:]
        with np.errstate(invalid="ignore"):
            lb_s, ub_s = lb / cs, ub / cs
        args = (c * cs, A_eq_s, b_eq * r[:m_eq], A_ub_s, b_ub * r[m_eq:],
                lb_s, ub_s)
    else:
        r = np.ones(A_eq.shape[0] + A_ub.shape[0])
        cs = np.ones(c.size)
        args = (c, A_eq, b_eq, A_ub, b_ub, lb, ub)

    if backend == "highs":
        sol = _solve_highs(*args)
    elif backend == "simplex":
        from .simplex import solve_dense
        sol = solve_dense(*args)
    else:
        raise SolverError(f"unknown LP backend {backend!r}")
    if sol.status != "optimal":
        return sol
    sol.x = sol.x * cs
    sol.duals = sol.duals * r
    sol.objective = float(np.dot(c, sol.x))
    return sol


def solve_lp(system: ConstraintSystem, warm_start: np.ndarray | None = None,
             backend: str = "highs", scale: bool = True) -> LpSolution:
    """Solve the (linear) system; returns primal, per-row duals (original
    row order), and status.

    ``warm_start`` is advisory: backends that cannot exploit a primal
    start ignore it.
    """
    if not system.is_linear:
        raise SolverError("system has nonlinear rows; use the SLP solver")
    system.finalize()
    A_eq, b_eq, A_ub, b_ub, eq_rows, ub_rows, sign = _standard_form(system)
    sol = solve_split(system.c, A_eq, b_eq, A_ub, b_ub, system.lb, system.ub,
                      backend=backend, scale=scale)
    if sol.status != "optimal":
        sol.duals = None
        sol.x = None
        return sol
    duals = np.zeros(system.n_rows)
    m_eq = len(eq_rows)
    for k, i in enumerate(eq_rows):
        duals[i] = sol.duals[k] * sign[i]
    for k, i in enumerate(ub_rows):
        duals[i] = sol.duals[m_eq + k] * sign[i]
    obj = float(np.dot(system.c, sol.x)) + system.obj_const
    return LpSolution(status="optimal", x=sol.x, duals=duals, objective=obj,
                      feas_residual=sol.feas_residual,
                      duality_gap=sol.duality_gap)


def _solve_highs(c, A_eq, b_eq, A_ub, b_ub, lb, ub) -> LpSolution:
    bounds = np.column_stack([lb, ub])
    res = linprog(c,
                  A_ub=A_ub if A_ub.shape[0] else None,
                  b_ub=b_ub if A_ub.shape[0] else None,
                  A_eq=A_eq if A_eq.shape[0] else None,
                  b_eq=b_eq if A_eq.shape[0] else None,
                  bounds=bounds, method="highs-ds")
    status = _STATUS.get(res.status, "numerical-failure")
    if status != "optimal":
        hint = res.message if status == "infeasible" else None
        return LpSolution(status=status, infeasibility_hint=hint)

    x = np.asarray(res.x)
    y_eq = np.asarray(res.eqlin.marginals) if A_eq.shape[0] else np.empty(0)
    y_ub = np.asarray(res.ineqlin.marginals) if A_ub.shape[0] else np.empty(0)
    zl = np.asarray(res.lower.marginals)
    zu = np.asarray(res.upper.marginals)

    feas = 0.0
    if A_eq.shape[0]:
        feas = max(feas, float(np.max(np.abs(A_eq @ x - b_eq))))
    if A_ub.shape[0]:
        feas = max(feas, float(np.max(np.maximum(A_ub @ x - b_ub, 0.0))))
    feas = max(feas, float(np.max(np.maximum(lb - x, 0.0), initial=0.0)))
    feas = max(feas, float(np.max(np.maximum(x - ub, 0.0), initial=0.0)))

    primal_obj = float(c @ x)
    dual_obj = float(b_eq @ y_eq) + float(b_ub @ y_ub)
    finite_l = np.isfinite(lb)
    finite_u = np.isfinite(ub)
    dual_obj += float(lb[finite_l] @ zl[finite_l])
    dual_obj += float(ub[finite_u] @ zu[finite_u])
    gap = abs(primal_obj - dual_obj) / (1.0 + abs(primal_obj))

    return LpSolution(status="optimal", x=x,
                      duals=np.concatenate([y_eq, y_ub]),
                      objective=primal_obj, feas_residual=feas,
                      duality_gap=gap)

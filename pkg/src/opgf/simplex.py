"""Dense two-phase primal simplex, the in-tree reference LP backend.

Intended for desk-scale problems and for cross-checking the HiGHS
backend; Bland's rule keeps it cycle-free at the cost of speed. The
entry point :func:`solve_dense` accepts the same split form as the HiGHS
adapter (equalities, '<=' inequalities, variable bounds) and returns row
duals in the d(objective)/d(rhs) convention.
"""

from __future__ import annotations

import math

import numpy as np

_TOL = 1e-9
_BIG = 1e20    # bounds at or beyond this magnitude count as infinite


def _finite(v: float) -> bool:
    return math.isfinite(v) and abs(v) < _BIG


def solve_dense(c, A_eq, b_eq, A_ub, b_ub, lb, ub):
    from .lp import LpSolution

    c = np.asarray(c, dtype=float)
    n = c.size
    A_eq = np.asarray(A_eq.todense()) if hasattr(A_eq, "todense") else np.asarray(A_eq, dtype=float)
    A_ub = np.asarray(A_ub.todense()) if hasattr(A_ub, "todense") else np.asarray(A_ub, dtype=float)
    A_eq = A_eq.reshape(-1, n)
    A_ub = A_ub.reshape(-1, n)
    b_eq = np.asarray(b_eq, dtype=float)
    b_ub = np.asarray(b_ub, dtype=float)
    lb = np.asarray(lb, dtype=float)
    ub = np.asarray(ub, dtype=float)

    # --- shift/split variables to x' >= 0 ----------------------------------
    # x_j = off_j + dir_j * x'_j (dir=+1 shifted, -1 flipped), free vars split.
    cols: list[tuple[int, float, float]] = []   # (orig var, offset, direction)
    extra_ub: list[tuple[int, float]] = []      # (column of x', upper bound)
    for j in range(n):
        l, u = lb[j], ub[j]
        if l > u + 1e-12:
            return LpSolution(status="infeasible",
                              infeasibility_hint=f"empty bound interval on column {j}")
        if _finite(l):
            cols.append((j, l, 1.0))
            if _finite(u):
                extra_ub.append((len(cols) - 1, u - l))
        elif _finite(u):
            cols.append((j, u, -1.0))
        else:
            cols.append((j, 0.0, 1.0))
            cols.append((j, 0.0, -1.0))
    np_cols = len(cols)
    T = np.zeros((n, np_cols))      # x = off + T x'
    off = np.zeros(n)
    for k, (j, _o, d) in enumerate(cols):
        T[j, k] += d
    for j in range(n):
        if _finite(lb[j]):
            off[j] = lb[j]
        elif _finite(ub[j]):
            off[j] = ub[j]

    m_eq, m_ub = A_eq.shape[0], A_ub.shape[0]
    m_bd = len(extra_ub)
    A1 = A_eq @ T
    A2 = A_ub @ T
    A3 = np.zeros((m_bd, np_cols))
    b3 = np.zeros(m_bd)
    for i, (k, cap) in enumerate(extra_ub):
        A3[i, k] = 1.0
        b3[i] = cap
    rhs1 = b_eq - A_eq @ off
    rhs2 = b_ub - A_ub @ off

    # --- slack-augmented standard form  A z = b, z >= 0 ---------------------
    m = m_eq + m_ub + m_bd
    n_slack = m_ub + m_bd
    A = np.zeros((m, np_cols + n_slack))
    A[:m_eq, :np_cols] = A1
    A[m_eq:m_eq + m_ub, :np_cols] = A2
    A[m_eq + m_ub:, :np_cols] = A3
    for i in range(n_slack):
        A[m_eq + i, np_cols + i] = 1.0
    b = np.concatenate([rhs1, rhs2, b3])
    cz = np.concatenate([c @ T, np.zeros(n_slack)])

    flip = b < 0
    A[flip] *= -1.0
    b = np.abs(b)

    # --- phase 1 -------------------------------------------------------------
    n_tot = A.shape[1]
    D = np.hstack([A, np.eye(m)])          # artificial columns track B^-1
    xb = b.copy()
    basis = list(range(n_tot, n_tot + m))
    art_cols = set(range(n_tot, n_tot + m))
    cost1 = np.zeros(n_tot + m)
    cost1[n_tot:] = 1.0
    if _iterate(D, xb, basis, cost1, blocked=art_cols) != "optimal":
        return LpSolution(status="numerical-failure")
    if sum(xb[i] for i, bi in enumerate(basis) if bi >= n_tot) > 1e-7 * (1 + np.abs(b).max(initial=0.0)):
        bad = sorted({bi - n_tot for i, bi in enumerate(basis)
                      if bi >= n_tot and xb[i] > 1e-7})
        return LpSolution(status="infeasible",
                          infeasibility_hint=f"phase-1 residual on rows {bad}")

    # pivot remaining zero-level artificials out where possible
    for i in range(m):
        if basis[i] >= n_tot:
            row = D[i, :n_tot]
            j = next((k for k in range(n_tot) if abs(row[k]) > 1e-9), None)
            if j is not None:
                _pivot(D, xb, basis, i, j)

    # --- phase 2 -------------------------------------------------------------
    cost2 = np.concatenate([cz, np.zeros(m)])
    outcome = _iterate(D, xb, basis, cost2, blocked=art_cols)
    if outcome == "unbounded":
        return LpSolution(status="unbounded")
    if outcome != "optimal":
        return LpSolution(status="numerical-failure")

    z = np.zeros(n_tot)
    for i, bi in enumerate(basis):
        if bi < n_tot:
            z[bi] = xb[i]
    x = off + T @ z[:np_cols]

    cB = cost2[basis]
    y = cB @ D[:, n_tot:]                   # duals of the normalized rows
    y = np.where(flip, -y, y)
    duals = np.concatenate([y[:m_eq], y[m_eq:m_eq + m_ub]])

    primal_obj = float(c @ x)
    feas = 0.0
    if m_eq:
        feas = max(feas, float(np.max(np.abs(A_eq @ x - b_eq))))
    if m_ub:
        feas = max(feas, float(np.max(np.maximum(A_ub @ x - b_ub, 0.0))))
    feas = max(feas, float(np.max(np.maximum(lb - x, 0.0), initial=0.0)))
    feas = max(feas, float(np.max(np.maximum(x - ub, 0.0), initial=0.0)))
    # strong duality in the standard form: c z = y b (+ bound-row part)
    dual_obj = float((cB @ D[:, n_tot:]) @ b)
    shift = float(c @ off)
    gap = abs((primal_obj - shift) - dual_obj) / (1.0 + abs(primal_obj))
    return LpSolution(status="optimal", x=x, duals=duals, objective=primal_obj,
                      feas_residual=feas, duality_gap=gap)


def _pivot(D: np.ndarray, xb: np.ndarray, basis: list[int], r: int, j: int) -> None:
    piv = D[r, j]
    D[r] /= piv
    xb[r] /= piv
    col = D[:, j].copy()
    col[r] = 0.0
    D -= np.outer(col, D[r])
    xb -= col * xb[r]
    basis[r] = j


def _iterate(D, xb, basis, cost, blocked: set[int], max_iter: int = 200000) -> str:
    """Bland-rule simplex on the current tableau."""
    m = xb.size
    n_price = D.shape[1]
    in_basis = set(basis)
    for _ in range(max_iter):
        y = cost[basis] @ D
        red = cost[:n_price] - y
        enter = -1
        for j in range(n_price):
            if j in blocked or j in in_basis:
                continue
            if red[j] < -_TOL:
                enter = j
                break
        if enter < 0:
            return "optimal"
        col = D[:, enter]
        best_ratio, leave = math.inf, -1
        for i in range(m):
            if col[i] > _TOL:
                ratio = xb[i] / col[i]
                if ratio < best_ratio - 1e-12 or (
                        abs(ratio - best_ratio) <= 1e-12
                        and (leave < 0 or basis[i] < basis[leave])):
                    best_ratio, leave = ratio, i
        if leave < 0:
            return "unbounded"
        in_basis.discard(basis[leave])
        in_basis.add(enter)
        _pivot(D, xb, basis, leave, enter)
    return "maxiter"

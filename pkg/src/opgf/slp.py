"""Successive linear programming with an l1 trust region.

Solves constraint systems whose friction and compressor rows are
nonconvex: each iteration linearizes those rows at the current point,
adds elastic slacks (exact l1 penalty) so the LP is always feasible, and
boxes the variables appearing in nonlinear terms with a trust region.
Steps are accepted on the actual-vs-predicted reduction of

    merit(z) = objective(z) + penalty * sum |row residuals|,

and the radius shrinks or grows accordingly. After the step norm falls
below tolerance the problem is linearized once more at the final point
and solved plainly (no trust region, no slacks); that LP supplies the
constraint duals that callers read off, e.g. the stage-coupling
sensitivities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix, csr_matrix, hstack

from .linsys import ConstraintSystem
from .lp import LpSolution, SolverError, solve_split, _standard_form

__all__ = ["SlpConfig", "SlpResult", "solve_slp",
           "linearize_friction", "linearize_compressor"]


@dataclass
class SlpConfig:
    epsilon: float = 1e-6        # |m| smoothing, scaled flow units
    tr_init: float = 0.1         # trust-region radius, scaled units
    tr_shrink: float = 0.5
    tr_grow: float = 2.0
    tr_max: float = 1e3
    accept_ratio: float = 0.1
    step_tol: float = 1e-6       # relative step norm
    max_iter: int = 50
    residual_tol: float = 1e-6   # nonlinear row residual, scaled
    penalty: float = 100.0       # l1 elastic penalty, grows on demand
    penalty_max: float = 1e8
    backend: str = "highs"

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if not (0 < self.tr_shrink < 1 < self.tr_grow):
            raise ValueError("need 0 < shrink < 1 < grow")
        if self.step_tol <= 0:
            raise ValueError("step tolerance must be positive")


@dataclass
class SlpResult:
    z: np.ndarray
    objective: float             # true objective at z
    converged: bool
    iterations: int
    nl_residual: float           # max |nonlinear row residual| at z
    duals: np.ndarray | None     # per original row, from the final plain LP
    status: str = "ok"
    lp_solves: int = field(default=0)


def linearize_friction(m_hat: float, p_hat: float, v_f: float,
                       eps: float) -> tuple[float, float, float]:
    """First-order expansion of Phi(m, p) = v_f * m*sqrt(m^2+eps) / p.

    Returns (value, dPhi/dm, dPhi/dp) at (m_hat, p_hat).
    """
    if p_hat <= 0.0:
        raise SolverError(f"friction linearization at non-positive pressure {p_hat}")
    root = math.sqrt(m_hat * m_hat + eps)
    phi = m_hat * root
    value = v_f * phi / p_hat
    d_m = v_f * (root + m_hat * m_hat / root) / p_hat
    d_p = -v_f * phi / (p_hat * p_hat)
    return value, d_m, d_p


def linearize_compressor(kappa_hat: float, pi_hat: float) -> tuple[float, float, float]:
    """First-order expansion of the product kappa * pi at (kappa_hat,
    pi_hat): returns (d/dkappa, d/dpi, constant) so that

        kappa*pi ~ d_kappa*kappa + d_pi*pi + constant

    with the bilinear remainder exactly (kappa-kappa_hat)*(pi-pi_hat).
    """
    return pi_hat, kappa_hat, -kappa_hat * pi_hat


class _Workspace:
    """Split-form matrices for one system, reused across SLP iterations."""

    def __init__(self, sys: ConstraintSystem):
        sys.finalize()
        (self.A_eq, self.b_eq_base, self.A_ub, self.b_ub,
         self.eq_rows, self.ub_rows, self.sign) = _standard_form(sys)
        self.eq_pos = {row: k for k, row in enumerate(self.eq_rows)}
        self.n = sys.n_cols
        terms = []
        for t in sys.friction_terms:
            terms.append(("fric", self.eq_pos[t.row], t))
        for t in sys.bilinear_terms:
            terms.append(("bil", self.eq_pos[t.row], t))
        self.terms = terms
        k = len(terms)
        if k:
            rows = np.array([pos for _, pos, _ in terms])
            cols_p = np.arange(k)
            s_plus = coo_matrix((np.ones(k), (rows, cols_p)),
                                shape=(self.A_eq.shape[0], k))
            s_minus = coo_matrix((-np.ones(k), (rows, cols_p)),
                                 shape=(self.A_eq.shape[0], k))
            self.slack_block = hstack([s_plus, s_minus]).tocsr()
            if self.A_ub.shape[0]:
                self.A_ub_ext = hstack(
                    [self.A_ub, csr_matrix((self.A_ub.shape[0], 2 * k))]).tocsr()
            else:
                self.A_ub_ext = csr_matrix((0, self.n + 2 * k))
        self.tr_cols = sys.nonlinear_cols()

    def linearized(self, sys: ConstraintSystem, z: np.ndarray, eps: float):
        """Linearized coefficient matrix (eq rows x n) and rhs shift."""
        ri, ci, cv = [], [], []
        shift = np.zeros(self.A_eq.shape[0])
        for kind, pos, t in self.terms:
            if kind == "fric":
                val, d_m, d_p = linearize_friction(z[t.m_col], z[t.p_col],
                                                   t.coef, eps)
                ri += [pos, pos]
                ci += [t.m_col, t.p_col]
                cv += [d_m, d_p]
                shift[pos] += val - d_m * z[t.m_col] - d_p * z[t.p_col]
            else:
                d_a, d_b, const = linearize_compressor(z[t.a_col], z[t.b_col])
                ri += [pos, pos]
                ci += [t.a_col, t.b_col]
                cv += [t.coef * d_a, t.coef * d_b]
                shift[pos] += t.coef * const
        L = coo_matrix((cv, (ri, ci)), shape=(self.A_eq.shape[0], self.n)).tocsr()
        return L, shift


def _merit(sys: ConstraintSystem, z: np.ndarray, eps: float,
           penalty: float) -> tuple[float, float, float]:
    """(merit, objective, max nonlinear residual) at z."""
    res = sys.residuals(z, eps)
    obj = sys.objective_value(z)
    nl = sys.nonlinear_rows()
    nl_res = float(np.max(np.abs(res[nl]))) if nl.size else 0.0
    return obj + penalty * float(np.sum(np.abs(res))), obj, nl_res


def solve_slp(sys: ConstraintSystem, z0: np.ndarray,
              config: SlpConfig | None = None) -> SlpResult:
    """Run the trust-region SLP loop from the point ``z0``.

    Purely linear systems collapse to a single LP solve.
    """
    cfg = config or SlpConfig()
    sys.finalize()
    ws = _Workspace(sys)
    b_eq = np.asarray(sys.rhs, dtype=float)[ws.eq_rows] * ws.sign[ws.eq_rows] \
        if ws.eq_rows else np.empty(0)
    # _standard_form snapshots rhs at build; re-read it here so callers can
    # mutate rhs between solves on a shared system.
    ws.b_eq_base = b_eq

    if not ws.terms:
        sol = solve_split(sys.c, ws.A_eq, ws.b_eq_base, ws.A_ub, ws.b_ub,
                          sys.lb, sys.ub, backend=cfg.backend)
        if sol.status != "optimal":
            raise SolverError(f"linear solve failed: {sol.status} "
                              f"({sol.infeasibility_hint or 'no hint'})")
        duals = _remap_duals(sys, ws, sol.duals)
        return SlpResult(z=sol.x, objective=float(sol.objective) + sys.obj_const,
                         converged=True, iterations=1, nl_residual=0.0,
                         duals=duals, lp_solves=1)

    z = np.clip(np.asarray(z0, dtype=float), sys.lb, sys.ub)
    penalty = cfg.penalty
    radius = cfg.tr_init
    k = len(ws.terms)
    lb = np.asarray(sys.lb, dtype=float)
    ub = np.asarray(sys.ub, dtype=float)
    merit, obj, nl_res = _merit(sys, z, cfg.epsilon, penalty)
    converged = False
    lp_solves = 0
    it = 0

    while it < cfg.max_iter:
        it += 1
        L, shift = ws.linearized(sys, z, cfg.epsilon)
        A_eq_k = hstack([ws.A_eq + L, ws.slack_block]).tocsr()
        b_eq_k = ws.b_eq_base - shift
        c_k = np.concatenate([sys.c, np.full(2 * k, penalty)])
        lb_k = np.concatenate([lb, np.zeros(2 * k)])
        ub_k = np.concatenate([ub, np.full(2 * k, math.inf)])
        tr = ws.tr_cols
        lb_k[tr] = np.maximum(lb[tr], z[tr] - radius)
        ub_k[tr] = np.minimum(ub[tr], z[tr] + radius)
        sol = solve_split(c_k, A_eq_k, b_eq_k, ws.A_ub_ext, ws.b_ub,
                          lb_k, ub_k, backend=cfg.backend)
        lp_solves += 1
        if sol.status != "optimal":
            # retry once without the trust region (slacks keep it elastic)
            lb_k[tr] = lb[tr]
            ub_k[tr] = ub[tr]
            sol = solve_split(c_k, A_eq_k, b_eq_k, ws.A_ub_ext, ws.b_ub,
                              lb_k, ub_k, backend=cfg.backend)
            lp_solves += 1
            if sol.status != "optimal":
                raise SolverError(
                    f"SLP subiteration LP {sol.status}: "
                    f"{sol.infeasibility_hint or 'no hint'} (model bug: the "
                    "elastic relaxation should always be feasible)")
        z_new = sol.x[:ws.n]
        lp_merit = float(sol.objective) + sys.obj_const
        predicted = merit - lp_merit
        merit_new, obj_new, nl_new = _merit(sys, z_new, cfg.epsilon, penalty)
        actual = merit - merit_new
        step = float(np.linalg.norm(z_new[tr] - z[tr]))
        rel_step = step / max(1.0, float(np.linalg.norm(z[tr])))

        if predicted <= 1e-12 * (1.0 + abs(merit)):
            if rel_step <= cfg.step_tol or radius <= 1e-12:
                z, merit, obj, nl_res = z_new, merit_new, obj_new, nl_new
                converged = True
            else:
                radius *= cfg.tr_shrink
                continue
        else:
            ratio = actual / predicted
            if ratio >= cfg.accept_ratio:
                z, merit, obj, nl_res = z_new, merit_new, obj_new, nl_new
                if ratio >= 0.7:
                    radius = min(radius * cfg.tr_grow, cfg.tr_max)
                if rel_step <= cfg.step_tol:
                    converged = True
            else:
                radius *= cfg.tr_shrink
                if radius <= 1e-12:
                    break
                continue

        if converged:
            if nl_res > cfg.residual_tol and penalty < cfg.penalty_max:
                penalty = min(penalty * 10.0, cfg.penalty_max)
                merit, obj, nl_res = _merit(sys, z, cfg.epsilon, penalty)
                converged = False
                radius = max(radius, cfg.tr_init)
                continue
            break

    # dual pass: fixed linearization at the final point, no boxes, no slacks
    L, shift = ws.linearized(sys, z, cfg.epsilon)
    sol = solve_split(sys.c, (ws.A_eq + L).tocsr(), ws.b_eq_base - shift,
                      ws.A_ub, ws.b_ub, lb, ub, backend=cfg.backend)
    lp_solves += 1
    duals = None
    if sol.status == "optimal":
        duals = _remap_duals(sys, ws, sol.duals)
        z_lp = sol.x
        _, obj_lp, nl_lp = _merit(sys, z_lp, cfg.epsilon, penalty)
        if nl_lp <= max(cfg.residual_tol, nl_res):
            z, obj, nl_res = z_lp, obj_lp, nl_lp

    return SlpResult(z=z, objective=obj, converged=converged and nl_res <= cfg.residual_tol,
                     iterations=it, nl_residual=nl_res, duals=duals,
                     status="ok" if converged else "max-iterations",
                     lp_solves=lp_solves)


def _remap_duals(sys: ConstraintSystem, ws: _Workspace,
                 split_duals: np.ndarray) -> np.ndarray:
    duals = np.zeros(sys.n_rows)
    m_eq = len(ws.eq_rows)
    for pos, i in enumerate(ws.eq_rows):
        duals[i] = split_duals[pos] * ws.sign[i]
    for pos, i in enumerate(ws.ub_rows):
        duals[i] = split_duals[m_eq + pos] * ws.sign[i]
    return duals

"""Stochastic hybrid approximation: masters, correction updates,
iterate averaging, and the solution-update stopping rule.

Three initial recourse approximations are supported:

* ``shacv`` -- separable convex quadratic sum(a_i x_i^2 + b_i x_i) with b
  calibrated so the uncorrected master reproduces the certainty-
  equivalent dispatch; the quadratic is outer-approximated by tangent
  cuts so a single LP backend serves every master.
* ``shace`` -- the full second stage embedded for the average wind
  profile (certainty equivalent), re-linearized every iteration.
* ``shaxe`` -- the second stage embedded for the two training scenarios
  with the most and the least total wind energy, weighted half each.

Each iteration solves the master, samples one training scenario, solves
its recourse problem, and moves the linear correction toward the gap
between the sampled sensitivity and the approximation's gradient with
step rho/iteration. The reported solution is a 1/alpha-weighted sliding
average of the master iterates; the stopping metric is the relative
change of that average.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .builders import (XIndex, add_first_stage, build_two_stage,
                       first_stage_cost)
from .linsys import ConstraintSystem
from .lp import solve_lp
from .network import Instance
from .scenarios import ScenarioSet, extrema, iteration_order
from .slp import SlpConfig, solve_slp
from .subproblem import SubproblemSolver, flat_gas_point

__all__ = ["ShaConfig", "ShaResult", "step_size", "sha_update",
           "weighted_average", "solution_update_metric", "calibrate_b",
           "window_deltas", "ShacvMaster", "EmbeddedMaster",
           "certainty_equivalent_dispatch", "run"]

VARIANTS = ("shacv", "shace", "shaxe")


@dataclass
class ShaConfig:
    variant: str = "shace"
    rho: float = 1.0
    a: float = 1000.0                 # shacv quadratic coefficient
    window: float = math.inf          # 1, finite n, inf, or "half"
    eps_tol: float = 1e-4
    max_iterations: int = 500
    time_limit: float | None = None   # seconds
    seed: int = 0
    pwl_tol: float = 1e-4             # shacv master refinement, relative
    min_iterations: int = 10          # warm-up before the delta rule may fire
    eval_every: int | None = None     # cadence for the optional quality callback

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.rho <= 0 or self.eps_tol <= 0:
            raise ValueError("rho and eps_tol must be positive")
        if self.variant == "shacv" and self.a <= 0:
            raise ValueError("shacv needs a > 0")
        if self.window != math.inf and self.window != "half":
            if int(self.window) < 1:
                raise ValueError("window must be >= 1, inf, or 'half'")


@dataclass
class ShaResult:
    x_bar: np.ndarray
    x_last: np.ndarray
    lam_bar: np.ndarray
    iterates: np.ndarray              # (nu, n) master solutions
    alphas: np.ndarray
    history: list[dict]               # nu, wall, scenario, S, delta[, V]
    stop_reason: str
    failed_samples: list[int] = field(default_factory=list)


# ---------------------------------------------------------------------------
# update algebra
# ---------------------------------------------------------------------------

def step_size(nu: int, rho: float) -> float:
    """alpha = rho / nu."""
    if nu < 1:
        raise ValueError("iteration counter starts at 1")
    return rho / nu


def sha_update(lam_bar: np.ndarray, lam: np.ndarray, q0: np.ndarray,
               alpha: float) -> np.ndarray:
    """lam_bar' = lam_bar + alpha (lam - (q0 + lam_bar))."""
    lam_bar = np.asarray(lam_bar, dtype=float)
    lam = np.asarray(lam, dtype=float)
    q0 = np.asarray(q0, dtype=float)
    if lam_bar.shape != lam.shape or lam.shape != q0.shape:
        raise ValueError("dimension mismatch in correction update")
    return lam_bar + alpha * (lam - (q0 + lam_bar))


def weighted_average(iterates: np.ndarray, alphas: np.ndarray,
                     window) -> np.ndarray:
    """Sliding-window average with weights 1/alpha over the last
    min(window, nu) iterates ('half' means ceil(nu/2))."""
    nu = iterates.shape[0]
    if nu < 1:
        raise ValueError("no iterates to average")
    n = _window_len(window, nu)
    i0 = max(0, nu - n)
    w = 1.0 / alphas[i0:nu]
    return (iterates[i0:nu] * w[:, None]).sum(axis=0) / w.sum()


def _window_len(window, nu: int) -> int:
    if window == "half":
        return max(1, nu // 2)
    if window == math.inf:
        return nu
    return int(window)


def solution_update_metric(x_bar: np.ndarray, x_bar_prev: np.ndarray) -> float:
    """Relative change of the averaged solution; falls back to the
    absolute change when the average has zero norm."""
    diff = float(np.linalg.norm(np.asarray(x_bar) - np.asarray(x_bar_prev)))
    denom = float(np.linalg.norm(x_bar))
    return diff / denom if denom > 0 else diff


def window_deltas(iterates: np.ndarray, alphas: np.ndarray,
                  window) -> np.ndarray:
    """Delta sequence (nu >= 2) a given window would have produced."""
    nu = iterates.shape[0]
    out = np.full(nu, np.nan)
    prev = None
    for k in range(1, nu + 1):
        xb = weighted_average(iterates[:k], alphas[:k], window)
        if prev is not None:
            out[k - 1] = solution_update_metric(xb, prev)
        prev = xb
    return out


def calibrate_b(a: np.ndarray | float, x_ce: np.ndarray,
                lam_ce: np.ndarray) -> np.ndarray:
    """b making the quadratic's gradient at the certainty-equivalent
    dispatch equal that solution's recourse sensitivity: b = lam - 2 a x."""
    return np.asarray(lam_ce, dtype=float) - 2.0 * np.asarray(a, dtype=float) \
        * np.asarray(x_ce, dtype=float)


# ---------------------------------------------------------------------------
# masters
# ---------------------------------------------------------------------------

class ShacvMaster:
    """f(x) + sum(a x^2 + b x) + lam_bar.x over the first-stage set,
    with the quadratic handled by tangent (outer) cuts refined on demand."""

    def __init__(self, instance: Instance, a: np.ndarray | float,
                 b: np.ndarray, backend: str = "highs", tol: float = 1e-4):
        self.instance = instance
        self.xi = XIndex.of(instance)
        self.a = np.broadcast_to(np.asarray(a, dtype=float), (self.xi.size,)).copy()
        self.b = np.asarray(b, dtype=float).copy()
        self.backend = backend
        self.tol = tol
        self.tangents: list[list[float]] = [[] for _ in range(self.xi.size)]
        for i, g in enumerate(self.xi.gens):
            gen = next(gg for gg in instance.electric.generators if gg.id == g)
            for t in range(self.xi.horizon):
                k = i * self.xi.horizon + t
                mid = 0.5 * (gen.p_min + gen.p_max)
                for pt in (gen.p_min, mid, gen.p_max):
                    self.tangents[k].append(float(pt))

    def _build(self, lam_bar: np.ndarray) -> ConstraintSystem:
        sys = ConstraintSystem("shacv-master")
        add_first_stage(sys, self.instance, lam_bar)
        for k in range(self.xi.size):
            g, t = divmod(k, self.xi.horizon)
            x_col = sys.var(("x", self.xi.gens[g], t))
            q_col = sys.add_var(("q", k), lb=-math.inf, obj=1.0)
            sys.set_obj(x_col, float(np.asarray(sys.c)[x_col]) + self.b[k])
            for pt in self.tangents[k]:
                sys.add_row([(q_col, 1.0), (x_col, -2.0 * self.a[k] * pt)],
                            ">=", -self.a[k] * pt * pt)
        return sys.finalize()

    def solve(self, lam_bar: np.ndarray) -> tuple[np.ndarray, float]:
        """Returns (x, S(x)) with the quadratic evaluated exactly."""
        for _ in range(60):
            sys = self._build(lam_bar)
            sol = solve_lp(sys, backend=self.backend)
            if not sol.optimal:
                raise RuntimeError(f"master LP {sol.status}")
            x = np.array([sol.x[sys.var(("x", self.xi.gens[g], t))]
                          for g in range(len(self.xi.gens))
                          for t in range(self.xi.horizon)])
            q = np.array([sol.x[sys.var(("q", k))] for k in range(self.xi.size)])
            true_q = self.a * x * x
            gap = float(np.sum(true_q - q))
            if gap <= self.tol * max(1.0, abs(sol.objective)):
                s_val = (first_stage_cost(self.instance, x)
                         + float(np.sum(self.a * x * x + self.b * x))
                         + float(np.dot(lam_bar, x)))
                return x, s_val
            worst = np.argsort(true_q - q)[-8:]
            for k in worst:
                if true_q[k] - q[k] > 1e-12:
                    self.tangents[k].append(float(x[k]))
        raise RuntimeError("tangent refinement did not close the gap")

    def q0(self, x: np.ndarray) -> np.ndarray:
        return 2.0 * self.a * x + self.b


class EmbeddedMaster:
    """f(x) + weighted second-stage blocks + lam_bar.x, solved by SLP
    with the gas rows re-linearized at each call's warm start."""

    def __init__(self, instance: Instance, winds: list[np.ndarray],
                 weights: list[float], scen_keys: list,
                 slp: SlpConfig | None = None, backend: str = "highs"):
        self.instance = instance
        self.xi = XIndex.of(instance)
        self.slp = replace(slp or SlpConfig(), backend=backend)
        self.scen_keys = scen_keys
        self.sys = build_two_stage(instance, winds, weights, scen_keys)
        self._base_obj = np.asarray(self.sys.c, dtype=float).copy()
        self._z = None
        self.last_result = None

    def _initial(self) -> np.ndarray:
        z = np.clip(np.zeros(self.sys.n_cols), self.sys.lb, self.sys.ub)
        for key in self.scen_keys:
            z = flat_gas_point(self.sys, self.instance, key, base=z)
        for i, g in enumerate(self.xi.gens):
            gen = next(gg for gg in self.instance.electric.generators
                       if gg.id == g)
            for t in range(self.xi.horizon):
                z[self.sys.var(("x", g, t))] = gen.p_min
                for key in self.scen_keys:
                    z[self.sys.var(("p", key, g, t))] = gen.p_min
        return z

    def solve(self, lam_bar: np.ndarray) -> tuple[np.ndarray, float]:
        for i, g in enumerate(self.xi.gens):
            for t in range(self.xi.horizon):
                k = self.xi.pos(g, t)
                col = self.sys.var(("x", g, t))
                self.sys.set_obj(col, self._base_obj[col] + float(lam_bar[k]))
        z0 = self._z if self._z is not None else self._initial()
        res = solve_slp(self.sys, z0, self.slp)
        self._z = res.z
        self.last_result = res
        x = np.array([res.z[self.sys.var(("x", g, t))]
                      for g in self.xi.gens for t in range(self.xi.horizon)])
        return x, float(res.objective)


def certainty_equivalent_dispatch(instance: Instance, scenarios: ScenarioSet,
                                  slp: SlpConfig | None = None,
                                  backend: str = "highs") -> np.ndarray:
    """Dispatch minimizing f(x) + g(x, E[w]) -- the uncorrected
    certainty-equivalent master."""
    wind = scenarios.farm_output(instance.electric, scenarios.expectation)
    master = EmbeddedMaster(instance, [wind], [1.0], ["ce"], slp, backend)
    x, _ = master.solve(np.zeros(XIndex.of(instance).size))
    return x


# ---------------------------------------------------------------------------
# main loop
# ---------------------------------------------------------------------------

def run(instance: Instance, scenarios: ScenarioSet, config: ShaConfig,
        slp: SlpConfig | None = None, backend: str = "highs",
        quality_fn=None, log=None) -> ShaResult:
    """Run the SHA loop; deterministic for fixed config and seed."""
    t0 = time.perf_counter()
    xi = XIndex.of(instance)
    slp = slp or SlpConfig()
    order = iteration_order(scenarios, config.max_iterations, config.seed)
    wind_of = {int(k): scenarios.farm_output(instance.electric,
                                             scenarios.profile(int(k)))
               for k in np.unique(order)}

    sampled = SubproblemSolver(instance, slp, backend)
    if config.variant == "shacv":
        x_ce = certainty_equivalent_dispatch(instance, scenarios, slp, backend)
        ce_solver = SubproblemSolver(instance, slp, backend)
        wind_ce = scenarios.farm_output(instance.electric, scenarios.expectation)
        lam_ce = ce_solver.solve(x_ce, wind_ce).lam
        b = calibrate_b(config.a, x_ce, lam_ce)
        master = ShacvMaster(instance, config.a, b, backend, config.pwl_tol)
        q0_fn = lambda x: master.q0(x)
    elif config.variant == "shace":
        wind_ce = scenarios.farm_output(instance.electric, scenarios.expectation)
        master = EmbeddedMaster(instance, [wind_ce], [1.0], ["ce"], slp, backend)
        ce_solver = SubproblemSolver(instance, slp, backend)
        q0_fn = lambda x: ce_solver.solve(x, wind_ce).lam
    else:
        i_max, i_min = extrema(scenarios)
        w_max = scenarios.farm_output(instance.electric, scenarios.profile(i_max))
        w_min = scenarios.farm_output(instance.electric, scenarios.profile(i_min))
        master = EmbeddedMaster(instance, [w_max, w_min], [0.5, 0.5],
                                ["xmax", "xmin"], slp, backend)
        max_solver = SubproblemSolver(instance, slp, backend)
        min_solver = SubproblemSolver(instance, slp, backend)
        q0_fn = lambda x: 0.5 * (max_solver.solve(x, w_max).lam
                                 + min_solver.solve(x, w_min).lam)

    n = xi.size
    lam_bar = np.zeros(n)
    iterates = np.zeros((config.max_iterations, n))
    alphas = np.zeros(config.max_iterations)
    history: list[dict] = []
    failed: list[int] = []
    x_bar_prev = None
    x_bar = None
    x = np.zeros(n)
    stop = "max-iterations"

    for nu in range(1, config.max_iterations + 1):
        x, s_val = master.solve(lam_bar)
        omega = int(order[nu - 1])
        sub = sampled.solve(x, wind_of[omega])
        if not sub.converged:
            failed.append(nu)
        q0 = q0_fn(x)
        alpha = step_size(nu, config.rho)
        lam_bar = sha_update(lam_bar, sub.lam, q0, alpha)
        iterates[nu - 1] = x
        alphas[nu - 1] = alpha
        x_bar = weighted_average(iterates[:nu], alphas[:nu], config.window)
        delta = math.nan
        if x_bar_prev is not None:
            delta = solution_update_metric(x_bar, x_bar_prev)
        x_bar_prev = x_bar
        row = {"nu": nu, "wall_s": time.perf_counter() - t0,
               "scenario": omega, "S": s_val, "delta": delta}
        if quality_fn is not None and config.eval_every \
                and nu % config.eval_every == 0:
            row["V"] = float(quality_fn(x_bar))
        history.append(row)
        if log:
            log(row)
        if nu >= config.min_iterations and not math.isnan(delta) \
                and delta <= config.eps_tol:
            stop = "tolerance"
            break
        if config.time_limit is not None \
                and time.perf_counter() - t0 > config.time_limit:
            stop = "time-limit"
            break

    nu_done = len(history)
    return ShaResult(x_bar=x_bar, x_last=x, lam_bar=lam_bar,
                     iterates=iterates[:nu_done], alphas=alphas[:nu_done],
                     history=history, stop_reason=stop, failed_samples=failed)

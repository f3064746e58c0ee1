"""Second-stage (recourse) solves for a fixed first-stage dispatch.

A :class:`SubproblemSolver` owns one constraint-system template per
instance and re-points it per call (dispatch enters the right-hand side
of the stage-coupling rows, wind enters spill bounds and balance rows),
so the thousands of solves inside the stochastic loops never rebuild
the model. Warm starts chain from the previous solve when shapes match
and otherwise fall back to a steady-flow profile.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .builders import (RecourseSolution, XIndex, build_second_stage_gas,
                       build_subproblem, recourse_from_primal,
                       set_block_wind, set_subproblem_x)
from .linsys import ConstraintSystem
from .network import Instance, TimeGrid
from .slp import SlpConfig, SlpResult, solve_slp

__all__ = ["SubproblemResult", "SubproblemSolver", "steady_state_warm_start",
           "flat_gas_point"]


@dataclass
class SubproblemResult:
    objective: float              # g(x, w): true recourse cost
    recourse: RecourseSolution
    lam: np.ndarray               # duals of the ("fix", g, t) rows, x order
    iterations: int
    converged: bool
    nl_residual: float


def flat_gas_point(sys: ConstraintSystem, instance: Instance,
                   scen="w", base: np.ndarray | None = None) -> np.ndarray:
    """A bounds-feasible starting point: pressures at the reference,
    zero flows, compressors at the closest-to-1 ratio. Only block
    ``scen`` is touched when ``base`` is given."""
    lb = np.asarray(sys.lb)
    ub = np.asarray(sys.ub)
    z = base.copy() if base is not None else np.clip(np.zeros(sys.n_cols), lb, ub)
    if instance.has_gas:
        p0 = sys.meta["P0"]
        ref = instance.gas.ref_pressure / p0
        for nd in instance.dgas.nodes:
            for t in range(instance.grid.horizon):
                j = sys.var(("pi", scen, nd.id, t))
                z[j] = min(max(ref, lb[j]), ub[j])
        for sp in instance.dgas.subpipes:
            for t in range(instance.grid.horizon):
                i_t = sys.var(("pi", scen, sp.from_node, t))
                j_t = sys.var(("pi", scen, sp.to_node, t))
                k = sys.var(("pavg", scen, sp.id, t))
                z[k] = min(max(0.5 * (z[i_t] + z[j_t]), lb[k]), ub[k])
        for cp in instance.gas.compressors:
            for t in range(instance.grid.horizon):
                j = sys.var(("kappa", scen, cp.id, t))
                z[j] = min(max(1.0, lb[j]), ub[j])
    return z


def steady_state_warm_start(instance: Instance,
                            gfpp_demand0: np.ndarray | None = None,
                            config: SlpConfig | None = None,
                            backend: str = "highs") -> dict[tuple, float]:
    """Solve the single-period steady gas problem (time terms removed)
    and return per-variable values keyed by ("head", id): flows, node
    pressures, compressor ratios, supplies.

    ``gfpp_demand0`` fixes the gas offtake of each GFPP (kg/s, coupling
    order) for the steady solve; None means offtake at minimum output.
    """
    if not instance.has_gas:
        return {}
    cfg = config or SlpConfig()
    cfg = replace(cfg, backend=backend)
    inst1 = replace(instance, grid=TimeGrid(1, instance.grid.dt))
    demand = None
    if gfpp_demand0 is not None:
        demand = np.asarray(gfpp_demand0, dtype=float).reshape(-1, 1)
    sys1 = build_second_stage_gas(inst1, gfpp_demand=demand)
    z0 = flat_gas_point(sys1, inst1)
    res = solve_slp(sys1, z0, cfg)
    out: dict[tuple, float] = {}
    for name, j in zip(sys1.var_names(), range(sys1.n_cols)):
        head, _scen, ident, _t = name
        out[(head, ident)] = float(res.z[j])
    return out


class SubproblemSolver:
    """Reusable solver for g(x, w) on one instance."""

    def __init__(self, instance: Instance, config: SlpConfig | None = None,
                 backend: str = "highs"):
        self.instance = instance
        self.config = replace(config or SlpConfig(), backend=backend)
        self.xindex = XIndex.of(instance)
        self.template = build_subproblem(instance)
        self._steady: dict[tuple, float] | None = None
        self._last_z: np.ndarray | None = None

    def clone(self) -> "SubproblemSolver":
        """Independent solver (own template) for concurrent use."""
        return SubproblemSolver(self.instance, self.config, self.config.backend)

    # -- warm starts ---------------------------------------------------------

    def _steady_point(self) -> dict[tuple, float]:
        if self._steady is None:
            demand0 = None
            if self.instance.has_gas:
                coup = self.instance.coupling
                gens = {g.id: g for g in self.instance.electric.generators}
                demand0 = np.array([coup.heat_rate[g] * gens[g].p_min
                                    for g in coup.gfpp_ids])
            self._steady = steady_state_warm_start(
                self.instance, demand0, self.config, self.config.backend)
        return self._steady

    def _initial_point(self, x: np.ndarray) -> np.ndarray:
        sys = self.template
        z = flat_gas_point(sys, self.instance)
        for i, g in enumerate(self.xindex.gens):
            for t in range(self.xindex.horizon):
                z[sys.var(("p", "w", g, t))] = x[self.xindex.pos(g, t)]
        steady = self._steady_point()
        if steady:
            for name, j in zip(sys.var_names(), range(sys.n_cols)):
                head = name[0]
                if head in ("s", "kappa", "mc", "min", "mout", "mavg",
                            "pi", "pavg", "dshed"):
                    key = (head, name[2])
                    if key in steady:
                        z[j] = steady[key]
        return z

    # -- main entry ----------------------------------------------------------

    def solve(self, x: np.ndarray, wind: np.ndarray | None = None,
              warm: str = "chain") -> SubproblemResult:
        """Solve the recourse problem at dispatch ``x`` under farm output
        ``wind`` (MW, shape (n_farms, T)).

        ``warm`` picks the SLP starting point: "chain" reuses the last
        solution from this solver, "steady" always restarts from the
        steady-flow profile.
        """
        sys = self.template
        set_subproblem_x(sys, self.instance, x)
        if wind is not None:
            set_block_wind(sys, self.instance, "w", wind)
        if warm == "chain" and self._last_z is not None:
            z0 = self._last_z
        else:
            z0 = self._initial_point(x)
        res = solve_slp(sys, z0, self.config)
        self._last_z = res.z
        return self._result(res)

    def _result(self, res: SlpResult) -> SubproblemResult:
        sys = self.template
        rec = recourse_from_primal(sys, self.instance, "w", res.z)
        lam = np.zeros(self.xindex.size)
        if res.duals is not None:
            for i, g in enumerate(self.xindex.gens):
                for t in range(self.xindex.horizon):
                    lam[self.xindex.pos(g, t)] = res.duals[sys.row(("fix", g, t))]
        return SubproblemResult(objective=rec.objective, recourse=rec, lam=lam,
                                iterations=res.iterations,
                                converged=res.converged,
                                nl_residual=res.nl_residual)

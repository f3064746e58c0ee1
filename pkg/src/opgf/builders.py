"""Assembly of the first-stage and second-stage constraint systems.

First-stage decision vector
---------------------------
The dispatch x is flattened in row-major (generator, time) order:
``x[i_g * T + t]`` is generator ``i_g`` (instance order) at step ``t``.
:class:`XIndex` owns this mapping.

Scaling
-------
Electric quantities enter the systems in MW. Gas mass flows (supply,
pipe flows, demands) are divided by ``M0`` (total supply capability) and
pressures by ``P0`` (the reference pressure); the pipe-dynamics rows are
additionally row-scaled so their coefficients are O(1). The applied
column scales are recorded per variable so primal values can be mapped
back to SI units; both scales live in ``system.meta``.

Objective units are USD: per-MW terms are weighted by the step length in
hours, per-(kg/s) terms by the step length in seconds. The compressor
penalty applies per step to the dimensionless ratio.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

import math

from .linsys import ConstraintSystem
from .network import DataError, Instance

__all__ = [
    "XIndex",
    "RecourseSolution",
    "build_first_stage",
    "build_subproblem",
    "build_two_stage",
    "build_second_stage_electric",
    "build_second_stage_gas",
    "set_subproblem_x",
    "set_block_wind",
    "recourse_from_primal",
    "first_stage_cost",
    "clip_to_bounds",
]

BIG = math.inf


@dataclass(frozen=True)
class XIndex:
    """Bijective (generator, step) <-> flat position mapping for x."""

    gens: tuple[str, ...]
    horizon: int

    @classmethod
    def of(cls, instance: Instance) -> "XIndex":
        return cls(tuple(g.id for g in instance.electric.generators),
                   instance.grid.horizon)

    @property
    def size(self) -> int:
        return len(self.gens) * self.horizon

    def pos(self, gen: str, t: int) -> int:
        return self.gens.index(gen) * self.horizon + t

    def flat(self, grid_form: np.ndarray) -> np.ndarray:
        return np.asarray(grid_form, dtype=float).reshape(self.size)

    def grid(self, flat_form: np.ndarray) -> np.ndarray:
        return np.asarray(flat_form, dtype=float).reshape(len(self.gens),
                                                          self.horizon)


@dataclass
class RecourseSolution:
    """Second-stage primal solution in engineering units (MW, kg/s, Pa)."""

    p: np.ndarray
    p_up: np.ndarray
    p_dn: np.ndarray
    w_spill: np.ndarray
    l_shed: np.ndarray
    l_add: np.ndarray
    flow: np.ndarray
    theta: np.ndarray
    h_elec: float
    s: np.ndarray | None = None
    kappa: np.ndarray | None = None
    m_in: np.ndarray | None = None
    m_out: np.ndarray | None = None
    m_avg: np.ndarray | None = None
    pi: np.ndarray | None = None
    pi_avg: np.ndarray | None = None
    d_g: np.ndarray | None = None
    d_shed: np.ndarray | None = None
    m_c: np.ndarray | None = None
    h_gas: float = 0.0
    gas_credit: float = 0.0

    @property
    def objective(self) -> float:
        return self.h_elec + self.h_gas - self.gas_credit


def first_stage_cost(instance: Instance, x: np.ndarray) -> float:
    """f(x): nominal dispatch cost in USD."""
    xi = XIndex.of(instance)
    grid_x = xi.grid(x)
    costs = np.array([g.cost for g in instance.electric.generators])
    return float((costs[:, None] * grid_x).sum() * instance.grid.dt_hours)


def clip_to_bounds(instance: Instance, x: np.ndarray) -> np.ndarray:
    """Project x onto the generator output bounds (not the ramp rows)."""
    xi = XIndex.of(instance)
    g = xi.grid(x).copy()
    for i, gen in enumerate(instance.electric.generators):
        g[i] = np.clip(g[i], gen.p_min, gen.p_max)
    return xi.flat(g)


# ---------------------------------------------------------------------------
# first stage
# ---------------------------------------------------------------------------

def add_first_stage(sys: ConstraintSystem, instance: Instance,
                    lambda_bar: np.ndarray | None = None) -> None:
    """x variables with output bounds, ramp rows for t >= t2, and the
    objective C_g dt (+ the linear correction when given)."""
    grid = instance.grid
    dt_h = grid.dt_hours
    xi = XIndex.of(instance)
    for g in instance.electric.generators:
        for t in range(grid.horizon):
            corr = 0.0 if lambda_bar is None else float(lambda_bar[xi.pos(g.id, t)])
            sys.add_var(("x", g.id, t), lb=g.p_min, ub=g.p_max,
                        obj=g.cost * dt_h + corr)
    for g in instance.electric.generators:
        for t in range(1, grid.horizon):
            a, b = sys.var(("x", g.id, t)), sys.var(("x", g.id, t - 1))
            sys.add_row([(a, 1.0), (b, -1.0)], "<=", g.ramp, tag=("xrup", g.id, t))
            sys.add_row([(a, -1.0), (b, 1.0)], "<=", g.ramp, tag=("xrdn", g.id, t))


def build_first_stage(instance: Instance,
                      lambda_bar: np.ndarray | None = None) -> ConstraintSystem:
    sys = ConstraintSystem(f"{instance.name}-stage1")
    add_first_stage(sys, instance, lambda_bar)
    return sys.finalize()


# ---------------------------------------------------------------------------
# second stage: electric block
# ---------------------------------------------------------------------------

def add_electric_block(sys: ConstraintSystem, instance: Instance, scen,
                       wind: np.ndarray | None, weight: float = 1.0,
                       link_x: bool = False) -> None:
    """Redispatch DC-OPF block for one scenario.

    ``wind`` is the farm output in MW, shape (n_farms, T). With
    ``link_x`` the coupling rows read ``p - x = 0`` against the x
    variables already present in the system; otherwise their right-hand
    side holds the (externally fixed) dispatch and starts at zero.
    """
    elec = instance.electric
    grid = instance.grid
    T = grid.horizon
    dt_h = grid.dt_hours
    if wind is None:
        wind = np.zeros((len(elec.wind_farms), T))
    fix_tag = (lambda g, t: ("fix", g, t)) if not link_x else \
        (lambda g, t: ("fix", scen, g, t))

    for g in elec.generators:
        for t in range(T):
            sys.add_var(("p", scen, g.id, t), lb=-BIG, ub=BIG)
            sys.add_var(("pup", scen, g.id, t), lb=0.0,
                        ub=g.ramp if t == 0 else BIG,
                        obj=weight * g.cost_up * dt_h)
            sys.add_var(("pdn", scen, g.id, t), lb=0.0,
                        ub=g.ramp if t == 0 else BIG,
                        obj=-weight * g.cost_down * dt_h)
    for j, w in enumerate(elec.wind_farms):
        for t in range(T):
            sys.add_var(("wspill", scen, w.id, t), lb=0.0, ub=float(wind[j, t]))
    for b_i, b in enumerate(elec.buses):
        for t in range(T):
            sys.add_var(("lshed", scen, b.id, t), lb=0.0,
                        ub=float(elec.load[b_i, t]),
                        obj=weight * elec.voll * dt_h)
            sys.add_var(("ladd", scen, b.id, t), lb=0.0, ub=elec.add_cap,
                        obj=weight * elec.cost_add * dt_h)
    for ln in elec.lines:
        for t in range(T):
            sys.add_var(("f", scen, ln.id, t), lb=-ln.limit, ub=ln.limit)
    for b in elec.buses:
        fixed = b.id == elec.ref_bus
        for t in range(T):
            sys.add_var(("theta", scen, b.id, t),
                        lb=0.0 if fixed else -BIG, ub=0.0 if fixed else BIG)

    for g in elec.generators:
        for t in range(T):
            p = sys.var(("p", scen, g.id, t))
            up = sys.var(("pup", scen, g.id, t))
            dn = sys.var(("pdn", scen, g.id, t))
            coeffs = [(p, 1.0)]
            if link_x:
                coeffs.append((sys.var(("x", g.id, t)), -1.0))
            sys.add_row(coeffs, "=", 0.0, tag=fix_tag(g.id, t))
            sys.add_row([(p, 1.0), (up, 1.0), (dn, -1.0)], "<=", g.p_max,
                        tag=("cap_hi", scen, g.id, t))
            sys.add_row([(p, 1.0), (up, 1.0), (dn, -1.0)], ">=", g.p_min,
                        tag=("cap_lo", scen, g.id, t))
            if t >= 1:
                prev = sys.var(("p", scen, g.id, t - 1))
                sys.add_row([(up, 1.0), (p, 1.0), (prev, -1.0)], "<=", g.ramp,
                            tag=("rup", scen, g.id, t))
                sys.add_row([(dn, 1.0), (p, -1.0), (prev, 1.0)], "<=", g.ramp,
                            tag=("rdn", scen, g.id, t))

    for ln in elec.lines:
        for t in range(T):
            sys.add_row([(sys.var(("f", scen, ln.id, t)), 1.0),
                         (sys.var(("theta", scen, ln.from_bus, t)), -ln.susceptance),
                         (sys.var(("theta", scen, ln.to_bus, t)), ln.susceptance)],
                        "=", 0.0, tag=("fdef", scen, ln.id, t))

    gens_at: dict[str, list] = {}
    for g in elec.generators:
        gens_at.setdefault(g.bus, []).append(g)
    farms_at: dict[str, list[int]] = {}
    for j, w in enumerate(elec.wind_farms):
        farms_at.setdefault(w.bus, []).append(j)

    for b_i, b in enumerate(elec.buses):
        for t in range(T):
            coeffs = []
            for g in gens_at.get(b.id, []):
                coeffs += [(sys.var(("p", scen, g.id, t)), 1.0),
                           (sys.var(("pup", scen, g.id, t)), 1.0),
                           (sys.var(("pdn", scen, g.id, t)), -1.0)]
            w_total = 0.0
            for j in farms_at.get(b.id, []):
                coeffs.append((sys.var(("wspill", scen, elec.wind_farms[j].id, t)), -1.0))
                w_total += float(wind[j, t])
            coeffs.append((sys.var(("lshed", scen, b.id, t)), 1.0))
            coeffs.append((sys.var(("ladd", scen, b.id, t)), -1.0))
            for ln in elec.lines:
                a = 1.0 if ln.from_bus == b.id else (-1.0 if ln.to_bus == b.id else 0.0)
                if a:
                    coeffs.append((sys.var(("f", scen, ln.id, t)), -a))
            sys.add_row(coeffs, "=", float(elec.load[b_i, t]) - w_total,
                        tag=("ebal", scen, b.id, t))


def set_block_wind(sys: ConstraintSystem, instance: Instance, scen,
                   wind: np.ndarray) -> None:
    """Re-point an electric block at a different wind realization."""
    elec = instance.electric
    T = instance.grid.horizon
    farms_at: dict[str, list[int]] = {}
    for j, w in enumerate(elec.wind_farms):
        farms_at.setdefault(w.bus, []).append(j)
        for t in range(T):
            sys.set_bounds(sys.var(("wspill", scen, w.id, t)), 0.0, float(wind[j, t]))
    for b_i, b in enumerate(elec.buses):
        for t in range(T):
            w_total = sum(float(wind[j, t]) for j in farms_at.get(b.id, []))
            sys.set_rhs(sys.row(("ebal", scen, b.id, t)),
                        float(elec.load[b_i, t]) - w_total)


# ---------------------------------------------------------------------------
# second stage: gas block and coupling
# ---------------------------------------------------------------------------

def _gas_scales(instance: Instance) -> tuple[float, float]:
    gas = instance.gas
    m0 = sum(s.s_max for s in gas.supplies)
    return (m0 if m0 > 0 else 1.0), gas.ref_pressure


def add_gas_block(sys: ConstraintSystem, instance: Instance, scen,
                  weight: float = 1.0) -> None:
    """Transient gas-dynamics block for one scenario, in scaled units."""
    gas = instance.gas
    dnet = instance.dgas
    grid = instance.grid
    if gas is None or dnet is None:
        raise DataError("instance has no (discretized) gas network")
    T = grid.horizon
    dt = grid.dt
    m0, p0 = _gas_scales(instance)
    sys.meta.setdefault("M0", m0)
    sys.meta.setdefault("P0", p0)
    coup = instance.coupling
    gfpps = coup.gfpp_ids if coup is not None else ()

    for sup in gas.supplies:
        for t in range(T):
            sys.add_var(("s", scen, sup.id, t), lb=sup.s_min / m0,
                        ub=sup.s_max / m0,
                        obj=weight * sup.cost * dt * m0, scale=m0)
    for cp in gas.compressors:
        lo = -1.0 if cp.flow_min is None else cp.flow_min / m0
        hi = 1.0 if cp.flow_max is None else cp.flow_max / m0
        for t in range(T):
            sys.add_var(("kappa", scen, cp.id, t), lb=cp.ratio_min,
                        ub=cp.ratio_max, obj=weight * cp.cost)
            sys.add_var(("mc", scen, cp.id, t), lb=lo, ub=hi, scale=m0)
    for sp in dnet.subpipes:
        for t in range(T):
            sys.add_var(("min", scen, sp.id, t), lb=-BIG, ub=BIG, scale=m0)
            sys.add_var(("mout", scen, sp.id, t), lb=-BIG, ub=BIG, scale=m0)
            sys.add_var(("mavg", scen, sp.id, t), lb=-BIG, ub=BIG, scale=m0)
    node_idx = dnet.node_index()
    for nd in dnet.nodes:
        fixed = nd.id == gas.slack_node
        for t in range(T):
            sys.add_var(("pi", scen, nd.id, t),
                        lb=gas.ref_pressure / p0 if fixed else nd.p_min / p0,
                        ub=gas.ref_pressure / p0 if fixed else nd.p_max / p0,
                        scale=p0)
    for sp in dnet.subpipes:
        lo_i = dnet.nodes[node_idx[sp.from_node]]
        lo_j = dnet.nodes[node_idx[sp.to_node]]
        for t in range(T):
            sys.add_var(("pavg", scen, sp.id, t),
                        lb=0.5 * (lo_i.p_min + lo_j.p_min) / p0,
                        ub=0.5 * (lo_i.p_max + lo_j.p_max) / p0, scale=p0)
    if coup is not None:
        for gid in gfpps:
            gen = next(g for g in instance.electric.generators if g.id == gid)
            eta = coup.heat_rate[gid]
            for t in range(T):
                sys.add_var(("dg", scen, gid, t), lb=eta * gen.p_min / m0,
                            ub=eta * gen.p_max / m0,
                            obj=-weight * (gen.cost / eta) * grid.dt_hours * m0,
                            scale=m0)
    base_idx = gas.node_index()
    for nd in gas.nodes:
        for t in range(T):
            sys.add_var(("dshed", scen, nd.id, t), lb=0.0,
                        ub=float(gas.load[base_idx[nd.id], t]) / m0,
                        obj=weight * gas.shed_cost * dt * m0, scale=m0)

    # subpipe dynamics
    u = grid.u
    for sp in dnet.subpipes:
        cont_c = p0 * sp.dx / (dt * sp.v_m * m0)
        mom_c = m0 * sp.dx / (dt * sp.v_p * p0)
        fric_c = sp.v_f * m0 * m0 * sp.dx / (sp.v_p * p0 * p0)
        for t in range(T):
            m_in = sys.var(("min", scen, sp.id, t))
            m_out = sys.var(("mout", scen, sp.id, t))
            m_avg = sys.var(("mavg", scen, sp.id, t))
            p_avg = sys.var(("pavg", scen, sp.id, t))
            pi_i = sys.var(("pi", scen, sp.from_node, t))
            pi_j = sys.var(("pi", scen, sp.to_node, t))
            sys.add_row([(m_avg, 1.0), (m_in, -0.5), (m_out, -0.5)], "=", 0.0,
                        tag=("mavgdef", scen, sp.id, t))
            sys.add_row([(p_avg, 1.0), (pi_i, -0.5), (pi_j, -0.5)], "=", 0.0,
                        tag=("pavgdef", scen, sp.id, t))
            cont = [(m_out, 1.0), (m_in, -1.0)]
            if u[t]:
                cont += [(p_avg, cont_c),
                         (sys.var(("pavg", scen, sp.id, t - 1)), -cont_c)]
            sys.add_row(cont, "=", 0.0, tag=("cont", scen, sp.id, t))
            mom = [(pi_j, 1.0), (pi_i, -1.0)]
            if u[t]:
                mom += [(m_avg, mom_c),
                        (sys.var(("mavg", scen, sp.id, t - 1)), -mom_c)]
            row = sys.add_row(mom, "=", 0.0, tag=("mom", scen, sp.id, t))
            sys.add_friction(row, m_avg, p_avg, fric_c)

    for cp in gas.compressors:
        for t in range(T):
            row = sys.add_row([(sys.var(("pi", scen, cp.to_node, t)), 1.0)],
                              "=", 0.0, tag=("comp", scen, cp.id, t))
            sys.add_bilinear(row, sys.var(("kappa", scen, cp.id, t)),
                             sys.var(("pi", scen, cp.from_node, t)), -1.0)

    # nodal balances and the linepack-neutrality row
    sup_at: dict[str, list] = {}
    for sup in gas.supplies:
        sup_at.setdefault(sup.node, []).append(sup)
    gfpp_at: dict[str, list[str]] = {}
    if coup is not None:
        for gid in gfpps:
            gfpp_at.setdefault(coup.gas_node[gid], []).append(gid)

    for nd in dnet.nodes:
        is_aux = nd.id in dnet.aux_nodes
        for t in range(T):
            coeffs = []
            if not is_aux:
                for sup in sup_at.get(nd.id, []):
                    coeffs.append((sys.var(("s", scen, sup.id, t)), 1.0))
                coeffs.append((sys.var(("dshed", scen, nd.id, t)), 1.0))
                for gid in gfpp_at.get(nd.id, []):
                    coeffs.append((sys.var(("dg", scen, gid, t)), -1.0))
            for k in dnet.pipes_from(nd.id):
                coeffs.append((sys.var(("min", scen, dnet.subpipes[k].id, t)), -1.0))
            for k in dnet.pipes_into(nd.id):
                coeffs.append((sys.var(("mout", scen, dnet.subpipes[k].id, t)), 1.0))
            for cp in gas.compressors:
                if cp.from_node == nd.id:
                    coeffs.append((sys.var(("mc", scen, cp.id, t)), -1.0))
                if cp.to_node == nd.id:
                    coeffs.append((sys.var(("mc", scen, cp.id, t)), 1.0))
            rhs = 0.0 if is_aux else float(gas.load[base_idx[nd.id], t]) / m0
            sys.add_row(coeffs, "=", rhs, tag=("gbal", scen, nd.id, t))

    lp_coeffs = []
    lp_rhs = 0.0
    for t in range(T):
        for sup in gas.supplies:
            lp_coeffs.append((sys.var(("s", scen, sup.id, t)), 1.0))
        for nd in gas.nodes:
            lp_coeffs.append((sys.var(("dshed", scen, nd.id, t)), 1.0))
            lp_rhs += float(gas.load[base_idx[nd.id], t]) / m0
        for gid in gfpps:
            lp_coeffs.append((sys.var(("dg", scen, gid, t)), -1.0))
    sys.add_row(lp_coeffs, "=", lp_rhs, tag=("linepack", scen))


def add_coupling(sys: ConstraintSystem, instance: Instance, scen) -> None:
    """Heat-rate rows d_g = eta (p + p+ - p-), in the gas block's scaled
    flow units."""
    coup = instance.coupling
    m0 = sys.meta["M0"]
    for gid in coup.gfpp_ids:
        if not sys.has_var(("p", scen, gid, 0)):
            raise DataError(f"GFPP {gid}: no electric block variable")
        eta = coup.heat_rate[gid]
        for t in range(instance.grid.horizon):
            sys.add_row([(sys.var(("dg", scen, gid, t)), 1.0),
                         (sys.var(("p", scen, gid, t)), -eta / m0),
                         (sys.var(("pup", scen, gid, t)), -eta / m0),
                         (sys.var(("pdn", scen, gid, t)), eta / m0)],
                        "=", 0.0, tag=("couple", scen, gid, t))


# ---------------------------------------------------------------------------
# composite systems
# ---------------------------------------------------------------------------

def build_subproblem(instance: Instance,
                     wind: np.ndarray | None = None) -> ConstraintSystem:
    """Second-stage problem for one scenario with x entering through the
    right-hand side of the rows tagged ("fix", g, t)."""
    sys = ConstraintSystem(f"{instance.name}-subproblem")
    add_electric_block(sys, instance, "w", wind, weight=1.0, link_x=False)
    if instance.has_gas:
        add_gas_block(sys, instance, "w", weight=1.0)
        add_coupling(sys, instance, "w")
    return sys.finalize()


def set_subproblem_x(sys: ConstraintSystem, instance: Instance,
                     x: np.ndarray) -> None:
    xi = XIndex.of(instance)
    for g in xi.gens:
        for t in range(xi.horizon):
            sys.set_rhs(sys.row(("fix", g, t)), float(x[xi.pos(g, t)]))


def build_two_stage(instance: Instance, winds: list[np.ndarray],
                    weights: list[float], scen_keys: list | None = None,
                    lambda_bar: np.ndarray | None = None,
                    name: str | None = None) -> ConstraintSystem:
    """First stage plus embedded second-stage blocks (one per wind
    realization, with the given objective weights)."""
    sys = ConstraintSystem(name or f"{instance.name}-twostage")
    add_first_stage(sys, instance, lambda_bar)
    if scen_keys is None:
        scen_keys = list(range(len(winds)))
    for key, wind, wt in zip(scen_keys, winds, weights):
        add_electric_block(sys, instance, key, wind, weight=wt, link_x=True)
        if instance.has_gas:
            add_gas_block(sys, instance, key, weight=wt)
            add_coupling(sys, instance, key)
    return sys.finalize()


def build_second_stage_electric(instance: Instance, x: np.ndarray,
                                wind: np.ndarray | None = None) -> ConstraintSystem:
    """Electric-only recourse block (gas ignored), x fixed."""
    sys = ConstraintSystem(f"{instance.name}-elec")
    add_electric_block(sys, instance, "w", wind, weight=1.0, link_x=False)
    sys.finalize()
    set_subproblem_x(sys, instance, x)
    return sys


def build_second_stage_gas(instance: Instance,
                           gfpp_demand: np.ndarray | None = None) -> ConstraintSystem:
    """Gas-only block; GFPP demands fixed to the given (n_gfpp, T) kg/s
    array instead of coupling rows."""
    sys = ConstraintSystem(f"{instance.name}-gas")
    add_gas_block(sys, instance, "w", weight=1.0)
    sys.finalize()
    if gfpp_demand is not None and instance.coupling is not None:
        m0 = sys.meta["M0"]
        for i, gid in enumerate(instance.coupling.gfpp_ids):
            for t in range(instance.grid.horizon):
                v = float(gfpp_demand[i, t]) / m0
                sys.set_bounds(sys.var(("dg", "w", gid, t)), v, v)
    return sys


# ---------------------------------------------------------------------------
# extraction
# ---------------------------------------------------------------------------

def _collect(sys: ConstraintSystem, z: np.ndarray, head: str, scen,
             ids: list[str], T: int, scale: float = 1.0) -> np.ndarray:
    out = np.empty((len(ids), T))
    for i, ident in enumerate(ids):
        for t in range(T):
            out[i, t] = z[sys.var((head, scen, ident, t))] * scale
    return out


def recourse_from_primal(sys: ConstraintSystem, instance: Instance, scen,
                         z: np.ndarray) -> RecourseSolution:
    """Extract one scenario block from a primal vector and price it
    (unweighted, regardless of the block's objective weight)."""
    elec = instance.electric
    grid = instance.grid
    T = grid.horizon
    dt_h = grid.dt_hours
    gen_ids = [g.id for g in elec.generators]
    has_elec = bool(gen_ids) and sys.has_var(("p", scen, gen_ids[0], 0))
    if has_elec:
        sol = RecourseSolution(
            p=_collect(sys, z, "p", scen, gen_ids, T),
            p_up=_collect(sys, z, "pup", scen, gen_ids, T),
            p_dn=_collect(sys, z, "pdn", scen, gen_ids, T),
            w_spill=_collect(sys, z, "wspill", scen,
                             [w.id for w in elec.wind_farms], T),
            l_shed=_collect(sys, z, "lshed", scen, [b.id for b in elec.buses], T),
            l_add=_collect(sys, z, "ladd", scen, [b.id for b in elec.buses], T),
            flow=_collect(sys, z, "f", scen, [l.id for l in elec.lines], T),
            theta=_collect(sys, z, "theta", scen, [b.id for b in elec.buses], T),
            h_elec=0.0)
        up = np.array([g.cost_up for g in elec.generators])
        dn = np.array([g.cost_down for g in elec.generators])
        sol.h_elec = float(((up[:, None] * sol.p_up
                             - dn[:, None] * sol.p_dn).sum()
                            + elec.voll * sol.l_shed.sum()
                            + elec.cost_add * sol.l_add.sum()) * dt_h)
    else:
        shape = (len(gen_ids), T)
        zero_b = np.zeros((len(elec.buses), T))
        sol = RecourseSolution(
            p=np.zeros(shape), p_up=np.zeros(shape), p_dn=np.zeros(shape),
            w_spill=np.zeros((len(elec.wind_farms), T)), l_shed=zero_b,
            l_add=zero_b.copy(), flow=np.zeros((len(elec.lines), T)),
            theta=zero_b.copy(), h_elec=0.0)

    if instance.has_gas:
        gas = instance.gas
        dnet = instance.dgas
        coup = instance.coupling
        m0 = sys.meta["M0"]
        p0 = sys.meta["P0"]
        sup_ids = [s.id for s in gas.supplies]
        comp_ids = [c.id for c in gas.compressors]
        sp_ids = [p.id for p in dnet.subpipes]
        sol.s = _collect(sys, z, "s", scen, sup_ids, T, m0)
        sol.kappa = _collect(sys, z, "kappa", scen, comp_ids, T)
        sol.m_c = _collect(sys, z, "mc", scen, comp_ids, T, m0)
        sol.m_in = _collect(sys, z, "min", scen, sp_ids, T, m0)
        sol.m_out = _collect(sys, z, "mout", scen, sp_ids, T, m0)
        sol.m_avg = _collect(sys, z, "mavg", scen, sp_ids, T, m0)
        sol.pi = _collect(sys, z, "pi", scen, [n.id for n in dnet.nodes], T, p0)
        sol.pi_avg = _collect(sys, z, "pavg", scen, sp_ids, T, p0)
        sol.d_g = _collect(sys, z, "dg", scen, list(coup.gfpp_ids), T, m0)
        sol.d_shed = _collect(sys, z, "dshed", scen, [n.id for n in gas.nodes], T, m0)
        sup_cost = np.array([s.cost for s in gas.supplies])
        comp_cost = np.array([c.cost for c in gas.compressors])
        sol.h_gas = float((sup_cost[:, None] * sol.s).sum() * grid.dt
                          + (comp_cost[:, None] * sol.kappa).sum()
                          + gas.shed_cost * sol.d_shed.sum() * grid.dt)
        credit = 0.0
        for i, gid in enumerate(coup.gfpp_ids):
            gen = next(g for g in elec.generators if g.id == gid)
            credit += gen.cost * (sol.d_g[i].sum() / coup.heat_rate[gid]) * dt_h
        sol.gas_credit = float(credit)
    return sol

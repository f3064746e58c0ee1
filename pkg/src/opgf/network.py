"""Domain types for the coupled electric and gas networks.

Electric quantities are MW / MWh at the API boundary; gas quantities are
SI (Pa, kg/s, m, s) throughout. Heat rates are stored in kg/s per MW
(ingest converts from kg/MWh). All containers are treated as immutable
after construction and are safe to share across workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

__all__ = [
    "Bus",
    "Line",
    "Generator",
    "WindFarm",
    "ElectricNetwork",
    "GasNode",
    "Pipe",
    "Compressor",
    "Supply",
    "GasNetwork",
    "Subpipe",
    "DiscretizedGasNetwork",
    "CouplingMap",
    "TimeGrid",
    "Instance",
    "DataError",
    "pipe_constants",
    "discretize_gas_network",
    "validate",
]


class DataError(ValueError):
    """Raised for invalid or inconsistent network data."""


# ---------------------------------------------------------------------------
# electric side
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Bus:
    id: str


@dataclass(frozen=True)
class Line:
    id: str
    from_bus: str
    to_bus: str
    susceptance: float   # p.u.
    limit: float         # MW


@dataclass(frozen=True)
class Generator:
    id: str
    bus: str
    p_min: float         # MW
    p_max: float         # MW
    ramp: float          # MW per step
    cost: float          # USD/MWh
    cost_up: float       # USD/MWh, redispatch up
    cost_down: float     # USD/MWh, redispatch down


@dataclass(frozen=True)
class WindFarm:
    id: str
    bus: str
    capacity: float      # MW


@dataclass(frozen=True)
class ElectricNetwork:
    buses: tuple[Bus, ...]
    lines: tuple[Line, ...]
    generators: tuple[Generator, ...]
    wind_farms: tuple[WindFarm, ...]
    load: np.ndarray          # (n_buses, T) MW
    ref_bus: str
    voll: float               # USD/MWh
    cost_add: float           # USD/MWh; defaults to voll at ingest
    load_add_cap: float | None = None  # MW per bus/step; None -> sum of p_max

    def bus_index(self) -> dict[str, int]:
        return {b.id: i for i, b in enumerate(self.buses)}

    @property
    def add_cap(self) -> float:
        if self.load_add_cap is not None:
            return self.load_add_cap
        return sum(g.p_max for g in self.generators)


# ---------------------------------------------------------------------------
# gas side
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GasNode:
    id: str
    p_min: float         # Pa
    p_max: float         # Pa


@dataclass(frozen=True)
class Pipe:
    id: str
    from_node: str
    to_node: str
    length: float        # m
    diameter: float      # m
    friction: float      # dimensionless Darcy factor


@dataclass(frozen=True)
class Compressor:
    id: str
    from_node: str
    to_node: str
    ratio_min: float
    ratio_max: float
    cost: float          # USD per unit ratio per step
    flow_min: float | None = None   # kg/s; None -> -sum of supply caps
    flow_max: float | None = None   # kg/s; None -> +sum of supply caps


@dataclass(frozen=True)
class Supply:
    id: str
    node: str
    s_min: float         # kg/s
    s_max: float         # kg/s
    cost: float          # USD/kg


@dataclass(frozen=True)
class GasNetwork:
    nodes: tuple[GasNode, ...]
    pipes: tuple[Pipe, ...]
    compressors: tuple[Compressor, ...]
    supplies: tuple[Supply, ...]
    load: np.ndarray          # (n_nodes, T) kg/s, non-GFPP demand
    shed_cost: float          # USD/kg
    slack_node: str
    ref_pressure: float       # Pa
    sound_speed: float = 350.0  # m/s, isothermal

    def node_index(self) -> dict[str, int]:
        return {n.id: i for i, n in enumerate(self.nodes)}


@dataclass(frozen=True)
class Subpipe:
    id: str
    from_node: str
    to_node: str
    dx: float            # m
    v_m: float
    v_p: float
    v_f: float
    parent: str          # id of the original pipe


@dataclass(frozen=True)
class DiscretizedGasNetwork:
    """Gas graph after subdividing pipes into equal-length subpipes.

    ``nodes`` lists original nodes first, then auxiliary nodes. Auxiliary
    nodes carry no load or supply; their pressure bounds interpolate the
    enclosing pipe's endpoint bounds.
    """

    base: GasNetwork
    nodes: tuple[GasNode, ...]
    subpipes: tuple[Subpipe, ...]
    aux_nodes: frozenset[str]

    def node_index(self) -> dict[str, int]:
        return {n.id: i for i, n in enumerate(self.nodes)}

    def pipes_from(self, node: str) -> list[int]:
        """Indices of subpipes whose inlet end is at ``node``."""
        return [k for k, p in enumerate(self.subpipes) if p.from_node == node]

    def pipes_into(self, node: str) -> list[int]:
        """Indices of subpipes whose outlet end is at ``node``."""
        return [k for k, p in enumerate(self.subpipes) if p.to_node == node]

    def load_row(self, node: str) -> np.ndarray:
        """Non-GFPP demand profile of ``node`` (zeros for auxiliary nodes)."""
        if node in self.aux_nodes:
            return np.zeros(self.base.load.shape[1])
        return self.base.load[self.base.node_index()[node]]


# ---------------------------------------------------------------------------
# coupling and time
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CouplingMap:
    """Gas-fired generators and their fuel nodes.

    ``heat_rate`` maps generator id -> kg/s of gas per MW of electric
    output (ingest divides kg/MWh values by 3600).
    """

    gas_node: dict[str, str]
    heat_rate: dict[str, float]

    @property
    def gfpp_ids(self) -> tuple[str, ...]:
        return tuple(sorted(self.gas_node))


@dataclass(frozen=True)
class TimeGrid:
    horizon: int         # number of steps T
    dt: float            # seconds per step

    @property
    def dt_hours(self) -> float:
        return self.dt / 3600.0

    @property
    def u(self) -> np.ndarray:
        """Steady-state flags: 0 at the first step, 1 afterwards."""
        flags = np.ones(self.horizon)
        flags[0] = 0.0
        return flags


@dataclass(frozen=True)
class Instance:
    """A complete problem instance. ``gas``/``coupling`` are None for the
    electricity-only variant."""

    electric: ElectricNetwork
    grid: TimeGrid
    gas: GasNetwork | None = None
    coupling: CouplingMap | None = None
    dgas: DiscretizedGasNetwork | None = None
    name: str = "instance"
    currency: str = "USD"

    @property
    def has_gas(self) -> bool:
        return self.gas is not None and self.coupling is not None

    def without_gas(self) -> "Instance":
        return replace(self, gas=None, coupling=None, dgas=None,
                       name=self.name + "-nogas")


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def pipe_constants(diameter: float, friction: float,
                   sound_speed: float) -> tuple[float, float, float]:
    """Isothermal-Euler constants (V_m, V_p, V_f) for a pipe of the given
    geometry, in the mass-flow (kg/s) / pressure (Pa) form:

        dpi/dt + V_m dm/dx = 0
        dm/dt + V_p dpi/dx = -V_f m|m|/pi

    with V_m = a^2/A, V_p = A, V_f = f a^2 / (2 D A), A the cross-section
    area and a the isothermal sound speed.
    """
    if diameter <= 0:
        raise DataError(f"non-positive diameter {diameter}")
    if sound_speed <= 0:
        raise DataError(f"non-positive sound speed {sound_speed}")
    if friction < 0:
        raise DataError(f"negative friction factor {friction}")
    area = math.pi * diameter * diameter / 4.0
    v_m = sound_speed * sound_speed / area
    v_p = area
    v_f = friction * sound_speed * sound_speed / (2.0 * diameter * area)
    return v_m, v_p, v_f


def _interp_bounds(a: GasNode, b: GasNode, frac: float) -> tuple[float, float]:
    return ((1 - frac) * a.p_min + frac * b.p_min,
            (1 - frac) * a.p_max + frac * b.p_max)


def discretize_gas_network(net: GasNetwork,
                           max_segment_length: float) -> DiscretizedGasNetwork:
    """Split every pipe into ceil(L/max_segment_length) equal subpipes,
    inserting auxiliary nodes between them.

    Subpipes inherit the pipe id when no split occurs, so discretization
    of an already-compliant network is the identity on topology.
    """
    if max_segment_length <= 0:
        raise DataError(f"non-positive max segment length {max_segment_length}")
    by_id = net.node_index()
    nodes = list(net.nodes)
    aux: list[str] = []
    subpipes: list[Subpipe] = []
    for pipe in net.pipes:
        if pipe.length <= 0:
            raise DataError(f"pipe {pipe.id}: non-positive length {pipe.length}")
        if pipe.diameter <= 0:
            raise DataError(f"pipe {pipe.id}: non-positive diameter {pipe.diameter}")
        v_m, v_p, v_f = pipe_constants(pipe.diameter, pipe.friction,
                                       net.sound_speed)
        k = math.ceil(pipe.length / max_segment_length)
        dx = pipe.length / k
        end_a = net.nodes[by_id[pipe.from_node]]
        end_b = net.nodes[by_id[pipe.to_node]]
        chain = [pipe.from_node]
        for j in range(1, k):
            name = f"{pipe.id}.a{j}"
            lo, hi = _interp_bounds(end_a, end_b, j / k)
            nodes.append(GasNode(name, lo, hi))
            aux.append(name)
            chain.append(name)
        chain.append(pipe.to_node)
        for j in range(k):
            sid = pipe.id if k == 1 else f"{pipe.id}.s{j + 1}"
            subpipes.append(Subpipe(sid, chain[j], chain[j + 1], dx,
                                    v_m, v_p, v_f, pipe.id))
    return DiscretizedGasNetwork(base=net, nodes=tuple(nodes),
                                 subpipes=tuple(subpipes),
                                 aux_nodes=frozenset(aux))


def validate(instance: Instance) -> list[str]:
    """Check all type invariants; returns one message per violation."""
    out: list[str] = []
    elec = instance.electric
    grid = instance.grid

    if grid.horizon < 2:
        out.append(f"time grid: horizon {grid.horizon} < 2")
    if grid.dt <= 0:
        out.append(f"time grid: non-positive step {grid.dt}")

    bus_ids = {b.id for b in elec.buses}
    if elec.ref_bus not in bus_ids:
        out.append(f"reference bus {elec.ref_bus}: not a bus")
    if elec.load.shape != (len(elec.buses), grid.horizon):
        out.append(f"electric load: shape {elec.load.shape} != "
                   f"({len(elec.buses)}, {grid.horizon})")
    for g in elec.generators:
        if g.bus not in bus_ids:
            out.append(f"generator {g.id}: unknown bus {g.bus}")
        if g.p_min > g.p_max:
            out.append(f"generator {g.id}: p_min {g.p_min} > p_max {g.p_max}")
        if g.ramp < 0:
            out.append(f"generator {g.id}: negative ramp {g.ramp}")
        if not (g.cost_down <= g.cost <= g.cost_up):
            out.append(f"generator {g.id}: costs violate "
                       f"C- <= C <= C+ ({g.cost_down}, {g.cost}, {g.cost_up})")
    for w in elec.wind_farms:
        if w.bus not in bus_ids:
            out.append(f"wind farm {w.id}: unknown bus {w.bus}")
        if w.capacity < 0:
            out.append(f"wind farm {w.id}: negative capacity")
    seen_ends = set()
    for ln in elec.lines:
        if ln.from_bus not in bus_ids or ln.to_bus not in bus_ids:
            out.append(f"line {ln.id}: endpoint not a bus")
        elif ln.from_bus == ln.to_bus:
            out.append(f"line {ln.id}: self-loop at {ln.from_bus}")
        seen_ends.add(ln.id)
    if not _connected(bus_ids, [(l.from_bus, l.to_bus) for l in elec.lines]):
        out.append("electric network: graph not connected")

    gas = instance.gas
    if gas is not None:
        node_ids = {n.id for n in gas.nodes}
        for n in gas.nodes:
            if n.p_min > n.p_max:
                out.append(f"gas node {n.id}: p_min {n.p_min} > p_max {n.p_max}")
        if gas.slack_node not in node_ids:
            out.append(f"gas slack node {gas.slack_node}: not a node")
        if gas.load.shape != (len(gas.nodes), grid.horizon):
            out.append(f"gas load: shape {gas.load.shape} != "
                       f"({len(gas.nodes)}, {grid.horizon})")
        for p in gas.pipes:
            if p.from_node not in node_ids or p.to_node not in node_ids:
                out.append(f"pipe {p.id}: endpoint not a node")
            if p.length <= 0 or p.diameter <= 0:
                out.append(f"pipe {p.id}: non-positive geometry")
        for c in gas.compressors:
            if c.from_node not in node_ids or c.to_node not in node_ids:
                out.append(f"compressor {c.id}: endpoint not a node")
            if c.ratio_min > c.ratio_max:
                out.append(f"compressor {c.id}: ratio_min > ratio_max")
        for s in gas.supplies:
            if s.node not in node_ids:
                out.append(f"supply {s.id}: unknown node {s.node}")
            if s.s_min > s.s_max:
                out.append(f"supply {s.id}: s_min {s.s_min} > s_max {s.s_max}")
        arcs = [(p.from_node, p.to_node) for p in gas.pipes]
        arcs += [(c.from_node, c.to_node) for c in gas.compressors]
        if not _connected(node_ids, arcs):
            out.append("gas network: graph not connected")

    coup = instance.coupling
    if coup is not None:
        gen_ids = {g.id for g in elec.generators}
        node_ids = {n.id for n in gas.nodes} if gas is not None else set()
        for gid, node in coup.gas_node.items():
            if gid not in gen_ids:
                out.append(f"coupling: {gid} is not a generator")
            if node not in node_ids:
                out.append(f"coupling: generator {gid} mapped to "
                           f"nonexistent gas node {node}")
            if coup.heat_rate.get(gid, 0.0) <= 0:
                out.append(f"coupling: generator {gid} has non-positive heat rate")

    dg = instance.dgas
    if dg is not None:
        for sp in dg.subpipes:
            if sp.dx <= 0:
                out.append(f"subpipe {sp.id}: non-positive dx")
        for a in dg.aux_nodes:
            deg = len(dg.pipes_from(a)) + len(dg.pipes_into(a))
            if deg != 2:
                out.append(f"auxiliary node {a}: degree {deg} != 2")
    return out


def _connected(nodes: set[str], arcs: list[tuple[str, str]]) -> bool:
    if not nodes:
        return True
    adj: dict[str, list[str]] = {n: [] for n in nodes}
    for a, b in arcs:
        if a in adj and b in adj:
            adj[a].append(b)
            adj[b].append(a)
    start = next(iter(sorted(nodes)))
    seen = {start}
    stack = [start]
    while stack:
        for nb in adj[stack.pop()]:
            if nb not in seen:
                seen.add(nb)
                stack.append(nb)
    return len(seen) == len(nodes)

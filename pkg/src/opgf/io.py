"""Instance ingest: JSON documents with sections ``electric``, ``gas``,
``coupling``, ``time``.

Field names mirror the domain types; the schema ships with the package
(``opgf/datasets/instance.schema.json``) and every document is validated
against it on load. Unit conventions at the boundary: MW, USD/MWh,
kg/s, USD/kg, Pa, m, s; heat rates are given in kg/MWh and divided by
3600 at ingest.
"""

from __future__ import annotations

import json
from importlib import resources

import numpy as np

from .network import (Bus, Compressor, CouplingMap, DataError,
                      ElectricNetwork, GasNetwork, GasNode, Generator,
                      Instance, Line, Pipe, Supply, TimeGrid, WindFarm,
                      discretize_gas_network, validate)

__all__ = ["instance_from_dict", "load_instance", "save_instance",
           "apply_cost_stress", "instance_schema"]


def instance_schema() -> dict:
    with resources.files("opgf.datasets").joinpath("instance.schema.json").open() as fh:
        return json.load(fh)


def _profile(value, horizon: int, what: str) -> np.ndarray:
    """Scalar -> constant profile; list -> checked length-T profile."""
    if isinstance(value, (int, float)):
        return np.full(horizon, float(value))
    arr = np.asarray(value, dtype=float)
    if arr.shape != (horizon,):
        raise DataError(f"{what}: profile length {arr.shape} != horizon {horizon}")
    return arr


def instance_from_dict(doc: dict, name: str = "instance",
                       max_segment_length: float | None = None,
                       horizon: int | None = None) -> Instance:
    """Build a validated instance; optionally truncate the horizon or
    override the gas discretization length."""
    try:
        import jsonschema
        jsonschema.validate(doc, instance_schema())
    except ImportError:                              # pragma: no cover
        pass
    except Exception as exc:
        raise DataError(f"instance document invalid: {exc}") from exc

    t_sec = doc["time"]
    T = int(horizon if horizon is not None else t_sec["horizon"])
    if horizon is not None and horizon > int(t_sec["horizon"]):
        raise DataError(f"horizon override {horizon} exceeds data horizon "
                        f"{t_sec['horizon']}")
    grid = TimeGrid(horizon=T, dt=float(t_sec["dt_s"]))

    e = doc["electric"]
    buses = tuple(Bus(b["id"]) for b in e["buses"])
    load = np.stack([_profile(b.get("load", 0.0), T, f"bus {b['id']} load")
                     for b in e["buses"]])
    lines = tuple(Line(l["id"], l["from"], l["to"], float(l["susceptance"]),
                       float(l["limit_mw"])) for l in e["lines"])
    gens = tuple(Generator(g["id"], g["bus"], float(g["p_min_mw"]),
                           float(g["p_max_mw"]), float(g["ramp_mw"]),
                           float(g["cost_usd_mwh"]),
                           float(g.get("cost_up_usd_mwh",
                                       1.05 * g["cost_usd_mwh"])),
                           float(g.get("cost_down_usd_mwh",
                                       0.94 * g["cost_usd_mwh"])))
                 for g in e["generators"])
    farms = tuple(WindFarm(w["id"], w["bus"], float(w["capacity_mw"]))
                  for w in e.get("wind_farms", []))
    elec = ElectricNetwork(
        buses=buses, lines=lines, generators=gens, wind_farms=farms,
        load=load, ref_bus=e["ref_bus"], voll=float(e["voll_usd_mwh"]),
        cost_add=float(e.get("cost_add_usd_mwh", e["voll_usd_mwh"])),
        load_add_cap=e.get("load_add_cap_mw"))

    gas = coupling = dgas = None
    if "gas" in doc:
        g = doc["gas"]
        nodes = tuple(GasNode(n["id"], float(n["p_min_pa"]), float(n["p_max_pa"]))
                      for n in g["nodes"])
        gload = np.stack([_profile(n.get("load", 0.0), T, f"gas node {n['id']} load")
                          for n in g["nodes"]])
        pipes = tuple(Pipe(p["id"], p["from"], p["to"], float(p["length_m"]),
                           float(p["diameter_m"]), float(p["friction"]))
                      for p in g["pipes"])
        comps = tuple(Compressor(c["id"], c["from"], c["to"],
                                 float(c["ratio_min"]), float(c["ratio_max"]),
                                 float(c["cost_usd"]),
                                 c.get("flow_min_kg_s"), c.get("flow_max_kg_s"))
                      for c in g.get("compressors", []))
        sups = tuple(Supply(s["id"], s["node"], float(s["min_kg_s"]),
                            float(s["max_kg_s"]), float(s["cost_usd_kg"]))
                     for s in g["supplies"])
        gas = GasNetwork(nodes=nodes, pipes=pipes, compressors=comps,
                         supplies=sups, load=gload,
                         shed_cost=float(g["shed_cost_usd_kg"]),
                         slack_node=g["slack_node"],
                         ref_pressure=float(g["ref_pressure_pa"]),
                         sound_speed=float(g.get("sound_speed_m_s", 350.0)))
        seg = max_segment_length if max_segment_length is not None else \
            float(g.get("max_segment_length_m", 10000.0))
        dgas = discretize_gas_network(gas, seg)
        cdoc = doc.get("coupling", [])
        coupling = CouplingMap(
            gas_node={c["generator"]: c["gas_node"] for c in cdoc},
            heat_rate={c["generator"]: float(c["heat_rate_kg_per_mwh"]) / 3600.0
                       for c in cdoc})

    inst = Instance(electric=elec, grid=grid, gas=gas, coupling=coupling,
                    dgas=dgas, name=name,
                    currency=doc.get("currency", "USD"))
    problems = validate(inst)
    if problems:
        raise DataError(f"instance {name}: " + "; ".join(problems))
    return inst


def load_instance(path, name: str | None = None,
                  max_segment_length: float | None = None,
                  horizon: int | None = None) -> Instance:
    with open(path) as fh:
        doc = json.load(fh)
    label = name if name is not None else str(path)
    return instance_from_dict(doc, name=label,
                              max_segment_length=max_segment_length,
                              horizon=horizon)


def save_instance(doc: dict, path) -> None:
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")


def apply_cost_stress(doc: dict, gas_supply_mult: float = 0.25,
                      gfpp_mult: float = 0.25,
                      non_gfpp_mult: float = 2.0) -> dict:
    """Cost-stress preset: scale gas supply and GFPP generation costs
    down and the remaining generation costs up. Operates on the JSON
    document so the manifest can echo the exact multipliers."""
    if min(gas_supply_mult, gfpp_mult, non_gfpp_mult) <= 0:
        raise DataError("stress multipliers must be positive")
    out = json.loads(json.dumps(doc))
    gfpps = {c["generator"] for c in out.get("coupling", [])}
    for g in out["electric"]["generators"]:
        mult = gfpp_mult if g["id"] in gfpps else non_gfpp_mult
        for key in ("cost_usd_mwh", "cost_up_usd_mwh", "cost_down_usd_mwh"):
            if key in g:
                g[key] = g[key] * mult
    if "gas" in out:
        for s in out["gas"]["supplies"]:
            s["cost_usd_kg"] = s["cost_usd_kg"] * gas_supply_mult
    return out

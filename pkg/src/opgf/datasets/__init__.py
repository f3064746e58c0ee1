"""Shipped demonstration datasets.

``micro`` is a 3-bus / 4-gas-node system small enough for oracle-checked
tests (T=6, 10 scenarios). ``desk`` is a desk-scale analog of a national
gas-electric system (6 buses, 8 gas nodes, T=12, 100 scenarios) with
1000 USD/MWh value of lost load, 5 USD/kg gas shedding, unit compression
cost, redispatch costs at 1.05/0.94 of the marginal cost, and total wind
capacity equal to half of the mean load.

The builders are deterministic; ``write_dataset`` emits the JSON/CSV
pair the CLI consumes, and the copies committed under
``src/opgf/datasets/`` are regression-locked by a test.
"""

from __future__ import annotations

import csv
import io as _io
import json
from importlib import resources

import numpy as np

from ..io import instance_from_dict
from ..network import Instance
from ..scenarios import ScenarioSet, load_scenarios

__all__ = ["micro_document", "desk_document", "scenario_table",
           "write_dataset", "load_bundled", "bundled_path"]


def _diurnal(horizon: int, base: float, swing: float,
             peak_at: float = 0.75) -> list[float]:
    t = np.arange(horizon) / max(horizon - 1, 1)
    shape = base + swing * np.sin(np.pi * (t * 0.8 + peak_at - 0.55))
    return [round(float(v), 3) for v in shape]


def micro_document() -> dict:
    T = 6
    return {
        "currency": "USD",
        "time": {"horizon": T, "dt_s": 3600.0},
        "electric": {
            "buses": [
                {"id": "b1", "load": _diurnal(T, 12.0, 4.0)},
                {"id": "b2", "load": _diurnal(T, 70.0, 18.0)},
                {"id": "b3", "load": _diurnal(T, 40.0, 12.0)},
            ],
            "lines": [
                {"id": "l1", "from": "b1", "to": "b2",
                 "susceptance": 12.0, "limit_mw": 220.0},
                {"id": "l2", "from": "b2", "to": "b3",
                 "susceptance": 10.0, "limit_mw": 180.0},
                {"id": "l3", "from": "b1", "to": "b3",
                 "susceptance": 8.0, "limit_mw": 160.0},
            ],
            "generators": [
                {"id": "g1", "bus": "b1", "p_min_mw": 20.0, "p_max_mw": 130.0,
                 "ramp_mw": 20.0, "cost_usd_mwh": 22.0,
                 "cost_up_usd_mwh": 30.0, "cost_down_usd_mwh": 14.0},
                {"id": "g2", "bus": "b2", "p_min_mw": 0.0, "p_max_mw": 90.0,
                 "ramp_mw": 24.0, "cost_usd_mwh": 34.0,
                 "cost_up_usd_mwh": 45.0, "cost_down_usd_mwh": 20.0},
            ],
            "wind_farms": [
                {"id": "w1", "bus": "b3", "capacity_mw": 75.0},
            ],
            "ref_bus": "b1",
            "voll_usd_mwh": 1000.0,
        },
        "gas": {
            "nodes": [
                {"id": "n1", "p_min_pa": 3.0e6, "p_max_pa": 7.0e6},
                {"id": "n2", "p_min_pa": 3.0e6, "p_max_pa": 7.0e6,
                 "load": _diurnal(T, 2.0, 0.7)},
                {"id": "n3", "p_min_pa": 3.0e6, "p_max_pa": 7.5e6,
                 "load": _diurnal(T, 2.5, 0.9)},
                {"id": "n4", "p_min_pa": 3.0e6, "p_max_pa": 7.5e6,
                 "load": _diurnal(T, 6.0, 2.0)},
            ],
            "pipes": [
                {"id": "p1", "from": "n1", "to": "n2",
                 "length_m": 30000.0, "diameter_m": 0.6, "friction": 0.01},
                {"id": "p2", "from": "n2", "to": "n4",
                 "length_m": 20000.0, "diameter_m": 0.6, "friction": 0.01},
                {"id": "p3", "from": "n3", "to": "n4",
                 "length_m": 25000.0, "diameter_m": 0.5, "friction": 0.011},
            ],
            "compressors": [
                {"id": "c1", "from": "n2", "to": "n3",
                 "ratio_min": 1.0, "ratio_max": 1.5, "cost_usd": 1.0},
            ],
            "supplies": [
                {"id": "sup1", "node": "n1", "min_kg_s": 0.0,
                 "max_kg_s": 40.0, "cost_usd_kg": 0.05},
            ],
            "shed_cost_usd_kg": 5.0,
            "slack_node": "n1",
            "ref_pressure_pa": 5.0e6,
            "sound_speed_m_s": 350.0,
            "max_segment_length_m": 10000.0,
        },
        "coupling": [
            {"generator": "g2", "gas_node": "n3",
             "heat_rate_kg_per_mwh": 144.0},
        ],
    }


def desk_document() -> dict:
    T = 12
    mean_load = 90.0 + 240.0 + 130.0 + 60.0 + 170.0 + 110.0   # bus bases
    return {
        "currency": "USD",
        "time": {"horizon": T, "dt_s": 3600.0},
        "electric": {
            "buses": [
                {"id": "b1", "load": _diurnal(T, 90.0, 20.0)},
                {"id": "b2", "load": _diurnal(T, 240.0, 60.0)},
                {"id": "b3", "load": _diurnal(T, 130.0, 35.0)},
                {"id": "b4", "load": _diurnal(T, 60.0, 15.0)},
                {"id": "b5", "load": _diurnal(T, 170.0, 45.0)},
                {"id": "b6", "load": _diurnal(T, 110.0, 25.0)},
            ],
            "lines": [
                {"id": "l1", "from": "b1", "to": "b2", "susceptance": 18.0, "limit_mw": 700.0},
                {"id": "l2", "from": "b2", "to": "b3", "susceptance": 16.0, "limit_mw": 600.0},
                {"id": "l3", "from": "b3", "to": "b4", "susceptance": 14.0, "limit_mw": 450.0},
                {"id": "l4", "from": "b4", "to": "b5", "susceptance": 15.0, "limit_mw": 450.0},
                {"id": "l5", "from": "b5", "to": "b6", "susceptance": 17.0, "limit_mw": 500.0},
                {"id": "l6", "from": "b6", "to": "b1", "susceptance": 15.0, "limit_mw": 500.0},
                {"id": "l7", "from": "b2", "to": "b5", "susceptance": 20.0, "limit_mw": 650.0},
            ],
            "generators": [
                {"id": "coal1", "bus": "b1", "p_min_mw": 80.0, "p_max_mw": 420.0,
                 "ramp_mw": 110.0, "cost_usd_mwh": 24.0,
                 "cost_up_usd_mwh": 25.2, "cost_down_usd_mwh": 22.56},
                {"id": "coal2", "bus": "b5", "p_min_mw": 60.0, "p_max_mw": 330.0,
                 "ramp_mw": 90.0, "cost_usd_mwh": 27.0,
                 "cost_up_usd_mwh": 28.35, "cost_down_usd_mwh": 25.38},
                {"id": "oil1", "bus": "b4", "p_min_mw": 0.0, "p_max_mw": 160.0,
                 "ramp_mw": 120.0, "cost_usd_mwh": 52.0,
                 "cost_up_usd_mwh": 54.6, "cost_down_usd_mwh": 48.88},
                {"id": "gasA", "bus": "b2", "p_min_mw": 0.0, "p_max_mw": 260.0,
                 "ramp_mw": 200.0, "cost_usd_mwh": 38.0,
                 "cost_up_usd_mwh": 39.9, "cost_down_usd_mwh": 35.72},
                {"id": "gasB", "bus": "b6", "p_min_mw": 0.0, "p_max_mw": 190.0,
                 "ramp_mw": 160.0, "cost_usd_mwh": 41.0,
                 "cost_up_usd_mwh": 43.05, "cost_down_usd_mwh": 38.54},
            ],
            "wind_farms": [
                {"id": "wf1", "bus": "b3", "capacity_mw": round(mean_load * 0.25, 1)},
                {"id": "wf2", "bus": "b5", "capacity_mw": round(mean_load * 0.25, 1)},
            ],
            "ref_bus": "b1",
            "voll_usd_mwh": 1000.0,
        },
        "gas": {
            "nodes": [
                {"id": "m1", "p_min_pa": 3.5e6, "p_max_pa": 7.7e6},
                {"id": "m2", "p_min_pa": 3.0e6, "p_max_pa": 7.7e6,
                 "load": _diurnal(T, 9.0, 2.5)},
                {"id": "m3", "p_min_pa": 3.0e6, "p_max_pa": 8.0e6,
                 "load": _diurnal(T, 13.0, 3.5)},
                {"id": "m4", "p_min_pa": 3.0e6, "p_max_pa": 8.0e6},
                {"id": "m5", "p_min_pa": 3.0e6, "p_max_pa": 8.0e6,
                 "load": _diurnal(T, 11.0, 3.0)},
                {"id": "m6", "p_min_pa": 3.0e6, "p_max_pa": 8.0e6,
                 "load": _diurnal(T, 7.0, 2.0)},
                {"id": "m7", "p_min_pa": 3.5e6, "p_max_pa": 8.0e6},
                {"id": "m8", "p_min_pa": 3.0e6, "p_max_pa": 8.0e6,
                 "load": _diurnal(T, 5.0, 1.5)},
            ],
            "pipes": [
                {"id": "q1", "from": "m1", "to": "m2",
                 "length_m": 50000.0, "diameter_m": 0.9, "friction": 0.01},
                {"id": "q2", "from": "m2", "to": "m3",
                 "length_m": 40000.0, "diameter_m": 0.8, "friction": 0.01},
                {"id": "q3", "from": "m3", "to": "m5",
                 "length_m": 45000.0, "diameter_m": 0.7, "friction": 0.011},
                {"id": "q4", "from": "m4", "to": "m5",
                 "length_m": 30000.0, "diameter_m": 0.7, "friction": 0.011},
                {"id": "q5", "from": "m5", "to": "m6",
                 "length_m": 35000.0, "diameter_m": 0.6, "friction": 0.012},
                {"id": "q6", "from": "m7", "to": "m4",
                 "length_m": 25000.0, "diameter_m": 0.8, "friction": 0.01},
                {"id": "q7", "from": "m2", "to": "m8",
                 "length_m": 30000.0, "diameter_m": 0.5, "friction": 0.012},
                {"id": "q8", "from": "m8", "to": "m6",
                 "length_m": 40000.0, "diameter_m": 0.5, "friction": 0.012},
            ],
            "compressors": [
                {"id": "k1", "from": "m1", "to": "m7",
                 "ratio_min": 1.0, "ratio_max": 1.6, "cost_usd": 1.0},
                {"id": "k2", "from": "m3", "to": "m4",
                 "ratio_min": 1.0, "ratio_max": 1.4, "cost_usd": 1.0},
            ],
            "supplies": [
                {"id": "src1", "node": "m1", "min_kg_s": 0.0,
                 "max_kg_s": 42.0, "cost_usd_kg": 0.9},
                {"id": "src2", "node": "m7", "min_kg_s": 0.0,
                 "max_kg_s": 22.0, "cost_usd_kg": 1.1},
            ],
            "shed_cost_usd_kg": 5.0,
            "slack_node": "m1",
            "ref_pressure_pa": 5.5e6,
            "sound_speed_m_s": 350.0,
            "max_segment_length_m": 12500.0,
        },
        "coupling": [
            {"generator": "gasA", "gas_node": "m3",
             "heat_rate_kg_per_mwh": 150.0},
            {"generator": "gasB", "gas_node": "m6",
             "heat_rate_kg_per_mwh": 160.0},
        ],
    }


def scenario_table(name: str) -> tuple[list[str], np.ndarray]:
    """Deterministic per-unit wind profiles; returns (header, (T, n))."""
    if name == "micro":
        T, n, seed = 6, 10, 20240
    elif name == "desk":
        T, n, seed = 12, 100, 20241
    else:
        raise ValueError(f"unknown dataset {name!r}")
    rng = np.random.default_rng(seed)
    t = np.arange(T) / max(T - 1, 1)
    base = 0.45 + 0.25 * np.cos(np.pi * (t - 0.15))
    table = np.empty((T, n))
    for k in range(n):
        level = rng.uniform(0.35, 1.25)
        phase = rng.uniform(-0.35, 0.35)
        noise = rng.normal(0.0, 0.06, size=T).cumsum() / np.sqrt(np.arange(1, T + 1))
        prof = level * (0.45 + 0.25 * np.cos(np.pi * (t - 0.15 + phase))) + noise
        table[:, k] = np.clip(prof, 0.0, 1.0)
    table = np.round(table, 4)
    header = ["t"] + [f"s{k + 1}" for k in range(n)]
    _ = base
    return header, table


def write_dataset(name: str, outdir) -> tuple[str, str]:
    """Write <name>.json and <name>_scenarios.csv under outdir."""
    import os
    doc = micro_document() if name == "micro" else desk_document()
    header, table = scenario_table(name)
    jpath = os.path.join(str(outdir), f"{name}.json")
    cpath = os.path.join(str(outdir), f"{name}_scenarios.csv")
    with open(jpath, "w") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")
    with open(cpath, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for t in range(table.shape[0]):
            w.writerow([t] + [f"{v:.4f}" for v in table[t]])
    return jpath, cpath


def bundled_path(filename: str):
    return resources.files("opgf.datasets").joinpath(filename)


def load_bundled(name: str, split_ratio: float = 0.8, seed: int = 7,
                 horizon: int | None = None) -> tuple[Instance, ScenarioSet]:
    """Load a shipped dataset pair by name ('micro' or 'desk')."""
    with bundled_path(f"{name}.json").open() as fh:
        doc = json.load(fh)
    inst = instance_from_dict(doc, name=name, horizon=horizon)
    with resources.as_file(bundled_path(f"{name}_scenarios.csv")) as p:
        scen = load_scenarios(p, split_ratio, seed)
    if horizon is not None:
        scen = ScenarioSet(profiles=scen.profiles[:horizon], train=scen.train,
                           test=scen.test, seed=scen.seed,
                           farm_ids=scen.farm_ids)
    return inst, scen

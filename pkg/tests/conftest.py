import numpy as np
import pytest

from opgf.datasets import load_bundled
from opgf.network import (Bus, CouplingMap, Compressor, ElectricNetwork,
                          GasNetwork, GasNode, Generator, Instance, Line,
                          Pipe, Supply, TimeGrid, WindFarm,
                          discretize_gas_network)
from opgf.scenarios import ScenarioSet


@pytest.fixture(scope="session")
def micro():
    inst, scen = load_bundled("micro")
    return inst, scen


@pytest.fixture(scope="session")
def micro_instance(micro):
    return micro[0]


@pytest.fixture(scope="session")
def micro_scenarios(micro):
    return micro[1]


def single_bus_instance(load=10.0, p_min=0.0, p_max=20.0, ramp=50.0,
                        cost=20.0, cost_up=25.0, cost_down=15.0,
                        wind_cap=0.0, T=2, voll=1000.0):
    """One bus, one generator, optional wind farm, no gas."""
    elec = ElectricNetwork(
        buses=(Bus("b"),),
        lines=(),
        generators=(Generator("g", "b", p_min, p_max, ramp, cost,
                              cost_up, cost_down),),
        wind_farms=(WindFarm("w", "b", wind_cap),) if wind_cap > 0 else (),
        load=np.full((1, T), float(load)),
        ref_bus="b", voll=voll, cost_add=voll)
    return Instance(electric=elec, grid=TimeGrid(T, 3600.0), name="single-bus")


def line_gas_instance(n_nodes=3, length=20000.0, diameter=0.6, friction=0.01,
                      demand=8.0, s_max=50.0, T=2, seg=20000.0,
                      p_ref=5.0e6, supply_cost=0.1):
    """A path gas network n1 - ... - nK with demand at the far end,
    supply and slack at n1, plus a trivial electric side."""
    nodes = tuple(GasNode(f"n{i+1}", 2.0e6, 8.0e6) for i in range(n_nodes))
    pipes = tuple(Pipe(f"p{i+1}", f"n{i+1}", f"n{i+2}", length, diameter,
                       friction) for i in range(n_nodes - 1))
    load = np.zeros((n_nodes, T))
    load[-1] = demand
    gas = GasNetwork(nodes=nodes, pipes=pipes, compressors=(),
                     supplies=(Supply("s1", "n1", 0.0, s_max, supply_cost),),
                     load=load, shed_cost=5.0, slack_node="n1",
                     ref_pressure=p_ref, sound_speed=350.0)
    elec = ElectricNetwork(
        buses=(Bus("b"),), lines=(),
        generators=(Generator("g", "b", 0.0, 50.0, 50.0, 20.0, 21.0, 19.0),),
        wind_farms=(), load=np.full((1, T), 10.0), ref_bus="b",
        voll=1000.0, cost_add=1000.0)
    dgas = discretize_gas_network(gas, seg)
    return Instance(electric=elec, grid=TimeGrid(T, 3600.0), gas=gas,
                    coupling=CouplingMap(gas_node={}, heat_rate={}),
                    dgas=dgas, name="line-gas")


def make_scenarios(profiles: np.ndarray, train_frac=0.8, seed=1) -> ScenarioSet:
    n = profiles.shape[1]
    k = max(1, int(train_frac * n))
    return ScenarioSet(profiles=np.asarray(profiles, dtype=float),
                       train=np.arange(k), test=np.arange(k, n), seed=seed)

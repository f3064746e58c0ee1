import math

import numpy as np
import pytest

from opgf.builders import (XIndex, build_first_stage, build_second_stage_gas,
                           build_second_stage_electric, build_subproblem,
                           build_two_stage, first_stage_cost,
                           recourse_from_primal, set_subproblem_x)
from opgf.lp import solve_lp
from opgf.network import (Bus, CouplingMap, ElectricNetwork, GasNetwork,
                          GasNode, Generator, Instance, Pipe, Supply,
                          TimeGrid, WindFarm, discretize_gas_network)
from opgf.slp import solve_slp
from opgf.subproblem import SubproblemSolver, flat_gas_point

from conftest import line_gas_instance, single_bus_instance


class TestFirstStage:
    def test_row_and_bound_structure(self):
        inst = single_bus_instance(p_max=100.0, ramp=10.0, T=2)
        sys = build_first_stage(inst)
        assert sys.n_cols == 2                  # one generator, two steps
        assert sys.n_rows == 2                  # one two-sided ramp pair
        assert list(sys.lb) == [0.0, 0.0]
        assert list(sys.ub) == [100.0, 100.0]

    def test_zero_ramp_forces_flat_dispatch(self):
        inst = single_bus_instance(p_min=0.0, p_max=100.0, ramp=0.0, T=2)
        sys = build_first_stage(inst)
        # minimize -x0 + x1 to pull the two steps apart; ramp rows pin them
        sys.set_obj(sys.var(("x", "g", 0)), -1.0)
        sys.set_obj(sys.var(("x", "g", 1)), 1.0)
        sol = solve_lp(sys)
        assert sol.x[0] == pytest.approx(sol.x[1], abs=1e-9)

    def test_objective_evaluation(self):
        inst = single_bus_instance(cost=20.0, T=2)
        x = np.array([30.0, 20.0])              # sums to 50
        assert first_stage_cost(inst, x) == pytest.approx(1000.0)

    def test_count_formula_micro(self, micro_instance):
        sys = build_first_stage(micro_instance)
        G = len(micro_instance.electric.generators)
        T = micro_instance.grid.horizon
        assert sys.n_cols == G * T
        assert sys.n_rows == 2 * G * (T - 1)


class TestElectricBlock:
    def test_upward_redispatch_oracle(self):
        # one bus, load 10, dispatch 8, no wind: p+ = 2 at cost 2 C+
        inst = single_bus_instance(load=10.0, cost_up=25.0)
        sys = build_second_stage_electric(inst, np.array([8.0, 8.0]))
        sol = solve_lp(sys)
        assert sol.optimal
        rec = recourse_from_primal(sys, inst, "w", sol.x)
        np.testing.assert_allclose(rec.p_up[0], [2.0, 2.0], atol=1e-8)
        assert sol.objective == pytest.approx(2 * 2.0 * 25.0)

    def test_wind_spill_oracle(self):
        # load 3, wind 5, generator pinned at 0 with no downward room
        inst = single_bus_instance(load=3.0, p_min=0.0, wind_cap=5.0)
        wind = np.full((1, 2), 5.0)
        sys = build_second_stage_electric(inst, np.zeros(2), wind)
        sol = solve_lp(sys)
        rec = recourse_from_primal(sys, inst, "w", sol.x)
        np.testing.assert_allclose(rec.w_spill[0], [2.0, 2.0], atol=1e-8)

    def test_load_add_absorbs_forced_minimum(self):
        # p_min 10 > load 5 and zero ramp: l_add soaks up the surplus
        inst = single_bus_instance(load=5.0, p_min=10.0, p_max=20.0, ramp=0.0)
        sys = build_second_stage_electric(inst, np.full(2, 10.0))
        sol = solve_lp(sys)
        assert sol.optimal
        rec = recourse_from_primal(sys, inst, "w", sol.x)
        np.testing.assert_allclose(rec.l_add[0], [5.0, 5.0], atol=1e-8)
        assert rec.h_elec == pytest.approx(2 * 5.0 * 1000.0)

    def test_variable_and_row_counts(self, micro_instance):
        inst = micro_instance
        e = inst.electric
        T = inst.grid.horizon
        G, W, B, L = (len(e.generators), len(e.wind_farms), len(e.buses),
                      len(e.lines))
        sys = build_second_stage_electric(inst, np.zeros(G * T))
        assert sys.n_cols == (3 * G + W + 2 * B + L + B) * T
        # fix + two cap rows per (g,t); ramp pairs for t>=2; flow defs; balances
        assert sys.n_rows == (3 * G * T + 2 * G * (T - 1) + L * T + B * T)

    def test_balance_residual_at_solution(self, micro_instance):
        inst = micro_instance
        T = inst.grid.horizon
        xi = XIndex.of(inst)
        x = np.full(xi.size, 30.0)
        sys = build_second_stage_electric(inst, x)
        sol = solve_lp(sys)
        resid = sys.residuals(sol.x)
        rows = [i for (t, i) in sys.rows_with_prefix("ebal")]
        assert np.max(np.abs(resid[rows])) <= 1e-8 * max(1.0, np.abs(sol.x).max())


def two_node_gas(demand=10.0, T=2, length=20000.0):
    nodes = (GasNode("n1", 2.0e6, 8.0e6), GasNode("n2", 2.0e6, 8.0e6))
    pipes = (Pipe("p1", "n1", "n2", length, 0.6, 0.01),)
    load = np.zeros((2, T))
    load[1] = demand
    gas = GasNetwork(nodes=nodes, pipes=pipes, compressors=(),
                     supplies=(Supply("s1", "n1", 0.0, 50.0, 0.1),),
                     load=load, shed_cost=5.0, slack_node="n1",
                     ref_pressure=5.0e6)
    elec = ElectricNetwork(
        buses=(Bus("b"),), lines=(),
        generators=(Generator("g", "b", 0.0, 50.0, 50.0, 20.0, 21.0, 19.0),),
        wind_farms=(), load=np.full((1, T), 10.0), ref_bus="b",
        voll=1000.0, cost_add=1000.0)
    return Instance(electric=elec, grid=TimeGrid(T, 3600.0), gas=gas,
                    coupling=CouplingMap({}, {}),
                    dgas=discretize_gas_network(gas, length), name="two-node")


class TestGasBlock:
    def test_steady_two_node_matches_closed_form(self):
        # steady momentum integrates to pi1^2 - pi2^2 = 2 dx (Vf/Vp) m|m|
        inst = two_node_gas(demand=10.0)
        sys = build_second_stage_gas(inst)
        res = solve_slp(sys, flat_gas_point(sys, inst))
        assert res.converged
        rec = recourse_from_primal(sys, inst, "w", res.z)
        sp = inst.dgas.subpipes[0]
        m = 10.0
        pi1 = 5.0e6
        pi2_exact = math.sqrt(pi1 ** 2 - 2 * sp.dx * sp.v_f / sp.v_p * m * m)
        np.testing.assert_allclose(rec.m_in[0], m, rtol=1e-8)
        np.testing.assert_allclose(rec.m_out[0], m, rtol=1e-8)
        np.testing.assert_allclose(rec.pi[1], pi2_exact, rtol=1e-6)

    def test_zero_demand_zero_cost(self):
        inst = two_node_gas(demand=0.0)
        sys = build_second_stage_gas(inst)
        res = solve_slp(sys, flat_gas_point(sys, inst))
        assert res.objective == pytest.approx(0.0, abs=1e-6)
        rec = recourse_from_primal(sys, inst, "w", res.z)
        np.testing.assert_allclose(rec.s, 0.0, atol=1e-8)
        np.testing.assert_allclose(rec.pi, 5.0e6, rtol=1e-9)

    def test_constant_demand_reduces_to_steady_at_all_steps(self):
        inst = two_node_gas(demand=7.0, T=4)
        sys = build_second_stage_gas(inst)
        res = solve_slp(sys, flat_gas_point(sys, inst))
        rec = recourse_from_primal(sys, inst, "w", res.z)
        for t in range(1, 4):
            np.testing.assert_allclose(rec.pi[:, t], rec.pi[:, 0], rtol=1e-6)
            np.testing.assert_allclose(rec.m_avg[:, t], rec.m_avg[:, 0],
                                       atol=1e-6 * 50.0)

    def test_gas_count_formula_micro(self, micro_instance):
        inst = micro_instance
        sys = build_second_stage_gas(inst)
        T = inst.grid.horizon
        S = len(inst.gas.supplies)
        C = len(inst.gas.compressors)
        P = len(inst.dgas.subpipes)
        N = len(inst.dgas.nodes)
        N0 = len(inst.gas.nodes)
        Gg = len(inst.coupling.gfpp_ids)
        assert sys.n_cols == (S + 2 * C + 3 * P + N + P + Gg + N0) * T
        assert sys.n_rows == (4 * P + C + N) * T + 1
        assert len(sys.friction_terms) == P * T
        assert len(sys.bilinear_terms) == C * T


class TestCoupling:
    def test_heat_rate_row_algebra(self, micro_instance):
        inst = micro_instance
        solver = SubproblemSolver(inst)
        xi = XIndex.of(inst)
        x = np.full(xi.size, 40.0)
        res = solver.solve(x)
        rec = res.recourse
        eta = inst.coupling.heat_rate["g2"]
        g2 = [g.id for g in inst.electric.generators].index("g2")
        np.testing.assert_allclose(
            rec.d_g[0], eta * (rec.p[g2] + rec.p_up[g2] - rec.p_dn[g2]),
            rtol=1e-7, atol=1e-9)

    def test_cancellation_when_contract_price_matches_fuel_cost(self):
        # single bus fed by one GFPP; C_g = C_s * eta exactly, so the
        # double-count correction cancels the first-stage fuel bill and
        # the total equals the gas objective alone
        T = 2
        eta_mwh = 180.0          # kg/MWh
        c_s = 0.2                # USD/kg
        c_g = eta_mwh * c_s      # 36 USD/MWh
        elec = ElectricNetwork(
            buses=(Bus("b"),), lines=(),
            generators=(Generator("g", "b", 0.0, 60.0, 60.0, c_g,
                                  c_g, c_g),),
            wind_farms=(), load=np.full((1, T), 30.0), ref_bus="b",
            voll=1000.0, cost_add=1000.0)
        nodes = (GasNode("n1", 2.0e6, 8.0e6), GasNode("n2", 2.0e6, 8.0e6))
        gas = GasNetwork(
            nodes=nodes, pipes=(Pipe("p1", "n1", "n2", 10000.0, 0.6, 0.01),),
            compressors=(),
            supplies=(Supply("s1", "n1", 0.0, 50.0, c_s),),
            load=np.zeros((2, T)), shed_cost=5.0, slack_node="n1",
            ref_pressure=5.0e6)
        inst = Instance(
            electric=elec, grid=TimeGrid(T, 3600.0), gas=gas,
            coupling=CouplingMap({"g": "n2"}, {"g": eta_mwh / 3600.0}),
            dgas=discretize_gas_network(gas, 10000.0), name="cancel")
        solver = SubproblemSolver(inst)
        x = np.full(2, 30.0)
        res = solver.solve(x)
        rec = res.recourse
        assert rec.h_elec == pytest.approx(0.0, abs=1e-6)
        total = first_stage_cost(inst, x) + res.objective
        assert total == pytest.approx(rec.h_gas, rel=1e-9)

    def test_gfpp_without_gas_node_raises(self):
        inst = line_gas_instance()
        from dataclasses import replace
        bad = replace(inst, coupling=CouplingMap({"g": "n1"}, {"g": 0.01}))
        # electric block must exist before coupling; build_subproblem wires it
        sys = build_subproblem(bad)
        assert sys.has_var(("dg", "w", "g", 0))


class TestRelativeCompleteRecourse:
    def test_random_dispatch_and_wind_always_feasible(self, micro):
        inst, scen = micro
        rng = np.random.default_rng(42)
        xi = XIndex.of(inst)
        gens = inst.electric.generators
        solver = SubproblemSolver(inst)
        for trial in range(20):
            x = np.concatenate([
                rng.uniform(g.p_min, g.p_max, size=xi.horizon) for g in gens])
            # enforce the ramp rows by sequential clipping
            for i, g in enumerate(gens):
                for t in range(1, xi.horizon):
                    lo = x[xi.pos(g.id, t - 1)] - g.ramp
                    hi = x[xi.pos(g.id, t - 1)] + g.ramp
                    x[xi.pos(g.id, t)] = min(max(x[xi.pos(g.id, t)], lo), hi)
            k = int(rng.integers(0, scen.n_scenarios))
            wind = scen.farm_output(inst.electric, scen.profile(k))
            res = solver.solve(x, wind)
            assert res.converged, f"trial {trial}: subproblem not solved"

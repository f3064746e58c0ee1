import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from opgf.network import (DataError, GasNetwork, GasNode, Pipe, Supply,
                          discretize_gas_network, pipe_constants, validate)

from conftest import line_gas_instance, single_bus_instance


def simple_gas(pipe_lengths, bounds=None):
    n = len(pipe_lengths) + 1
    if bounds is None:
        bounds = [(3.0e6, 7.0e6)] * n
    nodes = tuple(GasNode(f"n{i+1}", *bounds[i]) for i in range(n))
    pipes = tuple(Pipe(f"p{i+1}", f"n{i+1}", f"n{i+2}", L, 0.6, 0.01)
                  for i, L in enumerate(pipe_lengths))
    return GasNetwork(nodes=nodes, pipes=pipes, compressors=(),
                      supplies=(Supply("s", "n1", 0.0, 10.0, 0.1),),
                      load=np.zeros((n, 2)), shed_cost=5.0, slack_node="n1",
                      ref_pressure=5.0e6)


class TestDiscretize:
    def test_30km_pipe_at_10km_gives_three_subpipes(self):
        d = discretize_gas_network(simple_gas([30000.0]), 10000.0)
        assert len(d.subpipes) == 3
        assert len(d.aux_nodes) == 2
        assert all(sp.dx == pytest.approx(10000.0) for sp in d.subpipes)

    def test_25km_pipe_equal_subdivision(self):
        d = discretize_gas_network(simple_gas([25000.0]), 10000.0)
        assert len(d.subpipes) == 3
        assert all(sp.dx == pytest.approx(25000.0 / 3) for sp in d.subpipes)
        assert sum(sp.dx for sp in d.subpipes) == pytest.approx(25000.0)

    def test_compliant_path_unchanged(self):
        d = discretize_gas_network(simple_gas([10000.0, 10000.0]), 10000.0)
        assert len(d.subpipes) == 2
        assert len(d.aux_nodes) == 0
        assert [sp.id for sp in d.subpipes] == ["p1", "p2"]

    def test_chain_is_contiguous(self):
        d = discretize_gas_network(simple_gas([30000.0]), 10000.0)
        chain = [d.subpipes[0].from_node]
        for sp in d.subpipes:
            assert sp.from_node == chain[-1]
            chain.append(sp.to_node)
        assert chain[0] == "n1" and chain[-1] == "n2"

    def test_aux_bounds_interpolate(self):
        net = simple_gas([30000.0], bounds=[(3.0e6, 6.0e6), (4.5e6, 7.5e6)])
        d = discretize_gas_network(net, 10000.0)
        idx = d.node_index()
        a1 = d.nodes[idx["p1.a1"]]
        assert a1.p_min == pytest.approx(3.0e6 + (4.5e6 - 3.0e6) / 3)
        assert a1.p_max == pytest.approx(6.0e6 + (7.5e6 - 6.0e6) / 3)

    def test_bad_geometry_names_pipe(self):
        net = simple_gas([30000.0])
        bad = GasNetwork(nodes=net.nodes,
                         pipes=(Pipe("p1", "n1", "n2", -5.0, 0.6, 0.01),),
                         compressors=(), supplies=net.supplies, load=net.load,
                         shed_cost=5.0, slack_node="n1", ref_pressure=5.0e6)
        with pytest.raises(DataError, match="p1"):
            discretize_gas_network(bad, 10000.0)

    @given(length=st.floats(1e2, 5e5), seg=st.floats(1e2, 1e5))
    @settings(max_examples=60, deadline=None)
    def test_length_conserved(self, length, seg):
        d = discretize_gas_network(simple_gas([length]), seg)
        total = math.fsum(sp.dx for sp in d.subpipes)
        assert abs(total - length) <= 1e-12 * length
        assert len(d.subpipes) == math.ceil(length / seg)

    def test_each_subpipe_has_one_inlet_one_outlet(self):
        d = discretize_gas_network(simple_gas([30000.0, 25000.0]), 10000.0)
        starts = [k for nd in d.nodes for k in d.pipes_from(nd.id)]
        ends = [k for nd in d.nodes for k in d.pipes_into(nd.id)]
        assert sorted(starts) == list(range(len(d.subpipes)))
        assert sorted(ends) == list(range(len(d.subpipes)))

    def test_idempotent_on_compliant(self):
        d1 = discretize_gas_network(simple_gas([10000.0, 8000.0]), 10000.0)
        assert [sp.id for sp in d1.subpipes] == ["p1", "p2"]
        assert [n.id for n in d1.nodes] == ["n1", "n2", "n3"]


class TestPipeConstants:
    def test_doubling_diameter_quarters_vm(self):
        vm1, _, _ = pipe_constants(0.5, 0.01, 350.0)
        vm2, _, _ = pipe_constants(1.0, 0.01, 350.0)
        assert vm2 / vm1 == pytest.approx(0.25, rel=1e-12)

    def test_zero_friction_gives_lossless_momentum(self):
        _, _, vf = pipe_constants(0.6, 0.0, 350.0)
        assert vf == 0.0

    def test_reference_subpipe_golden(self):
        # desk pipe q1: diameter 0.9 m, friction 0.01, a = 350 m/s;
        # values frozen from the documented convention
        # V_m = a^2/A, V_p = A, V_f = f a^2 / (2 D A).
        vm, vp, vf = pipe_constants(0.9, 0.01, 350.0)
        assert vm == pytest.approx(192557.83238278693, rel=1e-12)
        assert vp == pytest.approx(0.6361725123519332, rel=1e-12)
        assert vf == pytest.approx(1069.7657354599276, rel=1e-12)

    def test_consistency_identities(self):
        d, f, a = 0.73, 0.013, 360.0
        vm, vp, vf = pipe_constants(d, f, a)
        area = math.pi * d * d / 4
        assert vm * vp == pytest.approx(a * a, rel=1e-12)
        assert vf == pytest.approx(f * a * a / (2 * d * area), rel=1e-12)

    def test_rejects_bad_geometry(self):
        with pytest.raises(DataError):
            pipe_constants(0.0, 0.01, 350.0)
        with pytest.raises(DataError):
            pipe_constants(0.5, 0.01, -1.0)


class TestValidate:
    def test_clean_instances(self, micro_instance):
        assert validate(micro_instance) == []
        assert validate(single_bus_instance()) == []
        assert validate(line_gas_instance()) == []

    def test_generator_bounds_flipped(self):
        inst = single_bus_instance(p_min=30.0, p_max=20.0)
        msgs = validate(inst)
        assert len(msgs) == 1 and "g" in msgs[0] and "p_min" in msgs[0]

    def test_gfpp_mapped_to_unknown_node(self):
        from dataclasses import replace

        from opgf.network import CouplingMap
        inst = line_gas_instance()
        bad = replace(inst, coupling=CouplingMap(gas_node={"g": "nope"},
                                                 heat_rate={"g": 0.04}))
        msgs = validate(bad)
        assert any("nonexistent gas node" in m for m in msgs)

    def test_disconnected_gas_graph(self):
        net = simple_gas([10000.0])
        isolated = GasNetwork(
            nodes=net.nodes + (GasNode("n9", 3.0e6, 7.0e6),),
            pipes=net.pipes, compressors=(), supplies=net.supplies,
            load=np.zeros((3, 2)), shed_cost=5.0, slack_node="n1",
            ref_pressure=5.0e6)
        from dataclasses import replace
        inst = replace(line_gas_instance(), gas=isolated, dgas=None)
        assert any("not connected" in m for m in validate(inst))

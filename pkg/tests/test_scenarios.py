import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from opgf.network import DataError
from opgf.scenarios import extrema, iteration_order, load_scenarios

from conftest import make_scenarios


def write_csv(tmp_path, table, header=None):
    T, n = table.shape
    header = header or ["t"] + [f"s{k+1}" for k in range(n)]
    path = tmp_path / "scen.csv"
    lines = [",".join(header)]
    for t in range(T):
        lines.append(",".join([str(t)] + [f"{v:.4f}" for v in table[t]]))
    path.write_text("\n".join(lines) + "\n")
    return path


class TestLoad:
    def test_80_20_split_by_file_order(self, tmp_path):
        rng = np.random.default_rng(0)
        path = write_csv(tmp_path, rng.uniform(0, 1, size=(4, 100)))
        s = load_scenarios(path, 0.8, seed=1)
        assert len(s.train) == 80 and len(s.test) == 20
        assert list(s.train) == list(range(80))

    def test_single_profile_split_is_config_error(self, tmp_path):
        path = write_csv(tmp_path, np.full((3, 1), 0.5))
        with pytest.raises(DataError, match="no\\s+training"):
            load_scenarios(path, 0.8)

    def test_identical_profiles_collapse_derived_scenarios(self, tmp_path):
        prof = np.tile(np.array([[0.2], [0.6], [0.4]]), (1, 5))
        s = load_scenarios(write_csv(tmp_path, prof), 0.8)
        i_max, i_min = extrema(s)
        np.testing.assert_allclose(s.expectation, prof[:, 0])
        np.testing.assert_allclose(s.profile(i_max), prof[:, 0])
        np.testing.assert_allclose(s.profile(i_min), prof[:, 0])

    def test_ragged_rows_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("t,s1,s2\n0,0.1,0.2\n1,0.3\n")
        with pytest.raises(DataError, match="row 3"):
            load_scenarios(path, 0.5)

    def test_out_of_range_rejected(self, tmp_path):
        path = write_csv(tmp_path, np.array([[0.5, 1.2], [0.1, 0.3]]))
        with pytest.raises(DataError, match="outside"):
            load_scenarios(path, 0.5)

    def test_per_farm_columns(self, tmp_path):
        table = np.array([[0.1, 0.2, 0.3, 0.4], [0.5, 0.6, 0.7, 0.8]])
        path = write_csv(tmp_path, table,
                         header=["t", "s1/w1", "s1/w2", "s2/w1", "s2/w2"])
        s = load_scenarios(path, 0.5)
        assert s.profiles.shape == (2, 2, 2)
        assert s.farm_ids == ("w1", "w2")
        np.testing.assert_allclose(s.profile(0)[:, 1], [0.2, 0.6])


class TestExtrema:
    def test_argmax_argmin_totals(self):
        prof = np.array([[0.5, 0.2, 0.3],
                         [0.5, 0.3, 0.4]])   # totals 1.0, 0.5, 0.7
        s = make_scenarios(prof, train_frac=1.0)
        assert extrema(s) == (0, 1)

    def test_tie_breaks_to_lowest_index(self):
        prof = np.array([[0.4, 0.4], [0.3, 0.3]])
        s = make_scenarios(prof, train_frac=1.0)
        assert extrema(s) == (0, 0)

    def test_dominating_profile_wins(self):
        base = np.array([[0.5, 0.2], [0.5, 0.3]])
        s = make_scenarios(np.hstack([base, np.array([[0.9], [0.9]])]),
                           train_frac=1.0)
        assert extrema(s)[0] == 2


class TestIterationOrder:
    def test_epochs_are_permutations(self):
        s = make_scenarios(np.random.default_rng(1).uniform(0, 1, (4, 100)))
        order = iteration_order(s, 4800, seed=5)
        assert len(order) == 4800
        for e in range(60):
            epoch = order[e * 80:(e + 1) * 80]
            assert sorted(epoch) == list(range(80))

    def test_single_scenario_constant(self):
        s = make_scenarios(np.full((3, 1), 0.5), train_frac=1.0)
        assert list(iteration_order(s, 7, seed=0)) == [0] * 7

    def test_deterministic_for_seed(self):
        s = make_scenarios(np.random.default_rng(2).uniform(0, 1, (4, 10)))
        a = iteration_order(s, 100, seed=9)
        b = iteration_order(s, 100, seed=9)
        np.testing.assert_array_equal(a, b)
        c = iteration_order(s, 100, seed=10)
        assert not np.array_equal(a, c)

    @given(n=st.integers(2, 12), iters=st.integers(1, 50),
           seed=st.integers(0, 1000))
    @settings(max_examples=40, deadline=None)
    def test_every_epoch_complete(self, n, iters, seed):
        s = make_scenarios(np.full((2, n), 0.5), train_frac=1.0)
        order = iteration_order(s, iters, seed=seed)
        assert len(order) == iters
        full_epochs = iters // n
        for e in range(full_epochs):
            assert sorted(order[e * n:(e + 1) * n]) == list(range(n))


def test_extrema_invariant_to_order():
    rng = np.random.default_rng(3)
    prof = rng.uniform(0, 1, (5, 6))
    s = make_scenarios(prof, train_frac=1.0)
    i_max, i_min = extrema(s)
    perm = rng.permutation(6)
    s2 = make_scenarios(prof[:, perm], train_frac=1.0)
    j_max, j_min = extrema(s2)
    assert prof[:, i_max].sum() == pytest.approx(prof[:, perm][:, j_max].sum())
    assert prof[:, i_min].sum() == pytest.approx(prof[:, perm][:, j_min].sum())

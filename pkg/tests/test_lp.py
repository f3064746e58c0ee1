import math

import numpy as np
import pytest

from opgf.linsys import ConstraintSystem
from opgf.lp import SolverError, solve_lp

BACKENDS = ("highs", "simplex")


def lower_bound_lp():
    s = ConstraintSystem("lb")
    j = s.add_var(("x",), obj=1.0)
    s.add_row([(j, 1.0)], ">=", 3.0, tag=("r",))
    return s.finalize()


@pytest.mark.parametrize("backend", BACKENDS)
class TestContract:
    def test_min_x_above_three(self, backend):
        sol = solve_lp(lower_bound_lp(), backend=backend)
        assert sol.optimal
        assert sol.x[0] == pytest.approx(3.0)
        assert sol.objective == pytest.approx(3.0)
        assert sol.duals[0] == pytest.approx(1.0)

    def test_max_x_below_five(self, backend):
        s = ConstraintSystem("ub")
        j = s.add_var(("x",), lb=0.0, obj=-1.0)
        s.add_row([(j, 1.0)], "<=", 5.0)
        s.finalize()
        sol = solve_lp(s, backend=backend)
        assert sol.x[0] == pytest.approx(5.0)
        assert sol.objective == pytest.approx(-5.0)

    def test_equality_duals_match_hand_kkt(self, backend):
        # min 3a + 4b  s.t.  a + 2b = 5,  a - b = 1
        # unique point (7/3, 4/3); A^T y = c gives y = (7/3, 2/3)
        s = ConstraintSystem("kkt")
        a = s.add_var(("a",), obj=3.0)
        b = s.add_var(("b",), obj=4.0)
        s.add_row([(a, 1.0), (b, 2.0)], "=", 5.0)
        s.add_row([(a, 1.0), (b, -1.0)], "=", 1.0)
        s.finalize()
        sol = solve_lp(s, backend=backend)
        np.testing.assert_allclose(sol.x, [7 / 3, 4 / 3], rtol=1e-9)
        np.testing.assert_allclose(sol.duals, [7 / 3, 2 / 3], rtol=1e-9)

    def test_infeasible_status(self, backend):
        s = ConstraintSystem("inf")
        j = s.add_var(("x",), lb=0.0, ub=1.0, obj=1.0)
        s.add_row([(j, 1.0)], ">=", 2.0)
        s.finalize()
        sol = solve_lp(s, backend=backend)
        assert sol.status == "infeasible"
        assert sol.x is None and sol.duals is None

    def test_unbounded_status(self, backend):
        s = ConstraintSystem("unb")
        s.add_var(("x",), obj=-1.0)
        s.finalize()
        assert solve_lp(s, backend=backend).status == "unbounded"

    def test_optimal_invariants(self, backend):
        rng = np.random.default_rng(11)
        for _ in range(12):
            s = _random_lp(rng)
            sol = solve_lp(s, backend=backend)
            if sol.optimal:
                assert sol.feas_residual <= 1e-7
                assert sol.duality_gap <= 1e-6


def _random_lp(rng, n=6, m=4):
    s = ConstraintSystem("rand")
    cols = [s.add_var(("z", k), lb=0.0, ub=10.0, obj=float(rng.normal()))
            for k in range(n)]
    for i in range(m):
        coeffs = [(k, float(rng.normal())) for k in cols]
        s.add_row(coeffs, "=" if i % 2 else "<=", float(rng.normal() * 2.0))
    return s.finalize()


def test_backends_agree_on_random_lps():
    rng = np.random.default_rng(5)
    checked = 0
    for _ in range(25):
        s = _random_lp(rng)
        a = solve_lp(s, backend="highs")
        b = solve_lp(s, backend="simplex")
        assert a.status == b.status
        if a.optimal:
            assert a.objective == pytest.approx(b.objective, rel=1e-7, abs=1e-7)
            checked += 1
    assert checked >= 10


def test_dual_sign_convention_by_finite_difference():
    # for equality rows at a non-degenerate optimum, perturbing the rhs by
    # +d changes the optimum by dual*d
    rng = np.random.default_rng(7)
    tested = 0
    while tested < 8:
        s = _random_lp(rng, n=5, m=3)
        sol = solve_lp(s)
        if not sol.optimal:
            continue
        eq_rows = [i for i, sn in enumerate(s.senses) if sn == "="]
        if not eq_rows:
            continue
        i = eq_rows[0]
        d = 1e-5
        base_rhs = float(s.rhs[i])
        s.set_rhs(i, base_rhs + d)
        up = solve_lp(s)
        s.set_rhs(i, base_rhs - d)
        dn = solve_lp(s)
        s.set_rhs(i, base_rhs)
        if not (up.optimal and dn.optimal):
            continue
        fd = (up.objective - dn.objective) / (2 * d)
        assert fd == pytest.approx(sol.duals[i], rel=1e-4, abs=1e-5)
        tested += 1


def test_scaling_does_not_change_solution():
    s = ConstraintSystem("scale")
    x1 = s.add_var(("x1",), lb=0.0, obj=1.0e6)
    x2 = s.add_var(("x2",), lb=0.0, obj=3.0e-4)
    s.add_row([(x1, 2.0e6), (x2, 1.0e-3)], ">=", 4.0e3, tag=("big",))
    s.add_row([(x1, 1.0), (x2, 1.0)], "<=", 1.0e7)
    s.finalize()
    a = solve_lp(s, scale=True)
    b = solve_lp(s, scale=False)
    np.testing.assert_allclose(a.x, b.x, rtol=1e-8)
    np.testing.assert_allclose(a.duals, b.duals, rtol=1e-8)


def test_nonlinear_system_rejected():
    s = ConstraintSystem("nl")
    m = s.add_var(("m",))
    p = s.add_var(("p",), lb=1.0)
    r = s.add_row([(m, 1.0)], "=", 0.0)
    s.add_friction(r, m, p, 1.0)
    s.finalize()
    with pytest.raises(SolverError):
        solve_lp(s)


def test_lp_file_dump(tmp_path):
    path = tmp_path / "m.lp"
    lower_bound_lp().write_lp(path)
    text = path.read_text()
    assert "Minimize" in text and "Subject To" in text and "Bounds" in text

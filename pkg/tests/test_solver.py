import io
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from handsoff.solver import KKT_TOL, ConvexProgram, Status, feasibility, solve
from oracles import box_qp_single_equality, random_tiny_lp, vertex_enumeration


def test_min_x_on_unit_box():
    res = solve(ConvexProgram(c=[1.0], Aeq=np.zeros((0, 1)), beq=[], lb=0, ub=1))
    assert res.status is Status.OPTIMAL and res.x[0] == pytest.approx(0.0, abs=1e-9)


def test_split_absolute_value():
    prog = ConvexProgram(c=[1.0, 1.0], Aeq=[[1.0, -1.0]], beq=[0.3], lb=0, ub=1)
    res = solve(prog)
    assert res.objective == pytest.approx(0.3, abs=1e-9)
    assert min(res.x) == pytest.approx(0.0, abs=1e-9)


def test_infeasible_equality():
    prog = ConvexProgram(c=[0.0], Aeq=[[1.0]], beq=[2.0], lb=0, ub=1)
    f = feasibility(prog)
    assert not f.feasible and f.margin == pytest.approx(1.0, abs=1e-6)
    res = solve(prog)
    assert res.status is Status.INFEASIBLE and res.infeasibility == pytest.approx(1.0, abs=1e-6)


def test_feasible_equality():
    f = feasibility(ConvexProgram(c=[0.0], Aeq=[[1.0]], beq=[0.5], lb=0, ub=1))
    assert f.feasible and f.margin == 0.0 and f.x[0] == pytest.approx(0.5)


@pytest.mark.parametrize("seed", range(20))
def test_lp_matches_vertex_enumeration(seed):
    rng = np.random.default_rng(seed)
    c, Aeq, beq, lb, ub = random_tiny_lp(rng)
    res = solve(ConvexProgram(c, Aeq, beq, lb, ub))
    best, _ = vertex_enumeration(c, Aeq, beq, lb, ub)
    assert res.status is Status.OPTIMAL
    assert res.kkt.max() <= KKT_TOL
    assert res.objective == pytest.approx(best, abs=1e-7)


@pytest.mark.parametrize("seed", range(5))
def test_medium_lp_matches_highs(seed):
    rng = np.random.default_rng(100 + seed)
    V, p = 40, 6
    c, Aeq, beq, lb, ub = random_tiny_lp(rng, V, p)
    ref = linprog(c, A_eq=Aeq, b_eq=beq, bounds=list(zip(lb, ub)), method="highs")
    res = solve(ConvexProgram(c, Aeq, beq, lb, ub))
    assert res.status is Status.OPTIMAL
    assert res.objective == pytest.approx(ref.fun, abs=1e-7)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 8), st.integers(0, 2**32 - 1))
def test_diagonal_qp_matches_bisection_oracle(V, seed):
    rng = np.random.default_rng(seed)
    q = rng.uniform(0.1, 3, V)
    c = rng.normal(size=V)
    lb, ub = -np.ones(V), np.ones(V)
    s = float(rng.uniform(-0.9, 0.9) * V)
    ref = box_qp_single_equality(q, c, s, lb, ub)
    for Q in (q, np.diag(q)):
        res = solve(ConvexProgram(c, np.ones((1, V)), [s], lb, ub, Q=Q))
        assert res.status is Status.OPTIMAL and res.kkt.max() <= KKT_TOL
        np.testing.assert_allclose(res.x, ref, atol=1e-6)


def test_dense_qp_kkt_certificate():
    rng = np.random.default_rng(7)
    M = rng.normal(size=(6, 6))
    c, Aeq, beq, lb, ub = random_tiny_lp(rng, 6, 2)
    res = solve(ConvexProgram(c, Aeq, beq, lb, ub, Q=M @ M.T))
    assert res.status is Status.OPTIMAL and res.kkt.max() <= KKT_TOL
    grad = M @ M.T @ res.x + c
    np.testing.assert_allclose(grad, Aeq.T @ res.y + res.z_lower - res.z_upper, atol=1e-7)


def test_trace_lines_are_json():
    buf = io.StringIO()
    rng = np.random.default_rng(1)
    solve(ConvexProgram(*random_tiny_lp(rng)), trace=buf)
    lines = buf.getvalue().splitlines()
    assert lines and {"iteration", "primal", "dual", "complementarity"} <= json.loads(lines[0]).keys()


def test_iteration_cap_reports_max_iter():
    rng = np.random.default_rng(2)
    res = solve(ConvexProgram(*random_tiny_lp(rng, 30, 5)), max_iter=2)
    assert res.status is Status.MAX_ITER


@pytest.mark.parametrize("kw, match", [
    (dict(c=[1.0, 1.0], Aeq=[[1.0, 1.0]], beq=[1.0, 2.0], lb=0, ub=1), "rows"),
    (dict(c=[np.nan], Aeq=np.zeros((0, 1)), beq=[], lb=0, ub=1), "NaN"),
    (dict(c=[1.0], Aeq=np.zeros((0, 1)), beq=[], lb=1, ub=0), "lb > ub"),
    (dict(c=[0.0, 0.0], Aeq=np.zeros((0, 2)), beq=[], lb=0, ub=1, Q=[[1.0, 1.0], [0.0, 1.0]]),
     "symmetric"),
    (dict(c=[0.0, 0.0], Aeq=np.zeros((0, 2)), beq=[], lb=0, ub=1, Q=[[1.0, 2.0], [2.0, 1.0]]),
     "semidefinite"),
])
def test_program_validation(kw, match):
    with pytest.raises(ValueError, match=match):
        ConvexProgram(**kw)

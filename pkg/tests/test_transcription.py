import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from handsoff.lti import LtiSystem, discretize_zoh
from handsoff.signals import ControlSignal
from handsoff.solver import solve
from handsoff.transcription import (FiniteHorizonProblem, Objective, reachability_operator,
                                    transcribe)

integrator = LtiSystem(np.array([[0.0]]), np.array([[1.0]]))


def test_single_step_integrator_forces_u():
    tr = transcribe(FiniteHorizonProblem(integrator, [1.0], 1.0, 1))
    np.testing.assert_allclose(tr.program.Aeq, [[1.0, -1.0]])
    np.testing.assert_allclose(tr.program.beq, [-1.0])
    res = solve(tr.program)
    assert tr.decode(res.x).samples[0, 0] == pytest.approx(-1.0, abs=1e-9)


def test_gamma_columns_scalar(scalar_stable):
    d = discretize_zoh(scalar_stable, 1.0, 2)
    G = reachability_operator(d)
    np.testing.assert_allclose(G, np.hstack([d.Ad @ d.Bd, d.Bd]), rtol=1e-14)


def test_gamma_matches_simulation(fourstate):
    rng = np.random.default_rng(0)
    two = LtiSystem(fourstate.A, np.hstack([fourstate.B, rng.normal(size=(4, 1))]))
    d = discretize_zoh(two, 3.0, 15)
    u = rng.uniform(-1, 1, (2, 15))
    G = reachability_operator(d)
    np.testing.assert_allclose(G @ u.reshape(-1), d.simulate(np.zeros(4), u)[:, -1], atol=1e-12)


@settings(deadline=None)
@given(arrays(np.float64, (2, 6), elements=st.floats(-1, 1)))
def test_encode_decode_round_trip(fourstate, u):
    two = LtiSystem(fourstate.A, np.hstack([fourstate.B, fourstate.B]))
    for obj in (Objective.L1, Objective.L2):
        tr = transcribe(FiniteHorizonProblem(two, np.ones(4), 1.0, 6, objective=obj))
        sig = ControlSignal(u, 1 / 6)
        assert np.array_equal(tr.decode(tr.encode(sig)).samples, u)


@settings(deadline=None)
@given(arrays(np.float64, 8, elements=st.floats(-1, 1)), st.floats(0.1, 3), st.floats(0.1, 3))
def test_objective_round_trip(scalar_stable, u, lam, theta):
    for obj in (Objective.L1, Objective.L1L2):
        prob = FiniteHorizonProblem(scalar_stable, [1.0], 2.0, 8, obj, lam=lam,
                                    theta=theta if obj is Objective.L1L2 else None)
        tr = transcribe(prob)
        z = tr.encode(ControlSignal(u, 0.25))
        J = lam * np.abs(u).sum() / 8
        if obj is Objective.L1L2:
            J += 0.5 * theta * (u**2).sum() / 8
        assert tr.program.objective(z) == pytest.approx(J, abs=1e-10)


def test_split_solution_has_no_simultaneous_activity(scalar_stable):
    tr = transcribe(FiniteHorizonProblem(scalar_stable, [1.0], 1.5, 30))
    res = solve(tr.program)
    up, um = res.x[:30], res.x[30:]
    assert np.max(up * um) <= 1e-8


def test_residual_matches_simulation(fourstate):
    prob = FiniteHorizonProblem(fourstate, np.ones(4), 10.0, 100)
    tr = transcribe(prob)
    res = solve(tr.program)
    u = tr.decode(res.x)
    xN = tr.disc.simulate(prob.x0, u.samples)[:, -1]
    resid = tr.program.Aeq @ res.x - tr.program.beq
    np.testing.assert_allclose(xN - prob.xT, resid, atol=1e-9)


def test_l0_exact_has_no_transcript(scalar_stable):
    with pytest.raises(ValueError):
        transcribe(FiniteHorizonProblem(scalar_stable, [1.0], 1.0, 4, Objective.L0_EXACT))


@pytest.mark.parametrize("kw", [
    dict(x0=[1.0, 2.0]),
    dict(T=0.0),
    dict(N=0),
    dict(lam=0.0),
    dict(objective=Objective.L1L2, theta=0.0),
    dict(objective=Objective.L2, theta=-1.0),
])
def test_problem_validation(scalar_stable, kw):
    base = dict(sys=scalar_stable, x0=[1.0], T=1.0, N=4)
    base.update(kw)
    with pytest.raises(ValueError):
        FiniteHorizonProblem(**base)

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from handsoff.lti import (LtiSystem, Verdict, controllability_check, discretize_zoh, expm,
                          matrix_measure, normality_sufficient)


def taylor_expm(M, terms=30):
    out = np.eye(M.shape[0])
    term = np.eye(M.shape[0])
    for k in range(1, terms):
        term = term @ M / k
        out = out + term
    return out


def test_expm_zero_is_identity():
    assert np.array_equal(expm(np.zeros((3, 3))), np.eye(3))


def test_expm_diagonal():
    a = np.array([-2.0, 0.3, 1.5])
    np.testing.assert_allclose(expm(np.diag(a)), np.diag(np.exp(a)), rtol=1e-13)


@pytest.mark.parametrize("t", [0.1, 1.0, math.pi / 2, 3.0])
def test_expm_rotation(t):
    R = expm(np.array([[0.0, -1.0], [1.0, 0.0]]) * t)
    expected = np.array([[math.cos(t), -math.sin(t)], [math.sin(t), math.cos(t)]])
    np.testing.assert_allclose(R, expected, atol=1e-14)
    np.testing.assert_allclose(R, taylor_expm(np.array([[0.0, -t], [t, 0.0]])), atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, (3, 3), elements=st.floats(-2, 2)))
def test_expm_matches_taylor_on_small_matrices(M):
    np.testing.assert_allclose(expm(M), taylor_expm(M, 60), rtol=1e-10, atol=1e-12)


def test_expm_large_norm_matches_scipy():
    from scipy.linalg import expm as ref
    rng = np.random.default_rng(3)
    M = rng.normal(size=(5, 5)) * 8
    np.testing.assert_allclose(expm(M), ref(M), rtol=1e-9)


@pytest.mark.parametrize("bad", [np.ones((2, 3)), np.array([[np.nan]]), np.array([[np.inf, 0], [0, 1]])])
def test_expm_rejects_bad_input(bad):
    with pytest.raises(ValueError):
        expm(bad)


@pytest.mark.parametrize("A, mu", [([[-1.0]], -1.0), ([[0.0, -1.0], [1.0, 0.0]], 0.0),
                                   ([[1.0, 4.0], [0.0, 1.0]], 3.0)])
def test_matrix_measure_examples(A, mu):
    assert matrix_measure(np.array(A)) == pytest.approx(mu, abs=1e-14)


@given(arrays(np.float64, (4, 4), elements=st.floats(-5, 5)))
def test_matrix_measure_symmetric_is_max_eigenvalue(M):
    S = (M + M.T) / 2
    assert matrix_measure(S) == pytest.approx(np.linalg.eigvalsh(S).max(), abs=1e-10)


@settings(deadline=None)
@given(arrays(np.float64, (3, 3), elements=st.floats(-2, 2)), st.floats(0, 2))
def test_matrix_measure_bounds_exponential_growth(A, t):
    assert np.linalg.norm(expm(A * t), 2) <= math.exp(matrix_measure(A) * t) * (1 + 1e-9)


def test_discretize_integrator():
    d = discretize_zoh(LtiSystem(np.array([[0.0]]), np.array([[1.0]])), 1.0, 2)
    assert d.Ad[0, 0] == pytest.approx(1.0) and d.Bd[0, 0] == pytest.approx(0.5)


def test_discretize_scalar_stable(scalar_stable):
    d = discretize_zoh(scalar_stable, 1.0, 10)
    assert d.Ad[0, 0] == pytest.approx(math.exp(-0.1), rel=1e-14)
    assert d.Bd[0, 0] == pytest.approx(-(1 - math.exp(-0.1)), rel=1e-12)
    assert d.N * d.dt == pytest.approx(1.0, rel=1e-12)


def test_zero_input_simulation_matches_flow(fourstate):
    d = discretize_zoh(fourstate, 10.0, 50)
    x0 = np.ones(4)
    x = d.simulate(x0, np.zeros((1, 50)))
    np.testing.assert_allclose(x[:, -1], expm(fourstate.A * 10.0) @ x0, rtol=1e-10)


@pytest.mark.parametrize("T, N", [(0.0, 5), (-1.0, 5), (1.0, 0), (1.0, 2.5)])
def test_discretize_rejects_bad_grid(scalar_stable, T, N):
    with pytest.raises(ValueError):
        discretize_zoh(scalar_stable, T, N)


def test_controllability_examples(fourstate):
    di = LtiSystem(np.array([[0.0, 1.0], [0.0, 0.0]]), np.array([[0.0], [1.0]]))
    assert controllability_check(di).overall
    dec = LtiSystem(np.eye(2), np.array([[1.0], [0.0]]))
    assert not controllability_check(dec).overall
    assert controllability_check(fourstate).overall


def test_controllability_per_channel():
    sys = LtiSystem(np.diag([1.0, 2.0]), np.array([[1.0, 1.0], [0.0, 1.0]]))
    assert controllability_check(sys).channels == (False, True)


def test_normality_verdicts(scalar_stable, fourstate):
    assert normality_sufficient(scalar_stable) is Verdict.NORMAL
    assert normality_sufficient(fourstate) is Verdict.UNKNOWN  # A is singular
    assert normality_sufficient(LtiSystem(np.eye(2), np.array([[1.0], [0.0]]))) is Verdict.UNKNOWN


@pytest.mark.parametrize("A, B", [
    (np.ones((2, 3)), np.ones((2, 1))),
    (np.eye(2), np.ones((3, 1))),
    (np.eye(2), np.ones((2, 0))),
    (np.array([[np.nan]]), np.ones((1, 1))),
])
def test_system_validation(A, B):
    with pytest.raises(ValueError):
        LtiSystem(A, B)


def test_system_is_immutable(scalar_stable):
    with pytest.raises(ValueError):
        scalar_stable.A[0, 0] = 2.0


def test_system_dict_round_trip(fourstate):
    again = LtiSystem.from_dict(fourstate.to_dict())
    assert np.array_equal(again.A, fourstate.A) and np.array_equal(again.B, fourstate.B)
    with pytest.raises(ValueError, match="'B'"):
        LtiSystem.from_dict({"A": [[1.0]]})

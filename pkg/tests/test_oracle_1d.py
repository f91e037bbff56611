import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from handsoff.lti import LtiSystem
from handsoff.oracle_1d import (PlantKind, ScalarPlant, Unreachable, flow_linear,
                                handsoff_control_1d, linearization_error, min_time_1d,
                                sin_plant_rhs)
from handsoff.sparse_control import solve_l1
from handsoff.transcription import FiniteHorizonProblem


def test_min_time_examples():
    assert min_time_1d(ScalarPlant(-1.0), 1.0) == pytest.approx(math.log(2))
    assert min_time_1d(ScalarPlant(-1.0), 0.0) == 0.0
    assert min_time_1d(ScalarPlant(1.0), 0.25) == pytest.approx(math.log(4 / 3))
    with pytest.raises(Unreachable):
        min_time_1d(ScalarPlant(1.0), 1.0)


@given(st.floats(-5, 5))
def test_stable_min_time_below_linear_bound(x):
    # log(1 + |x|) <= |x|, the alpha used for the scalar stability check
    assert min_time_1d(ScalarPlant(-2.0), x) <= abs(x) / 2 + 1e-15


def test_control_for_zero_state():
    seg = handsoff_control_1d(ScalarPlant(-1.0), 0.0, 2.0)
    assert seg.tau == 2.0 and seg.active_length == 0 and seg.rate == 0


def test_stable_switch_time():
    T = math.log(2) / 0.6
    seg = handsoff_control_1d(ScalarPlant(-1.0), 1.0, T)
    tau = math.log(math.exp(T) - 1)
    assert seg.tau == pytest.approx(tau)
    assert seg.active_length == pytest.approx(T - tau)
    assert (seg.first_value, seg.second_value) == (0.0, 1.0)


@pytest.mark.parametrize("a", [-2.0, -0.5, 0.7, 1.0])
@pytest.mark.parametrize("x", [-0.6, -0.1, 0.3, 0.9])
@pytest.mark.parametrize("stretch", [1.0, 1.3, 2.5])
def test_control_reaches_origin(a, x, stretch):
    plant = ScalarPlant(a)
    T = stretch * min_time_1d(plant, x)
    seg = handsoff_control_1d(plant, x, T)
    xt = x
    for s, e, v in seg.pieces():
        xt = flow_linear(a, xt, v, e - s)
    assert abs(xt) <= 1e-6
    assert seg.rate <= 1.0 / stretch + 1e-12


def test_horizon_shorter_than_min_time():
    with pytest.raises(ValueError):
        handsoff_control_1d(ScalarPlant(-1.0), 1.0, 0.5)


@pytest.mark.parametrize("a, x0", [(-1.0, 1.0), (-1.0, -0.4), (1.0, 0.25), (1.0, -0.5)])
def test_closed_form_matches_grid_l1(a, x0):
    plant = ScalarPlant(a)
    T = 1.5 * min_time_1d(plant, x0)
    N = 300
    seg = handsoff_control_1d(plant, x0, T)
    sol = solve_l1(FiniteHorizonProblem(LtiSystem([[a]], [[a]]), [x0], T, N))
    t = (np.arange(N) + 0.5) * T / N
    mismatch = np.flatnonzero(np.abs(sol.u.samples[0] - seg.value(t)) > 1e-6)
    assert mismatch.size <= 1


def test_sin_plant():
    assert sin_plant_rhs(-1.0, 0.0, 0.0) == 0.0
    assert linearization_error(-1.0, 0.0) == 0.0
    assert linearization_error(-1.0, math.pi) == pytest.approx(math.pi)
    assert ScalarPlant(-1.0, PlantKind.NONLINEAR_SIN).rhs(0.3, 0.0) == pytest.approx(math.sin(-0.3))


@given(st.floats(-0.5, 0.5), st.floats(-2, 2))
def test_linearization_error_taylor_bound(x, a):
    assert abs(linearization_error(a, x)) <= abs(a * x) ** 3 / 6 + 1e-15


def test_plant_validation():
    with pytest.raises(ValueError):
        ScalarPlant(0.0)
    with pytest.raises(ValueError):
        ScalarPlant(-1.0, "cubic")

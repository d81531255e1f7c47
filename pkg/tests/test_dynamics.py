import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sxsine.analysis import (
    StateVector,
    affine_system,
    analytic_state,
    analytic_trajectory,
    conservation_residual,
    simulate,
    sine_through,
    time_grid,
    vector_field,
)
from sxsine.errors import NonFiniteError
from sxsine.ha_model import affine_normal_form
from sxsine.sine_builder import SineParams, build_sine_component

from conftest import SIMULINK, SMALL

params = st.builds(
    SineParams,
    amplitude=st.floats(0, 20),
    omega=st.floats(0.1, 3),
    bias=st.floats(-20, 20),
    phase=st.floats(-math.pi, math.pi),
)


def test_analytic_examples():
    assert analytic_state(SMALL, 0) == StateVector(-0.5, 2.0, 0.0)
    A, w, mu = 3.0, 0.7, -1.5
    s = analytic_state(SineParams(A, w, mu), math.pi / (2 * w))
    assert s.x == pytest.approx(mu * math.pi / (2 * w), abs=1e-12)
    assert s.y == pytest.approx(A + mu, abs=1e-12)
    # frozen from a 30-digit mpmath evaluation of -20 cos 5 + 200 and 10 sin 5 + 20
    s = analytic_state(SIMULINK, 10.0)
    assert s.x == pytest.approx(194.32675629073547471, abs=1e-12)
    assert s.y == pytest.approx(10.410757253368615311, abs=1e-12)
    assert s.t == 10.0


def test_vector_field_examples():
    np.testing.assert_allclose(vector_field(SMALL, StateVector(-0.5, 2, 0)), [2, 0.5, 1], atol=0)
    np.testing.assert_allclose(vector_field(SIMULINK, StateVector(-20, 20, 0)), [20, 5, 1], atol=0)
    p = SineParams(4, 1.7, 3.25)
    np.testing.assert_allclose(vector_field(p, [3.25 * 2.0, 3.25, 2.0]), [3.25, 0, 1], atol=1e-12)


def test_affine_system_matches_formula_and_symbolic_flow():
    sys = affine_system(SMALL)
    np.testing.assert_array_equal(sys.M[1], [-1, 0, 2])
    np.testing.assert_array_equal(sys.b, [0, 0, 1])
    # the same rows recovered from the SX component through the affine normal form
    c = build_sine_component()
    consts = {"omega": SIMULINK.omega, "mu": SIMULINK.bias}
    rows = [affine_normal_form(c.locations[0].flow_map[v], consts, ["x", "y", "t"]) for v in "xyt"]
    sysb = affine_system(SIMULINK)
    np.testing.assert_allclose([r.coeffs for r in rows], sysb.M, atol=1e-15)
    np.testing.assert_allclose([r.c0 for r in rows], sysb.b, atol=1e-15)


def test_affine_system_agrees_with_vector_field():
    rng = np.random.default_rng(1)
    for _ in range(1000):
        p = SineParams(rng.uniform(0, 10), rng.uniform(0.1, 3), rng.uniform(-10, 10), rng.uniform(-3, 3))
        s = rng.uniform(-50, 50, 3)
        d = affine_system(p)(s) - vector_field(p, s)
        assert np.max(np.abs(d)) < 1e-12 * max(1, np.max(np.abs(vector_field(p, s))))


@settings(max_examples=1000, deadline=None)
@given(params, st.floats(0.01, 20))
def test_analytic_solution_satisfies_ode(p, t):
    h = 1e-5
    fd = (analytic_state(p, t + h).as_array() - analytic_state(p, t - h).as_array()) / (2 * h)
    f = vector_field(p, analytic_state(p, t))
    assert np.max(np.abs(fd - f)) < 1e-6 * max(1.0, p.amplitude * p.omega * p.omega, abs(p.bias))


def test_conservation_examples():
    assert conservation_residual(SMALL, StateVector(-0.5, 2, 0)) < 1e-15
    p = SineParams(0, 1.3, 2.5)
    assert conservation_residual(p, [2.5 * 4, 2.5, 4]) == 0


@settings(max_examples=100)
@given(params)
def test_conservation_along_analytic(p):
    rng = np.random.default_rng(0)
    for t in rng.uniform(0, 20, 100):
        assert conservation_residual(p, analytic_state(p, t)) < 1e-9 * max(1, p.amplitude ** 2)


@pytest.mark.parametrize("p", [SMALL, SIMULINK])
def test_rk4_tracks_analytic(p):
    s0 = analytic_state(p, 0)
    tr = simulate(p, s0, 1e-3, 10)
    assert tr.method == "rk4" and len(tr) == 10001
    exact = analytic_trajectory(p, tr.times).states
    assert np.max(np.abs(tr.states - exact)) < 1e-6 * max(1, p.amplitude)
    res = max(conservation_residual(p, s) for s in tr.states)
    assert res < 1e-6 * max(1, p.amplitude ** 2)


def test_rk4_range_of_y():
    tr = simulate(SIMULINK, analytic_state(SIMULINK, 0), 1e-3, 10)
    assert tr.states[:, 1].min() >= 10 - 1e-3
    assert tr.states[:, 1].max() <= 30 + 1e-3


def test_rk4_preserves_drifting_equilibrium():
    p = SineParams(1.0, 2.0, 1.5)
    for step in (0.1, 0.37):
        tr = simulate(p, [0.0, 1.5, 0.0], step, step)
        np.testing.assert_allclose(tr.states[-1], [1.5 * step, 1.5, step], atol=1e-12)


def test_rk4_final_partial_step():
    tr = simulate(SMALL, [-0.5, 2, 0], 0.3, 1.0)
    np.testing.assert_allclose(tr.times, [0, 0.3, 0.6, 0.9, 1.0])
    assert tr.states[-1, 2] == pytest.approx(1.0)


def test_rk4_overflow():
    p = SineParams(1e300, 1e3, 0)
    with pytest.raises(NonFiniteError):
        simulate(p, [-1e300, 1e300, 0], 1.0, 5.0)


def test_time_grid_tiles():
    assert time_grid(0.01, 0.03).tolist() == [0, 0.01, 0.02, 0.03]
    g = time_grid(1e-3, 10)
    assert len(g) == 10001 and g[-1] == 10


@given(params, st.floats(-5, 5), st.floats(-5, 5))
def test_sine_through_hits_initial_state(p, dx, dy):
    s0 = analytic_state(p, 0).as_array() + [dx, dy, 0]
    q = sine_through(p.omega, p.bias, s0)
    np.testing.assert_allclose(analytic_state(q, 0).as_array(), s0, atol=1e-9 * (1 + np.abs(s0).max()))

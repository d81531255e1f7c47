import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from sxsine.analysis import AffineSystem, affine_power, affine_system, analytic_state, expm_taylor, step_map
from sxsine.errors import StepTooLargeError
from sxsine.sine_builder import SineParams

from conftest import SMALL


def test_pure_clock():
    phi, psi = step_map(AffineSystem(np.zeros((3, 3)), np.array([0, 0, 1.0])), 0.5)
    np.testing.assert_array_equal(phi, np.eye(3))
    np.testing.assert_allclose(psi, [0, 0, 0.5], atol=0)


def test_small_system_against_mpmath_values():
    # exp([[M, b], [0, 0]] * 0.01) for omega=1, mu=2, evaluated with mpmath at 30 digits
    phi, psi = step_map(affine_system(SMALL), 0.01)
    np.testing.assert_allclose(phi, [
        [0.999950000416665277780, 0.0099998333341666646825, 0.0000999991666694444395],
        [-0.0099998333341666646825, 0.999950000416665277780, 0.0199996666683333293651],
        [0, 0, 1],
    ], rtol=0, atol=1e-16)
    np.testing.assert_allclose(psi, [3.33331666670634915e-7, 9.99991666694444395e-5, 0.01], rtol=0, atol=1e-18)


def test_iterated_step_matches_analytic():
    phi, psi = step_map(affine_system(SMALL), 0.01)
    s = np.array([-0.5, 2.0, 0.0])
    for _ in range(1000):
        s = phi @ s + psi
    assert np.max(np.abs(s - analytic_state(SMALL, 10).as_array())) < 1e-9


@pytest.mark.parametrize("omega", [0.1, 0.5, 1.0, 2.0])
def test_iterated_step_matches_analytic_range(omega):
    p = SineParams(1.5, omega, -3.0, 0.4)
    phi, psi = step_map(affine_system(p), 0.01)
    s = analytic_state(p, 0).as_array()
    for _ in range(1000):
        s = phi @ s + psi
    assert np.max(np.abs(s - analytic_state(p, 10).as_array())) < 1e-9


@settings(max_examples=100, deadline=None)
@given(st.floats(0.1, 2.0), st.floats(-5, 5), st.floats(1e-3, 3.0))
def test_against_scipy_expm(omega, mu, delta):
    sys = affine_system(SineParams(1.0, omega, mu))
    if np.linalg.norm(sys.M, np.inf) * delta > 16:
        return
    phi, psi = step_map(sys, delta)
    A = np.zeros((4, 4))
    A[:3, :3], A[:3, 3] = sys.M, sys.b
    ref = expm(A * delta)
    np.testing.assert_allclose(phi, ref[:3, :3], rtol=0, atol=1e-13)
    np.testing.assert_allclose(psi, ref[:3, 3], rtol=0, atol=1e-13 * max(1, np.abs(ref[:3, 3]).max()))


def test_expm_taylor_generic_matrix():
    # 40-digit reference; scipy's Pade result is itself ~1e-13 off on these
    mpmath.mp.dps = 40
    rng = np.random.default_rng(3)
    for _ in range(50):
        A = rng.normal(size=(4, 4)) * rng.uniform(0.01, 3)
        ref = np.array(mpmath.expm(mpmath.matrix(A.tolist())).tolist(), dtype=float)
        np.testing.assert_allclose(expm_taylor(A), ref, rtol=0, atol=1e-14 * max(1, np.abs(ref).max()))


def test_semigroup():
    rng = np.random.default_rng(5)
    sys = affine_system(SineParams(1.0, 1.0, 2.0))
    for _ in range(50):
        d1, d2 = rng.uniform(0.001, 2, 2)
        a, _ = step_map(sys, d1)
        b, _ = step_map(sys, d2)
        c, _ = step_map(sys, d1 + d2)
        np.testing.assert_allclose(a @ b, c, rtol=0, atol=1e-11)


def test_step_too_large():
    sys = affine_system(SineParams(1.0, 2.0, 10.0))  # ||M||_inf = 44
    step_map(sys, 16 / 44)
    with pytest.raises(StepTooLargeError):
        step_map(sys, 0.5)


def test_affine_power_matches_iteration():
    phi, psi = step_map(affine_system(SMALL), 0.01)
    cache = []
    s_iter = np.array([-0.5, 2.0, 0.0])
    for k in range(1, 300):
        s_iter = phi @ s_iter + psi
        P, q = affine_power(phi, psi, k, cache)
        np.testing.assert_allclose(P @ [-0.5, 2.0, 0.0] + q, s_iter, atol=1e-12)
    P, q = affine_power(phi, psi, 0)
    np.testing.assert_array_equal(P, np.eye(3))
    np.testing.assert_array_equal(q, 0)

"""
Property-based tests using Hypothesis
"""

import math

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from sam_dde.cli.models import parse_omega
from sam_dde.models import is_feasible
from sam_dde.problems import ToggleParams, averaged_hill, newpro_fourier, toggle_oscillatory

# the autouse configuration fixture is function scoped
fixture_ok = settings(suppress_health_check=[HealthCheck.function_scoped_fixture], deadline=None)

states = st.floats(min_value=0.05, max_value=3.0, allow_nan=False)
phases = st.floats(min_value=0.0, max_value=2 * math.pi, allow_nan=False)


@pytest.mark.unit
@fixture_ok
@given(states, states, states, states, phases, st.floats(min_value=0.0, max_value=2.0))
def test_toggle_rhs_is_periodic_in_theta(x0, x1, y0, y1, theta, t):
    """f(x, y, t, theta) = f(x, y, t, theta + 2 pi)."""
    problem = toggle_oscillatory(ToggleParams(), 100.0)
    x, y = np.array([x0, x1]), np.array([y0, y1])

    a = problem.f(x, y, t, theta, 100.0)
    b = problem.f(x, y, t, theta + 2 * math.pi, 100.0)

    np.testing.assert_allclose(a, b, atol=1e-12)


@pytest.mark.unit
@fixture_ok
@given(st.floats(-2.0, 2.0), st.floats(-2.0, 2.0), st.sampled_from([1, 2, 3]))
def test_newpro_modes_are_hermitian(x, y, k):
    """f_-k is the complex conjugate of f_k."""
    fourier = newpro_fourier()
    X, Y = np.array([x]), np.array([y])

    np.testing.assert_allclose(fourier.f(-k, X, Y), np.conj(fourier.f(k, X, Y)), atol=1e-15)


@pytest.mark.unit
@fixture_ok
@given(
    st.integers(min_value=1, max_value=256),
    st.floats(min_value=1.0, max_value=1e4),
    st.integers(min_value=1, max_value=256),
    st.floats(min_value=1.0, max_value=100.0),
)
def test_feasibility_is_monotone(N, Omega, fewer, scale):
    """A feasible grid stays feasible with fewer macro steps or a higher frequency."""
    if not is_feasible(N, Omega, 0.5):
        return
    assert is_feasible(max(1, N - fewer), Omega, 0.5)
    assert is_feasible(N, Omega * scale, 0.5)


@pytest.mark.unit
@fixture_ok
@given(st.floats(min_value=-1.0, max_value=5.0))
def test_averaged_hill_is_bounded(X1):
    """The average of alpha / (1 + s^2) lies in (0, alpha]."""
    params = ToggleParams()

    value = averaged_hill(params, X1)

    assert 0.0 < value <= params.alpha + 1e-12


@pytest.mark.unit
@fixture_ok
@given(st.integers(min_value=1, max_value=4096), st.integers(min_value=1, max_value=128))
def test_rational_multiples_of_pi(k, d):
    assert parse_omega(f"{k}pi/{d}") == pytest.approx(k * math.pi / d, rel=1e-14)

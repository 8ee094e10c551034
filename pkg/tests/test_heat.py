"""Controller (heat) eigendata: branch roots, expansions, traces."""

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.optimize import brentq

from heatwave import (
    boundary_to_trace_transfer,
    build_heat_spectrum,
    eigenfunction_values,
    eigenvalue_expansion,
    solve_robin_eigenvalue,
)


def test_neumann_limit_exact():
    spec = build_heat_spectrum(0.0, 5)
    j = np.arange(1, 6)
    assert np.array_equal(spec.eigenvalues, ((j - 1) * np.pi) ** 2)
    assert spec.eigenvalues[0] == 0.0
    assert spec.normalizations[0] == 1.0
    assert np.all(spec.normalizations[1:] == np.sqrt(2.0))
    assert np.all(spec.residuals == 0.0)


def test_first_robin_root_known_value():
    # root of x tan x = 1 on (0, pi/2)
    lam = solve_robin_eigenvalue(1, 1.0)
    assert abs(lam - 0.740173884394967) < 1e-12


@pytest.mark.parametrize("j,alpha", [(1, 0.3), (2, 1.0), (5, 0.05), (9, 2.0)])
def test_roots_match_independent_bracketing(j, alpha):
    lo = (j - 1) * np.pi + 1e-12
    hi = (j - 0.5) * np.pi - 1e-12
    ref = brentq(lambda x: alpha * np.cos(x) - x * np.sin(x), lo, hi,
                 xtol=1e-14, rtol=1e-15)
    assert abs(np.sqrt(solve_robin_eigenvalue(j, alpha)) - ref) < 1e-11


def test_interlacing_and_stored_residuals():
    for alpha in (0.01, 0.1, 1.0):
        spec = build_heat_spectrum(alpha, 100)
        j = np.arange(1, 101)
        x = spec.sqrt_eigenvalues
        assert np.all(x > (j - 1) * np.pi)
        assert np.all(x < (j - 0.5) * np.pi)
        assert np.all(np.diff(spec.eigenvalues) > 0)
        assert spec.residuals.max() <= 1e-13


def test_rejects_bad_arguments():
    with pytest.raises(ValueError):
        solve_robin_eigenvalue(0, 0.5)
    with pytest.raises(ValueError):
        solve_robin_eigenvalue(2, -0.1)
    with pytest.raises(ValueError):
        build_heat_spectrum(0.5, 0)
    with pytest.raises(ValueError):
        eigenvalue_expansion(1, 0.0)


def test_expansion_formula_values():
    a = 1e-4
    r = np.sqrt(a)
    # third term of the first branch is 2 a^{5/2}/45 = 4.444e-12 here;
    # the subtraction leaves ~eps sqrt(a) of cancellation noise
    third = eigenvalue_expansion(1, a) - (r - r**3 / 6.0)
    assert abs(third - 2.0 * a**2.5 / 45.0) < 1e-17
    assert abs(third - 4.444444444444444e-12) < 1e-17
    x0 = 2.0 * np.pi
    assert eigenvalue_expansion(3, 0.1) == x0 + 0.1 / x0 - 0.01 / x0**3


def test_expansion_tracks_roots():
    for alpha in (1e-2, 1e-3):
        for j in (1, 2, 6):
            err = abs(eigenvalue_expansion(j, alpha)
                      - np.sqrt(solve_robin_eigenvalue(j, alpha)))
            assert err < 40.0 * alpha**2.5 if j == 1 else err < alpha**3


def test_normalization_against_quadrature(heat_half):
    for j in (1, 4, 11):
        x = heat_half.sqrt_eigenvalues[j - 1]
        c = heat_half.normalizations[j - 1]
        val, _ = quad(lambda t: (c * np.cos(x * t)) ** 2, 0.0, 1.0,
                      limit=200)
        assert abs(val - 1.0) < 1e-12
        assert heat_half.trace0[j - 1] == c
        assert abs(heat_half.trace1[j - 1] - c * np.cos(x)) < 1e-15


def test_traces_bounded_uniformly():
    spec = build_heat_spectrum(1.0, 200)
    assert np.max(np.abs(spec.trace0)) <= 2.0
    assert np.max(np.abs(spec.trace1)) <= 2.0


def test_eigenfunction_derivative_grid(heat_half):
    x = np.linspace(0.0, 1.0, 7)
    vals = eigenfunction_values(heat_half, x)
    der = eigenfunction_values(heat_half, x, derivative=True)
    mu = heat_half.sqrt_eigenvalues[:, None]
    c = heat_half.normalizations[:, None]
    assert np.allclose(vals, c * np.cos(mu * x[None, :]), atol=1e-15)
    assert np.allclose(der, -c * mu * np.sin(mu * x[None, :]), atol=1e-13)


def test_transfer_function_stable_form():
    # overflow-safe form agrees with the textbook one at moderate s
    for alpha in (0.05, 0.8):
        for s in (1.0 + 0j, 10.0 + 0j, 100.0 + 0j, 3.0 - 7.0j):
            r = np.sqrt(s)
            naive = 1.0 / (r * np.sinh(r) + alpha * np.cosh(r))
            val = boundary_to_trace_transfer(alpha, s)
            assert abs(val - naive) < 1e-14 * abs(naive)
    # and stays finite far beyond cosh overflow
    assert np.isfinite(abs(boundary_to_trace_transfer(0.5, 1e8 + 0j)))


def test_transfer_function_residues_are_trace_products():
    # residue at the pole s = -lambda_j equals trace0_j * trace1_j
    alpha = 0.5
    spec = build_heat_spectrum(alpha, 3)
    for j in (1, 2, 3):
        lam = spec.eigenvalues[j - 1]
        h = 1e-5 * max(lam, 1.0)
        left = -h * boundary_to_trace_transfer(alpha, -lam - h)
        right = h * boundary_to_trace_transfer(alpha, -lam + h)
        residue = 0.5 * (left + right)
        target = spec.trace0[j - 1] * spec.trace1[j - 1]
        assert abs(residue - target) < 1e-7 * abs(target)

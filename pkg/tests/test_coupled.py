"""Coupled eigenfamilies at alpha = 0: closeness, biorthogonality, boundaries."""

import numpy as np
import pytest
from scipy.integrate import quad

from heatwave import (
    adjoint_hyperbolic_values,
    biorthogonality_matrix,
    boundary_residuals,
    build_coupled_basis,
    hyperbolic_biorthogonal,
    hyperbolic_eigenvector_values,
    parabolic_branch,
    quadratic_closeness,
    x_pairing,
)
from heatwave.quad import oscillatory_rule


@pytest.fixture(scope="module")
def basis():
    return build_coupled_basis(8, 8)


def test_pairing_matrix_is_identity(basis):
    G = biorthogonality_matrix(basis)
    assert G.shape == (24, 24)
    assert np.max(np.abs(G - np.eye(24))) < 1e-8


def test_hyperbolic_normalization_modulus():
    for k in (0, 2, -3, 7):
        _, obs, c = hyperbolic_biorthogonal(k)
        assert abs(abs(c) - 1.0 / np.sqrt(2.0)) < 1e-12
        assert np.isfinite(abs(obs))


def test_boundary_residuals_small(basis):
    for j in (1, 2, 5, 8):
        assert np.max(boundary_residuals("parabolic", j, basis)) < 1e-9
    for k in (-8, -1, 0, 3, 7):
        assert np.max(boundary_residuals("hyperbolic", k, basis)) < 1e-9


def test_closeness_terms_match_asymptotics():
    # f-branch term ~ e^{-2 lambda}/(2 lambda), g-branch term ~ 1/(2 lambda)
    for j in (4, 5, 6):
        lam = ((j - 1) * np.pi) ** 2
        _, _, (norm_f, norm_g) = parabolic_branch(j)
        ref_f = np.exp(-2.0 * lam) / (2.0 * lam)
        assert abs(norm_f - ref_f) <= 0.05 * ref_f
    for j in (4, 8, 12, 20):
        lam = ((j - 1) * np.pi) ** 2
        _, _, (_, norm_g) = parabolic_branch(j)
        ref_g = 1.0 / (2.0 * lam)
        assert abs(norm_g - ref_g) <= 0.05 * ref_g


def test_closeness_partial_sums_converge():
    s10 = quadratic_closeness(10)
    s20 = quadratic_closeness(20)
    s40 = quadratic_closeness(40)
    assert abs(s40 - s20) < abs(s20 - s10)
    # terms fall like 1/(2 lambda_j); integral bound on the slab tail
    slab = (1.0 / 19.0 - 1.0 / 39.0) / (2.0 * np.pi**2)
    assert abs(s40 - s20) < slab


def test_parabolic_branch_no_overflow_far_out():
    _, _, (norm_f, norm_g) = parabolic_branch(200)
    assert np.isfinite(norm_f) and norm_f >= 0.0
    assert np.isfinite(norm_g) and norm_g > 0.0


def test_branch_norms_against_quadrature():
    # j = 2 keeps the f-branch (~1.4e-10) large enough for quad to see
    f, g, (norm_f, norm_g) = parabolic_branch(2)
    vf = quad(lambda x: abs(f(x)) ** 2, 0.0, 1.0, epsabs=0.0,
              epsrel=1e-12, limit=200)[0]
    vg = quad(lambda x: abs(g(x)) ** 2, 0.0, 1.0, epsabs=0.0,
              epsrel=1e-12, limit=200)[0]
    assert abs(vf - norm_f) < 1e-9 * norm_f
    assert abs(vg - norm_g) < 1e-9 * norm_g


def test_cross_pairings_vanish():
    mu = np.pi * (5 + 0.5)
    nodes, weights = oscillatory_rule(2.0 * mu)
    primal = hyperbolic_eigenvector_values(2, nodes)
    adjoint = adjoint_hyperbolic_values(5, nodes)
    assert abs(x_pairing(primal, adjoint, weights)) < 1e-10


def test_pairing_entry_against_quadrature():
    k = 3
    mu = np.pi * (k + 0.5)

    # scipy oracle for the raw (unnormalized) diagonal pairing
    def component(name, x):
        return hyperbolic_eigenvector_values(k, np.atleast_1d(x))[name][0]

    def adj(name, x):
        return adjoint_hyperbolic_values(k, np.atleast_1d(x))[name][0]

    def integrand(x, part):
        total = (
            component("z", x) * np.conj(adj("phi", x))
            + component("wx", x) * np.conj(adj("psix", x))
            + component("wt", x) * np.conj(adj("psit", x))
        )
        return total.real if part == "re" else total.imag

    re = quad(lambda x: integrand(x, "re"), 0.0, 1.0, limit=400)[0]
    im = quad(lambda x: integrand(x, "im"), 0.0, 1.0, limit=400)[0]
    nodes, weights = oscillatory_rule(2.0 * mu)
    direct = x_pairing(
        hyperbolic_eigenvector_values(k, nodes),
        adjoint_hyperbolic_values(k, nodes),
        weights,
    )
    assert abs((re + 1j * im) - direct) < 1e-10

"""Wave (plant) eigenstructure, energy pairing, Riemann coordinates."""

import numpy as np
import pytest
from scipy.integrate import quad

from heatwave import (
    build_wave_spectrum,
    eval_wave_eigenvector,
    free_wave_energy,
    riemann_transform,
    wave_eigendata,
    wave_eigenvector_grids,
    wave_inner,
)
from heatwave.quad import oscillatory_rule


def test_mode_data():
    mu, fstar = wave_eigendata(0)
    assert mu == np.pi / 2
    assert fstar == -1j * np.sqrt(2.0)
    assert wave_eigendata(-1)[0] == -np.pi / 2


def test_spectrum_window(wave16):
    k = wave16.k_values
    assert k[0] == -16 and k[-1] == 15
    assert np.array_equal(wave16.mu, np.pi * (k + 0.5))
    assert np.all(np.abs(np.diff(wave16.mu) - np.pi) < 1e-13)
    assert np.all(wave16.fstar == -1j * np.sqrt(2.0))
    assert np.allclose(wave16.amplitude, np.sqrt(2.0) / wave16.mu)


def test_eigenvector_endpoint_values():
    w1, wt1 = eval_wave_eigenvector(0, 1.0)
    assert abs(w1) < 1e-15 and abs(wt1) < 1e-15
    w0, wt0 = eval_wave_eigenvector(0, 0.0)
    assert abs(w0 - 2.0 * np.sqrt(2.0) / np.pi) < 1e-15
    assert abs(wt0 - 1j * np.sqrt(2.0)) < 1e-15


def test_eigenvector_unit_norm_by_quadrature():
    for k in (0, 3, -5):
        mu = np.pi * (k + 0.5)
        sq = quad(lambda x: 2.0 * np.sin(mu * x) ** 2, 0.0, 1.0, limit=200)[0]
        st = quad(lambda x: 2.0 * np.cos(mu * x) ** 2, 0.0, 1.0, limit=200)[0]
        # energy pairing carries 1/2, so the plain integrals sum to 2
        assert abs(0.5 * (sq + st) - 1.0) < 1e-10


def test_family_orthonormal(wave16):
    nodes, weights = oscillatory_rule(2.0 * np.abs(wave16.mu).max())
    w, wt, wx = wave_eigenvector_grids(wave16, nodes)
    gram = np.empty((32, 32), dtype=complex)
    for a in range(32):
        for b in range(32):
            gram[a, b] = wave_inner((wx[a], wt[a]), (wx[b], wt[b]), weights)
    assert np.max(np.abs(gram - np.eye(32))) < 1e-12


def test_riemann_zero_state():
    x = np.linspace(0.0, 1.0, 50)
    f, g = riemann_transform(np.zeros(50), np.zeros(50), "forward", x=x)
    assert np.all(f == 0) and np.all(g == 0)


def test_riemann_roundtrip_and_energy_split(wave16):
    rng = np.random.default_rng(11)
    qc = (rng.standard_normal(32) + 1j * rng.standard_normal(32)) / (
        1.0 + wave16.mu**2)
    nodes, weights = oscillatory_rule(2.0 * np.abs(wave16.mu).max(), 512)
    w, wt, wx = wave_eigenvector_grids(wave16, nodes)
    # field reconstruction carries the expansion factor 1/2
    wf = 0.5 * (qc @ w)
    wtf = 0.5 * (qc @ wt)
    wxf = 0.5 * (qc @ wx)
    f, g = riemann_transform(wf, wtf, "forward", wx=wxf)
    plain = np.sum((np.abs(wxf) ** 2 + np.abs(wtf) ** 2) * weights)
    halves = np.sum((np.abs(f) ** 2 + np.abs(g) ** 2) * weights)
    assert abs(plain - 2.0 * halves) < 1e-12 * plain
    # the algebraic pair (w_x, w_t) round-trips exactly; w itself is
    # reintegrated by trapezoid and pinned at the grid end
    wr, wtr = riemann_transform(f, g, "inverse", x=nodes)
    assert np.max(np.abs((f - g) - wxf)) < 1e-13
    assert np.max(np.abs(wtr - wtf)) < 1e-13
    assert np.max(np.abs(wr - wf)) < 1e-3


def test_riemann_rejects_bad_input():
    with pytest.raises(ValueError):
        riemann_transform(np.zeros(4), np.zeros(5), "forward", x=np.arange(4))
    with pytest.raises(ValueError):
        riemann_transform(np.zeros(4), np.zeros(4), "sideways")


def test_free_energy_invariance(wave16):
    assert free_wave_energy(np.zeros(5)) == 0.0
    single = np.exp(1j * (np.pi / 2) * 7.3)
    assert abs(free_wave_energy([single]) - 1.0) < 1e-15
    rng = np.random.default_rng(5)
    q = rng.standard_normal(20) + 1j * rng.standard_normal(20)
    mu = np.pi * (np.arange(-10, 10) + 0.5)
    evolved = q * np.exp(1j * mu * 4.0)  # one full period
    assert np.max(np.abs(evolved - q)) < 1e-11
    assert abs(free_wave_energy(evolved) - free_wave_energy(q)) < 1e-12

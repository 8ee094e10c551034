"""Eigenstructure of the plant (wave) subsystem.

The wave equation w_tt = w_xx on (0, 1) with w_x(0) driven by the heat
trace and w(1) = 0 is written first order as a skew-adjoint operator E
on H^1_{(1)} x L^2.  Its eigenvalues are i mu_k with mu_k = pi(k + 1/2),
k in Z, and the closed-form eigenvectors are

    f_k = ( (sqrt(2)/mu_k) cos(mu_k x),  i sqrt(2) cos(mu_k x) ).

The observation functional is F*(psi, psit) = -psit(0), so
F* f_k = -i sqrt(2) for every k.
"""

import dataclasses

import numpy as np

from .quad import integrate

__all__ = [
    "WaveSpectrum",
    "wave_eigendata",
    "build_wave_spectrum",
    "eval_wave_eigenvector",
    "wave_eigenvector_grids",
    "wave_inner",
    "riemann_transform",
    "free_wave_energy",
]

FSTAR = -1j * np.sqrt(2.0)


@dataclasses.dataclass(frozen=True)
class WaveSpectrum:
    """Eigendata over the symmetric index window k in {-K, ..., K-1}.

    The window is closed under k -> -k-1 (mu_{-k-1} = -mu_k), so real
    initial data stay real-representable.  ``amplitude`` is the
    first-component amplitude sqrt(2)/mu_k of f_k.
    """

    K: int
    k_values: np.ndarray
    mu: np.ndarray
    fstar: np.ndarray
    amplitude: np.ndarray


def wave_eigendata(k):
    """Eigenvalue ordinate and observation value of the k-th wave mode."""
    mu = np.pi * (k + 0.5)
    return mu, FSTAR


def build_wave_spectrum(K):
    """Assemble the WaveSpectrum for the window k = -K .. K-1."""
    if K < 1 or int(K) != K:
        raise ValueError("half-width K must be a positive integer")
    k = np.arange(-K, K)
    mu = np.pi * (k + 0.5)
    return WaveSpectrum(
        K=int(K),
        k_values=k,
        mu=mu,
        fstar=np.full(2 * K, FSTAR),
        amplitude=np.sqrt(2.0) / mu,
    )


def eval_wave_eigenvector(k, x):
    """Closed-form eigenvector f_k evaluated at x in [0, 1].

    Returns the pair (first component, second component); the first
    component vanishes at x = 1 since cos(mu_k) = 0.
    """
    xa = np.asarray(x, dtype=float)
    mu = np.pi * (k + 0.5)
    c = np.cos(mu * xa)
    w = (np.sqrt(2.0) / mu) * c + 0j
    wt = 1j * np.sqrt(2.0) * c
    if xa.ndim == 0:
        return complex(w), complex(wt)
    return w, wt


def wave_eigenvector_grids(spectrum, x):
    """Values of all eigenvectors on a grid: (w, wt, wx), each (2K, nx)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    phase = np.outer(spectrum.mu, x)
    c = np.cos(phase)
    w = spectrum.amplitude[:, None] * c + 0j
    wt = 1j * np.sqrt(2.0) * c
    wx = -np.sqrt(2.0) * np.sin(phase) + 0j
    return w, wt, wx


def wave_inner(u, v, weights):
    """Energy pairing of two wave states sampled on a quadrature grid.

    Each state is a pair (w_x values, w_t values).  The plain integral
    int(w_x conj(v_x)) + int(w_t conj(v_t)) gives ||f_k||^2 = 2 for
    every closed-form eigenvector, so the pairing is normalized by 1/2
    to make the family orthonormal.  (The Riemann identity in
    ``riemann_transform`` is stated with plain integrals and therefore
    carries the factor 2.)
    """
    uwx, uwt = u
    vwx, vwt = v
    return 0.5 * (
        integrate(uwx * np.conj(vwx), weights)
        + integrate(uwt * np.conj(vwt), weights)
    )


def riemann_transform(a, b, direction, x=None, wx=None):
    """Riemann (transport) coordinates of a wave state.

    forward: (a, b) = (w, w_t) samples; returns f = (w_t + w_x)/2 and
    g = (w_t - w_x)/2.  w_x is taken from ``wx`` when supplied,
    otherwise by second-order finite differences on the grid ``x``.

    inverse: (a, b) = (f, g) samples; returns (w, w_t) with
    w_x = f - g, w_t = f + g and w integrated so that w(1) = 0.

    With plain integrals, int(|w_x|^2 + |w_t|^2) = 2 int(|f|^2 + |g|^2)
    pointwise by the parallelogram law.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError("mismatched sample lengths")
    if direction == "forward":
        if wx is None:
            if x is None:
                raise ValueError("forward transform needs x or wx")
            wx = np.gradient(a, x, edge_order=2)
        f = 0.5 * (b + wx)
        g = 0.5 * (b - wx)
        return f, g
    if direction == "inverse":
        if x is None:
            raise ValueError("inverse transform needs the grid x")
        wx_rec = a - b
        wt = a + b
        # cumulative trapezoid of w_x, pinned to w(1) = 0
        seg = 0.5 * np.diff(x) * (wx_rec[1:] + wx_rec[:-1])
        prim = np.concatenate(([0.0 + 0j], np.cumsum(seg)))
        w = prim - prim[-1]
        return w, wt
    raise ValueError(f"unknown direction {direction!r}")


def free_wave_energy(coeffs):
    """Sum of |p_k|^2; invariant under the free evolution e^{i mu_k t}."""
    c = np.asarray(coeffs)
    return float(np.sum(np.abs(c) ** 2))

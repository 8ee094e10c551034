"""Gauss-Legendre quadrature helpers shared by the spectral modules.

Everything in this package integrates smooth but possibly highly
oscillatory functions on [0, 1] (products of eigenfunctions with
frequencies up to sqrt(lambda_N) or mu_K).  Single Gauss-Legendre rules
stop being practical past a few hundred nodes (the node solve is
quadratic in memory), so the oscillatory rule is composite: fixed-order
panels, two per wavelength, which keeps cost linear in the frequency
and the error at rounding level.
"""

import functools

import numpy as np


@functools.lru_cache(maxsize=64)
def _leggauss(n):
    return np.polynomial.legendre.leggauss(int(n))


def gauss_legendre(n, a=0.0, b=1.0):
    """Return nodes and weights of the n-point Gauss-Legendre rule on [a, b]."""
    x, w = _leggauss(int(n))
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def oscillatory_rule(max_freq, min_nodes=64, panel_order=16):
    """Composite quadrature on [0, 1] resolving oscillations up to
    angular frequency ``max_freq``.

    Two ``panel_order``-node panels per wavelength: the per-panel phase
    advance is then at most pi, and a 16-node rule integrates e^{i pi u}
    over a panel to ~ 1e-20 relative, so products of eigenfunctions come
    out at rounding accuracy while the node count stays linear in the
    frequency.
    """
    panels = max(int(np.ceil(min_nodes / panel_order)),
                 int(np.ceil(abs(max_freq) / np.pi)), 1)
    x, w = _leggauss(int(panel_order))
    h = 1.0 / panels
    edges = h * np.arange(panels)
    nodes = (edges[:, None] + 0.5 * h * (x[None, :] + 1.0)).ravel()
    weights = np.tile(0.5 * h * w, panels)
    return nodes, weights


def integrate(f_values, weights):
    """Weighted sum along the last axis; complex safe."""
    return np.tensordot(f_values, weights, axes=([-1], [0]))

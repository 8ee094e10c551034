"""Eigendata of the controller (heat) subsystem.

The operator is the 1-d Laplacian on (0, 1) with a Neumann condition at
x = 0 and a Robin condition z_x(1) + alpha z(1) = 0 at x = 1.  For
alpha > 0 its eigenvalues -lambda_{j,alpha} are given by the roots of

    -sqrt(lambda) sin(sqrt(lambda)) + alpha cos(sqrt(lambda)) = 0,

one per branch sqrt(lambda) in ((j-1)pi, (j-1/2)pi), with eigenfunctions
c cos(sqrt(lambda) x).  The Neumann limit alpha = 0 has the exact
spectrum lambda_j = ((j-1)pi)^2 and is treated as a special case, never
by root-finding.
"""

import dataclasses

import numpy as np

from .quad import integrate, oscillatory_rule

__all__ = [
    "HeatSpectrum",
    "solve_robin_eigenvalue",
    "eigenvalue_expansion",
    "normalization",
    "build_heat_spectrum",
    "eigenfunction_values",
    "boundary_to_trace_transfer",
]


@dataclasses.dataclass(frozen=True)
class HeatSpectrum:
    """Immutable eigendata of the Robin/Neumann heat operator.

    trace0 and trace1 are the boundary values e_j(0) and e_j(1) of the
    normalized eigenfunctions; they carry the observation C = delta_0
    and the control adjoint B* = delta_1.  residuals holds the per-root
    defect |tan y - alpha/x| of the rescaled branch equation, evaluated
    at the solver's shifted root y = x - (j-1)pi before the shift is
    added back (re-deriving y from the rounded x loses ~x*eps).
    """

    alpha: float
    eigenvalues: np.ndarray
    sqrt_eigenvalues: np.ndarray
    normalizations: np.ndarray
    trace0: np.ndarray
    trace1: np.ndarray
    residuals: np.ndarray
    N: int


def _solve_branches(j, alpha):
    """Vectorized root solve on the branches sqrt(lambda) = (j-1)pi + y.

    In the shifted variable the equation reads
        h(y) = (y + s) sin y - alpha cos y = 0,   s = (j-1) pi,
    with exactly one root in (0, pi/2): h(0) = -alpha < 0 and
    h(pi/2) = s + pi/2 > 0.  Bisection guarantees the bracket, a short
    Newton run on g(y) = (y + s) tan y - alpha polishes quadratically.
    """
    j = np.asarray(j, dtype=float)
    s = (j - 1.0) * np.pi
    lo = np.zeros_like(s)
    hi = np.full_like(s, np.pi / 2)
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        h = (mid + s) * np.sin(mid) - alpha * np.cos(mid)
        neg = h < 0
        lo = np.where(neg, mid, lo)
        hi = np.where(neg, hi, mid)
    y = 0.5 * (lo + hi)
    for _ in range(4):
        t = np.tan(y)
        g = (y + s) * t - alpha
        dg = t + (y + s) * (1.0 + t * t)
        step = g / dg
        y = np.clip(y - step, 0.0, np.pi / 2)
    return s, y


def solve_robin_eigenvalue(j, alpha):
    """Eigenvalue lambda_{j,alpha} of the pre-stabilized heat operator.

    Returns ((j-1)pi)^2 exactly for alpha = 0, otherwise the unique root
    of -sqrt(lambda) sin sqrt(lambda) + alpha cos sqrt(lambda) = 0 with
    sqrt(lambda) on the j-th branch.
    """
    if j < 1 or int(j) != j:
        raise ValueError("mode index j must be a positive integer")
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    if alpha == 0:
        return ((j - 1.0) * np.pi) ** 2
    s, y = _solve_branches(np.array([j]), alpha)
    x = (s + y)[0]
    return x * x


def eigenvalue_expansion(j, alpha):
    """Small-alpha expansion of sqrt(lambda_{j,alpha}).

    Pure formula evaluation, no root-finding: the j = 1 branch is
    sqrt(alpha) - alpha^(3/2)/6 + 2 alpha^(5/2)/45, the j >= 2 branches
    are sqrt(lambda_{j,0}) + alpha/sqrt(lambda_{j,0})
    - alpha^2/lambda_{j,0}^(3/2).
    """
    if alpha <= 0:
        raise ValueError("the expansion is for alpha > 0")
    if j < 1 or int(j) != j:
        raise ValueError("mode index j must be a positive integer")
    if j == 1:
        r = np.sqrt(alpha)
        return r - r**3 / 6.0 + 2.0 * r**5 / 45.0
    x0 = (j - 1.0) * np.pi
    return x0 + alpha / x0 - alpha**2 / x0**3


def normalization(j, alpha, lam, verify_tol=1e-12):
    """Normalization constant and boundary traces of the eigenfunction.

    For alpha > 0, c^2 = 2 / (1 + sin^2(sqrt(lambda))/alpha); the
    Neumann case uses the closed form (c = 1 for j = 1, sqrt(2)
    otherwise).  The unit L2 norm of c cos(sqrt(lambda) x) is verified
    by quadrature to ``verify_tol``.
    """
    if alpha == 0:
        c = 1.0 if j == 1 else np.sqrt(2.0)
        x = (j - 1.0) * np.pi
    else:
        x = np.sqrt(lam)
        c = np.sqrt(2.0 / (1.0 + np.sin(x) ** 2 / alpha))
    nodes, weights = oscillatory_rule(2.0 * x)  # cos^2 runs at 2x
    norm2 = integrate((c * np.cos(x * nodes)) ** 2, weights)
    if abs(norm2 - 1.0) > verify_tol:
        raise RuntimeError(f"eigenfunction norm check failed: {norm2!r}")
    return c, c, c * np.cos(x)


def build_heat_spectrum(alpha, N):
    """Assemble the full HeatSpectrum for modes j = 1..N.

    Eigenfunction norms are verified by a vectorized quadrature pass (at
    least 64 nodes per wavelength).  For series-length spectra the check
    covers the first 256 modes plus the top mode; checking all 10^5
    modes of a feedback-series build would need a 3e6-node product.
    """
    if N < 1 or int(N) != N:
        raise ValueError("truncation order N must be a positive integer")
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    j = np.arange(1, N + 1, dtype=float)
    if alpha == 0:
        x = (j - 1.0) * np.pi
        c = np.full(N, np.sqrt(2.0))
        c[0] = 1.0
        resid = np.zeros(N)
    else:
        s, y = _solve_branches(j, alpha)
        x = s + y
        resid = np.abs(np.tan(y) - alpha / x)
        c = np.sqrt(2.0 / (1.0 + np.sin(x) ** 2 / alpha))
    head = min(N, 256)
    nodes, weights = oscillatory_rule(2.0 * x[head - 1])
    norms2 = integrate(
        (c[:head, None] * np.cos(np.outer(x[:head], nodes))) ** 2, weights
    )
    worst = np.max(np.abs(norms2 - 1.0))
    if N > head:
        nodes, weights = oscillatory_rule(2.0 * x[-1])
        top = integrate((c[-1] * np.cos(x[-1] * nodes)) ** 2, weights)
        worst = max(worst, abs(top - 1.0))
    if worst > 1e-12:
        raise RuntimeError(f"eigenfunction norm check failed by {worst:.3e}")
    return HeatSpectrum(
        alpha=float(alpha),
        eigenvalues=x * x,
        sqrt_eigenvalues=x,
        normalizations=c,
        trace0=c.copy(),
        trace1=c * np.cos(x),
        residuals=resid,
        N=int(N),
    )


def eigenfunction_values(spectrum, x, derivative=False):
    """Values e_j(x) (or e_j'(x)) on a grid, shaped (N, len(x))."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    phase = np.outer(spectrum.sqrt_eigenvalues, x)
    if derivative:
        amp = -spectrum.normalizations * spectrum.sqrt_eigenvalues
        return amp[:, None] * np.sin(phase)
    return spectrum.normalizations[:, None] * np.cos(phase)


def boundary_to_trace_transfer(alpha, s):
    """Transfer function of the heat subsystem from the Neumann input at
    x = 1 to the temperature trace at x = 0.

    Solving z'' = s z, z'(0) = 0, z'(1) + alpha z(1) = u gives
    z(0) = u / (sqrt(s) sinh sqrt(s) + alpha cosh sqrt(s)).  Evaluated
    in the form 2 e^{-r} / ((r + alpha) - (r - alpha) e^{-2r}) with
    r = sqrt(s) (principal branch), which never overflows for
    Re r >= 0.  Poles sit exactly at s = -lambda_{j,alpha}; the partial
    fraction expansion is sum_j trace0_j trace1_j / (s + lambda_j).
    """
    r = np.sqrt(np.asarray(s, dtype=complex))
    return 2.0 * np.exp(-r) / ((r + alpha) - (r - alpha) * np.exp(-2.0 * r))

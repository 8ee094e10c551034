"""Eigenfamily of the coupled heat-wave operator and its biorthogonals.

The coupled generator acts on X = L^2 x H^1_{(1)} x L^2 (temperature,
wave displacement, wave velocity) with the cascade boundary coupling
w_x(0) = z(0).  Built at alpha = 0 its point spectrum is the disjoint
union {-lambda_j} u {i mu_k} and the eigenfamily splits into

  parabolic branch   Z_j^p = (e_j, w_j, -lambda_j w_j),
  hyperbolic branch  Z_k^h = (0, f_k),

where w_j solves the transport system driven by the heat trace e_j(0).
The adjoint (biorthogonal) family is Phi_j^p = (e_j, 0, 0) and
Phi_k^h = c_k (phi_k, psi_k, psit_k) with phi_k in closed form.  All
X pairings here are the plain integrals

    <(z,w,wt), (phi,psi,psit)> = int z conj(phi) + int w_x conj(psi_x)
                                 + int wt conj(psit).
"""

import dataclasses

import numpy as np

from .heat import build_heat_spectrum
from .quad import integrate, oscillatory_rule
from .wave import build_wave_spectrum

__all__ = [
    "CoupledBasis",
    "parabolic_branch",
    "quadratic_closeness",
    "hyperbolic_biorthogonal",
    "boundary_residuals",
    "build_coupled_basis",
    "parabolic_eigenvector_values",
    "hyperbolic_eigenvector_values",
    "adjoint_parabolic_values",
    "adjoint_hyperbolic_values",
    "x_pairing",
    "biorthogonality_matrix",
]


@dataclasses.dataclass(frozen=True)
class ParabolicTail:
    j: int
    lam: float
    norm_f: float  # int |f_j^p|^2, ~ e^{-2 lambda_j}/(2 lambda_j)
    norm_g: float  # int |g_j^p|^2, ~ 1/(2 lambda_j)


@dataclasses.dataclass(frozen=True)
class HyperbolicRecord:
    k: int
    mu: float
    c: complex  # biorthogonal normalization, <Z_k^h, Phi_k^h> = 1
    observation: complex  # B* Phi_k^h = c_k phi_k(1)


@dataclasses.dataclass(frozen=True)
class CoupledBasis:
    heat: object
    wave: object
    parabolic_tail: tuple
    hyperbolic_biorth: tuple
    closeness_partial_sums: np.ndarray


def parabolic_branch(j):
    """Riemann-coordinate tails of the j-th parabolic eigenvector.

    Closed forms at alpha = 0 (lambda = ((j-1)pi)^2, j >= 2):
        f_j^p(x) = e^{lambda x}/(1 + e^{2 lambda}),
        g_j^p(x) = -e^{2 lambda} e^{-lambda x}/(1 + e^{2 lambda}),
    evaluated in the e^{-lambda(...)} form so nothing overflows (the
    plain form blows up from j = 7 on).  Returns the two evaluators and
    the pair of exact L^2 norms

        int |f|^2 = (e^{2l}-1)/(2l (1+e^{2l})^2),
        int |g|^2 = (1-e^{-2l})/(2l (1+e^{-2l})^2).
    """
    if j < 2:
        raise ValueError("the closed forms need lambda_j > 0 (j >= 2); "
                         "the j = 1 branch is the degenerate linear profile")
    lam = ((j - 1.0) * np.pi) ** 2
    d = 1.0 + np.exp(-2.0 * lam)

    def f(x):
        return np.exp(lam * (np.asarray(x, dtype=float) - 2.0)) / d

    def g(x):
        return -np.exp(-lam * np.asarray(x, dtype=float)) / d

    e2 = np.exp(-2.0 * lam)
    norm_f = (e2 - e2 * e2) / (2.0 * lam * d * d)
    norm_g = (1.0 - e2) / (2.0 * lam * d * d)
    return f, g, (norm_f, norm_g)


def quadratic_closeness(J):
    """Partial sum sum_{j=2}^J (int |f_j^p|^2 + int |g_j^p|^2).

    The f-part is summable to rounding almost immediately; overall the
    terms decay like 1/(2 lambda_j), so the sum converges but only at
    the 1/j^2 rate of its tail bound sum_{j>J} 1/(2 lambda_j).
    """
    if J < 2:
        raise ValueError("need J >= 2")
    total = 0.0
    for j in range(2, J + 1):
        _, _, (nf, ng) = parabolic_branch(j)
        total += nf + ng
    return total


def parabolic_eigenvector_values(j, x):
    """Parabolic eigenvector Z_j^p sampled on a grid.

    Returns a dict with z, zx, w, wx, wt.  The wave part solves
    w_xx = lambda^2 w, w_x(0) = e_j(0), w(1) = 0 and wt = -lambda w;
    for j = 1 (lambda = 0) that degenerates to the linear profile
    w = x - 1.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if j == 1:
        one = np.ones_like(x)
        return {
            "z": one + 0j,
            "zx": np.zeros_like(x) + 0j,
            "w": (x - 1.0) + 0j,
            "wx": one + 0j,
            "wt": np.zeros_like(x) + 0j,
        }
    lam = ((j - 1.0) * np.pi) ** 2
    root = (j - 1.0) * np.pi
    e0 = np.sqrt(2.0)
    den = np.exp(-2.0 * lam) + 1.0
    ea = np.exp(lam * (x - 2.0))
    eb = np.exp(-lam * x)
    w = e0 * (ea - eb) / (lam * den)
    wx = e0 * (ea + eb) / den
    return {
        "z": np.sqrt(2.0) * np.cos(root * x) + 0j,
        "zx": -np.sqrt(2.0) * root * np.sin(root * x) + 0j,
        "w": w + 0j,
        "wx": wx + 0j,
        "wt": -lam * w + 0j,
    }


def hyperbolic_eigenvector_values(k, x):
    """Hyperbolic eigenvector Z_k^h = (0, f_k) sampled on a grid."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    mu = np.pi * (k + 0.5)
    c = np.cos(mu * x)
    return {
        "z": np.zeros_like(x) + 0j,
        "zx": np.zeros_like(x) + 0j,
        "w": (np.sqrt(2.0) / mu) * c + 0j,
        "wx": -np.sqrt(2.0) * np.sin(mu * x) + 0j,
        "wt": 1j * np.sqrt(2.0) * c,
    }


def adjoint_parabolic_values(j, x):
    """Biorthogonal Phi_j^p = (e_j, 0, 0) sampled on a grid."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    root = (j - 1.0) * np.pi
    amp = 1.0 if j == 1 else np.sqrt(2.0)
    zero = np.zeros_like(x) + 0j
    return {
        "phi": amp * np.cos(root * x) + 0j,
        "phix": -amp * root * np.sin(root * x) + 0j,
        "psi": zero,
        "psix": zero.copy(),
        "psit": zero.copy(),
    }


def _phi_closed_form(k, x):
    """phi_k and phi_k' with s = sqrt(-i mu_k), principal branch.

    phi_k(x) = (e^{s(x-2)} + e^{-sx}) / (s (e^{-2s} - 1)); exponents
    have nonpositive real part, so the evaluation is overflow-safe, and
    phi'(0) = 1, phi'(1) = 0 hold exactly.
    """
    mu = np.pi * (k + 0.5)
    s = np.sqrt(-1j * mu)
    ea = np.exp(s * (x - 2.0))
    eb = np.exp(-s * x)
    den = np.exp(-2.0 * s) - 1.0
    return (ea + eb) / (s * den), (ea - eb) / den, s


def adjoint_hyperbolic_values(k, x, c=1.0):
    """Biorthogonal Phi_k^h = c (phi_k, psi_k, psit_k) sampled on a grid.

    The wave components are psi_k = -i cos(mu_k x)/mu_k and
    psit_k = cos(mu_k x); with the closed-form phi_k this triple
    satisfies the adjoint eigenvalue equation at -i mu_k together with
    the adjoint boundary conditions.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    mu = np.pi * (k + 0.5)
    phi, phix, _ = _phi_closed_form(k, x)
    cosx = np.cos(mu * x)
    return {
        "phi": c * phi,
        "phix": c * phix,
        "psi": c * (-1j * cosx / mu),
        "psix": c * (1j * np.sin(mu * x)),
        "psit": c * (cosx + 0j),
    }


def x_pairing(primal, adjoint, weights):
    """Plain X pairing of a primal triple against an adjoint triple."""
    return (
        integrate(primal["z"] * np.conj(adjoint["phi"]), weights)
        + integrate(primal["wx"] * np.conj(adjoint["psix"]), weights)
        + integrate(primal["wt"] * np.conj(adjoint["psit"]), weights)
    )


def hyperbolic_biorthogonal(k, rule=None):
    """Closed-form phi_k, the observation value, and the normalization.

    c_k is fixed by enforcing <Z_k^h, Phi_k^h>_X = 1 through quadrature
    of the raw pairing (analytically i sqrt(2), so |c_k| = 1/sqrt(2)
    for every k).  The observation is B* Phi_k^h = c_k phi_k(1).
    """
    mu = np.pi * (k + 0.5)
    if rule is None:
        rule = oscillatory_rule(2.0 * abs(mu))
    nodes, weights = rule
    raw = x_pairing(
        hyperbolic_eigenvector_values(k, nodes),
        adjoint_hyperbolic_values(k, nodes),
        weights,
    )
    c = 1.0 / np.conj(raw)

    def phi(x):
        values, _, _ = _phi_closed_form(k, np.asarray(x, dtype=float))
        return values

    phi1 = _phi_closed_form(k, np.array([1.0]))[0][0]
    return phi, c * phi1, c


def boundary_residuals(branch, index, basis=None):
    """Absolute boundary-condition residuals of an eigenpair.

    Returns the primal residuals of Z (z_x(0), z_x(1) + alpha z(1),
    w_x(0) - z(0), w(1)) followed by the adjoint residuals of Phi
    (phi_x(0) - psit(0), phi_x(1) + alpha phi(1), psi(1), psit(1),
    psi_x(0)).  The basis is the alpha = 0 one unless given.
    """
    alpha = 0.0 if basis is None else basis.heat.alpha
    ends = np.array([0.0, 1.0])
    if branch == "parabolic":
        Z = parabolic_eigenvector_values(index, ends)
        P = adjoint_parabolic_values(index, ends)
    elif branch == "hyperbolic":
        Z = hyperbolic_eigenvector_values(index, ends)
        if basis is not None:
            rec = next(r for r in basis.hyperbolic_biorth if r.k == index)
            c = rec.c
        else:
            _, _, c = hyperbolic_biorthogonal(index)
        P = adjoint_hyperbolic_values(index, ends, c)
    else:
        raise ValueError(f"unknown branch {branch!r}")
    primal = [
        abs(Z["zx"][0]),
        abs(Z["zx"][1] + alpha * Z["z"][1]),
        abs(Z["wx"][0] - Z["z"][0]),
        abs(Z["w"][1]),
    ]
    adjoint = [
        abs(P["phix"][0] - P["psit"][0]),
        abs(P["phix"][1] + alpha * P["phi"][1]),
        abs(P["psi"][1]),
        abs(P["psit"][1]),
        abs(P["psix"][0]),
    ]
    return np.array(primal + adjoint)


def biorthogonality_matrix(basis, rule=None):
    """Pairing matrix <Z_a, Phi_b>_X over the computed family.

    Ordering: parabolic j = 1..J, then hyperbolic k = -K..K-1.  Equals
    the identity to quadrature accuracy.
    """
    J = basis.heat.N
    K = basis.wave.K
    if rule is None:
        top = max(basis.heat.sqrt_eigenvalues[-1], abs(basis.wave.mu[-1]))
        rule = oscillatory_rule(2.0 * top)
    nodes, weights = rule
    primal = [parabolic_eigenvector_values(j, nodes) for j in range(1, J + 1)]
    primal += [hyperbolic_eigenvector_values(k, nodes) for k in range(-K, K)]
    adj = [adjoint_parabolic_values(j, nodes) for j in range(1, J + 1)]
    adj += [
        adjoint_hyperbolic_values(rec.k, nodes, rec.c)
        for rec in basis.hyperbolic_biorth
    ]
    n = len(primal)
    M = np.empty((n, n), dtype=complex)
    for a in range(n):
        for b in range(n):
            M[a, b] = x_pairing(primal[a], adj[b], weights)
    return M


def build_coupled_basis(J, K, rule=None):
    """Assemble the alpha = 0 coupled eigenfamily up to (J, K)."""
    heat = build_heat_spectrum(0.0, J)
    wave = build_wave_spectrum(K)
    if rule is None:
        top = max(heat.sqrt_eigenvalues[-1], abs(wave.mu[-1]))
        rule = oscillatory_rule(2.0 * top)
    tails = []
    sums = []
    total = 0.0
    for j in range(2, J + 1):
        _, _, (nf, ng) = parabolic_branch(j)
        total += nf + ng
        tails.append(ParabolicTail(j=j, lam=heat.eigenvalues[j - 1],
                                   norm_f=nf, norm_g=ng))
        sums.append(total)
    hyp = []
    for k in range(-K, K):
        _, obs, c = hyperbolic_biorthogonal(k, rule)
        hyp.append(HyperbolicRecord(k=k, mu=np.pi * (k + 0.5),
                                    c=c, observation=obs))
    return CoupledBasis(
        heat=heat,
        wave=wave,
        parabolic_tail=tuple(tails),
        hyperbolic_biorth=tuple(hyp),
        closeness_partial_sums=np.array(sums),
    )

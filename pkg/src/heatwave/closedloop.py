"""Truncated generators, trajectory simulation, and loop diagnostics.

Two coordinate systems are used throughout:

  (z, p): heat coefficients plus the decoupled wave coefficients
          p = w + Pi z.  The design model is
              zdot_j = -lambda_j z_j + trace1_j u,
              pdot_k = i mu_k p_k + conj(b_k) u,   u = -sum_k b_k p_k,
          whose wave block alone is E_Pi = diag(i mu) - conj(b) b^T,
          dissipative by construction: Re<E_Pi p, p> = -|u|^2.

  (z, w): heat coefficients plus physical wave coefficients.  Wave
          coefficients are plain pairings against the eigenvectors f_k
          (the field is sum_k w_k f_k / 2), and in this frame the open
          loop is exactly the boundary cascade
              wdot_k = i mu_k w_k + i sqrt(2) z(0)
          for every k, because (i mu_k + lambda_j) pi_{kj}
          = i sqrt(2) trace0_j holds entry by entry.

Norms: int|z|^2 = sum|z_j|^2 and int|w_x|^2 + int|w_t|^2 =
(1/2) sum|w_k|^2, so E(t) = (1/2)(sum|z|^2 + (1/2) sum|w|^2) and
||Z||_X = sqrt(2 E).

Feedback phase: conj((Pi trace1)_k) = i b_k term by term, so the gain
wired through the heat boundary in (z, w) coordinates is i b, not b.
E_Pi is invariant under a global phase of b, hence the design model and
the boundary-wired cascade share the same wave-block dynamics; only the
phase seen by the heat input column differs.
"""

import dataclasses
import warnings

import numpy as np

from .quad import gauss_legendre
from .heat import build_heat_spectrum, eigenfunction_values

__all__ = [
    "ClosedLoopModel",
    "TrajectoryRecord",
    "build_e_pi",
    "assemble_generator",
    "build_closed_loop_model",
    "simulate",
    "simulate_forced",
    "decay_fit",
    "resolvent_scan",
    "offset_log_grid",
    "dissipation_check",
    "transform_state",
    "control_energy_identity",
    "select_alpha_star",
    "smooth_initial_data",
]


@dataclasses.dataclass(frozen=True)
class ClosedLoopModel:
    """Assembled truncated generator plus the metadata needed to read
    trajectories back (coordinate frame, control row, truncations)."""

    heat: object
    wave: object
    sylv: object
    matrix: np.ndarray
    mode: str
    coords: str
    wiring: str
    N: int
    K: int
    control_row: np.ndarray  # u = control_row @ state; zeros when open


@dataclasses.dataclass(frozen=True)
class TrajectoryRecord:
    times: np.ndarray
    z_coeffs: np.ndarray
    p_or_w_coeffs: np.ndarray
    control: np.ndarray
    energy: np.ndarray
    norms: np.ndarray
    coords: str
    mode: str
    eig_condition: float
    method: str


def build_e_pi(sylv):
    """Target wave-block generator E_Pi = diag(i mu) - conj(b) b^T."""
    return np.diag(1j * sylv.wave.mu) - np.outer(np.conj(sylv.b), sylv.b)


def _heat_arrays(heat):
    if heat is None:
        z = np.zeros(0)
        return z, z, z
    return heat.eigenvalues, heat.trace0, heat.trace1


def assemble_generator(heat, wave, sylv=None, mode="open", coords="zp",
                       wiring="model"):
    """Dense truncated generator in the requested frame.

    mode 'open' zeroes the feedback; in (z, w) coordinates it is the
    physical boundary cascade.  mode 'closed' with coords 'zp' is the
    design model above; with coords 'zw' and wiring 'model' it is the
    exact similarity transform T^{-1} A_zp T, T = [[I, 0], [Pi, I]];
    wiring 'boundary' instead wires u = -sum_k (i b_k) (w + Pi z)_k
    through the heat input column only, which is the physically
    realizable loop the dissipation experiment integrates.

    heat=None builds a wave-only model (closed gives E_Pi itself).
    """
    if mode not in ("open", "closed"):
        raise ValueError(f"unknown mode {mode!r}")
    if coords not in ("zp", "zw"):
        raise ValueError(f"unknown coords {coords!r}")
    if wiring not in ("model", "boundary"):
        raise ValueError(f"unknown wiring {wiring!r}")
    if mode == "closed" and sylv is None:
        raise ValueError("closed mode requires SylvesterData")
    if wiring == "boundary" and (coords != "zw" or mode != "closed"):
        raise ValueError("boundary wiring applies to the closed (z, w) loop")
    lam, tr0, tr1 = _heat_arrays(heat)
    N = lam.size
    mu = wave.mu
    n = N + mu.size
    if sylv is not None and (sylv.pi_matrix.shape != (mu.size, N)):
        raise ValueError("SylvesterData truncation does not match (N, K)")

    A = np.zeros((n, n), dtype=complex)
    A[:N, :N] = np.diag(-lam)
    A[N:, N:] = np.diag(1j * mu)
    if coords == "zw":
        # boundary cascade: every wave mode sees i sqrt(2) z(0)
        A[N:, :N] = 1j * np.sqrt(2.0) * np.tile(tr0, (mu.size, 1))
    if mode == "open":
        return A
    if coords == "zp":
        A[:N, N:] = -np.outer(tr1, sylv.b)
        A[N:, N:] -= np.outer(np.conj(sylv.b), sylv.b)
        return A
    if wiring == "boundary":
        gain = 1j * sylv.b
        row = np.concatenate([sylv.pi_matrix.T @ gain, gain])
        col = np.concatenate([tr1, np.zeros(mu.size)]).astype(complex)
        return A - np.outer(col, row)
    # exact similarity image of the (z, p) design model
    A_zp = assemble_generator(heat, wave, sylv, "closed", "zp")
    T = np.eye(n, dtype=complex)
    T[N:, :N] = sylv.pi_matrix
    Tinv = np.eye(n, dtype=complex)
    Tinv[N:, :N] = -sylv.pi_matrix
    return Tinv @ A_zp @ T


def build_closed_loop_model(heat, wave, sylv=None, mode="open", coords="zp",
                            wiring="model"):
    """Assemble the generator and package it with its read-back data."""
    A = assemble_generator(heat, wave, sylv, mode, coords, wiring)
    lam, tr0, tr1 = _heat_arrays(heat)
    N = lam.size
    n = A.shape[0]
    row = np.zeros(n, dtype=complex)
    if mode == "closed":
        gain = 1j * sylv.b if wiring == "boundary" else sylv.b
        if coords == "zp":
            row[N:] = -gain
        else:
            row[:N] = -(sylv.pi_matrix.T @ gain)
            row[N:] = -gain
    return ClosedLoopModel(
        heat=heat, wave=wave, sylv=sylv, matrix=A, mode=mode, coords=coords,
        wiring=wiring, N=N, K=wave.K, control_row=row,
    )


def _wave_part_w(model, z, pw):
    """Physical wave coefficients from a stored trajectory block."""
    if model.coords == "zw" or model.sylv is None or model.N == 0:
        return pw
    return pw - z @ model.sylv.pi_matrix.T


def _records(model, times, states, cond, method):
    N = model.N
    z = states[:, :N]
    pw = states[:, N:]
    control = states @ model.control_row
    q = _wave_part_w(model, z, pw)
    energy = 0.5 * (
        np.sum(np.abs(z) ** 2, axis=1) + 0.5 * np.sum(np.abs(q) ** 2, axis=1)
    )
    return TrajectoryRecord(
        times=times, z_coeffs=z, p_or_w_coeffs=pw, control=control,
        energy=energy, norms=np.sqrt(2.0 * energy), coords=model.coords,
        mode=model.mode, eig_condition=cond, method=method,
    )


def simulate(model, Z0, T, dt_out):
    """Propagate Z0 under the assembled generator, sampling every dt_out.

    Propagation is by dense eigendecomposition (exact per output time).
    If the eigenvector matrix is ill-conditioned (> 1e8) the run falls
    back to a Crank-Nicolson scheme whose step is halved until two
    refinements agree, and the record says so rather than silently
    losing accuracy.
    """
    if T <= 0 or dt_out <= 0:
        raise ValueError("need T > 0 and dt_out > 0")
    Z0 = np.asarray(Z0, dtype=complex)
    if Z0.shape != (model.matrix.shape[0],):
        raise ValueError("initial data does not match the truncation")
    n_out = int(round(T / dt_out))
    times = np.linspace(0.0, n_out * dt_out, n_out + 1)
    w, V = np.linalg.eig(model.matrix)
    cond = float(np.linalg.cond(V))
    if cond <= 1e8:
        c0 = np.linalg.solve(V, Z0)
        states = (np.exp(np.outer(times, w)) * c0) @ V.T
        return _records(model, times, states, cond, "eig")
    warnings.warn(
        f"eigenvector matrix condition {cond:.2e} > 1e8; "
        "falling back to step-doubling Crank-Nicolson",
        stacklevel=2,
    )
    states = _crank_nicolson(model.matrix, Z0, times)
    return _records(model, times, states, cond, "implicit")


def _crank_nicolson(A, Z0, times):
    """Implicit fallback; substeps double until two runs agree to 1e-8."""
    n = A.shape[0]
    eye = np.eye(n)
    dt_out = times[1] - times[0]
    prev = None
    for sub in (4, 8, 16, 32, 64, 128):
        h = dt_out / sub
        step = np.linalg.solve(eye - 0.5 * h * A, eye + 0.5 * h * A)
        states = np.empty((times.size, n), dtype=complex)
        states[0] = Z0
        x = Z0.copy()
        for i in range(1, times.size):
            for _ in range(sub):
                x = step @ x
            states[i] = x
        if prev is not None:
            scale = max(np.max(np.abs(states)), 1e-30)
            if np.max(np.abs(states - prev)) <= 1e-8 * scale:
                return states
        prev = states
    warnings.warn("Crank-Nicolson refinement did not converge to 1e-8",
                  stacklevel=2)
    return prev


def simulate_forced(model, Z0, u, T, n_steps=2000, input_column=None,
                    gl_order=12):
    """Integrate the model with an external control signal u(t).

    Per step the diagonalized variation-of-constants formula is exact in
    the generator and the Duhamel integral is evaluated by gl_order
    Gauss-Legendre nodes, so smooth controls (sums of exponentials from
    the moment solver) integrate to near machine accuracy.  The default
    input column is the physical one: the heat boundary column trace1 in
    (z, w) coordinates, completed by Pi trace1 in (z, p).
    """
    Z0 = np.asarray(Z0, dtype=complex)
    A = model.matrix
    if input_column is None:
        tr1 = _heat_arrays(model.heat)[2]
        if model.coords == "zw":
            input_column = np.concatenate([tr1, np.zeros(2 * model.K)])
        else:
            input_column = np.concatenate([tr1, model.sylv.pi_matrix @ tr1])
    input_column = np.asarray(input_column, dtype=complex)
    w, V = np.linalg.eig(A)
    cond = float(np.linalg.cond(V))
    Vinv = np.linalg.inv(V)
    beta = Vinv @ input_column
    h = T / n_steps
    sigma, omega = gauss_legendre(gl_order, 0.0, h)
    # e^{w (h - sigma_i)} beta, fixed per step
    prop = np.exp(np.outer(h - sigma, w)) * beta  # (gl, n)
    step_factor = np.exp(w * h)
    times = np.linspace(0.0, T, n_steps + 1)
    y = Vinv @ Z0
    ys = np.empty((n_steps + 1, w.size), dtype=complex)
    ys[0] = y
    for i in range(n_steps):
        uv = np.asarray(u(times[i] + sigma), dtype=complex)
        y = step_factor * y + (omega * uv) @ prop
        ys[i + 1] = y
    states = ys @ V.T
    rec = _records(model, times, states, cond, "forced")
    return dataclasses.replace(
        rec, control=np.asarray(u(times), dtype=complex))


def decay_fit(traj, window):
    """Least-squares slope of log||Z|| against log t on a time window."""
    t_lo, t_hi = window
    if not (t_hi > t_lo >= 1.0):
        raise ValueError("need t_hi > t_lo >= 1")
    mask = (traj.times >= t_lo) & (traj.times <= t_hi)
    norms = traj.norms[mask]
    if np.any(norms < 1e-12):
        warnings.warn("trajectory at rounding floor inside the fit window",
                      stacklevel=2)
    logt = np.log(traj.times[mask])
    logn = np.log(norms)
    design = np.column_stack([logt, np.ones_like(logt)])
    coef, _, _, _ = np.linalg.lstsq(design, logn, rcond=None)
    resid = np.sqrt(np.mean((design @ coef - logn) ** 2))
    return float(coef[0]), float(resid)


def offset_log_grid(lo=10.0, hi=1e3, n=25):
    """Log-spaced scan ordinates snapped to integer multiples of pi.

    The spectrum of the truncated E_Pi sits exponentially close to the
    ladder i pi(k + 1/2), so multiples of pi are the midpoints: every
    scan point keeps distance ~ pi/2 from the eigenvalue ordinates by
    construction.
    """
    s = np.geomspace(lo, hi, n)
    snapped = np.pi * np.maximum(np.round(s / np.pi), 1.0)
    return np.unique(snapped)


def resolvent_scan(e_pi, s_values):
    """Operator norms ||(i s - E_Pi)^{-1}|| over the scan ordinates.

    The norm is the reciprocal smallest singular value of the dense
    shifted matrix.  Near-singular shifts are flagged, not fatal.  Also
    returns the log-log slope over the top decade of |s|.
    """
    s_values = np.asarray(s_values, dtype=float)
    eye = np.eye(e_pi.shape[0])
    norms = np.empty(s_values.size)
    for i, s in enumerate(s_values):
        sv = np.linalg.svd(1j * s * eye - e_pi, compute_uv=False)
        smin = sv[-1]
        if smin <= 1e-14 * sv[0]:
            warnings.warn(f"resolvent nearly singular at s = {s:.6g}",
                          stacklevel=2)
            norms[i] = np.inf if smin == 0.0 else 1.0 / smin
        else:
            norms[i] = 1.0 / smin
    top = s_values >= s_values.max() / 10.0
    finite = top & np.isfinite(norms)
    design = np.column_stack([np.log(s_values[finite]),
                              np.ones(int(finite.sum()))])
    coef, _, _, _ = np.linalg.lstsq(design, np.log(norms[finite]), rcond=None)
    return norms, float(coef[0])


def transform_state(state, sylv, direction):
    """Change of coordinates T = [[I, 0], [Pi, I]] on coefficient pairs.

    state is a pair (z, x); to_zp maps x = w to p = w + Pi z, to_zw maps
    x = p back to w = p - Pi z.  Exact inverses of each other.
    """
    z, x = state
    z = np.asarray(z, dtype=complex)
    x = np.asarray(x, dtype=complex)
    if sylv.pi_matrix.shape != (x.size, z.size):
        raise ValueError("truncation mismatch between state and Pi")
    if direction == "to_zp":
        return z, x + sylv.pi_matrix @ z
    if direction == "to_zw":
        return z, x - sylv.pi_matrix @ z
    raise ValueError(f"unknown direction {direction!r}")


def dissipation_check(traj, model, n_quad=512):
    """Residual of the energy balance along a (z, w) trajectory.

    Checks d/dt E(t) against
        Re(conj(z(1)) (u - alpha z(1))) - int |z_x|^2
        - Re(w_t(0) conj(z(0)))
    with E'(t) from central differences and the z_x integral from an
    n_quad-point Gauss-Legendre grid.  Returns the max interior residual
    and a tolerance estimate C1 dt^2 (third-difference bound; the
    identity is exact for the truncated weak dynamics, so there is no
    truncation term).
    """
    if traj.coords != "zw":
        raise ValueError("dissipation check reads physical (z, w) data")
    t = traj.times
    dt = t[1] - t[0]
    heat = model.heat
    z = traj.z_coeffs
    q = traj.p_or_w_coeffs
    u = traj.control
    z1 = z @ heat.trace1.astype(complex)
    z0 = z @ heat.trace0.astype(complex)
    wt0 = (1j / np.sqrt(2.0)) * q.sum(axis=1)
    nodes, weights = gauss_legendre(n_quad)
    zx = z @ eigenfunction_values(heat, nodes, derivative=True)
    int_zx2 = (np.abs(zx) ** 2) @ weights
    rhs = (
        np.real(np.conj(z1) * (u - heat.alpha * z1))
        - int_zx2
        - np.real(wt0 * np.conj(z0))
    )
    dE = np.gradient(traj.energy, t)
    resid = np.abs(dE[1:-1] - rhs[1:-1])
    d3 = np.diff(traj.energy, 3) / dt**3
    tol = (dt**2 / 6.0) * float(np.max(np.abs(d3))) + 1e-12
    return float(np.max(resid)), tol


def control_energy_identity(sylv, p0, T, dt):
    """Both sides of int_0^T |u|^2 dt = (||p(0)||^2 - ||p(T)||^2) / 2
    along the E_Pi flow, with the integral by trapezoid at step dt.

    The control is evaluated modally in chunks, so fine grids (10^5+
    samples) fit in memory.  Returns (integral, half-energy-drop,
    relative mismatch).
    """
    e_pi = build_e_pi(sylv)
    w, V = np.linalg.eig(e_pi)
    c0 = np.linalg.solve(V, np.asarray(p0, dtype=complex))
    a = -(sylv.b @ V) * c0  # u(t) = sum_m a_m e^{w_m t}
    n_steps = int(round(T / dt))
    times = np.linspace(0.0, n_steps * dt, n_steps + 1)
    integral = 0.0
    chunk = 200_000
    for start in range(0, n_steps, chunk):
        stop = min(start + chunk, n_steps)
        tt = times[start:stop + 1]
        uu = np.exp(np.outer(tt, w)) @ a
        integral += float(np.trapezoid(np.abs(uu) ** 2, dx=dt))
    pT = V @ (c0 * np.exp(w * T))
    drop = 0.5 * (np.sum(np.abs(np.asarray(p0)) ** 2) - np.sum(np.abs(pT) ** 2))
    rel = abs(integral - drop) / max(abs(drop), 1e-300)
    return integral, float(drop), float(rel)


def smooth_initial_data(heat, wave, scale=1.0, sylv=None, coords="zp",
                        heat_power=1.0):
    """Generator-domain stand-in data: z_j ~ 1/(1 + lambda_j)^heat_power
    and decoupled wave coefficients p_k ~ 1/(1 + mu_k^2).

    Smoothness for the coupled loop lives in the decoupled frame: the
    oscillating amplitude of mode k along any trajectory is p_k = (w +
    Pi z)_k, so data built smooth in w alone still carries O(1/mu) beats
    through Pi z.  With coords='zw' (requires sylv) the smooth p is
    mapped back to physical coefficients w = p - Pi z.
    """
    z = (scale / (1.0 + heat.eigenvalues) ** heat_power
         if heat is not None else np.zeros(0))
    p = scale / (1.0 + wave.mu**2)
    if coords == "zw":
        if z.size and sylv is None:
            raise ValueError("coords 'zw' needs the Sylvester data")
        if z.size:
            p = p - sylv.pi_matrix @ z.astype(complex)
    elif coords != "zp":
        raise ValueError(f"unknown coords {coords!r}")
    return np.concatenate([z, p]).astype(complex)


def select_alpha_star(alphas=(0.25, 0.5, 0.75, 1.0), K_wave=128,
                      N_series=100_000):
    """Pick alpha* maximizing min_k |b_k mu_k| over the wave window.

    The grid starts at 0.25 so that the slowest heat pole lambda_1
    (~ alpha) stays clear of the decay-fit window; the metric itself is
    monotone decreasing in alpha at desk scale, so the selection lands
    on the smallest admissible grid point.
    """
    from .sylvester import pib_coefficient

    table = {}
    for alpha in alphas:
        heat_series = build_heat_spectrum(alpha, N_series)
        worst = np.inf
        for k in range(-K_wave, K_wave):
            bk, _ = pib_coefficient(k, heat_series)
            worst = min(worst, abs(bk) * abs(np.pi * (k + 0.5)))
        table[alpha] = worst
    best = max(table, key=table.get)
    return best, table

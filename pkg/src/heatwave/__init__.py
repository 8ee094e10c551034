"""Spectral toolkit for a 1-d heat-wave cascade: a boundary-controlled
heat equation whose interior trace drives a wave equation.

The package computes the Robin heat spectrum, the half-integer wave
spectrum, the coupled eigenfamily with its biorthogonal system, the
Sylvester data that decouples the cascade and yields the feedback
coefficients, closed-loop simulations with decay/resolvent/dissipation
diagnostics, and moment-method control synthesis.  The `heatwave`
console script batches all of it behind config files.
"""

__version__ = "0.1.0"

from .heat import (
    HeatSpectrum,
    boundary_to_trace_transfer,
    build_heat_spectrum,
    eigenfunction_values,
    eigenvalue_expansion,
    solve_robin_eigenvalue,
)
from .wave import (
    FSTAR,
    WaveSpectrum,
    build_wave_spectrum,
    eval_wave_eigenvector,
    free_wave_energy,
    riemann_transform,
    wave_eigendata,
    wave_eigenvector_grids,
    wave_inner,
)
from .coupled import (
    CoupledBasis,
    adjoint_hyperbolic_values,
    adjoint_parabolic_values,
    biorthogonality_matrix,
    boundary_residuals,
    build_coupled_basis,
    hyperbolic_biorthogonal,
    hyperbolic_eigenvector_values,
    parabolic_branch,
    parabolic_eigenvector_values,
    quadratic_closeness,
    x_pairing,
)
from .sylvester import (
    SylvesterData,
    alternating_sum_identities,
    build_sylvester_data,
    pi_action_bound,
    pi_matrix_element,
    pib_coefficient,
    residue_sum,
    sylvester_weak_residual,
)
from .closedloop import (
    ClosedLoopModel,
    TrajectoryRecord,
    assemble_generator,
    build_closed_loop_model,
    build_e_pi,
    control_energy_identity,
    decay_fit,
    dissipation_check,
    offset_log_grid,
    resolvent_scan,
    select_alpha_star,
    simulate,
    simulate_forced,
    smooth_initial_data,
    transform_state,
)
from .moments import (
    MomentProblem,
    SteeringReport,
    build_moment_problem,
    control_norm,
    default_v_weights,
    exponential_gram,
    hyperbolic_steering_cost,
    minimal_norm_control,
    mixed_control,
    v_norm,
    wave_observation,
)

__all__ = [name for name in dir() if not name.startswith("_")]

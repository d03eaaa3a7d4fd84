"""entropy-lab: a numerical laboratory for entropy methods.

Periodic scalar conservation laws with vanishing viscosity, empirical Young
measures with concentration diagnostics, relative-entropy functionals for
Euler systems with exponential-bound checks, and the rescaled renewal
equation with its conserved dual functional.
"""

__version__ = "0.1.0"

from .grids import PeriodicGrid, ScalarField, Trajectory, integrate, l1_distance
from .fluxes import (
    FluxSpec,
    KruzhkovPair,
    Mollifier,
    RecessionSlopes,
    attach_recession,
    burgers_flux,
    choose_epsilon_n,
    eval_kruzhkov,
    linear_flux,
    mollify_flux,
    recession_slopes,
)
from .claw import (
    TestFunctionBank,
    ViscousRun,
    contraction_series,
    entropy_residual,
    expansion_shock_trajectory,
    solve_reference,
    solve_viscous,
)
from .young import (
    EmpiricalYoungMeasure,
    MeasureSequenceInput,
    build_measure,
    contraction_check,
    dirac_diagnostic,
    fundamental_lemma_check,
    m2_density,
    pair_with,
    tensor_distance,
)
from .euler import (
    EulerState1D,
    GronwallReport,
    VelocityEnsemble,
    gronwall_check,
    lax_friedrichs_euler,
    pressure_potential,
    rel_entropy_compressible,
    rel_entropy_incompressible,
    simple_wave_state,
    weak_strong_experiment,
)
from .renewal import (
    AgeGrid,
    BirthRate,
    DecaySeries,
    RenewalModel,
    atom_initial,
    atom_mass_functional,
    compute_N,
    compute_phi,
    decay_experiment,
    exponential_birth_rate,
    indicator_birth_rate,
    perturbed_initial,
    solve_lambda0,
    steady_initial,
    step_renewal,
)

__all__ = [name for name in dir() if not name.startswith("_")]

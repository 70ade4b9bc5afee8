"""Structure-preserving PIC for 1D1V Vlasov-Poisson with Maxwell-Boltzmann electrons."""

from .diagnostics import (
    DiagnosticsRecord,
    energy_breakdown,
    field_mode_amplitude,
    neutrality_residual,
    particle_moments,
    phase_space_histogram,
)
from .dispersion import DispersionParams, plasma_Z, plasma_Z_prime, solve_growth_rate, two_stream_residual
from .dynamics import (
    HamiltonianContext,
    StepperConfig,
    StepReport,
    discrete_gradient_step,
    drift_exact,
    kick_exact,
    run_n_steps,
    splitting_step,
)
from .experiments import InitialCondition, canned_config, measure_rate, sample_initial
from .fem import FemContext, FemSpace, assemble_stiffness, fem_force, fem_hamiltonian, solve_pb_weak
from .field import (
    ElectronModel,
    FieldState,
    SolverConfig,
    StiffnessOperator,
    pb_residual,
    quasineutral_guess,
    solve_anvp,
    solve_pb,
)
from .mesh import BSplineShape, Grid1D, ParticleEnsemble, bspline_eval, deposit, gather_acceleration

__version__ = "0.1.0"

"""Standing waves of a laser beam in a nematic liquid crystal.

The package computes standing waves of the coupled beam/director
system by shooting plus Picard iteration, checks the analytic
identities the solutions must satisfy, traces the bifurcation branch
in the Lagrange multiplier, and integrates the semilinear dynamics to
probe conservation, orbital stability, and support propagation.
"""

from .diagnostics import DiagnosticsReport, compute_report
from .director import (
    MarchOutcome,
    ShootConfig,
    fourier_linear_director,
    march_director,
    newton_v_step,
    oracle_linear_director,
    oracle_newton_director,
    shoot_director,
)
from .errors import (
    BracketError,
    CflViolation,
    ConfigError,
    DomainTooSmall,
    LinearSolveFailure,
    NematiconError,
    NewtonDivergence,
    NonMonotoneScan,
    PicardStall,
    SingularSystem,
    ZeroProfile,
)
from .evolution import (
    ConservedLog,
    EvolutionState,
    SupportSpec,
    evolve_coupled,
    evolve_quasistatic,
    exterior_mass,
    nls_step,
    orbital_distance,
    stability_experiment,
    wave_step,
)
from .grid import (
    ComplexProfile,
    Grid,
    NormSet,
    Params,
    RealProfile,
    derivative,
    integrate_trapezoid,
    load_profile,
    norms,
    reflect_even,
    save_profile,
)
from .standing import (
    PicardConfig,
    ScanResult,
    StandingWave,
    march_u,
    picard_fixed_point,
    shoot_u,
    uniqueness_scan,
)
from .sweeps import SweepRow, export, h_sweep, mu_sweep, parallel_sweep

__version__ = "0.1.0"

"""Continuous-time quantum walks on 1-d waveguide lattices.

Simulates the tight-binding / coupled-mode dynamics i dpsi/dz = H psi on a
chain of evanescently coupled waveguides: ballistic spreading on the clean
lattice, Anderson localization under static disorder, diffusive crossover
under temporal (dephasing) noise, and self-interference at a reflecting
edge — each checked against closed-form references (Bessel free solution,
mirror-source boundary solution, classical random-walk baseline).
"""

from .config import ConfigError, ExperimentConfig, load_config, validate_config
from .ensembles import (
    DephasingSpec,
    DisorderSpec,
    EnsembleStats,
    SeedPolicy,
    evolve_dephasing,
    run_ensemble,
    sample_disordered_lattice,
)
from .errors import ChebyshevConvergenceError, NumericalFailure, WindowTooSmallError
from .kernels import backend
from .lattice import (
    Boundary,
    DiagConvention,
    GaussianBeam,
    Hamiltonian,
    InitialState,
    LatticeSpec,
    SingleSite,
    TwoSite,
    WaveFunction,
    apply_hamiltonian,
    build_hamiltonian,
    make_initial_state,
    uniform_lattice,
)
from .observables import (
    LocalizationFit,
    fit_localization_length,
    fit_loglog_exponent,
    intensity,
    participation_ratio,
    spread_variance,
    total_variation_distance,
)
from .oracles import (
    ProbabilityDist,
    bessel_free_state,
    bessel_window_for,
    classical_ctrw_distribution,
    cqw_variance_law,
    ctrw_variance_law,
    image_boundary_state,
)
from .propagators import (
    Snapshots,
    SpectralDecomposition,
    ZGrid,
    decompose,
    evolve_chebyshev,
    evolve_eigen,
    evolve_ode_oracle,
    spectral_bounds,
)

__version__ = "0.1.0"

__all__ = [
    "Boundary",
    "ChebyshevConvergenceError",
    "ConfigError",
    "DephasingSpec",
    "DiagConvention",
    "DisorderSpec",
    "EnsembleStats",
    "ExperimentConfig",
    "GaussianBeam",
    "Hamiltonian",
    "InitialState",
    "LatticeSpec",
    "LocalizationFit",
    "NumericalFailure",
    "ProbabilityDist",
    "SeedPolicy",
    "SingleSite",
    "Snapshots",
    "SpectralDecomposition",
    "TwoSite",
    "WaveFunction",
    "WindowTooSmallError",
    "ZGrid",
    "apply_hamiltonian",
    "backend",
    "bessel_free_state",
    "bessel_window_for",
    "build_hamiltonian",
    "classical_ctrw_distribution",
    "cqw_variance_law",
    "ctrw_variance_law",
    "decompose",
    "evolve_chebyshev",
    "evolve_dephasing",
    "evolve_eigen",
    "evolve_ode_oracle",
    "fit_localization_length",
    "fit_loglog_exponent",
    "intensity",
    "image_boundary_state",
    "load_config",
    "make_initial_state",
    "participation_ratio",
    "run_ensemble",
    "sample_disordered_lattice",
    "spectral_bounds",
    "spread_variance",
    "total_variation_distance",
    "uniform_lattice",
    "validate_config",
    "__version__",
]

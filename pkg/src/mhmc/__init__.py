"""Magnetic Hamiltonian Monte Carlo: samplers, benchmark targets, diagnostics."""

from .errors import (
    ConfigError,
    DimensionMismatch,
    MhmcError,
    NonFinite,
    NotAntisymmetric,
    NotSPD,
    NumericalFailure,
    SingularA,
    TooFewChains,
    ZeroVariance,
)
from .skewflow import (
    AntisymmetricMatrix,
    MagneticFlowCache,
    SkewBlockDecomposition,
    block_decompose,
    momentum_flow,
    validate_antisymmetric,
)
from .targets import (
    TargetDensity,
    banana_target,
    funnel_target,
    gaussian_target,
    mixture_target,
)
from .fhn import (
    FhnObservationSet,
    fhn_posterior,
    fhn_solve,
    synthesize_observations,
)
from .integrators import (
    IntegratorConfig,
    PhasePoint,
    check_magnetic_equivalence,
    check_symplectic,
    field_generator_3d,
    hamiltonian,
    leapfrog_step,
    magnetic_leapfrog_step,
    trajectory,
)
from .diagnostics import (
    ChainDiagnostics,
    autocorrelation,
    bias_and_mcse,
    effective_sample_size,
    mmd_squared,
    summarize_chain,
)
from .samplers import (
    ChainState,
    ChainsResult,
    SampleRecord,
    SamplerConfig,
    chain_rng,
    check_change_of_basis_equivalence,
    check_preconditioning_equivalence,
    hmc_step,
    mhmc_step,
    run_chain,
    run_chains,
    self_inverse_proposal,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"

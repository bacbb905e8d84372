"""fcslab: energy full counting statistics on confined system+reservoir
models, computed both through the two-time measurement protocol and through
the relative modular operator, with a numerical verification suite for the
operator-algebraic identities connecting them."""

from .dynamics import (
    FluxObservables,
    QuadratureError,
    Scenario,
    balance_check,
    delta_q_direct,
    delta_q_flux,
    dyson_cocycle,
    dyson_error_bound,
    exact_cocycle,
    flux_observables,
    heisenberg,
)
from .fcs import (
    FcsResult,
    HalfLineResult,
    StripReport,
    SweepResult,
    default_gamma_grid,
    derivative_moments,
    half_line_identity_check,
    limit_sweep,
    mean_identity_check,
    operator_balance_check,
    reservoir_char,
    reservoir_fcs,
    strip_bounds_check,
    system_char_limit,
    system_fcs,
)
from .linalg import (
    NonHermitianError,
    NotPositiveError,
    RankDeficientError,
    SpectralDecomposition,
    SpectrumDomainError,
    abs_op,
    commutator_gen,
    eig_hermitian,
    expm_hermitian,
    func_calc,
    norm_spectral_check,
    partial_trace,
    positive_sqrt,
    tensor,
)
from .modular import (
    Liouvilleans,
    MixingReport,
    ModularStructure,
    RelativeModular,
    cone_membership,
    equilibrium_vector,
    initial_vector,
    interaction_cocycle,
    liouvilleans,
    mixing_diagnostic,
    modular_pair,
    perturbed_gibbs_vector,
    relative_modular,
    reservoir_weight_vector,
    standard_gns,
)
from .scenarios import (
    ConfigError,
    RunConfig,
    build_chain_reservoir,
    chain_scenario,
    config_to_scenario,
    parse_config,
    preset_config,
    random_scenario,
    scenario_to_config,
)
from .states import (
    AtomicMeasure,
    MeasurementResult,
    VariationalReport,
    entropy,
    gibbs,
    gibbs_variational_check,
    kms_defect,
    measure,
    spectral_measure,
)

__version__ = "0.1.0"

"""sqcav: squeezed-reservoir cavity QED simulator.

Models a two-level atom in broadband squeezed vacuum, three- and
four-level Lambda atoms Raman-coupled to a squeezed-driven cavity, their
adiabatically reduced generators, and the two-probe cavity transmission
spectra, with cross-validation machinery for every reduction step.
"""

from .compare import atom_bloch_state, compare_tiers, initial_state_for
from .dynamics import (
    SteadyStateResult,
    commutator_correlator,
    steady_state,
    two_time_correlator,
)
from .errors import (
    ConfigError,
    DimensionError,
    FitError,
    IntegrationError,
    InvariantError,
    PositivityError,
    RegimeError,
    SqcavError,
    SteadyStateError,
    TruncationError,
)
from .integrate import DEFAULT_CONTROLS, StepControls, Trajectory, evolve, evolve_expectations
from .kernel import backend_name, compiled_available
from .liouvillian import DissipatorChannel, Liouvillian, apply_liouvillian, superoperator
from .models import (
    AtomDecay,
    AuxDrive,
    CavityParams,
    RamanDrive,
    SqueezingParams,
    SystemConfig,
    TIER_SPACES,
    build_T0,
    build_T3E,
    build_T3F,
    build_T3R,
    build_T4F,
    build_T4I,
    build_T4R,
    build_cavity,
    build_tier,
    reference_config,
)
from .operators import (
    FockTruncation,
    HilbertSpace,
    SIGMA_M,
    SIGMA_P,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    annihilation,
    check_truncation,
    expect,
    identity,
    kron,
    level_proj,
    number_op,
    partial_trace_cavity,
    project_atom_levels,
    pure_state_density,
    require_truncation_ok,
    trace_distance,
    validate_density_matrix,
)
from .regime import (
    BlochRates,
    DecayFit,
    DerivedParams,
    NogoScan,
    RegimeReport,
    alpha,
    balanced_config,
    bloch_rates,
    check_regime,
    derived_params,
    fit_decay,
    solve_aux_drive,
    three_level_nogo_scan,
)
from .spectra import (
    ProbeConfig,
    SpectrumResult,
    default_nu_grid,
    default_tau_grid,
    dip_fwhm,
    lower_sideband_response,
    probe_analytic,
    probe_numeric,
    regression_commutators,
    spectrum_scan,
)

__version__ = "0.1.0"

"""Impulsive tripartite transfer on commensurate lattices.

A library plus CLI for a three-particle protocol where a two-branch pointer
imprints itself on a middle carrier, the carrier touches a far particle, and
a local readout on the pointer reveals whether the far interaction happened.
Everything runs on exactly commensurate position grids so the shear steps are
index permutations, not interpolations.
"""
from .analytics import (
    GaussianScenario,
    SignalInputs,
    delta,
    expectation_with_interaction,
    expectation_without_interaction,
    fit_suppression_form,
    gamma3_closed_form,
    gamma3_oracle,
    invert_delta_to_gamma3,
    invert_gamma3_to_G,
)
from .config import (
    SCHEMA_VERSION,
    TOOL_VERSION,
    config_from_dict,
    config_to_dict,
    default_config,
    load_config,
    save_config,
)
from .effective import EffectivePair, effective_tripartite, make_chi_pm, make_phi_pm
from .errors import (
    BadCoefficients,
    ConfigError,
    ConsistencyAbort,
    DegenerateChannel,
    GridMismatch,
    GridOverflow,
    IITError,
    IncommensurateShear,
    NoConvergence,
    NonHermitian,
    OutOfRange,
    ValidationError,
)
from .grids import (
    Grid,
    SupportSpec,
    Wavefunction,
    bump_wf,
    density,
    density_moments,
    gaussian_wf,
    inner,
    make_grid,
    norm,
    normalize,
    superpose,
)
from .gridplan import PROFILES, GridPlan, plan_grids, resolve_profile
from .protocol import (
    CouplingSchedule,
    Diagnostic,
    GaussianSpec,
    NonlocalityResult,
    NonlocalityRow,
    Preparation,
    ProtocolConfig,
    ProtocolReport,
    RunArtifacts,
    SweepRow,
    apply_sweep_param,
    detect_decision,
    nonlocality_scan,
    run,
    run_full,
    sweep,
    total_variation,
    validate,
)
from .states import (
    TensorState,
    attach,
    dyad_operator,
    entangled_pair,
    expect_local,
    marginal_density,
    product,
    shear,
    state_norm,
)

__version__ = TOOL_VERSION

__all__ = [
    "BadCoefficients",
    "ConfigError",
    "ConsistencyAbort",
    "CouplingSchedule",
    "DegenerateChannel",
    "Diagnostic",
    "EffectivePair",
    "GaussianScenario",
    "GaussianSpec",
    "Grid",
    "GridMismatch",
    "GridOverflow",
    "GridPlan",
    "IITError",
    "IncommensurateShear",
    "NoConvergence",
    "NonHermitian",
    "NonlocalityResult",
    "NonlocalityRow",
    "OutOfRange",
    "PROFILES",
    "Preparation",
    "ProtocolConfig",
    "ProtocolReport",
    "RunArtifacts",
    "SCHEMA_VERSION",
    "SignalInputs",
    "SupportSpec",
    "SweepRow",
    "TOOL_VERSION",
    "TensorState",
    "ValidationError",
    "Wavefunction",
    "apply_sweep_param",
    "attach",
    "bump_wf",
    "config_from_dict",
    "config_to_dict",
    "default_config",
    "delta",
    "density",
    "density_moments",
    "detect_decision",
    "dyad_operator",
    "effective_tripartite",
    "entangled_pair",
    "expect_local",
    "expectation_with_interaction",
    "expectation_without_interaction",
    "fit_suppression_form",
    "gamma3_closed_form",
    "gamma3_oracle",
    "gaussian_wf",
    "inner",
    "invert_delta_to_gamma3",
    "invert_gamma3_to_G",
    "load_config",
    "make_chi_pm",
    "make_grid",
    "make_phi_pm",
    "marginal_density",
    "nonlocality_scan",
    "norm",
    "normalize",
    "plan_grids",
    "product",
    "resolve_profile",
    "run",
    "run_full",
    "save_config",
    "shear",
    "state_norm",
    "superpose",
    "sweep",
    "total_variation",
    "validate",
    "__version__",
]

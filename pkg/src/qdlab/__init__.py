"""Finite quantum-dot-cavity simulations with cross-checked engines."""

from .qstate import (
    BasisSpec,
    DensityMatrix,
    HealthError,
    HealthReport,
    Operator,
    expectation,
    pair_annihilator,
    photon_annihilator,
    tensor,
    transition_operator,
    validate_density,
)
from .integrate import (
    IntegrationError,
    IntegratorConfig,
    TimeSeries,
    eig_propagate,
    integrate,
)
from .sjcm import (
    EXACT,
    HARTREE_FOCK,
    QdInitSpec,
    SjcmHierarchyState,
    SjcmObservables,
    SjcmParams,
    SweepPoint,
    coeffs_from_oci,
    evolve_hierarchy,
    grid_co_triangle,
    grid_delta0_path,
    grid_fixed_o,
    hierarchy_init,
    hierarchy_rhs,
    observables,
    oci_from_coeffs,
    oracle_evolve,
    sweep_g2max,
)
from .lindblad import (
    CONFIGURATION,
    SINGLE_PARTICLE,
    CollapseSpec,
    DephasingParams,
    analytic_beta0,
    asymptotic_amplitude,
    build_dephasing_model,
    build_m,
    dissipator,
    evolve_dephasing,
    evolve_m,
    measure_amplitude,
    pumped_scenario,
)

__version__ = "0.1.0"

"""Radial balanced-metric diagnostics on the unit ball of the Kepler manifold.

Modules
-------
profiles     radial weight profiles f, derivatives, Monge-Ampere density W[f]
kernel       moments, weighted Bergman kernel diagonal F(t), balanced defect
asymptotics  L-expansions, moment asymptotics, Lerch transcendent machinery
poincare     radial Kahler-Einstein flow, cusp detection, completeness
acceptance   the named reproduction criteria (also behind ``verify`` in the CLI)
"""

from .errors import (
    CapabilityError,
    ConvergenceBudgetError,
    DivergenceError,
    DomainError,
    EstimationError,
    IntegrationError,
    NormalizationError,
    SignedDensityWarning,
    TruncationError,
)
from .series import InverseKSeries, LSeries, PowerLogSeries
from .profiles import (
    RadialProfile,
    density_in_L,
    eval_profile,
    germ_residual,
    monge_ampere_density,
    phi_v,
)
from .kernel import (
    Density,
    KernelEval,
    MomentSequence,
    balanced_defect,
    closed_form_F_phi_v,
    dimension_count,
    estimate_c,
    kernel_series,
    moment_phi_v_closed,
    moments,
    phi_v_density,
)
from .asymptotics import (
    LerchContext,
    boundary_expansion_F,
    germ_family_f,
    lerch_boundary_expansion,
    lerch_phi,
    moment_expansion,
    phi_v_L_coeffs,
    reciprocal_moments,
    stieltjes_gamma_tables,
)
from .poincare import (
    CubicRoot,
    CuspData,
    PoincareSolution,
    RadialLength,
    cusp_data,
    origin_exponent,
    psi,
    radial_length,
    rho,
    solve_poincare,
    taylor_at_one,
)

__version__ = "0.1.0"

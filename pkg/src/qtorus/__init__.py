"""Numerical geometry on noncommutative tori.

Fourier polynomials on a quantum torus, certified operator-norm intervals,
Riemannian metrics on the free module, the Levi-Civita connection, Lipschitz
seminorms and D-norms, and modular bridges between rescaled metrics.
"""

from .algebra import (
    ThetaMatrix,
    TorusElement,
    UnsupportedTheta,
    act,
    adjoint,
    commutator,
    derive,
    derive_along,
    fejer_smooth,
    generator,
    imag_part,
    is_self_adjoint,
    is_skew_adjoint,
    is_traceless,
    monomial,
    multiply,
    one,
    random_element,
    random_self_adjoint,
    real_part,
    trace,
    truncate,
)
from .connection import (
    ChristoffelTensor,
    Derivation,
    InverseApprox,
    InversionError,
    check_axioms,
    christoffel,
    covariant_derivative,
    der_norm,
    g_natural,
    invert_metric,
    levi_civita,
)
from .geometry import (
    MetricError,
    MetricMatrix,
    ModuleVector,
    conformal_metric,
    explicit_metric,
    identity_metric,
    inner_g,
    inner_st,
    make_metric,
    norm_g,
    random_module_vector,
    rotated_diagonal_metric,
)
from .gns import (
    GNSConfig,
    NormInterval,
    PositivityEvidence,
    TruncationBox,
    matrix_norm_interval,
    norm_interval,
    positivity_check,
    represent,
)
from .norms import NormChoice
from .propinquity import (
    BundleContext,
    ModularBridge,
    QuantityReport,
    State,
    bridge_quantities,
    bridge_seminorm,
    isometry_check,
    level_set_member,
    mk_lower,
    modular_mk_lower,
    scaling_bridge,
    state_eval,
)
from .seminorms import (
    SeminormEstimate,
    check_G_inequality,
    check_H_inequality,
    check_leibniz_L,
    check_lemma45,
    d_norm,
    lipschitz_L,
    lipschitz_L_def,
    op_seminorm,
)

__version__ = "0.1.0"

"""Polygon and house-shaped probabilistic models with Bell-functional tooling.

States and effects are plain vectors in R^3 paired by the Euclidean inner
product; models list their extremal rays explicitly. On top of that sit
entangled joint states of two systems, correlation tables with Bell
functionals (CHSH, chained, quadratic), first-level moment-matrix
certificates, and cone self-duality classification.
"""

from .bipartite import (
    InnerProductReport,
    JointState,
    adjoint_effect,
    in_max_tensor_product,
    is_extremal,
    is_inner_product_state,
    joint_probability,
    local_positivity_margin,
    normalization,
    product_state,
    pull_back_measurement,
    push_local_map,
)
from .core import (
    DEFAULT_TOL,
    Measurement,
    ModelSpec,
    ValidationFailure,
    ValidationReport,
    dichotomic_measurement,
    is_proper_effect,
    models_similar,
    probability,
    resolve_tol,
    simplex_model,
    validate_model,
)
from .correlations import (
    TSIRELSON_BOUND,
    CorrelationTable,
    chained,
    chained_local_bound,
    chsh,
    chsh_max_analytic,
    chsh_max_bruteforce,
    chsh_max_closed_form,
    chsh_max_over_settings,
    correlations_from_state,
    correlator,
    correlator_matrix,
    deterministic_table,
    distill_decompose,
    pr_box_table,
    ray_settings,
    uffink,
)
from .house import (
    house_demo_measurements,
    house_joint_state,
    house_model,
    house_uffink_demo,
)
from .polygon import (
    complement_effect,
    complement_index,
    max_entangled,
    polygon,
    polygon_radius,
)
from .q1 import (
    UFFINK_BOUND,
    ConditionReport,
    Q1Certificate,
    certificate_from_inner_product_state,
    certificate_via_pushforward,
    q1_necessary_conditions,
    verify_delta_decomposition,
)
from .selfdual import (
    certain_state_counts,
    find_cone_isomorphisms,
    induced_state_symmetries,
    is_strongly_self_dual,
    random_extremal_joint_state,
    rotation_about_axis,
    state_from_isomorphism,
)

__version__ = "0.1.0"

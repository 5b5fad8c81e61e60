"""Ergodic mean values of zeta and L-functions under affine Boolean transformations.

Three routes to the same number: Birkhoff averages along orbits, adaptive
quadrature against the invariant Cauchy density, and residue-based closed forms.
"""

from .characters import (
    CharacterTable,
    character,
    character_from_discriminant,
    enumerate_characters,
    kronecker_symbol,
    principal_character,
    unit_group_structure,
)
from .closed_form import (
    MeanValueCase,
    a_k_term,
    b_m_term,
    classify,
    closed_form_mean,
    special_point_value,
)
from .dynamics import (
    CauchyInvariant,
    FixedPoint,
    OrbitConfig,
    TransformParams,
    UniformInterval,
    affine_map,
    affine_map_inverse,
    apply,
    birkhoff_average,
    cauchy_cdf,
    ks_statistic,
    measure_interval,
    orbit,
    preimage_intervals,
)
from .quadrature import (
    QuadratureResult,
    kernel_weight,
    mean_value_quadrature,
    principal_value_quadrature,
    quadrature_mean,
    tail_bound,
)
from .special import (
    EvalAccuracy,
    dedekind_quadratic,
    derivative,
    dirichlet_l,
    hurwitz_zeta,
    riemann_zeta,
)
from .targets import (
    LaurentExpansion,
    TargetFunction,
    evaluate_target,
    growth_exponent,
    laurent_extract,
    parse_target,
    stieltjes_gamma,
)

__version__ = "0.1.0"

"""Finite-model algebraic extensions of commutative normed algebras.

The base algebra is modelled as complex functions on a finite character
space. On top of it the package builds Arens-Hoffman, Cole and logarithmic
extensions and analyses them: resultants, Newton sums, fibrations, averaging
operators, invertible approximation, logarithm descent and winding numbers.
"""

from .arens_hoffman import (
    AHElement,
    AHExtension,
    ah_invert,
    ah_mul,
    ah_norm,
    min_norm_param,
    universal_morphism,
)
from .averaging import AveragingOperator, T_fibre_avg, T_formula, check_contraction, enforce_by_rescaling
from .cole import ColePolyElement, ColeSpace, T_U, Tower, build_cole, eval_cole, extend_tower, sup_distance
from .core import (
    CharacterSpace,
    Element,
    exp_elem,
    invert,
    log_principal,
    quasi_inverse,
    quasi_product,
    spectrum,
    sup_norm,
)
from .density import approx_invertible_chain, approx_invertible_direct, nth_power_witness
from .fibration import (
    FibredSpace,
    build_fibration,
    fibre_separator,
    gelfand_ah,
    local_trivialization,
    loop_components,
    root_separation,
)
from .logext import (
    LogFibration,
    build_log_fibration,
    choose_norm_param_log,
    example_5323_region,
    has_continuous_log,
    log_descent,
    log_T_operator,
    log_tower,
    winding_number,
)
from .poly import MonicPoly, PolyOverA, monic_divmod, newton_sums, rescale_poly, resultant, resultant_as_poly_in_c

__version__ = "0.1.0"

__all__ = [
    "ah_invert",
    "ah_mul",
    "ah_norm",
    "AHElement",
    "AHExtension",
    "approx_invertible_chain",
    "approx_invertible_direct",
    "AveragingOperator",
    "build_cole",
    "build_fibration",
    "build_log_fibration",
    "CharacterSpace",
    "check_contraction",
    "choose_norm_param_log",
    "ColePolyElement",
    "ColeSpace",
    "Element",
    "enforce_by_rescaling",
    "eval_cole",
    "example_5323_region",
    "exp_elem",
    "extend_tower",
    "fibre_separator",
    "FibredSpace",
    "gelfand_ah",
    "has_continuous_log",
    "invert",
    "local_trivialization",
    "log_descent",
    "log_principal",
    "log_T_operator",
    "log_tower",
    "LogFibration",
    "loop_components",
    "min_norm_param",
    "monic_divmod",
    "MonicPoly",
    "newton_sums",
    "nth_power_witness",
    "PolyOverA",
    "quasi_inverse",
    "quasi_product",
    "rescale_poly",
    "resultant",
    "resultant_as_poly_in_c",
    "root_separation",
    "spectrum",
    "sup_distance",
    "sup_norm",
    "T_fibre_avg",
    "T_formula",
    "T_U",
    "Tower",
    "universal_morphism",
    "winding_number",
]

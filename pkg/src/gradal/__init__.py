"""Exact symbolic calculus for graded bundles and their constructions."""

__version__ = "0.1.0"

from .atlas import (
    GradedBundleModel,
    GradedChart,
    TransitionMap,
    check_affine_fibration,
    check_cocycle,
    is_vector_bundle,
    truncate_to_degree,
    validate_transition,
)
from .algebroid import AlgebroidStructure, check_lie_algebroid, check_weighted_algebroid
from .dsl import format_expression, parse, print_document
from .grading import (
    GradedSpace,
    check_graded_morphism,
    check_linearity,
    euler_operator,
    is_homogeneous,
    is_regular,
    weight_decompose,
    weight_vector_field,
)
from .linearise import compare_models, holonomic_embedding, linearise, total_linearise
from .modelio import dump_model, load_model, read_model, write_model
from .multigraded import bracket, check_compatibility, is_double_vector_bundle, is_grl_bundle
from .prolong import cotangent_weights, higher_tangent, tangent_lift
from .report import Report
from .symcore import Derivation, Expression, FunctionSymbol, SymbolDecl, const, coord, func
from .validation import validate_model

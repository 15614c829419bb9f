"""Exact computations on smooth complete toric varieties given by fans."""

from .birational import build_refinement, classify_subdivision, factorize
from .catalog import enumerate_smooth_fano, lattice_isomorphic
from .fan import (
    Fan,
    FanError,
    blow_down,
    blow_downs,
    divisor_fan,
    f_vector,
    fvector_checks,
    locate,
    star_subdivide,
    validate,
)
from .io import parse_fan, serialize_fan
from .mori import decompose_into_contractibles, is_contractible, is_extremal, is_projective
from .primitive import (
    is_fano,
    picard_number,
    primitive_collections,
    primitive_relation,
    primitive_relations,
    relation_class,
    rho_diff,
)
from .structure import basic_construction, classify_divisor_case, detect_s3_bundle, flip

__all__ = [
    "Fan",
    "FanError",
    "basic_construction",
    "blow_down",
    "blow_downs",
    "build_refinement",
    "classify_divisor_case",
    "classify_subdivision",
    "decompose_into_contractibles",
    "detect_s3_bundle",
    "divisor_fan",
    "enumerate_smooth_fano",
    "f_vector",
    "factorize",
    "flip",
    "fvector_checks",
    "is_contractible",
    "is_extremal",
    "is_fano",
    "is_projective",
    "lattice_isomorphic",
    "locate",
    "parse_fan",
    "picard_number",
    "primitive_collections",
    "primitive_relation",
    "primitive_relations",
    "relation_class",
    "rho_diff",
    "serialize_fan",
    "star_subdivide",
    "validate",
]

__version__ = "0.1.0"

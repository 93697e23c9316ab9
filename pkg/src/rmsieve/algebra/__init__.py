"""Finite-field arithmetic and Delsarte-Goethals matrix sets."""

from .dgcodes import BinSymMatrix, DgIndex, dg_matrix, quad_form_mod4, rank_f2
from .galois import FieldSpec, field_spec, validate_field_spec
from .gaussian import GaussianInt

__all__ = [
    "FieldSpec",
    "field_spec",
    "validate_field_spec",
    "BinSymMatrix",
    "DgIndex",
    "dg_matrix",
    "quad_form_mod4",
    "rank_f2",
    "GaussianInt",
]

"""Kähler calculus of differential forms on uniform grids in E_n.

Pointwise Clifford algebra of forms, finite-difference d, delta and the
Kähler derivative, Newtonian potentials by direct summation, and the
decomposition of a k-form into closed, co-closed and harmonic parts.
"""

from .algebra import (
    AlgebraError,
    Multivector,
    clifford_product,
    complement,
    eta,
    exterior_product,
    interior_product,
    reversion,
    right_interior_product,
    scalar_product,
    unit_n_form,
)
from .fields import (
    FormField,
    GridError,
    GridSpec,
    Region,
    exterior_derivative,
    interior_derivative,
    kahler_derivative,
    laplacian,
    partial_derivative,
    verify_product_rules,
)
from .green import energy_norm, green_identity_residual, scalar_product_one, scalar_product_zero
from .hodge import (
    DecayWarning,
    DecompositionResult,
    boundary_term,
    decompose_full_space,
    decompose_region,
    hyperharmonic_residual,
)
from .parser import FieldFileError, evaluate_spec, load_field, parse_field_spec
from .potential import KernelSpec, helmholtz_integral, reconstruct_from_laplacian

__version__ = "0.1.0"

__all__ = [
    "AlgebraError", "Multivector", "clifford_product", "complement", "eta", "exterior_product",
    "interior_product", "reversion", "right_interior_product", "scalar_product", "unit_n_form",
    "FormField", "GridError", "GridSpec", "Region", "exterior_derivative", "interior_derivative",
    "kahler_derivative", "laplacian", "partial_derivative", "verify_product_rules",
    "energy_norm", "green_identity_residual", "scalar_product_one", "scalar_product_zero",
    "DecayWarning", "DecompositionResult", "boundary_term", "decompose_full_space",
    "decompose_region", "hyperharmonic_residual",
    "FieldFileError", "evaluate_spec", "load_field", "parse_field_spec",
    "KernelSpec", "helmholtz_integral", "reconstruct_from_laplacian",
]

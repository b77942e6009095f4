"""Exact linear selections of set-valued maps on polyhedral cones.

All arithmetic is over the rationals (:class:`fractions.Fraction`); floats are
refused at the API boundary.
"""

from .apps import (
    Impossible,
    RightInverse,
    RightInverseProblem,
    extend_linear,
    l1_operator_norm,
    min_inverse_constant,
    right_inverse,
    right_inverse_through,
)
from .cone import Cone, base_of, coords, has_rdp, membership, order_interval, riesz_interpolate, suspend
from .errors import DomainError, InputError, LinselError
from .polytope import (
    Functional,
    ImplicitPolytope,
    Polytope,
    barycentric_coordinates,
    concave_envelope_eval,
    is_simplex,
    minkowski_sum,
    section,
    support,
)
from .selection import (
    FunctionalSet,
    NestingBasis,
    TomoCoords,
    affine_selection_through,
    barycentric_selection,
    linear_selection_through,
    nesting_selection,
    section_map,
    selection_exists_through,
    tomo_coords,
    tomo_reconstruct,
    tomographic_selection,
)
from .svmap import (
    BasisLinear,
    BooleanRegion,
    PointwiseMap,
    SampledSuperlinear,
    check_linear,
    check_superlinear,
    greatest_affine_submap,
    greatest_linear_submap,
)

__version__ = "0.1.0"

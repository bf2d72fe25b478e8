"""
shapesum - shape summation of the weight-2 Eisenstein series and the
Weierstrass p-function, with the residual function E(K, tau).
"""

from .eisenstein import TauPoint, g2_abs_series, g2_quasimodularity_defect, g2_ref, g2_reversed_order, g2_shape
from .errors import (
    ConfigurationError, DomainError, ResourceError, ShapeError, ShapesumError,
    TermEvaluationError, UnsupportedShapeError,
)
from .lattice_sum import SumConfig, SumResult, shape_partial_sum, shape_sum_limit, telescope_sum
from .residual import (
    QuadratureConfig, ResidualValue, residual_closed_form, residual_functional_defect,
    residual_integral, residual_lattice, residual_scaling_defect,
)
from .shapes import ShapeSpec, contains, diamond, disk, height, rectangle, support, transpose, validate
from .weierstrass import (
    reduce_to_fundamental, wp_abs_direct, wp_decomposition_defect, wp_iterated_defect, wp_ref, wp_shape,
)

__version__ = "1.0.0"

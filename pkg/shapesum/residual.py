"""
Residual - the residual function E(K, tau) = G2(K, tau) - G2(tau).

Three independent routes:
    lattice      shape summation minus the reference G2
    integral     4 * int_0^A h(x) / (tau^2 x^2 - h(x)^2) dx  (adaptive quadrature)
    closed form  rectangle, disk and diamond formulas

and two identity checks: the transpose functional equation and
invariance under dilation.
"""

import cmath
import logging
import math
from dataclasses import asdict, dataclass
from enum import Enum
from typing import Callable, Dict, List, Optional, Tuple

from scipy import integrate

from .eisenstein import DefectValue, TauLike, as_tau, g2_ref, g2_shape
from .errors import ConfigurationError, ResourceError, UnsupportedShapeError
from .lattice_sum import SumConfig
from .shapes import ShapeKind, ShapeSpec, breakpoints, height, rectangle, require_valid, scaled, support, transpose

logger = logging.getLogger(__name__)

MIN_QUAD_TOL = 1e-14
SCALE_RANGE = (1e-3, 1e3)


class ResidualMethod(Enum):
    LATTICE = 'lattice'
    INTEGRAL = 'integral'
    CLOSED_FORM = 'closed'


@dataclass
class ResidualValue:
    value: complex
    method: ResidualMethod
    error_estimate: float
    observed_order: Optional[float] = None

    def __post_init__(self):
        if not self.error_estimate >= 0:
            raise ValueError(f"error_estimate must be nonnegative, got {self.error_estimate}")


@dataclass(frozen=True)
class QuadratureConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_subdivisions: int = 2000

    def __post_init__(self):
        if not (self.rel_tol >= MIN_QUAD_TOL and self.abs_tol >= MIN_QUAD_TOL):
            raise ConfigurationError(
                f"quadrature tolerances must be at least {MIN_QUAD_TOL}, "
                f"got rel_tol={self.rel_tol}, abs_tol={self.abs_tol}"
            )
        if self.max_subdivisions < 1:
            raise ConfigurationError(f"max_subdivisions must be positive, got {self.max_subdivisions}")

    def to_dict(self):
        return asdict(self)


def _seed_points(shape: ShapeSpec, a: float) -> List[float]:
    if shape.kind is ShapeKind.CUSTOM:
        candidates = breakpoints(shape)
    elif shape.kind is ShapeKind.DISK:
        candidates = [shape.scale]
    elif shape.kind is ShapeKind.RECTANGLE:
        candidates = [a]
    else:
        candidates = []
    return sorted({p for p in candidates if 0.0 < p < a})


def _segment_height(shape: ShapeSpec, lo: float, hi: float) -> Callable[[float], float]:
    """h on [lo, hi]; Custom profiles are linear between consecutive breakpoints."""
    if shape.kind is not ShapeKind.CUSTOM:
        return lambda x: height(shape, x)
    h_lo, h_hi = height(shape, lo), height(shape, hi)
    slope = (h_hi - h_lo) / (hi - lo)
    return lambda x: h_lo + slope * (x - lo)


def _quad_part(func, lo: float, hi: float, q: QuadratureConfig, label: str) -> Tuple[float, float]:
    result = integrate.quad(
        func, lo, hi,
        epsabs=q.abs_tol,
        epsrel=q.rel_tol,
        limit=q.max_subdivisions,
        full_output=1,
    )
    value, error, info = result[0], result[1], result[2]
    if len(result) > 3:
        if info.get('last', 0) >= q.max_subdivisions:
            raise ResourceError(
                f"{label}: quadrature hit max_subdivisions={q.max_subdivisions} on [{lo}, {hi}]",
                achieved_estimate=float(error),
            )
        logger.warning(f"{label}: quadrature warning on [{lo}, {hi}]: {result[3]}")
    return float(value), float(error)


def _quad_segment(func: Callable[[float], complex], lo: float, hi: float, q: QuadratureConfig,
                  label: str) -> Tuple[complex, float]:
    """Complex quadrature on one segment; both parts share the integrand values at common nodes."""
    values: Dict[float, complex] = {}

    def shared(x: float) -> complex:
        v = values.get(x)
        if v is None:
            v = values[x] = func(x)
        return v

    re, re_err = _quad_part(lambda x: shared(x).real, lo, hi, q, f"{label}.re")
    im, im_err = _quad_part(lambda x: shared(x).imag, lo, hi, q, f"{label}.im")
    return complex(re, im), re_err + im_err


def residual_integral(shape: ShapeSpec, tau: TauLike, q: Optional[QuadratureConfig] = None) -> ResidualValue:
    """E(K, tau) from the integral transform of the height function."""
    tau = as_tau(tau)
    q = q or QuadratureConfig()
    require_valid(shape)

    t2 = tau.value ** 2
    a = support(shape)
    edges = [0.0, *_seed_points(shape, a), a]

    parts = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        h = _segment_height(shape, lo, hi)

        def integrand(x: float, h=h) -> complex:
            hx = h(x)
            return 4.0 * hx / (t2 * x * x - hx * hx)

        parts.append(_quad_segment(integrand, lo, hi, q, "residual_integral"))

    # segments are reduced in abscissa order
    re = math.fsum(v.real for v, _ in parts)
    im = math.fsum(v.imag for v, _ in parts)
    error = math.fsum(err for _, err in parts)
    logger.debug(f"residual_integral({shape.label()}, {tau.value}) over {len(parts)} segment(s) = "
                 f"{re}+{im}j, err {error:.2e}")
    return ResidualValue(complex(re, im), ResidualMethod.INTEGRAL, error)


def residual_closed_form(shape: ShapeSpec, tau: TauLike) -> ResidualValue:
    """Closed forms; dilation does not change E, so `scale` is ignored."""
    tau = as_tau(tau)
    t = tau.value
    require_valid(shape)

    if shape.kind is ShapeKind.RECTANGLE:
        c = shape.aspect
        value = -(2.0 / t) * (cmath.log(1.0 + c * t) - cmath.log(1.0 - c * t))
    elif shape.kind is ShapeKind.DISK:
        value = -2j * math.pi / (t + 1j)
    elif shape.kind is ShapeKind.DIAMOND:
        value = (4.0 * cmath.log(-1j * t) + 2j * math.pi * t) / (1.0 - t * t)
    else:
        raise UnsupportedShapeError("no closed form is known for custom shapes")
    return ResidualValue(value, ResidualMethod.CLOSED_FORM, 0.0)


def residual_lattice(shape: ShapeSpec, tau: TauLike, config: Optional[SumConfig] = None,
                     tol: float = 1e-14) -> ResidualValue:
    """G2(K, tau) - G2(tau)."""
    tau = as_tau(tau)
    shaped = g2_shape(shape, tau, config)
    ref = g2_ref(tau, tol)
    order = shaped.detail.observed_order if shaped.detail else None
    return ResidualValue(
        shaped.value - ref.value,
        ResidualMethod.LATTICE,
        shaped.error_estimate + ref.error_estimate,
        observed_order=order,
    )


def residual(shape: ShapeSpec, tau: TauLike, method: str = 'auto',
             q: Optional[QuadratureConfig] = None, config: Optional[SumConfig] = None) -> ResidualValue:
    """
    Dispatch by method name. 'auto' tries the closed form, then the
    integral, then the lattice sum.
    """
    if method == ResidualMethod.CLOSED_FORM.value:
        return residual_closed_form(shape, tau)
    if method == ResidualMethod.INTEGRAL.value:
        return residual_integral(shape, tau, q)
    if method == ResidualMethod.LATTICE.value:
        return residual_lattice(shape, tau, config)
    if method != 'auto':
        raise ConfigurationError(f"unknown residual method {method!r}")

    try:
        return residual_closed_form(shape, tau)
    except UnsupportedShapeError:
        logger.debug("No closed form; falling back to quadrature")
    try:
        return residual_integral(shape, tau, q)
    except ResourceError as e:
        logger.warning(f"Quadrature failed ({e}); falling back to lattice summation")
    return residual_lattice(shape, tau, config)


def residual_functional_defect(shape: ShapeSpec, tau: TauLike, q: Optional[QuadratureConfig] = None) -> DefectValue:
    """E(K^T, tau) - [tau^-2 E(K, -1/tau) - 2 pi i / tau]."""
    tau = as_tau(tau)
    inverted = tau.inverted()
    t = tau.value

    lhs = residual_integral(transpose(shape), tau, q)
    inner = residual_integral(shape, inverted, q)
    value = lhs.value - (inner.value / t ** 2 - 2j * math.pi / t)
    error = lhs.error_estimate + inner.error_estimate / abs(t) ** 2
    return DefectValue(value, error)


def residual_scaling_defect(shape: ShapeSpec, scale: float, tau: TauLike,
                            q: Optional[QuadratureConfig] = None) -> DefectValue:
    """E(scale * K, tau) - E(K, tau); dilation leaves E unchanged."""
    lo, hi = SCALE_RANGE
    if not (lo <= scale <= hi):
        raise ConfigurationError(f"scale must lie in [{lo}, {hi}], got {scale}")
    base = residual_integral(shape, tau, q)
    dilated = residual_integral(scaled(shape, scale), tau, q)
    return DefectValue(dilated.value - base.value, dilated.error_estimate + base.error_estimate)


def rectangle_limit_profile(tau: TauLike, exponents=range(-4, 5)) -> List[tuple]:
    """(c, E(rect(c), tau)) on the log grid c = 10^k."""
    return [(10.0 ** k, residual_closed_form(rectangle(10.0 ** k), tau).value) for k in exponents]

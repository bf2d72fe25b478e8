"""
Weierstrass - the Weierstrass p-function of the lattice Z tau + Z.

    p(z) = 1/z^2 + sum' [1/(z + n + m tau)^2 - 1/(n + m tau)^2]

wp_ref sums closed-form columns after reducing z to the fundamental
parallelogram; wp_abs_direct is the brute-force square sum; wp_shape is
the shape summation of 1/(z + n + m tau)^2, which exceeds p(z) by
G2(tau) + E(K, tau).
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np

from .eisenstein import (
    CHUNK, DefectValue, TauLike, ZETA2_TWICE, as_tau, g2_ref, pi2_csc2,
)
from .errors import ConfigurationError, DomainError, ResourceError
from .lattice_sum import LatticeTerm, SumConfig, SumResult, richardson, shape_sum_limit
from .residual import QuadratureConfig, residual_integral
from .shapes import ShapeSpec

logger = logging.getLogger(__name__)

POLE_GUARD = 1e-9
MAX_COLUMNS = 10 ** 8


def reduce_to_fundamental(z: complex, tau: TauLike) -> complex:
    """z - m tau - n with m = round(Im z / Im tau), n = round(Re(z - m tau)), rounding half to even."""
    t = as_tau(tau).value
    z = complex(z)
    m = round(z.imag / t.imag)
    shifted = z - m * t
    n = round(shifted.real)
    return shifted - n


@dataclass(frozen=True)
class LatticePointZ:
    """A point z off the lattice Z tau + Z."""
    z: complex
    tau: complex

    def __post_init__(self):
        t = as_tau(self.tau).value
        z = complex(self.z)
        if not (math.isfinite(z.real) and math.isfinite(z.imag)):
            raise DomainError(f"z must be finite, got {z}")
        object.__setattr__(self, 'z', z)
        object.__setattr__(self, 'tau', t)
        z0 = reduce_to_fundamental(z, t)
        nearest = min(abs(z0 - (a * t + b)) for a in (-1, 0, 1) for b in (-1, 0, 1))
        if nearest < POLE_GUARD:
            raise DomainError(f"z={z} lies within {POLE_GUARD} of a lattice point (distance {nearest:.3e})")

    @property
    def reduced(self) -> complex:
        return reduce_to_fundamental(self.z, self.tau)


def wp_ref(z: complex, tau: TauLike, tol: float = 1e-14) -> complex:
    """
    p(z) = pi^2/sin^2(pi z) - pi^2/3
           + sum_{m != 0} [pi^2/sin^2(pi (z + m tau)) - pi^2/sin^2(pi m tau)]
    """
    point = LatticePointZ(z, tau)
    t = point.tau
    z0 = point.reduced
    threshold = tol / 10.0

    terms = [pi2_csc2(z0) - ZETA2_TWICE]
    small_run = 0
    m = 1
    while small_run < 3:
        if m > MAX_COLUMNS:
            raise ResourceError(f"wp_ref did not converge within {MAX_COLUMNS} columns")
        ms = np.arange(m, m + CHUNK)
        shifts = ms * t
        block = (pi2_csc2(z0 + shifts) + pi2_csc2(z0 - shifts)) - 2.0 * pi2_csc2(shifts)
        for value in block.tolist():
            terms.append(value)
            small_run = small_run + 1 if abs(value) < threshold else 0
            if small_run >= 3:
                break
        m += CHUNK

    return complex(math.fsum(v.real for v in terms), math.fsum(v.imag for v in terms))


def wp_abs_direct(z: complex, tau: TauLike, R: int) -> complex:
    """Brute-force sum of the defining series over |m|, |n| <= R, row by row."""
    point = LatticePointZ(z, tau)
    if R < 10:
        raise ValueError(f"R must be at least 10, got {R}")
    z, t = point.z, point.tau
    ns = np.arange(-R, R + 1)

    rows = [1.0 / (z * z)]
    for m in range(-R, R + 1):
        w = ns + m * t
        if m == 0:
            w = w[w != 0]
        values = 1.0 / (z + w) ** 2 - 1.0 / (w * w)
        rows.append(complex(math.fsum(values.real.tolist()), math.fsum(values.imag.tolist())))
    return complex(math.fsum(r.real for r in rows), math.fsum(r.imag for r in rows))


def wp_term(z: complex, tau: TauLike) -> LatticeTerm:
    """1/(z + n + m tau)^2."""
    t = as_tau(tau).value
    z = complex(z)

    def column(m: int, ns: np.ndarray) -> np.ndarray:
        w = z + ns + m * t
        return 1.0 / (w * w)
    return LatticeTerm("wp", column, even=False)


def wp_shape(shape: ShapeSpec, z: complex, tau: TauLike, config: Optional[SumConfig] = None) -> SumResult:
    """Shape summation of 1/(z + n + m tau)^2; nothing is excluded."""
    point = LatticePointZ(z, tau)
    if config is None:
        config = replace(SumConfig(), zero_origin=False)
    elif config.zero_origin or config.exclude_m_zero:
        raise ConfigurationError("wp_shape sums every lattice point; zero_origin and exclude_m_zero must be false")
    return shape_sum_limit(shape, wp_term(point.z, point.tau), config)


def wp_decomposition_defect(shape: ShapeSpec, z: complex, tau: TauLike, config: Optional[SumConfig] = None,
                            q: Optional[QuadratureConfig] = None, tol: float = 1e-14) -> DefectValue:
    """wp_shape - p(z) - G2(tau) - E(K, tau)."""
    tau = as_tau(tau)
    shaped = wp_shape(shape, z, tau, config)
    g2 = g2_ref(tau, tol)
    e = residual_integral(shape, tau, q)
    value = shaped.value - wp_ref(z, tau, tol) - g2.value - e.value
    error = shaped.error_estimate + g2.error_estimate + e.error_estimate
    return DefectValue(value, error)


def iterated_sums(z: complex, tau: TauLike, N: int) -> Tuple[complex, complex]:
    """
    (S_mn, S_nm): sum_m [sum_n 1/(z+n+m tau)^2] over |m| <= N, and
    sum_n [sum_m 1/(z+n+m tau)^2] over |n| <= N, each inner sum in
    closed form.
    """
    point = LatticePointZ(z, tau)
    z, t = point.z, point.tau
    ks = np.concatenate(([0], np.arange(1, N + 1), -np.arange(1, N + 1)))

    by_rows = pi2_csc2(z + ks * t)
    by_cols = pi2_csc2((z + ks) / t) / t ** 2
    s_mn = complex(math.fsum(by_rows.real.tolist()), math.fsum(by_rows.imag.tolist()))
    s_nm = complex(math.fsum(by_cols.real.tolist()), math.fsum(by_cols.imag.tolist()))
    return s_mn, s_nm


def wp_iterated_defect(z: complex, tau: TauLike, N: int = 2000, extrapolate: bool = True) -> DefectValue:
    """S_mn - S_nm - 2 pi i / tau, which vanishes as N grows."""
    t = as_tau(tau).value
    if N < 100:
        raise ValueError(f"N must be at least 100, got {N}")

    s_mn, s_nm = iterated_sums(z, t, N)
    if extrapolate:
        s_mn_fine, s_nm_fine = iterated_sums(z, t, 2 * N)
        coarse, fine = s_mn - s_nm, s_mn_fine - s_nm_fine
        difference = richardson([coarse, fine])[0]
        error = abs(fine - coarse)
    else:
        difference = s_mn - s_nm
        error = math.inf
    value = difference - 2j * math.pi / t
    logger.debug(f"wp_iterated_defect(z={z}, tau={t}, N={N}) = {value}")
    return DefectValue(value, error)

"""
Eisenstein - the weight-2 Eisenstein series G2(tau).

    G2(tau) = sum_m sum_n' 1/(m tau + n)^2      (n inner, (0, 0) omitted)

Evaluators:
    g2_ref          column closed form pi^2/sin^2(pi m tau), geometric tail
    g2_abs_series   the absolutely convergent rewriting with 1/((w+n)^2 (w+n+1))
    g2_q_expansion  (pi^2/3)(1 - 24 sum sigma_1(k) q^k)
    g2_shape        shape summation over lambda K

plus identity checks for quasimodularity and the reversed summation order.
"""

import cmath
import logging
import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Union

import numpy as np

from .errors import DomainError, ResourceError
from .lattice_sum import LatticeTerm, SumConfig, SumResult, richardson, shape_sum_limit
from .shapes import ShapeSpec

logger = logging.getLogger(__name__)

IM_GUARD = 1e-6
MIN_TOL = 1e-14
ZETA2_TWICE = math.pi ** 2 / 3.0
TERM_BUDGET = 10 ** 9
REF_MAX_COLUMNS = 10 ** 8
CHUNK = 1024


@dataclass(frozen=True)
class TauPoint:
    """A point of the upper half-plane, guarded away from the real axis."""
    value: complex

    def __post_init__(self):
        value = complex(self.value)
        object.__setattr__(self, 'value', value)
        if not (math.isfinite(value.real) and math.isfinite(value.imag)):
            raise DomainError(f"tau must be finite, got {value}")
        if value.imag < IM_GUARD:
            raise DomainError(f"Im(tau) must be at least {IM_GUARD}, got {value.imag}")

    def inverted(self) -> 'TauPoint':
        """-1/tau, guarded."""
        return TauPoint(-1.0 / self.value)


TauLike = Union[TauPoint, complex, float]


def as_tau(tau: TauLike) -> TauPoint:
    return tau if isinstance(tau, TauPoint) else TauPoint(complex(tau))


class G2Method(Enum):
    REFERENCE = 'reference'
    ABS_SERIES = 'abs_series'
    Q_EXPANSION = 'q_expansion'
    SHAPE = 'lattice'


@dataclass
class EisensteinValue:
    value: complex
    method: G2Method
    error_estimate: float
    detail: Optional[SumResult] = None

    def __post_init__(self):
        if not self.error_estimate >= 0:
            raise ValueError(f"error_estimate must be nonnegative, got {self.error_estimate}")


@dataclass(frozen=True)
class DefectValue:
    """Residual of a numerical identity; zero up to error_estimate."""
    value: complex
    error_estimate: float

    def __abs__(self):
        return abs(self.value)

    def __complex__(self):
        return complex(self.value)


def _check_tol(tol: float, floor: float = MIN_TOL) -> None:
    if not (tol >= floor):
        raise ValueError(f"tolerance must be at least {floor}, got {tol}")


def pi2_csc2(w):
    """
    pi^2 / sin^2(pi w), elementwise, stable for large |Im w|:
    with Q = exp(2 pi i w) (or its reciprocal, whichever has |Q| <= 1),
    pi^2/sin^2(pi w) = -4 pi^2 Q / (1 - Q)^2.
    """
    w = np.asarray(w, dtype=complex)
    w = w - np.round(w.real)
    sign = np.where(w.imag >= 0.0, 1.0, -1.0)
    with np.errstate(under='ignore'):
        q = np.exp(2j * np.pi * sign * w)
        out = -4.0 * np.pi ** 2 * q / (1.0 - q) ** 2
    return complex(out) if out.ndim == 0 else out


def _geometric_tail(ratio: float, last: int) -> float:
    """Bound on sum_{k > last} 8 pi^2 r^k / (1 - r^k)^2."""
    if ratio >= 1.0:
        return math.inf
    return 8.0 * math.pi ** 2 * ratio ** (last + 1) / (1.0 - ratio) ** 3


def g2_ref(tau: TauLike, tol: float = MIN_TOL) -> EisensteinValue:
    """G2 by the column closed form: pi^2/3 + 2 sum_{m>=1} pi^2/sin^2(pi m tau)."""
    tau = as_tau(tau)
    _check_tol(tol)
    threshold = tol / 10.0

    terms = []
    small_run = 0
    m = 1
    done = False
    while not done:
        if m > REF_MAX_COLUMNS:
            raise ResourceError(f"g2_ref did not converge within {REF_MAX_COLUMNS} columns",
                                achieved_estimate=abs(terms[-1]) if terms else math.inf)
        ms = np.arange(m, m + CHUNK)
        block = 2.0 * pi2_csc2(ms * tau.value)
        for value in block.tolist():
            terms.append(value)
            small_run = small_run + 1 if abs(value) < threshold else 0
            if small_run >= 3:
                done = True
                break
        m += CHUNK

    last = len(terms)
    ratio = math.exp(-2.0 * math.pi * tau.value.imag)
    value = ZETA2_TWICE + complex(math.fsum(t.real for t in terms), math.fsum(t.imag for t in terms))
    error = _geometric_tail(ratio, last)
    logger.debug(f"g2_ref({tau.value}) summed {last} columns, tail bound {error:.2e}")
    return EisensteinValue(value, G2Method.REFERENCE, error)


def abs_series_term(m: int, n: int, tau: TauLike) -> complex:
    """1/((m tau + n)^2 (m tau + n + 1))"""
    w = m * as_tau(tau).value + n
    return 1.0 / (w * w * (w + 1.0))


def _abs_series_tail(u: np.ndarray) -> np.ndarray:
    # antiderivative of 1/(u^2 (u+1)), vanishing at infinity
    return -1.0 / u + np.log1p(1.0 / u)


def _abs_series_column(w: complex, core: int) -> tuple:
    """
    Inner sum over n of 1/((w+n)^2 (w+n+1)) on |n| <= N, plus midpoint
    integral corrections for both tails. Returns (value, error bound, terms).
    """
    n_max = int(math.ceil(abs(w.real))) + core
    ns = np.arange(-n_max, n_max + 1)
    u = w + ns
    values = 1.0 / (u * u * (u + 1.0))
    body = complex(math.fsum(values.real.tolist()), math.fsum(values.imag.tolist()))

    edges = np.array([w + n_max + 0.5, w - n_max - 0.5])
    tails = _abs_series_tail(edges)
    correction = -tails[0] + tails[1]
    bound = float(np.sum(0.25 * np.abs(edges) ** -4))
    return body + complex(correction), bound, len(ns)


def g2_abs_series(tau: TauLike, tol: float = 1e-10) -> EisensteinValue:
    """
    G2 via pi^2/3 + sum_{m != 0} sum_n 1/((m tau + n)^2 (m tau + n + 1)).
    Every double series here converges absolutely.
    """
    tau = as_tau(tau)
    _check_tol(tol, 1e-10)
    core = int(math.ceil((50.0 / tol) ** 0.25))
    threshold = tol / 10.0

    columns = []
    tail_bound = 0.0
    evaluated = 0
    small_run = 0
    m = 1
    while small_run < 3:
        pair = []
        for sign in (1, -1):
            value, bound, count = _abs_series_column(sign * m * tau.value, core)
            pair.append(value)
            tail_bound += bound
            evaluated += count
        columns.extend(pair)
        if evaluated > TERM_BUDGET:
            raise ResourceError(f"g2_abs_series exceeded {TERM_BUDGET} term evaluations",
                                achieved_estimate=tail_bound + abs(pair[0]) + abs(pair[1]))
        small_run = small_run + 1 if abs(pair[0]) + abs(pair[1]) < threshold else 0
        m += 1

    ratio = math.exp(-2.0 * math.pi * tau.value.imag)
    error = tail_bound + _geometric_tail(ratio, m - 1)
    value = ZETA2_TWICE + complex(math.fsum(c.real for c in columns), math.fsum(c.imag for c in columns))
    logger.debug(f"g2_abs_series({tau.value}) used {m - 1} column pairs, {evaluated} terms")
    return EisensteinValue(value, G2Method.ABS_SERIES, error)


def g2_q_expansion(tau: TauLike, terms: Optional[int] = None) -> EisensteinValue:
    """(pi^2/3)(1 - 24 sum_{k>=1} sigma_1(k) q^k) with q = exp(2 pi i tau)."""
    tau = as_tau(tau)
    r = math.exp(-2.0 * math.pi * tau.value.imag)
    if terms is None:
        terms = min(10 ** 6, max(8, int(math.ceil(-40.0 / math.log(r))) + 1))

    sigma = np.zeros(terms + 1)
    for d in range(1, terms + 1):
        sigma[d::d] += d
    q = cmath.exp(2j * math.pi * tau.value)
    with np.errstate(under='ignore'):
        powers = q ** np.arange(1, terms + 1)
    series = sigma[1:] * powers
    total = complex(math.fsum(series.real.tolist()), math.fsum(series.imag.tolist()))
    error = 24.0 * ZETA2_TWICE * (terms + 1) ** 2 * r ** (terms + 1) / (1.0 - r) ** 2
    return EisensteinValue(ZETA2_TWICE * (1.0 - 24.0 * total), G2Method.Q_EXPANSION, error)


def g2_term(tau: TauLike) -> LatticeTerm:
    """1/(m tau + n)^2, even in (m, n)."""
    tau_value = as_tau(tau).value

    def column(m: int, ns: np.ndarray) -> np.ndarray:
        w = m * tau_value + ns
        return 1.0 / (w * w)
    return LatticeTerm("g2", column, even=True)


def g2_shape(shape: ShapeSpec, tau: TauLike, config: Optional[SumConfig] = None) -> EisensteinValue:
    """Shape summation of G2 with the (0, 0) term set to zero."""
    tau = as_tau(tau)
    config = replace(config or SumConfig(), zero_origin=True, exclude_m_zero=False)
    result = shape_sum_limit(shape, g2_term(tau), config)
    return EisensteinValue(result.value, G2Method.SHAPE, result.error_estimate, detail=result)


def g2_quasimodularity_defect(tau: TauLike, tol: float = MIN_TOL) -> DefectValue:
    """tau^-2 G2(-1/tau) - G2(tau) + 2 pi i / tau, which vanishes identically."""
    tau = as_tau(tau)
    inverted = tau.inverted()
    lhs = g2_ref(inverted, tol)
    rhs = g2_ref(tau, tol)
    t = tau.value
    value = lhs.value / t ** 2 - rhs.value + 2j * math.pi / t
    error = lhs.error_estimate / abs(t) ** 2 + rhs.error_estimate + 64 * np.finfo(float).eps * (abs(rhs.value) + 1)
    return DefectValue(value, error)


def _reversed_partial(tau: complex, n_max: int) -> complex:
    ns = np.arange(1, n_max + 1)
    columns = pi2_csc2(ns / tau) / tau ** 2
    # n and -n columns coincide; the n = 0 column is 2 zeta(2) / tau^2
    total = complex(math.fsum(columns.real.tolist()), math.fsum(columns.imag.tolist()))
    return ZETA2_TWICE / tau ** 2 + 2.0 * total


def g2_reversed_order(tau: TauLike, N: int = 4000, extrapolate: bool = True) -> complex:
    """
    sum_{|n| <= N} sum_m 1/(n + m tau)^2 with the summation order swapped;
    tends to G2(tau) - 2 pi i / tau.
    """
    tau = as_tau(tau)
    if N < 10:
        raise ValueError(f"N must be at least 10, got {N}")
    coarse = _reversed_partial(tau.value, N)
    if not extrapolate:
        return coarse
    fine = _reversed_partial(tau.value, 2 * N)
    return richardson([coarse, fine])[0]

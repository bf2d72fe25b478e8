"""
Lattice Sum - shape summation over the integer points of a dilated shape.

Partial sums over (lambda K) ∩ Z^2 are accumulated column by column with
math.fsum, combined in the fixed order m = 0, +1, -1, +2, -2, ..., and
extrapolated in 1/lambda over doubled lambda schedules. Columns may be
evaluated on a thread pool; the reduction order never changes, so the
parallel path is bit-identical to the sequential one.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Callable, Iterator, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import ConfigurationError, TermEvaluationError
from .shapes import ShapeKind, ShapeSpec, height, require_valid, support

logger = logging.getLogger(__name__)

# absorbs float error in lambda * h(m / lambda) when the exact value is an integer
PROFILE_FLOOR_SLACK = 1e-9

DEFAULT_SCHEDULE = (250, 500, 1000, 2000)

ColumnFunc = Callable[[int, np.ndarray], Union[complex, np.ndarray]]


class ColumnRange(NamedTuple):
    """Inclusive integer interval [low, high]; empty when low > high."""
    low: int
    high: int

    @property
    def empty(self) -> bool:
        return self.low > self.high

    def __len__(self) -> int:
        return 0 if self.empty else self.high - self.low + 1


EMPTY_COLUMN = ColumnRange(0, -1)


@dataclass(frozen=True)
class LatticeTerm:
    """
    A summand family a(m, n). `func(m, ns)` evaluates one column at the
    integer array `ns`. `even` declares a(-m, -n) == a(m, n) exactly in
    floating point, which lets columns m and -m be paired.
    """
    name: str
    func: ColumnFunc
    even: bool = False

    @classmethod
    def from_scalar(cls, func: Callable[[int, int], complex], name: str = "term", even: bool = False) -> 'LatticeTerm':
        """Wrap a plain a(m, n) callable."""
        def column(m: int, ns: np.ndarray) -> np.ndarray:
            return np.array([func(m, int(n)) for n in ns], dtype=complex)
        return cls(name, column, even)

    def column(self, m: int, ns: np.ndarray) -> np.ndarray:
        with np.errstate(all='raise'):
            try:
                values = np.broadcast_to(np.asarray(self.func(m, ns), dtype=complex), ns.shape)
            except (FloatingPointError, ZeroDivisionError, OverflowError) as e:
                n = self._locate_failure(m, ns)
                raise TermEvaluationError(m, n, f"{self.name}: {e}") from e
        bad = ~np.isfinite(values)
        if bad.any():
            raise TermEvaluationError(m, int(ns[np.argmax(bad)]), f"{self.name}: non-finite value")
        return values

    def _locate_failure(self, m: int, ns: np.ndarray) -> int:
        for n in ns:
            try:
                with np.errstate(all='raise'):
                    value = complex(np.asarray(self.func(m, np.array([n])), dtype=complex).ravel()[0])
                if not (math.isfinite(value.real) and math.isfinite(value.imag)):
                    return int(n)
            except (FloatingPointError, ZeroDivisionError, OverflowError):
                return int(n)
        return int(ns[0]) if len(ns) else 0


def constant_term(value: complex = 1.0) -> LatticeTerm:
    return LatticeTerm(f"constant({value})", lambda m, ns: complex(value), even=True)


def telescope_term(tau: complex) -> LatticeTerm:
    """1/(m tau + n) - 1/(m tau + n + 1); not even."""
    def column(m: int, ns: np.ndarray) -> np.ndarray:
        w = m * tau + ns
        return 1.0 / w - 1.0 / (w + 1.0)
    return LatticeTerm("telescope", column, even=False)


@dataclass(frozen=True)
class SumConfig:
    """λ-schedule and conventions of a shape summation."""
    lambda_schedule: Tuple[int, ...] = DEFAULT_SCHEDULE
    extrapolate: bool = True
    zero_origin: bool = True
    exclude_m_zero: bool = False
    workers: int = 1

    def __post_init__(self):
        schedule = tuple(self.lambda_schedule)
        object.__setattr__(self, 'lambda_schedule', schedule)
        if not schedule:
            raise ConfigurationError("lambda_schedule must not be empty")
        if any(not isinstance(lam, (int, np.integer)) or isinstance(lam, bool) or lam < 1 for lam in schedule):
            raise ConfigurationError(f"lambda_schedule must hold positive integers, got {schedule}")
        if any(b <= a for a, b in zip(schedule, schedule[1:])):
            raise ConfigurationError(f"lambda_schedule must be strictly increasing, got {schedule}")
        if self.extrapolate:
            if len(schedule) < 2:
                raise ConfigurationError("extrapolation needs at least two lambda values")
            if any(b != 2 * a for a, b in zip(schedule, schedule[1:])):
                raise ConfigurationError(f"extrapolation needs successive doublings, got {schedule}")
        if self.workers < 1:
            raise ConfigurationError(f"workers must be positive, got {self.workers}")

    @classmethod
    def doubling(cls, start: int, count: int, **kwargs) -> 'SumConfig':
        return cls(lambda_schedule=tuple(start * 2 ** k for k in range(count)), **kwargs)

    def to_dict(self):
        data = asdict(self)
        data['lambda_schedule'] = list(self.lambda_schedule)
        return data


@dataclass
class SumResult:
    value: complex
    partials: List[Tuple[int, complex]] = field(default_factory=list)
    error_estimate: float = 0.0
    extrapolated: List[complex] = field(default_factory=list)
    observed_order: Optional[float] = None

    def to_dict(self):
        return {
            'value': {'re': self.value.real, 'im': self.value.imag},
            'partials': [{'lambda': lam, 're': s.real, 'im': s.imag} for lam, s in self.partials],
            'error_estimate': self.error_estimate,
            'observed_order': self.observed_order,
        }


def column_range(shape: ShapeSpec, lam: int, m: int) -> ColumnRange:
    """
    Range of n with (m, n) in lambda K. Builtins are decided with exact
    rational arithmetic, so boundary points are included deterministically.
    """
    m = abs(m)
    s = Fraction(shape.scale)

    if shape.kind is ShapeKind.DISK:
        radius_sq = (s * lam) ** 2
        if m * m > radius_sq:
            return EMPTY_COLUMN
        n_max = math.isqrt(math.floor(radius_sq - m * m))
    elif shape.kind is ShapeKind.DIAMOND:
        n_max = math.floor(s * lam) - m
    elif shape.kind is ShapeKind.RECTANGLE:
        if m > math.floor(Fraction(shape.aspect) * s * lam):
            return EMPTY_COLUMN
        n_max = math.floor(s * lam)
    else:
        if m > math.floor(lam * support(shape) + PROFILE_FLOOR_SLACK):
            return EMPTY_COLUMN
        n_max = math.floor(lam * height(shape, m / lam) + PROFILE_FLOOR_SLACK)

    if n_max < 0:
        return EMPTY_COLUMN
    return ColumnRange(-n_max, n_max)


def max_column(shape: ShapeSpec, lam: int) -> int:
    """Largest |m| whose column can be nonempty."""
    s = Fraction(shape.scale)
    if shape.kind is ShapeKind.RECTANGLE:
        return math.floor(Fraction(shape.aspect) * s * lam)
    if shape.kind is ShapeKind.CUSTOM:
        return math.floor(lam * support(shape) + PROFILE_FLOOR_SLACK)
    return math.floor(s * lam)


def column_order(m_max: int) -> Iterator[int]:
    """0, +1, -1, +2, -2, ..., +m_max, -m_max."""
    yield 0
    for m in range(1, m_max + 1):
        yield m
        yield -m


def _column_sum(shape: ShapeSpec, term: LatticeTerm, lam: int, m: int, config: SumConfig) -> complex:
    if m == 0 and config.exclude_m_zero:
        return 0j
    rng = column_range(shape, lam, m)
    if rng.empty:
        return 0j
    ns = np.arange(rng.low, rng.high + 1)
    if m == 0 and config.zero_origin:
        ns = ns[ns != 0]
        if ns.size == 0:
            return 0j
    values = term.column(m, ns)
    return complex(math.fsum(values.real.tolist()), math.fsum(values.imag.tolist()))


def _reduce(columns: Sequence[complex]) -> complex:
    return complex(math.fsum(c.real for c in columns), math.fsum(c.imag for c in columns))


def shape_partial_sum(shape: ShapeSpec, term: Union[LatticeTerm, Callable[[int, int], complex]],
                      lam: int, config: Optional[SumConfig] = None) -> complex:
    """Sum of term(m, n) over the integer points of lambda K."""
    config = config or SumConfig()
    if not isinstance(term, LatticeTerm):
        term = LatticeTerm.from_scalar(term)
    if lam < 1:
        raise ConfigurationError(f"lambda must be a positive integer, got {lam}")

    m_max = max_column(shape, lam)
    if term.even:
        ms = list(range(0, m_max + 1))
    else:
        ms = list(column_order(m_max))

    def work(m: int) -> complex:
        return _column_sum(shape, term, lam, m, config)

    if config.workers > 1 and len(ms) > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            sums = list(pool.map(work, ms))
    else:
        sums = [work(m) for m in ms]

    if term.even:
        # column -m equals column m bit for bit
        sums = [sums[0]] + [2.0 * c for c in sums[1:]]
    total = _reduce(sums)
    logger.debug(f"{term.name} partial sum at lambda={lam}: {total} over {len(ms)} columns")
    return total


def richardson(partials: Sequence[complex]) -> List[complex]:
    """One elimination step of a 1/lambda error term on doubled pairs."""
    return [2.0 * b - a for a, b in zip(partials, partials[1:])]


def observed_order(partials: Sequence[complex]) -> Optional[float]:
    """log2 of the ratio of the last two successive differences."""
    if len(partials) < 3:
        return None
    d1 = abs(partials[-2] - partials[-3])
    d2 = abs(partials[-1] - partials[-2])
    if d1 == 0.0 or d2 == 0.0:
        return None
    return math.log2(d1 / d2)


def limit_from_partials(lambdas: Sequence[int], values: Sequence[complex], extrapolate: bool) -> SumResult:
    partials = list(zip(lambdas, values))
    order = observed_order(values)

    if extrapolate:
        extrapolated = richardson(values)
        if len(extrapolated) >= 2:
            error = abs(extrapolated[-1] - extrapolated[-2])
        else:
            logger.warning("Single extrapolation pair; error estimate falls back to the last increment")
            error = abs(extrapolated[-1] - values[-1])
        return SumResult(extrapolated[-1], partials, error, extrapolated, order)

    error = abs(values[-1] - values[-2]) if len(values) >= 2 else math.inf
    return SumResult(values[-1], partials, error, [], order)


def shape_sum_limit(shape: ShapeSpec, term: Union[LatticeTerm, Callable[[int, int], complex]],
                    config: Optional[SumConfig] = None) -> SumResult:
    """Evaluate the schedule and extrapolate to lambda -> infinity."""
    config = config or SumConfig()
    require_valid(shape)
    if not isinstance(term, LatticeTerm):
        term = LatticeTerm.from_scalar(term)

    values = []
    for lam in config.lambda_schedule:
        values.append(shape_partial_sum(shape, term, lam, config))
        logger.info(f"{term.name}: lambda={lam} partial={values[-1]}")

    result = limit_from_partials(config.lambda_schedule, values, config.extrapolate)
    logger.info(
        f"{term.name}: limit={result.value} error={result.error_estimate:.3e} "
        f"observed_order={result.observed_order}"
    )
    return result


def telescope_sum(shape: ShapeSpec, tau: complex, lam: int) -> complex:
    """
    Shape summation of 1/(m tau + n) - 1/(m tau + n + 1) with the m = 0
    column excluded, in closed column form: each column m telescopes to
    1/(m tau - N_m) - 1/(m tau + N_m + 1).
    """
    tau = complex(getattr(tau, 'value', tau))
    require_valid(shape)
    if lam < 1:
        raise ConfigurationError(f"lambda must be a positive integer, got {lam}")

    columns = []
    for m in column_order(max_column(shape, lam)):
        if m == 0:
            continue
        rng = column_range(shape, lam, m)
        if rng.empty:
            continue
        n_max = rng.high
        columns.append(1.0 / (m * tau - n_max) - 1.0 / (m * tau + n_max + 1))
    return _reduce(columns)


def telescope_direct(shape: ShapeSpec, tau: complex, lam: int) -> complex:
    """Term-by-term version of telescope_sum."""
    tau = complex(getattr(tau, 'value', tau))
    config = SumConfig(lambda_schedule=(lam,), extrapolate=False, zero_origin=False, exclude_m_zero=True)
    return shape_partial_sum(shape, telescope_term(tau), lam, config)


def telescope_limit(shape: ShapeSpec, tau: complex, config: Optional[SumConfig] = None) -> SumResult:
    """telescope_sum over a schedule, extrapolated like shape_sum_limit."""
    config = config or SumConfig()
    values = [telescope_sum(shape, tau, lam) for lam in config.lambda_schedule]
    return limit_from_partials(config.lambda_schedule, values, config.extrapolate)

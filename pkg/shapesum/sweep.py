"""
Sweep - E(K, tau) over a rectangular grid of tau values, for plotting.

Rows are produced in row-major order (imaginary part outer, real part
inner) regardless of how the worker pool schedules them.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import List, Optional

import numpy as np
import pandas as pd

from .eisenstein import IM_GUARD
from .errors import ConfigurationError, DomainError
from .residual import QuadratureConfig, residual_integral
from .shapes import ShapeSpec, require_valid

logger = logging.getLogger(__name__)

CSV_COLUMNS = ['re_tau', 'im_tau', 're_E', 'im_E', 'error_estimate']


@dataclass(frozen=True)
class SweepGrid:
    re_min: float
    re_max: float
    re_steps: int
    im_min: float
    im_max: float
    im_steps: int

    def __post_init__(self):
        values = (self.re_min, self.re_max, self.im_min, self.im_max)
        if not all(math.isfinite(v) for v in values):
            raise ConfigurationError(f"grid bounds must be finite, got {values}")
        if self.re_steps < 1 or self.im_steps < 1:
            raise ConfigurationError("grid steps must be at least 1")
        if self.re_min > self.re_max or self.im_min > self.im_max:
            raise ConfigurationError("grid minimum exceeds maximum")
        if self.im_min < IM_GUARD:
            raise DomainError(f"im_min must be at least {IM_GUARD}, got {self.im_min}")

    def points(self) -> List[complex]:
        res = np.linspace(self.re_min, self.re_max, self.re_steps)
        ims = np.linspace(self.im_min, self.im_max, self.im_steps)
        return [complex(re, im) for im in ims.tolist() for re in res.tolist()]

    def to_dict(self):
        return asdict(self)


def run_sweep(shape: ShapeSpec, grid: SweepGrid, q: Optional[QuadratureConfig] = None,
              workers: int = 1) -> pd.DataFrame:
    """Evaluate residual_integral at every grid point."""
    require_valid(shape)
    q = q or QuadratureConfig()
    points = grid.points()
    logger.info(f"Sweeping {shape.label()} over {len(points)} grid points with {workers} worker(s)")

    def evaluate(tau: complex):
        e = residual_integral(shape, tau, q)
        return (tau.real, tau.imag, e.value.real, e.value.imag, e.error_estimate)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(evaluate, points))
    else:
        rows = [evaluate(tau) for tau in points]
    return pd.DataFrame(rows, columns=CSV_COLUMNS)


def write_sweep(frame: pd.DataFrame, out, output: str = 'csv') -> None:
    """Write sweep rows as CSV (fixed header) or JSON records."""
    if output == 'csv':
        frame.to_csv(out, index=False, float_format='%.17g', lineterminator='\n')
    elif output == 'json':
        frame.to_json(out, orient='records', double_precision=15)
        if hasattr(out, 'write'):
            out.write('\n')
    else:
        raise ConfigurationError(f"unknown sweep output format {output!r}")

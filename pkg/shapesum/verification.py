"""
Verification suite: numerical identities and cross-method agreement.

The quick suite covers everything that runs in seconds (closed forms,
quadrature, identities of G2 and p). The full suite adds the lattice
summations at the default lambda schedule.
"""

import logging
import math
from dataclasses import asdict, dataclass, replace
from typing import Callable, Dict, List, Optional

import numpy as np
import pandas as pd

from .eisenstein import (
    g2_abs_series, g2_q_expansion, g2_quasimodularity_defect, g2_ref, g2_shape,
)
from .errors import ShapesumError, VerificationFailure
from .health_monitor import ResourceMonitor
from .lattice_sum import SumConfig, telescope_sum
from .residual import (
    QuadratureConfig, rectangle_limit_profile, residual_closed_form, residual_functional_defect,
    residual_integral, residual_lattice, residual_scaling_defect,
)
from .shapes import as_custom, diamond, disk, rectangle
from .weierstrass import wp_abs_direct, wp_decomposition_defect, wp_iterated_defect, wp_ref, wp_shape

logger = logging.getLogger(__name__)

BUILTIN_SHAPES = [rectangle(0.25), rectangle(1.0), rectangle(4.0), disk(), diamond()]
TAU_POINTS = [1j, 2j, 0.3 + 1.2j, -0.5 + 0.8j]
SEED = 20240611


@dataclass
class Check:
    name: str
    passed: bool
    measured: float
    tolerance: float
    detail: str = ""

    def to_dict(self):
        return asdict(self)


def _random_taus(rng: np.random.Generator, count: int, im_range=(0.5, 2.0), re_bound=1.0) -> List[complex]:
    res = rng.uniform(-re_bound, re_bound, count)
    ims = rng.uniform(*im_range, count)
    return [complex(a, b) for a, b in zip(res.tolist(), ims.tolist())]


class VerificationSuite:
    """
    Runs the identity and agreement checks and collects a pass/fail table.
    """

    def __init__(self, workers: int = 1, q: Optional[QuadratureConfig] = None,
                 config: Optional[SumConfig] = None):
        self.workers = workers
        self.q = q or QuadratureConfig()
        self.config = replace(config or SumConfig(), workers=workers)
        self.checks: List[Check] = []
        self.observed_orders: Dict[str, Optional[float]] = {}

    # quick checks

    def check_closed_vs_integral(self) -> Check:
        worst = max(
            abs(residual_integral(shape, tau, self.q).value - residual_closed_form(shape, tau).value)
            for shape in BUILTIN_SHAPES for tau in TAU_POINTS
        )
        return Check("closed_form_vs_integral", worst <= 1e-8, worst, 1e-8,
                     f"{len(BUILTIN_SHAPES)} shapes x {len(TAU_POINTS)} tau")

    def check_fixed_points(self) -> Check:
        g2_defect = abs(g2_ref(1j).value - math.pi)
        e_defect = max(abs(residual_integral(s, 1j, self.q).value + math.pi)
                       for s in (disk(), diamond(), rectangle(1.0)))
        passed = g2_defect <= 1e-10 and e_defect <= 1e-8
        return Check("fixed_point_values", passed, max(g2_defect, e_defect), 1e-8,
                     f"|G2(i)-pi|={g2_defect:.2e}, max |E(K,i)+pi|={e_defect:.2e}")

    def check_quasimodularity(self) -> Check:
        taus = _random_taus(np.random.default_rng(SEED), 10)
        worst = max(abs(g2_quasimodularity_defect(t)) for t in taus)
        return Check("quasimodularity", worst <= 1e-9, worst, 1e-9, "10 random tau")

    def check_functional_equation(self) -> Check:
        cases = [(disk(), 0.4 + 1.1j), (diamond(), 1j), (rectangle(1.0), 0.3 + 1.2j), (rectangle(2.0), 1j)]
        worst = max(abs(residual_functional_defect(shape, tau, self.q)) for shape, tau in cases)
        return Check("residual_functional_equation", worst <= 1e-8, worst, 1e-8,
                     "disk, diamond, rect(1), rect(2)<->rect(0.5)")

    def check_rectangle_limits(self) -> Check:
        small = abs(residual_closed_form(rectangle(1e-4), 1j).value)
        large = abs(residual_closed_form(rectangle(1e4), 1j).value + 2 * math.pi)
        magnitudes = [abs(v) for _, v in rectangle_limit_profile(1j)]
        monotone = all(b > a for a, b in zip(magnitudes, magnitudes[1:]))
        worst = max(small, large)
        return Check("rectangle_limits", worst <= 5e-4 and monotone, worst, 5e-4,
                     f"c->0: {small:.2e}, c->inf: {large:.2e}, monotone={monotone}")

    def check_abs_series(self) -> Check:
        taus = _random_taus(np.random.default_rng(SEED + 1), 10)
        worst = max(abs(g2_abs_series(t).value - g2_ref(t).value) for t in taus)
        return Check("abs_series_vs_reference", worst <= 1e-6, worst, 1e-6, "10 random tau")

    def check_q_expansion(self) -> Check:
        worst = max(abs(g2_q_expansion(t).value - g2_ref(t).value) for t in TAU_POINTS)
        return Check("q_expansion_vs_reference", worst <= 1e-10, worst, 1e-10, "4 tau")

    def check_iterated_order(self) -> Check:
        worst = max(abs(wp_iterated_defect(0.3, 1j, 2000)), abs(wp_iterated_defect(0.5 + 0.25j, 2j, 2000)))
        return Check("wp_iterated_order", worst <= 1e-4, worst, 1e-4, "N=2000 -> 4000")

    def check_wp_symmetries(self) -> Check:
        rng = np.random.default_rng(SEED + 2)
        worst = 0.0
        for tau in _random_taus(rng, 5):
            z = complex(*rng.uniform(0.1, 0.4, 2).tolist())
            base = wp_ref(z, tau)
            worst = max(worst,
                        abs(wp_ref(-z, tau) - base),
                        abs(wp_ref(z + 1, tau) - base),
                        abs(wp_ref(z + tau, tau) - base))
        rotation = abs(wp_ref(1j * 0.3, 1j) + wp_ref(0.3, 1j))
        worst = max(worst, rotation)
        return Check("wp_symmetries", worst <= 1e-10, worst, 1e-10, "evenness, periods, rotation at tau=i")

    def check_scaling(self) -> Check:
        worst = max(
            abs(residual_scaling_defect(as_custom(shape), scale, 1j, self.q))
            for shape in (diamond(), rectangle(1.0)) for scale in (0.5, 3.0)
        )
        return Check("scaling_invariance", worst <= 1e-9, worst, 1e-9, "custom diamond and rect(1)")

    # lattice checks

    def check_lattice_residual(self) -> Check:
        worst = 0.0
        for shape in BUILTIN_SHAPES:
            for tau in TAU_POINTS:
                lattice = residual_lattice(shape, tau, self.config)
                self.observed_orders[f"{shape.label()}@{tau}"] = lattice.observed_order
                worst = max(worst, abs(lattice.value - residual_closed_form(shape, tau).value))
        orders = [o for o in self.observed_orders.values() if o is not None]
        median = float(np.median(orders)) if orders else float('nan')
        return Check("lattice_vs_closed_form", worst <= 5e-3, worst, 5e-3,
                     f"median observed order {median:.2f}")

    def check_telescope(self) -> Check:
        lam = self.config.lambda_schedule[-1]
        worst = max(
            abs(telescope_sum(shape, tau, lam) - residual_integral(shape, tau, self.q).value)
            for shape in BUILTIN_SHAPES for tau in (1j, 0.3 + 1.2j)
        )
        return Check("telescope_vs_integral", worst <= 5e-3, worst, 5e-3, f"lambda={lam}")

    def check_wp_decomposition(self) -> Check:
        cases = [(disk(), 0.3, 1j), (rectangle(2.0), 0.4 + 0.2j, 0.3 + 1.2j)]
        worst = max(abs(wp_decomposition_defect(shape, z, tau, self._wp_config(), self.q)) for shape, z, tau in cases)

        rng = np.random.default_rng(SEED + 3)
        offsets = []
        error = 0.0
        for _ in range(5):
            z = complex(*rng.uniform(0.1, 0.45, 2).tolist())
            result = wp_shape(disk(), z, 1j, self._wp_config())
            offsets.append(result.value - wp_ref(z, 1j))
            error = max(error, result.error_estimate)
        spread = max(abs(a - b) for a in offsets for b in offsets)
        passed = worst <= 5e-3 and spread <= max(2 * error, 1e-12)
        return Check("wp_shape_decomposition", passed, worst, 5e-3,
                     f"z-spread {spread:.2e} vs 2x error {2 * error:.2e}")

    def check_wp_oracle(self) -> Check:
        rng = np.random.default_rng(SEED + 4)
        worst = 0.0
        for tau in _random_taus(rng, 10, im_range=(0.8, 1.5), re_bound=0.5):
            z = complex(*rng.uniform(0.15, 0.4, 2).tolist())
            worst = max(worst, abs(wp_ref(z, tau) - wp_abs_direct(z, tau, 400)))
        return Check("wp_direct_vs_reference", worst <= 5e-3, worst, 5e-3, "R=400, 10 random (z, tau)")

    def check_determinism(self) -> Check:
        config = SumConfig(lambda_schedule=(50, 100, 200))
        sequential = g2_shape(disk(), 0.3 + 1.2j, config).value
        parallel = g2_shape(disk(), 0.3 + 1.2j, replace(config, workers=max(self.workers, 4))).value
        same = sequential == parallel
        return Check("parallel_determinism", same, abs(sequential - parallel), 0.0,
                     "bit-identical sequential vs threaded sums")

    def _wp_config(self) -> SumConfig:
        return replace(self.config, zero_origin=False, exclude_m_zero=False)

    def quick_checks(self) -> List[Callable[[], Check]]:
        return [
            self.check_closed_vs_integral,
            self.check_fixed_points,
            self.check_quasimodularity,
            self.check_functional_equation,
            self.check_rectangle_limits,
            self.check_abs_series,
            self.check_q_expansion,
            self.check_iterated_order,
            self.check_wp_symmetries,
            self.check_scaling,
        ]

    def full_checks(self) -> List[Callable[[], Check]]:
        return self.quick_checks() + [
            self.check_lattice_residual,
            self.check_telescope,
            self.check_wp_decomposition,
            self.check_wp_oracle,
            self.check_determinism,
        ]

    def run(self, quick: bool = False) -> Dict:
        """Run the suite and return a report dict."""
        monitor = ResourceMonitor()
        monitor.start()
        self.checks = []
        for check in (self.quick_checks() if quick else self.full_checks()):
            name = check.__name__.replace('check_', '')
            try:
                result = check()
            except ShapesumError as e:
                logger.error(f"Check {name} raised {type(e).__name__}: {e}")
                result = Check(name, False, math.inf, 0.0, f"{type(e).__name__}: {e}")
            logger.info(f"{result.name}: {'PASS' if result.passed else 'FAIL'} ({result.measured:.3e})")
            self.checks.append(result)

        return {
            'mode': 'quick' if quick else 'full',
            'passed': all(c.passed for c in self.checks),
            'checks': [c.to_dict() for c in self.checks],
            'observed_orders': self.observed_orders,
            'resources': monitor.stop(),
        }

    def raise_for_failures(self) -> None:
        failed = [c.name for c in self.checks if not c.passed]
        if failed:
            raise VerificationFailure(failed)

    def table(self) -> pd.DataFrame:
        frame = pd.DataFrame([c.to_dict() for c in self.checks],
                             columns=['name', 'passed', 'measured', 'tolerance', 'detail'])
        frame['passed'] = frame['passed'].map({True: 'PASS', False: 'FAIL'})
        return frame

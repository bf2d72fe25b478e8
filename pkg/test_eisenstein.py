import cmath
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shapesum.eisenstein import (
    G2Method, TauPoint, abs_series_term, g2_abs_series, g2_q_expansion, g2_quasimodularity_defect,
    g2_ref, g2_reversed_order, g2_shape, pi2_csc2,
)
from shapesum.errors import DomainError
from shapesum.shapes import diamond, disk, rectangle

G2_AT_2I = 3.2895928
SAMPLE_TAUS = [1j, 2j, 0.3 + 1.2j, -0.5 + 0.8j, 0.9 + 0.3j, -1.0 + 0.5j]

taus = st.builds(complex, st.floats(-1.0, 1.0), st.floats(0.5, 2.0))


def test_reference_fixed_points():
    assert abs(g2_ref(1j).value - math.pi) <= 1e-10
    assert abs(g2_ref(2j).value - G2_AT_2I) <= 1e-7
    assert abs(g2_ref(1 + 1j).value - math.pi) <= 1e-10


def test_reference_reports_method_and_small_error():
    value = g2_ref(0.3 + 1.2j)
    assert value.method is G2Method.REFERENCE
    assert 0 <= value.error_estimate <= 1e-13


@given(taus)
def test_reference_is_periodic_and_real_symmetric(tau):
    base = g2_ref(tau).value
    assert abs(g2_ref(tau + 1).value - base) <= 1e-10
    assert abs(g2_ref(-tau.conjugate()).value - base.conjugate()) <= 1e-10


def test_pi2_csc2_matches_direct_formula():
    for w in (0.3 + 0.1j, -1.7 + 0.4j, 0.25 - 2.0j):
        direct = math.pi ** 2 / cmath.sin(math.pi * w) ** 2
        assert abs(pi2_csc2(w) - direct) <= 1e-12 * abs(direct)


def test_pi2_csc2_does_not_overflow_far_from_real_axis():
    assert abs(pi2_csc2(3.0 + 400j)) < 1e-300


def test_abs_series_term_partial_fractions():
    tau = 2j
    w = tau - 1
    expected = 1 / (w * w * (w + 1))
    assert abs_series_term(1, -1, tau) == pytest.approx(expected, rel=1e-15)


@pytest.mark.parametrize("tau", SAMPLE_TAUS)
def test_abs_series_agrees_within_error_estimates(tau):
    ref = g2_ref(tau)
    absolute = g2_abs_series(tau)
    assert absolute.method is G2Method.ABS_SERIES
    assert abs(ref.value - absolute.value) <= ref.error_estimate + absolute.error_estimate
    assert abs(ref.value - absolute.value) <= 1e-6


def test_abs_series_rejects_tolerance_below_floor():
    with pytest.raises(ValueError):
        g2_abs_series(1j, tol=1e-12)


@pytest.mark.parametrize("tau", SAMPLE_TAUS[:4])
def test_q_expansion_matches_reference(tau):
    assert abs(g2_q_expansion(tau).value - g2_ref(tau).value) <= 1e-10


@pytest.mark.parametrize("tau", [1j, 2j, 0.5 + 0.5j])
def test_quasimodularity_at_sample_points(tau):
    assert abs(g2_quasimodularity_defect(tau)) <= 1e-9


@settings(max_examples=25, deadline=None)
@given(taus)
def test_quasimodularity_random(tau):
    assert abs(g2_quasimodularity_defect(tau)) <= 1e-9


def test_reversed_order_differs_by_2_pi_i_over_tau():
    assert abs(g2_reversed_order(1j) + math.pi) <= 1e-4
    assert abs(g2_reversed_order(2j) - (g2_ref(2j).value - math.pi)) <= 1e-4


def test_reversed_order_converges_with_n():
    tau = 0.5 + 3j
    limit = g2_ref(tau).value - 2j * math.pi / tau
    coarse = abs(g2_reversed_order(tau, N=10, extrapolate=False) - limit)
    fine = abs(g2_reversed_order(tau, N=20, extrapolate=False) - limit)
    assert fine < coarse


def test_reversed_order_needs_enough_terms():
    with pytest.raises(ValueError):
        g2_reversed_order(1j, N=5)


@pytest.mark.parametrize("tau", [0.5 + 1e-7j, 0.5 - 1j, complex(float('nan'), 1.0)])
def test_tau_guard(tau):
    with pytest.raises(DomainError):
        TauPoint(tau)
    with pytest.raises(DomainError):
        g2_ref(tau)


def test_inverted_tau_is_guarded():
    with pytest.raises(DomainError):
        g2_quasimodularity_defect(1e4 + 1j)


@pytest.mark.slow
@pytest.mark.parametrize("shape, tau, expected", [
    (disk(), 1j, 0.0),
    (rectangle(1.0), 1j, 0.0),
    (diamond(), 2j, G2_AT_2I + (4 * math.log(2) - 4 * math.pi) / 5),
])
def test_shape_summation_values(shape, tau, expected):
    result = g2_shape(shape, tau)
    assert result.method is G2Method.SHAPE
    assert abs(result.value - expected) <= 5e-3
    assert result.detail is not None
    assert [lam for lam, _ in result.detail.partials] == [250, 500, 1000, 2000]

import math
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shapesum.errors import ConfigurationError, ResourceError, UnsupportedShapeError
from shapesum.lattice_sum import telescope_sum
from shapesum.residual import (
    QuadratureConfig, ResidualMethod, rectangle_limit_profile, residual, residual_closed_form,
    residual_functional_defect, residual_integral, residual_lattice, residual_scaling_defect,
)
from shapesum.shapes import as_custom, custom, diamond, disk, from_file, rectangle, validate

SHAPES_DIR = Path(__file__).resolve().parent / "workspace" / "shapes"
BUILTINS = [rectangle(0.25), rectangle(1.0), rectangle(4.0), disk(), diamond()]
TAUS = [1j, 2j, 0.3 + 1.2j, -0.5 + 0.8j]


@pytest.mark.parametrize("shape, tau, expected", [
    (rectangle(0.5), 1j, -4 * math.atan(0.5)),
    (disk(), 2j, -2 * math.pi / 3),
    (disk(), 1j, -math.pi),
    (diamond(), 1j, -math.pi),
    (diamond(), 2j, (4 * math.log(2) - 4 * math.pi) / 5),
])
def test_closed_form_values(shape, tau, expected):
    value = residual_closed_form(shape, tau)
    assert value.method is ResidualMethod.CLOSED_FORM
    assert value.error_estimate == 0.0
    assert abs(value.value - expected) <= 1e-12


def test_rectangle_limits():
    assert abs(residual_closed_form(rectangle(1e-6), 1j).value) <= 5e-6
    assert abs(residual_closed_form(rectangle(1e6), 1j).value + 2 * math.pi) <= 1e-5


def test_rectangle_profile_is_monotone():
    magnitudes = [abs(v) for _, v in rectangle_limit_profile(1j)]
    assert all(b > a for a, b in zip(magnitudes, magnitudes[1:]))


def test_closed_form_ignores_dilation():
    assert residual_closed_form(disk(3.0), 0.3 + 1.2j).value == residual_closed_form(disk(), 0.3 + 1.2j).value


def test_custom_shapes_have_no_closed_form():
    with pytest.raises(UnsupportedShapeError):
        residual_closed_form(custom([(0, 1), (1, 0)]), 1j)


@pytest.mark.parametrize("shape", BUILTINS)
@pytest.mark.parametrize("tau", TAUS)
def test_integral_matches_closed_form(shape, tau):
    integral = residual_integral(shape, tau)
    assert integral.method is ResidualMethod.INTEGRAL
    assert abs(integral.value - residual_closed_form(shape, tau).value) <= 1e-8


@pytest.mark.parametrize("shape", [disk(), diamond(), rectangle(1.0), as_custom(diamond())])
def test_self_transpose_shapes_take_minus_pi_at_i(shape):
    assert abs(residual_integral(shape, 1j).value + math.pi) <= 1e-8


@pytest.mark.parametrize("shape, tau", [
    (disk(), 0.4 + 1.1j),
    (rectangle(2.0), 1j),
    (diamond(), 1j),
    (rectangle(1.0), 0.3 + 1.2j),
])
def test_functional_equation_on_builtins(shape, tau):
    assert abs(residual_functional_defect(shape, tau)) <= 1e-8


@pytest.mark.parametrize("name", ["hexagon.json"])
@pytest.mark.parametrize("tau", [1j, 0.3 + 1.2j, -0.2 + 0.9j])
def test_functional_equation_on_custom_profiles(name, tau):
    shape = from_file(str(SHAPES_DIR / name))
    assert abs(residual_functional_defect(shape, tau)) <= 1e-8


@settings(max_examples=20, deadline=None)
@given(st.sampled_from(BUILTINS), st.floats(-1.0, 1.0), st.floats(0.5, 2.0))
def test_conjugation_symmetry(shape, re, im):
    tau = complex(re, im)
    forward = residual_integral(shape, tau).value
    mirrored = residual_integral(shape, -tau.conjugate()).value
    assert abs(mirrored - forward.conjugate()) <= 1e-12


@pytest.mark.parametrize("shape", [as_custom(diamond()), as_custom(rectangle(2.0))])
@pytest.mark.parametrize("scale", [0.5, 3.0])
def test_dilation_leaves_residual_unchanged(shape, scale):
    assert abs(residual_scaling_defect(shape, scale, 0.3 + 1.2j)) <= 1e-9


def test_unit_dilation_is_exact():
    assert residual_scaling_defect(as_custom(diamond()), 1.0, 1j).value == 0


@pytest.mark.parametrize("scale", [1e-4, 1e4, 0.0])
def test_dilation_range(scale):
    with pytest.raises(ConfigurationError):
        residual_scaling_defect(disk(), scale, 1j)


@pytest.mark.parametrize("kwargs", [{'rel_tol': 1e-16}, {'abs_tol': 0.0}, {'max_subdivisions': 0}])
def test_quadrature_config_validation(kwargs):
    with pytest.raises(ConfigurationError):
        QuadratureConfig(**kwargs)


def test_subdivision_limit_raises_resource_error():
    with pytest.raises(ResourceError) as info:
        residual_integral(disk(), 1j, QuadratureConfig(max_subdivisions=1))
    assert info.value.achieved_estimate > 0


def test_finely_sampled_profile_is_integrated_segment_by_segment():
    polygon = as_custom(disk(), 2500)
    assert validate(polygon) == []
    assert len(polygon.profile) > QuadratureConfig().max_subdivisions

    result = residual_integral(polygon, 1j)
    assert abs(result.value + math.pi) <= 1e-4
    assert residual(polygon, 1j).method is ResidualMethod.INTEGRAL


def test_segment_sum_matches_single_profile_segment():
    # a diamond split into many collinear pieces integrates to the same value
    pieces = custom([(k / 400, 1 - k / 400) for k in range(401)])
    whole = residual_integral(as_custom(diamond()), 0.3 + 1.2j)
    split = residual_integral(pieces, 0.3 + 1.2j)
    assert abs(split.value - whole.value) <= 1e-9


def test_dispatch():
    assert residual(disk(), 1j).method is ResidualMethod.CLOSED_FORM
    assert residual(as_custom(diamond()), 1j).method is ResidualMethod.INTEGRAL
    assert residual(disk(), 1j, 'integral').method is ResidualMethod.INTEGRAL
    with pytest.raises(ConfigurationError):
        residual(disk(), 1j, 'bogus')


@pytest.mark.parametrize("shape", BUILTINS)
@pytest.mark.parametrize("tau", [1j, 0.3 + 1.2j])
def test_telescoping_sum_approaches_integral(shape, tau):
    assert abs(telescope_sum(shape, tau, 2000) - residual_integral(shape, tau).value) <= 5e-3


@pytest.mark.slow
@pytest.mark.parametrize("shape, tau", [
    (disk(), 1j),
    (rectangle(4.0), 0.3 + 1.2j),
    (diamond(), 2j),
])
def test_lattice_residual_matches_closed_form(shape, tau):
    lattice = residual_lattice(shape, tau)
    assert lattice.method is ResidualMethod.LATTICE
    assert abs(lattice.value - residual_closed_form(shape, tau).value) <= 5e-3


@pytest.mark.slow
def test_lattice_residual_on_custom_diamond():
    assert abs(residual_lattice(as_custom(diamond()), 1j).value + math.pi) <= 5e-3

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shapesum.errors import ShapeError
from shapesum.shapes import (
    ShapeKind, area, as_custom, contains, custom, diamond, disk, from_file, height, parse,
    rectangle, require_valid, scaled, support, transpose, validate,
)

BUILTINS = [rectangle(0.5), rectangle(1.0), rectangle(2.5), disk(), diamond(), disk(2.0)]


@st.composite
def concave_profiles(draw):
    """Decreasing concave profiles with distinct slopes -k/10."""
    ks = sorted(draw(st.lists(st.integers(0, 30), min_size=1, max_size=6, unique=True)))
    widths = draw(st.lists(st.integers(1, 10), min_size=len(ks), max_size=len(ks)))
    # heights in hundredths and abscissas in tenths, kept as integers until the end
    drop = sum(k * w for k, w in zip(ks, widths))
    h = drop + draw(st.integers(0 if drop else 1, 20)) * 10
    x = 0
    points = [(0.0, h / 100.0)]
    for k, w in zip(ks, widths):
        x += w
        h -= k * w
        points.append((x / 10.0, h / 100.0))
    return custom(points)


@pytest.mark.parametrize("shape, x, expected", [
    (disk(), 0.0, 1.0),
    (diamond(), 0.25, 0.75),
    (rectangle(0.5), 0.75, 0.0),
    (rectangle(0.5), 0.5, 1.0),
    (disk(), 1.5, 0.0),
    (disk(2.0), 0.0, 2.0),
])
def test_height_values(shape, x, expected):
    assert height(shape, x) == pytest.approx(expected, abs=1e-15)


def test_height_accepts_arrays():
    xs = np.array([-1.0, -0.5, 0.0, 0.5, 1.0])
    np.testing.assert_allclose(height(diamond(), xs), [0.0, 0.5, 1.0, 0.5, 0.0])


@pytest.mark.parametrize("shape, expected", [
    (rectangle(2.5), 2.5),
    (disk(), 1.0),
    (diamond(3.0), 3.0),
    (custom([(0, 1), (2, 0)]), 2.0),
])
def test_support(shape, expected):
    assert support(shape) == expected


@pytest.mark.parametrize("shape, x, y, expected", [
    (disk(), 0.6, 0.8, True),
    (diamond(), 0.5, 0.6, False),
    (rectangle(1.0), 1.0, 1.0, True),
    (rectangle(1.0), 1.0, 1.0000001, False),
    (diamond(), -0.5, -0.5, True),
])
def test_contains_boundary_convention(shape, x, y, expected):
    assert contains(shape, x, y) is expected


@pytest.mark.parametrize("shape, expected", [
    (rectangle(2.0), 8.0),
    (disk(), math.pi),
    (diamond(), 2.0),
    (custom([(0, 1), (1, 0)]), 2.0),
    (custom([(0, 1), (0.5, 1), (1, 0)]), 3.0),
])
def test_area(shape, expected):
    assert area(shape) == pytest.approx(expected, rel=1e-14)


def test_valid_builtins_have_no_violations():
    for shape in BUILTINS:
        assert validate(shape) == []


def test_rising_profile_reports_origin_and_monotonicity():
    codes = [v.code for v in validate(custom([(0, 0), (1, 1)]))]
    assert codes == ['empty_interior', 'monotonicity']


def test_non_monotone_profile_reports_only_monotonicity():
    violations = validate(custom([(0, 1), (0.5, 0.2), (1, 0.9)]))
    assert [(v.code, v.index) for v in violations] == [('monotonicity', 2)]


def test_convex_profile_reports_concavity():
    violations = validate(custom([(0, 1), (0.5, 0.2), (1, 0.0)]))
    assert violations
    assert {v.code for v in violations} == {'concavity'}


@pytest.mark.parametrize("points, code", [
    ([(0, 1)], 'profile'),
    ([(0.1, 1), (1, 0)], 'origin'),
    ([(0, 1), (1, 0.5), (1, 0)], 'abscissa_order'),
    ([(0, 1), (1, -0.5)], 'negative_height'),
    ([(0, 1), (float('nan'), 0)], 'finite'),
])
def test_profile_violation_codes(points, code):
    assert code in [v.code for v in validate(custom(points))]


@pytest.mark.parametrize("shape", [rectangle(0.0), rectangle(-1.0), disk(-1.0)])
def test_invalid_builtin_parameters(shape):
    with pytest.raises(ShapeError) as info:
        require_valid(shape)
    assert info.value.violations


def test_transpose_examples():
    assert transpose(rectangle(2.0)) == rectangle(0.5)
    assert transpose(disk()) == disk()
    assert transpose(diamond()) == diamond()


def test_transpose_custom_diamond_matches_diamond():
    flipped = transpose(custom([(0, 1), (1, 0)]))
    xs = np.linspace(0.0, 1.0, 101)
    np.testing.assert_allclose(height(flipped, xs), height(diamond(), xs), atol=1e-12)


def test_transpose_rejects_interior_plateau():
    shape = custom([(0, 1), (0.5, 0.8), (0.8, 0.8), (1, 0)])
    with pytest.raises(ShapeError):
        transpose(shape)


def test_transpose_keeps_split_leading_plateau():
    flipped = transpose(custom([(0, 1), (0.25, 1), (0.5, 1), (1, 0)]))
    assert validate(flipped) == []
    assert support(flipped) == 1.0
    assert height(flipped, 1.0) == pytest.approx(0.5, abs=1e-12)
    assert height(flipped, 0.5) == pytest.approx(0.75, abs=1e-12)


@pytest.mark.parametrize("text, kind", [
    ("rect:c=2", ShapeKind.RECTANGLE),
    ("disk", ShapeKind.DISK),
    ("disk:scale=2", ShapeKind.DISK),
    ("diamond", ShapeKind.DIAMOND),
    ("rect:c=0.5,scale=3", ShapeKind.RECTANGLE),
])
def test_parse_builtins(text, kind):
    shape = parse(text)
    assert shape.kind is kind
    assert parse(shape.label()) == shape


@pytest.mark.parametrize("text", ["rect", "rect:c=abc", "hexagon", "disk:radius=2", "rect:c=-1"])
def test_parse_rejects_bad_strings(text):
    with pytest.raises(ShapeError):
        parse(text)


def test_from_file_reads_profiles(tmp_path):
    path = tmp_path / "shape.json"
    path.write_text(json.dumps([[0, 1], [0.5, 1], [1, 0]]))
    shape = parse(f"file:{path}")
    assert shape.kind is ShapeKind.CUSTOM
    assert support(shape) == 1.0
    assert validate(shape) == []

    wrapped = tmp_path / "wrapped.json"
    wrapped.write_text(json.dumps({"profile": [[0, 2], [1, 0]]}))
    assert from_file(str(wrapped)).profile == ((0.0, 2.0), (1.0, 0.0))


def test_from_file_errors(tmp_path):
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    with pytest.raises(ShapeError):
        from_file(str(broken))
    with pytest.raises(ShapeError):
        from_file(str(tmp_path / "missing.json"))


def test_from_file_rejects_undecodable_bytes(tmp_path):
    path = tmp_path / "latin.json"
    path.write_bytes(b"[[0, 1], [1, 0]] \xff\xfe")
    with pytest.raises(ShapeError) as info:
        from_file(str(path))
    assert "UTF-8" in str(info.value)


def test_cached_validation_returns_fresh_lists():
    polygon = as_custom(disk(), 2500)
    first = validate(polygon)
    assert first == []
    first.append("mutated")
    assert validate(polygon) == []


def test_scaled_and_as_custom():
    assert support(scaled(diamond(), 3.0)) == 3.0
    assert height(scaled(custom([(0, 1), (1, 0)]), 2.0), 1.0) == pytest.approx(1.0)
    polygon = as_custom(disk(), samples=512)
    assert validate(polygon) == []
    assert area(polygon) == pytest.approx(math.pi, rel=1e-4)
    assert as_custom(rectangle(2.0)).profile == ((0.0, 1.0), (2.0, 1.0))


@given(st.sampled_from(BUILTINS), st.floats(-3.0, 3.0))
def test_height_is_even(shape, x):
    assert height(shape, x) == height(shape, -x)


@given(st.sampled_from(BUILTINS), st.floats(-3.0, 3.0), st.floats(-3.0, 3.0))
def test_contains_agrees_with_height_away_from_boundary(shape, x, y):
    a = support(shape)
    h = height(shape, abs(x))
    if abs(abs(x) - a) < 1e-9 or abs(abs(y) - h) < 1e-9:
        return
    assert contains(shape, x, y) == (abs(x) <= a and abs(y) <= h)


@given(st.sampled_from(BUILTINS))
def test_builtin_transpose_is_an_involution(shape):
    twice = transpose(transpose(shape))
    assert twice.kind is shape.kind
    assert twice.aspect == pytest.approx(shape.aspect, rel=1e-15)


@settings(max_examples=50, deadline=None)
@given(concave_profiles())
def test_custom_transpose_is_an_involution(shape):
    assert validate(shape) == []
    twice = transpose(transpose(shape))
    assert validate(twice) == []
    a = support(shape)
    assert support(twice) == pytest.approx(a, abs=1e-12)
    xs = np.linspace(0.0, a, 257)
    np.testing.assert_allclose(height(twice, xs), height(shape, xs), atol=1e-9)

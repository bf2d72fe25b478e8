"""
Shapes - compact convex regions symmetric about both axes.

A shape is described by its upper-boundary height function h on [-A, A].
Builtin shapes (rectangle, disk, diamond) use exact formulas and exact
membership predicates; Custom shapes are even piecewise-linear profiles
given by samples (x_i, h_i) on [0, A].

Shape strings accepted by `parse`:
    rect:c=2          rectangle [-c, c] x [-1, 1]
    rect:c=2,scale=3  the same rectangle dilated by 3
    disk              unit disk (also disk:scale=2)
    diamond           unit diamond |x| + |y| <= 1
    file:shape.json   JSON array of [x, h] pairs
"""

import json
import logging
import math
from dataclasses import asdict, dataclass, field, replace
from enum import Enum
from functools import lru_cache
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import ShapeError

logger = logging.getLogger(__name__)

CONCAVITY_TOL = 1e-12
INVERSION_TOL = 1e-15

ArrayLike = Union[float, np.ndarray]


class ShapeKind(Enum):
    RECTANGLE = 'rect'
    DISK = 'disk'
    DIAMOND = 'diamond'
    CUSTOM = 'custom'


@dataclass(frozen=True)
class ShapeViolation:
    """One violated shape invariant."""
    code: str
    index: Optional[int]
    message: str

    def __str__(self):
        where = f" at index {self.index}" if self.index is not None else ""
        return f"{self.code}{where}: {self.message}"


@dataclass(frozen=True)
class ShapeSpec:
    """
    A shape K. `aspect` is the rectangle half-width c, `profile` the
    Custom samples, and `scale` a dilation factor applied to builtins.
    """
    kind: ShapeKind
    aspect: float = 1.0
    profile: Tuple[Tuple[float, float], ...] = field(default_factory=tuple)
    scale: float = 1.0

    @property
    def is_builtin(self) -> bool:
        return self.kind is not ShapeKind.CUSTOM

    def label(self) -> str:
        """Canonical shape string, parseable by `parse` except for inline profiles."""
        if self.kind is ShapeKind.RECTANGLE:
            text = f"rect:c={self.aspect!r}"
        elif self.kind is ShapeKind.CUSTOM:
            text = "custom:" + json.dumps([list(p) for p in self.profile])
        else:
            text = self.kind.value
        if self.scale != 1.0:
            text += ("," if ":" in text else ":") + f"scale={self.scale!r}"
        return text

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data['kind'] = self.kind.value
        data['profile'] = [list(p) for p in self.profile]
        return data


# Factories

def rectangle(c: float, scale: float = 1.0) -> ShapeSpec:
    return ShapeSpec(ShapeKind.RECTANGLE, aspect=float(c), scale=float(scale))


def disk(scale: float = 1.0) -> ShapeSpec:
    return ShapeSpec(ShapeKind.DISK, scale=float(scale))


def diamond(scale: float = 1.0) -> ShapeSpec:
    return ShapeSpec(ShapeKind.DIAMOND, scale=float(scale))


def custom(points: Sequence[Sequence[float]]) -> ShapeSpec:
    """Build a Custom shape from (x, h) samples. Does not validate."""
    try:
        profile = tuple((float(x), float(h)) for x, h in points)
    except (TypeError, ValueError) as e:
        raise ShapeError(f"profile must be a list of [x, h] number pairs: {e}")
    return ShapeSpec(ShapeKind.CUSTOM, profile=profile)


def from_file(path: str) -> ShapeSpec:
    """Load a Custom shape from a JSON document holding an array of [x, h] pairs."""
    try:
        with open(path, 'r', encoding='utf-8') as f:
            data = json.load(f)
    except OSError as e:
        raise ShapeError(f"cannot read shape file {path}: {e}")
    except UnicodeDecodeError as e:
        raise ShapeError(f"shape file {path} is not UTF-8 text: {e}")
    except json.JSONDecodeError as e:
        raise ShapeError(f"shape file {path} is not valid JSON: {e}")

    if isinstance(data, dict):
        data = data.get('profile')
    if not isinstance(data, list) or not all(isinstance(p, list) and len(p) == 2 for p in data):
        raise ShapeError(f"shape file {path} must contain an array of [x, h] pairs")
    logger.debug(f"Loaded {len(data)} profile samples from {path}")
    return custom(data)


def _parse_options(text: str) -> Dict[str, float]:
    options = {}
    for item in filter(None, text.split(',')):
        if '=' not in item:
            raise ShapeError(f"malformed shape option {item!r}, expected key=value")
        key, value = item.split('=', 1)
        try:
            options[key.strip()] = float(value)
        except ValueError:
            raise ShapeError(f"shape option {key!r} needs a number, got {value!r}")
    return options


def parse(text: str) -> ShapeSpec:
    """Parse a CLI shape string such as 'rect:c=2', 'disk' or 'file:path.json'."""
    text = text.strip()
    if text.startswith('file:'):
        return from_file(text[len('file:'):])

    name, _, rest = text.partition(':')
    options = _parse_options(rest)
    scale = options.pop('scale', 1.0)
    name = name.lower()

    if name in ('rect', 'rectangle'):
        if 'c' not in options:
            raise ShapeError("rectangle needs an aspect ratio, e.g. rect:c=2")
        shape = rectangle(options.pop('c'), scale)
    elif name == 'disk':
        shape = disk(scale)
    elif name == 'diamond':
        shape = diamond(scale)
    else:
        raise ShapeError(f"unknown shape {name!r}; expected rect, disk, diamond or file")

    if options:
        raise ShapeError(f"unexpected option(s) for {name}: {', '.join(sorted(options))}")
    return require_valid(shape)


# Queries

def support(shape: ShapeSpec) -> float:
    """Half-width A of the support interval [-A, A]."""
    if shape.kind is ShapeKind.RECTANGLE:
        return shape.scale * shape.aspect
    if shape.kind is ShapeKind.CUSTOM:
        return shape.scale * shape.profile[-1][0]
    return shape.scale


def height(shape: ShapeSpec, x: ArrayLike) -> ArrayLike:
    """h_K(|x|), zero outside the support. Accepts scalars or numpy arrays."""
    s = shape.scale
    u = np.abs(np.asarray(x, dtype=float)) / s

    if shape.kind is ShapeKind.RECTANGLE:
        h = np.where(u <= shape.aspect, 1.0, 0.0)
    elif shape.kind is ShapeKind.DISK:
        h = np.sqrt(np.clip(1.0 - u * u, 0.0, None))
        h = np.where(u <= 1.0, h, 0.0)
    elif shape.kind is ShapeKind.DIAMOND:
        h = np.clip(1.0 - u, 0.0, None)
    else:
        xs, hs = _profile_arrays(shape)
        h = np.interp(u, xs, hs, right=0.0)

    h = s * h
    return float(h) if np.ndim(h) == 0 else h


def contains(shape: ShapeSpec, x: float, y: float) -> bool:
    """Closed-set membership; boundary points are included."""
    s = shape.scale
    ax, ay = abs(x), abs(y)
    if shape.kind is ShapeKind.RECTANGLE:
        return ax <= s * shape.aspect and ay <= s
    if shape.kind is ShapeKind.DISK:
        return math.hypot(ax, ay) <= s
    if shape.kind is ShapeKind.DIAMOND:
        return ax + ay <= s
    return ax <= support(shape) and ay <= height(shape, ax)


def area(shape: ShapeSpec) -> float:
    s2 = shape.scale ** 2
    if shape.kind is ShapeKind.RECTANGLE:
        return 4.0 * shape.aspect * s2
    if shape.kind is ShapeKind.DISK:
        return math.pi * s2
    if shape.kind is ShapeKind.DIAMOND:
        return 2.0 * s2
    xs, hs = _profile_arrays(shape)
    return 2.0 * float(np.sum((hs[1:] + hs[:-1]) * np.diff(xs))) * s2


def breakpoints(shape: ShapeSpec) -> List[float]:
    """Abscissas on [0, A] where h is not smooth."""
    a = support(shape)
    if shape.kind is ShapeKind.CUSTOM:
        return [shape.scale * x for x, _ in shape.profile]
    return [0.0, a]


def _profile_arrays(shape: ShapeSpec) -> Tuple[np.ndarray, np.ndarray]:
    if not shape.profile:
        raise ShapeError("custom shape has an empty profile")
    return _arrays_for(shape.profile)


@lru_cache(maxsize=64)
def _arrays_for(profile: Tuple[Tuple[float, float], ...]) -> Tuple[np.ndarray, np.ndarray]:
    pts = np.asarray(profile, dtype=float)
    xs, hs = pts[:, 0].copy(), pts[:, 1].copy()
    # shared between callers
    xs.setflags(write=False)
    hs.setflags(write=False)
    return xs, hs


# Validation

def validate(shape: ShapeSpec) -> List[ShapeViolation]:
    """Report every violated invariant. Never raises."""
    return list(_violations(shape))


@lru_cache(maxsize=64)
def _violations(shape: ShapeSpec) -> Tuple[ShapeViolation, ...]:
    violations: List[ShapeViolation] = []

    if not (math.isfinite(shape.scale) and shape.scale > 0):
        violations.append(ShapeViolation('scale', None, f"scale must be positive, got {shape.scale}"))

    if shape.kind is ShapeKind.RECTANGLE:
        if not (math.isfinite(shape.aspect) and shape.aspect > 0):
            violations.append(ShapeViolation('aspect', None, f"aspect ratio must be positive, got {shape.aspect}"))
        return tuple(violations)
    if shape.kind is not ShapeKind.CUSTOM:
        return tuple(violations)

    profile = shape.profile
    if len(profile) < 2:
        violations.append(ShapeViolation('profile', None, "profile needs at least two samples"))
        return tuple(violations)

    xs = [x for x, _ in profile]
    hs = [h for _, h in profile]
    if not all(math.isfinite(v) for v in xs + hs):
        violations.append(ShapeViolation('finite', None, "profile contains non-finite values"))
        return tuple(violations)

    if xs[0] != 0.0:
        violations.append(ShapeViolation('origin', 0, f"first abscissa must be 0, got {xs[0]}"))
    for i in range(1, len(xs)):
        if xs[i] <= xs[i - 1]:
            violations.append(ShapeViolation('abscissa_order', i, "abscissas must be strictly increasing"))
    if xs[-1] <= 0:
        violations.append(ShapeViolation('support', len(xs) - 1, "support half-width A must be positive"))
    for i, h in enumerate(hs):
        if h < 0:
            violations.append(ShapeViolation('negative_height', i, f"height {h} is negative"))
    if hs[0] <= 0:
        violations.append(ShapeViolation('empty_interior', 0, "h(0) must be positive"))
    for i in range(1, len(hs)):
        if hs[i] > hs[i - 1]:
            violations.append(ShapeViolation('monotonicity', i, "height must be nonincreasing on [0, A]"))

    # concavity is only meaningful on a well-ordered, monotone profile
    if not violations:
        violations.extend(_concavity_violations(np.asarray(xs), np.asarray(hs)))
    return tuple(violations)


def _concavity_violations(xs: np.ndarray, hs: np.ndarray) -> List[ShapeViolation]:
    i, j = np.triu_indices(len(xs), k=2)
    mid = np.interp((xs[i] + xs[j]) / 2.0, xs, hs)
    bad = mid < (hs[i] + hs[j]) / 2.0 - CONCAVITY_TOL
    return [
        ShapeViolation('concavity', int(a), f"midpoint of samples {a} and {b} lies below the chord")
        for a, b in zip(i[bad], j[bad])
    ]


def require_valid(shape: ShapeSpec) -> ShapeSpec:
    violations = validate(shape)
    if violations:
        raise ShapeError(
            "invalid shape: " + "; ".join(str(v) for v in violations),
            violations=violations,
        )
    return shape


# Transformations

def scaled(shape: ShapeSpec, factor: float) -> ShapeSpec:
    """Dilate the shape by `factor`."""
    if not (math.isfinite(factor) and factor > 0):
        raise ShapeError(f"scale factor must be positive, got {factor}")
    if shape.kind is ShapeKind.CUSTOM:
        return replace(shape, profile=tuple((x * factor, h * factor) for x, h in shape.profile))
    return replace(shape, scale=shape.scale * factor)


def as_custom(shape: ShapeSpec, samples: int = 256) -> ShapeSpec:
    """
    Piecewise-linear rendition of a shape. Rectangle and diamond are
    exact; the disk becomes an inscribed polygon with `samples` edges
    on the quarter circle.
    """
    if shape.kind is ShapeKind.CUSTOM:
        return shape
    if shape.kind is ShapeKind.RECTANGLE:
        base = custom([(0.0, 1.0), (shape.aspect, 1.0)])
    elif shape.kind is ShapeKind.DIAMOND:
        base = custom([(0.0, 1.0), (1.0, 0.0)])
    else:
        angles = np.linspace(0.0, math.pi / 2, samples + 1)
        hs = np.cos(angles)
        hs[-1] = 0.0
        base = custom(list(zip(np.sin(angles).tolist(), hs.tolist())))
    return scaled(base, shape.scale) if shape.scale != 1.0 else base


def _sup_abscissa(shape: ShapeSpec, level: float) -> float:
    """sup{x in [0, A] : h(x) >= level}, by bisection."""
    a = support(shape)
    if height(shape, a) >= level:
        return a
    lo, hi = 0.0, a
    while hi - lo > INVERSION_TOL * max(1.0, a):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if height(shape, mid) >= level:
            lo = mid
        else:
            hi = mid
    return lo


def transpose(shape: ShapeSpec) -> ShapeSpec:
    """Reflect the shape about the line y = x."""
    if shape.kind is ShapeKind.RECTANGLE:
        # [-1, 1] x [-c, c] is Rectangle(1/c) dilated by c; dilation is dropped
        return replace(shape, aspect=1.0 / shape.aspect)
    if shape.kind is not ShapeKind.CUSTOM:
        return shape

    require_valid(shape)
    hs = [h for _, h in shape.profile]
    # a plateau at h(0) becomes the terminal segment; any other cannot be inverted
    for i in range(1, len(hs) - 1):
        if hs[i + 1] == hs[i] < hs[0]:
            raise ShapeError(
                f"cannot transpose: height plateau at index {i} is interior to (0, A)",
                violations=[ShapeViolation('plateau', i, "interior plateau")],
            )

    a = support(shape)
    levels = sorted({shape.scale * h for h in hs if h > 0})
    points = [(0.0, a)]
    points.extend((level, _sup_abscissa(shape, level)) for level in levels)
    transposed = ShapeSpec(ShapeKind.CUSTOM, profile=tuple(points))
    logger.debug(f"Transposed custom profile with {len(shape.profile)} samples into {len(points)}")
    return transposed

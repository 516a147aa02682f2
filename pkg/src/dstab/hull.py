"""Planar convex hulls of value-set vertex images and origin tests."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

from . import kernels
from .errors import InputError

DEFAULT_TOL = 1e-10


class Location(enum.Enum):
    OUTSIDE = kernels.OUTSIDE
    ON_BOUNDARY = kernels.BOUNDARY
    INSIDE = kernels.INSIDE


@dataclass(frozen=True)
class Hull:
    """Counterclockwise extreme points; ``source_indices[t]`` indexes the input list."""

    points: tuple[complex, ...]
    source_indices: tuple[int, ...]

    def __len__(self):
        return len(self.points)

    def edge(self, e: int) -> tuple[complex, complex]:
        return self.points[e], self.points[(e + 1) % len(self.points)]


@dataclass(frozen=True)
class OriginClass:
    location: Location
    edge: int | None
    distance: float


def convex_hull(points: Sequence[complex]) -> Hull:
    if len(points) == 0:
        raise InputError("convex hull of an empty set")
    xs = [complex(p).real for p in points]
    ys = [complex(p).imag for p in points]
    idx = kernels.hull_indices(xs, ys)
    return Hull(tuple(complex(xs[t], ys[t]) for t in idx), tuple(idx))


def classify_origin(hull: Hull, tol: float = DEFAULT_TOL) -> OriginClass:
    """Inside / OnBoundary(edge) / Outside, with tolerance relative to the largest point."""
    if tol < 0:
        raise InputError("tolerance must be nonnegative")
    xs = [p.real for p in hull.points]
    ys = [p.imag for p in hull.points]
    code, edge, dist = kernels.locate_origin(xs, ys, list(range(len(xs))), tol)
    loc = Location(code)
    on_edge = loc is Location.ON_BOUNDARY and edge >= 0
    return OriginClass(loc, edge if on_edge else None, dist)


def segment_contains_origin(a: complex, b: complex, tol: float = DEFAULT_TOL) -> bool:
    if tol < 0:
        raise InputError("tolerance must be nonnegative")
    a, b = complex(a), complex(b)
    d = kernels.segment_distance(a.real, a.imag, b.real, b.imag)
    return d <= tol * max(abs(a), abs(b), 1.0)

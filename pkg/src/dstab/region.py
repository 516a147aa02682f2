"""Root regions described as unions of half-planes and disks."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegreeDropError, DomainError, InputError


@dataclass(frozen=True)
class HalfPlane:
    """``Re(z) < sigma``; boundary swept upward by ``sigma + j*delta``."""

    sigma: float = 0.0
    interval: tuple[float, float] = (0.0, 1.0)

    def __post_init__(self):
        _check_interval(self.interval)

    def point(self, delta: float) -> complex:
        return complex(self.sigma, delta)

    def contains(self, z: complex) -> bool:
        return z.real < self.sigma


@dataclass(frozen=True)
class Disk:
    """``|z - center| < radius``; boundary swept by ``center + radius*e^{j*delta}``."""

    center: complex = 0j
    radius: float = 1.0
    interval: tuple[float, float] = (0.0, 2 * math.pi)

    def __post_init__(self):
        _check_interval(self.interval)
        if not self.radius > 0:
            raise InputError("disk radius must be positive")

    def point(self, delta: float) -> complex:
        return self.center + self.radius * cmath.exp(1j * delta)

    def contains(self, z: complex) -> bool:
        return abs(z - self.center) < self.radius


def _check_interval(interval):
    lo, hi = interval
    if not lo < hi:
        raise InputError(f"sweep interval {interval} is empty")


BoundaryPiece = HalfPlane | Disk


@dataclass(frozen=True)
class DRegion:
    pieces: tuple

    def __post_init__(self):
        if not self.pieces:
            raise InputError("a region needs at least one piece")
        object.__setattr__(self, "pieces", tuple(self.pieces))

    def contains(self, z: complex) -> bool:
        return any(piece.contains(z) for piece in self.pieces)


def left_half_plane(delta_lo: float, delta_hi: float) -> DRegion:
    return DRegion((HalfPlane(0.0, (delta_lo, delta_hi)),))


def sweep_point(piece, delta: float) -> complex:
    lo, hi = piece.interval
    if not lo <= delta <= hi:
        raise DomainError(f"delta={delta} outside sweep interval [{lo}, {hi}]")
    return piece.point(delta)


@dataclass(frozen=True)
class GridPoint:
    piece: int
    i: int
    j: int
    delta: float

    @property
    def freq_id(self) -> tuple[int, int, int]:
        return (self.piece, self.i, self.j)


@dataclass(frozen=True)
class FrequencyGrid:
    n_r: int
    n_c: int
    delta_lo: float
    delta_hi: float
    entries: tuple

    def at(self, i: int, j: int) -> GridPoint:
        return self.entries[(j - 1) * self.n_r + (i - 1)]

    def column(self, j: int) -> tuple:
        start = (j - 1) * self.n_r
        return self.entries[start:start + self.n_r]

    def deltas(self) -> np.ndarray:
        return np.array([e.delta for e in self.entries])


def grid_delta(delta_lo: float, delta_hi: float, n_r: int, n_c: int, i: int, j: int) -> float:
    span = delta_hi - delta_lo
    return delta_lo + span * (i - 1) / n_r + span * (j - 1) / (n_r * n_c)


def make_grid(piece, n_r: int, n_c: int, delta_lo: float | None = None,
              delta_hi: float | None = None, piece_index: int = 0) -> FrequencyGrid:
    """Relabeled uniform grid: ``n_r`` interleaved branches of ``n_c`` points.

    Entries are ordered column-major (all ``i`` for ``j=1``, then ``j=2``, ...).
    The grid range defaults to the piece's sweep interval and must lie inside it.
    """
    if n_r < 2 or n_c < 1:
        raise InputError("need n_r >= 2 and n_c >= 1")
    lo, hi = piece.interval
    dl = lo if delta_lo is None else float(delta_lo)
    du = hi if delta_hi is None else float(delta_hi)
    if not (lo <= dl < du <= hi):
        raise InputError(f"grid range [{dl}, {du}] not inside sweep interval [{lo}, {hi}]")
    entries = []
    for j in range(1, n_c + 1):
        for i in range(1, n_r + 1):
            entries.append(GridPoint(piece_index, i, j, grid_delta(dl, du, n_r, n_c, i, j)))
    return FrequencyGrid(n_r, n_c, dl, du, tuple(entries))


def nominal_roots(poly, q0) -> np.ndarray:
    """Roots of ``p(s, q0)`` from the companion matrix of its monic normalization."""
    a = np.asarray(poly.coefficients(q0), dtype=float)
    if poly.degree < 1:
        raise InputError("degree must be at least one")
    lead = a[-1]
    if abs(lead) < 1e-12 * np.max(np.abs(a)):
        raise DegreeDropError("leading coefficient vanishes at the nominal point")
    return np.roots(a[::-1])


def nominal_roots_in_region(poly, region: DRegion, q0) -> bool:
    return all(region.contains(complex(r)) for r in nominal_roots(poly, q0))

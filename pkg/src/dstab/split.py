"""Midpoint splitting of subdomains along a differing critical coordinate."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .bounds import BoundsConfig, FrequencyBounds, ValueSetModel, evaluate_box
from .errors import DegenerateCutError, DepthLimitError, InputError
from .params import ParameterBox


class CutScheme(enum.Enum):
    MAXIMAL = "maximal"
    FAIR = "fair"


@dataclass(frozen=True)
class Subdomain:
    """One branch-and-bound work item.

    ``box.nominal`` is the box's own center; the scaling anchor is always
    ``root.nominal`` so bounds of different subdomains stay comparable.
    """

    box: ParameterBox
    root: ParameterBox
    freq_id: tuple = ()
    bounds: FrequencyBounds | None = None
    depth: int = 0

    @property
    def k_l(self) -> float:
        return self.bounds.k_l

    @property
    def pair(self):
        return self.bounds.pair

    def evaluated(self, model: ValueSetModel, cfg: BoundsConfig) -> "Subdomain":
        return replace(self, bounds=evaluate_box(model, self.box.lower, self.box.upper, cfg))


def root_subdomain(root: ParameterBox, freq_id=()) -> Subdomain:
    return Subdomain(root, root, freq_id)


def choose_cut_coordinate(sub: Subdomain, scheme: CutScheme) -> int:
    pair = sub.pair
    if pair is None or pair.m < 2:
        raise InputError("only subdomains with m >= 2 are split")
    widths = sub.box.widths
    if scheme is CutScheme.MAXIMAL:
        key = {i: -widths[i] for i in pair.differing}
    elif scheme is CutScheme.FAIR:
        root_w = sub.root.widths
        key = {i: root_w[i] / widths[i] for i in pair.differing}
    else:
        raise InputError(f"unknown cut scheme {scheme!r}")
    return min(pair.differing, key=lambda i: (key[i], i))


def _halves(box: ParameterBox, i: int) -> tuple[ParameterBox, ParameterBox]:
    lo, hi = box.lower[i], box.upper[i]
    if not hi > lo:
        raise DegenerateCutError(f"coordinate {i} has zero width")
    mid = 0.5 * (lo + hi)
    upper_a = list(box.upper)
    upper_a[i] = mid
    lower_b = list(box.lower)
    lower_b[i] = mid
    return ParameterBox(box.lower, tuple(upper_a)), ParameterBox(tuple(lower_b), box.upper)


def split_box(sub: Subdomain, i: int) -> tuple[Subdomain, Subdomain]:
    """Cut at the midpoint of coordinate ``i``; children carry no cached bounds."""
    a, b = _halves(sub.box, i)
    return (Subdomain(a, sub.root, sub.freq_id, None, sub.depth + 1),
            Subdomain(b, sub.root, sub.freq_id, None, sub.depth + 1))


def longest_edge_coordinate(box: ParameterBox, root: ParameterBox) -> int:
    """Coordinate with the largest width relative to the root (classic rule)."""
    rel = [w / r if r > 0 else -1.0 for w, r in zip(box.widths, root.widths)]
    best = max(rel)
    if best <= 0:
        raise DegenerateCutError("box has no positive-width coordinate")
    return rel.index(best)


def depth_cap(root: ParameterBox, k_tol: float) -> int:
    diam = max(root.diameter, k_tol)
    return int(math.ceil(10 * root.dim * max(math.log2(diam / k_tol), 1.0)))


def check_depth(sub: Subdomain, cap: int):
    if sub.depth > cap:
        raise DepthLimitError(f"subdomain depth {sub.depth} exceeds cap {cap}")


@dataclass
class NestedTrace:
    distances: list
    gaps: list
    terminated: bool


def nested_sequence(model: ValueSetModel, root: ParameterBox, scheme: CutScheme,
                    cfg: BoundsConfig, eta: float = 0.0, max_splits: int = 200) -> NestedTrace:
    """Split repeatedly, keeping the child with the smaller ``k_l``.

    Records the critical-vertex distance and ``k_u - k_l`` after every
    evaluation.  Stops when the critical vertices differ in at most one
    coordinate (``terminated``), the distance drops to ``eta``, or after
    ``max_splits`` splits.
    """
    sub = root_subdomain(root).evaluated(model, cfg)
    distances, gaps = [], []
    for _ in range(max_splits + 1):
        if sub.bounds.pair is None:
            return NestedTrace(distances, gaps, True)
        pair = sub.pair
        distances.append(float(np.linalg.norm(np.subtract(pair.q_alpha, pair.q_beta))))
        gaps.append(sub.bounds.k_u - sub.bounds.k_l)
        if pair.m <= 1:
            return NestedTrace(distances, gaps, True)
        if distances[-1] <= eta or len(distances) > max_splits:
            break
        a, b = split_box(sub, choose_cut_coordinate(sub, scheme))
        a = a.evaluated(model, cfg)
        b = b.evaluated(model, cfg)
        sub = a if a.k_l <= b.k_l else b
    return NestedTrace(distances, gaps, False)

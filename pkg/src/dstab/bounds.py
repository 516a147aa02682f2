"""Per-frequency bounds on the stability margin of a box of parameters.

At a fixed boundary point ``z`` a multilinear family is expanded once about
the anchor ``q0``.  The image of every vertex of ``q0 + k (Q - q0)`` is then a
polynomial in ``k`` of degree at most ``l``, which makes the first-entry
searches below cheap and lets us enumerate every scale at which the origin can
touch a segment between two vertex images (roots of the cross product).
Those event points are merged into the forward march so that first entry is
never stepped over, even when origin inclusion is not monotone in ``k``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ConsistencyError, InputError, ZeroAtNominal
from .hull import Hull
from .oracle import oracle_k_m  # noqa: F401  (re-exported test support)
from .params import ParameterBox, UncertainPolynomial, multilinear_expansion, vertex_array


@dataclass(frozen=True)
class BoundsConfig:
    k_tol: float = 1e-6
    k_cap: float = 1e4
    k_step: float = 1e-3
    growth: float = 2.0
    geom_tol: float = 1e-10
    boundary_tol: float = 1e-6
    path_cap: int = 720
    seed: int = 0

    def __post_init__(self):
        if not (self.k_tol > 0 and self.k_cap > 0 and self.k_step > 0 and self.growth > 1):
            raise InputError("invalid bounds configuration")


@dataclass(frozen=True)
class CriticalPair:
    q_alpha: tuple[float, ...]
    q_beta: tuple[float, ...]
    m: int
    differing: tuple[int, ...]
    alpha_index: int
    beta_index: int


@dataclass(frozen=True)
class VertexPath:
    waypoints: tuple[tuple[float, ...], ...]
    indices: tuple[int, ...]


@dataclass(frozen=True)
class FrequencyBounds:
    """Bounds for one (frequency, box).

    ``capped`` marks a conservative ``k_u = k_cap`` (no vertex path reached the
    origin); such values are not upper-bound witnesses.
    """

    k_l: float
    k_u: float
    exact: bool
    pair: CriticalPair | None
    capped: bool = False

    @property
    def m(self) -> int:
        return self.pair.m if self.pair is not None else 0


class ValueSetModel:
    """``p(z, .)`` as a multilinear expansion about a fixed anchor point."""

    def __init__(self, poly: UncertainPolynomial, z: complex, anchor, scales=None):
        self.z = complex(z)
        self.anchor = np.asarray(anchor, dtype=float)
        self.dim = self.anchor.size
        if poly.n_params != self.dim:
            raise InputError("anchor and polynomial disagree on the parameter count")
        if scales is None:
            scales = np.ones(self.dim)
        self.coeffs = multilinear_expansion(poly, self.z, self.anchor, scales)
        sizes = np.array([bin(mask).count("1") for mask in range(1 << self.dim)])
        weights = np.prod(np.where(
            (np.arange(1 << self.dim)[:, None] >> np.arange(self.dim)[None, :]) & 1,
            np.abs(np.where(np.asarray(scales) > 0, scales, 1.0))[None, :], 1.0), axis=1)
        # magnitude reference for the zero-at-nominal test
        self.reference = float(np.sum(np.abs(self.coeffs) * weights)) or 1.0
        self._sizes = sizes

    @property
    def nominal_value(self) -> complex:
        return complex(self.coeffs[0])

    def check_nominal(self, tol: float):
        if abs(self.coeffs[0]) <= tol * self.reference:
            raise ZeroAtNominal(self.z)

    def vertex_polys(self, lower, upper):
        d = vertex_array(lower, upper) - self.anchor[None, :]
        return kernels.vertex_polys(self.coeffs.real.copy(), self.coeffs.imag.copy(), d)


def model_for(poly: UncertainPolynomial, z: complex, box: ParameterBox, anchor=None) -> ValueSetModel:
    anchor = box.nominal if anchor is None else anchor
    half = 0.5 * box.widths
    return ValueSetModel(poly, z, anchor, np.where(half > 0, half, 1.0))


# ---------------------------------------------------------------- events

def event_points(pre, pim, ea, eb, lo: float, hi: float) -> list[float]:
    """Scales in ``(lo, hi]`` at which the origin can lie on some segment ``[P_a, P_b]``."""
    if len(ea) == 0:
        return []
    return sorted(kernels.event_points(pre, pim, list(ea), list(eb), lo, hi))


# ---------------------------------------------------------------- k_l

def lower_bound_polys(pre, pim, cfg: BoundsConfig) -> float:
    """First scale at which the origin enters the hull of the vertex images."""
    if pre.shape[0] == 1:
        # point box: images never move, origin is out (nominal checked by caller)
        return math.inf
    k, found = kernels.search(pre, pim, (), (), False, 0.0, cfg.k_cap, cfg.k_step,
                              cfg.growth, cfg.k_tol, cfg.geom_tol)
    return k if found else math.inf


def _hull_at(pre, pim, k) -> Hull:
    xs, ys = kernels.images_at(pre, pim, k)
    idx = kernels.hull_indices(xs, ys)
    return Hull(tuple(complex(xs[t], ys[t]) for t in idx), tuple(idx))


def lower_bound(poly: UncertainPolynomial, z: complex, box: ParameterBox,
                cfg: BoundsConfig | None = None, anchor=None) -> tuple[float, Hull | None]:
    """``(k_l, hull at k_l)``; ``(inf, None)`` when the origin never enters."""
    cfg = cfg or BoundsConfig()
    model = model_for(poly, z, box, anchor)
    model.check_nominal(cfg.geom_tol)
    pre, pim = model.vertex_polys(box.lower, box.upper)
    k_l = lower_bound_polys(pre, pim, cfg)
    if not math.isfinite(k_l):
        return math.inf, None
    return k_l, _hull_at(pre, pim, k_l)


# ---------------------------------------------------------------- critical vertices

def _differing(a: int, b: int, lower, upper) -> tuple[int, ...]:
    x = a ^ b
    return tuple(i for i in range(len(lower)) if (x >> i) & 1 and lower[i] != upper[i])


def critical_pair_from_images(xs, ys, lower, upper, cfg: BoundsConfig) -> CriticalPair:
    """Critical vertices from the vertex images at ``k_l`` (origin on the hull boundary)."""
    n = len(xs)
    idx = kernels.hull_indices(xs, ys)
    scale = max(math.hypot(x, y) for x, y in zip(xs, ys))
    thr = cfg.boundary_tol * scale
    dup_thr = cfg.geom_tol * scale

    def twins(t):
        return [j for j in range(n) if math.hypot(xs[j] - xs[t], ys[j] - ys[t]) <= dup_thr]

    h = len(idx)
    edges = [(idx[e], idx[(e + 1) % h]) for e in range(h if h > 2 else h - 1)]
    dist = [kernels.segment_distance(xs[a], ys[a], xs[b], ys[b]) for a, b in edges]
    point_dist = [math.hypot(xs[t], ys[t]) for t in idx]
    d_min = min(dist + point_dist)
    if d_min > thr:
        raise ConsistencyError(
            f"origin is {d_min / max(scale, 1e-300):.3e} (relative) from the hull boundary at k_l")
    pairs = set()
    for (a, b), d in zip(edges, dist):
        if d <= d_min + thr:
            for u in twins(a):
                for v in twins(b):
                    pairs.add((min(u, v), max(u, v)))
    for t, d in zip(idx, point_dist):
        if d <= d_min + thr:
            for u in twins(t):
                pairs.add((u, u))

    def rank(pair):
        return (len(_differing(pair[0], pair[1], lower, upper)), pair)

    a, b = min(pairs, key=rank)
    verts = vertex_array(lower, upper)
    return CriticalPair(tuple(verts[a]), tuple(verts[b]), len(_differing(a, b, lower, upper)),
                        _differing(a, b, lower, upper), a, b)


def critical_vertices(poly: UncertainPolynomial, z: complex, box: ParameterBox, k_l: float,
                      hull_at_kl: Hull | None = None, cfg: BoundsConfig | None = None,
                      anchor=None) -> CriticalPair:
    cfg = cfg or BoundsConfig()
    model = model_for(poly, z, box, anchor)
    pre, pim = model.vertex_polys(box.lower, box.upper)
    xs, ys = kernels.images_at(pre, pim, k_l)
    return critical_pair_from_images(xs, ys, box.lower, box.upper, cfg)


# ---------------------------------------------------------------- vertex paths

def _orderings(pair: CriticalPair, cap: int, seed: int):
    coords = list(pair.differing)
    if math.factorial(len(coords)) <= cap:
        return [list(p) for p in itertools.permutations(coords)]
    rng = np.random.default_rng(seed)
    out = [sorted(coords), sorted(coords, reverse=True)]
    for _ in range(max(cap - 2, 0)):
        out.append([coords[t] for t in rng.permutation(len(coords))])
    return out


def vertex_paths(pair: CriticalPair, cap: int = 720, seed: int = 0,
                 lower=None, upper=None) -> list[VertexPath]:
    """Coordinate-flip paths from ``q_alpha`` to ``q_beta``.

    All ``m!`` orderings when that is at most ``cap``, otherwise the two
    monotone index orderings plus ``cap - 2`` seeded random ones.
    """
    if pair.m < 2:
        raise InputError("vertex paths are only defined for m >= 2")
    out = []
    for order in _orderings(pair, cap, seed):
        cur = list(pair.q_alpha)
        idx = pair.alpha_index
        points = [tuple(cur)]
        indices = [idx]
        for i in order:
            cur[i] = pair.q_beta[i]
            idx ^= 1 << i
            points.append(tuple(cur))
            indices.append(idx)
        out.append(VertexPath(tuple(points), tuple(indices)))
    return out


def path_edges(pair: CriticalPair, cap: int, seed: int) -> tuple[list[int], list[int]]:
    """Distinct hypercube edges (vertex index pairs) used by the vertex paths."""
    seen = set()
    for order in _orderings(pair, cap, seed):
        idx = pair.alpha_index
        for i in order:
            nxt = idx ^ (1 << i)
            seen.add((min(idx, nxt), max(idx, nxt)))
            idx = nxt
    edges = sorted(seen)
    return [a for a, _ in edges], [b for _, b in edges]


# ---------------------------------------------------------------- k_u

def upper_bound_polys(pre, pim, k_l: float, pair: CriticalPair, cfg: BoundsConfig) -> tuple[float, bool]:
    """``(k_u, capped)``: first scale >= k_l where a vertex path meets the origin."""
    if pair.m <= 1:
        return k_l, False
    ea, eb = path_edges(pair, cfg.path_cap, cfg.seed)
    k, found = kernels.search(pre, pim, ea, eb, True, k_l, cfg.k_cap, cfg.k_step,
                              cfg.growth, cfg.k_tol, cfg.geom_tol)
    if not found:
        return cfg.k_cap, True
    return k, False


def upper_bound(poly: UncertainPolynomial, z: complex, box: ParameterBox, k_l: float,
                pair: CriticalPair, cfg: BoundsConfig | None = None, anchor=None) -> tuple[float, bool]:
    cfg = cfg or BoundsConfig()
    if not math.isfinite(k_l):
        raise InputError("upper bound needs a finite lower bound")
    if pair.m <= 1:
        return k_l, False
    model = model_for(poly, z, box, anchor)
    pre, pim = model.vertex_polys(box.lower, box.upper)
    return upper_bound_polys(pre, pim, k_l, pair, cfg)


# ---------------------------------------------------------------- composite

def evaluate_polys(pre, pim, lower, upper, cfg: BoundsConfig) -> FrequencyBounds:
    k_l = lower_bound_polys(pre, pim, cfg)
    if not math.isfinite(k_l):
        return FrequencyBounds(math.inf, math.inf, True, None)
    xs, ys = kernels.images_at(pre, pim, k_l)
    pair = critical_pair_from_images(xs, ys, lower, upper, cfg)
    if pair.m <= 1:
        return FrequencyBounds(k_l, k_l, True, pair)
    k_u, capped = upper_bound_polys(pre, pim, k_l, pair, cfg)
    return FrequencyBounds(k_l, max(k_u, k_l), False, pair, capped)


def evaluate_box(model: ValueSetModel, lower, upper, cfg: BoundsConfig) -> FrequencyBounds:
    """k_l, critical pair and k_u of one box under the model's anchor."""
    pre, pim = model.vertex_polys(lower, upper)
    return evaluate_polys(pre, pim, tuple(lower), tuple(upper), cfg)


def frequency_bounds(poly: UncertainPolynomial, z: complex, box: ParameterBox,
                     cfg: BoundsConfig | None = None, anchor=None) -> FrequencyBounds:
    cfg = cfg or BoundsConfig()
    model = model_for(poly, z, box, anchor)
    model.check_nominal(cfg.geom_tol)
    return evaluate_box(model, box.lower, box.upper, cfg)

"""Brute-force verifiers for tests and acceptance runs.

Nothing here touches the hull or vertex-path machinery, so these can be
used to check it: winding numbers of boundary images, a subdivision search
for the true per-frequency margin, and a Laplace-expansion determinant.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, InputError
from .params import MonomialPolynomial, ParameterBox, StateSpacePolynomial, UncertainPolynomial


@dataclass(frozen=True)
class WindingResult:
    winding: int
    min_abs_on_grid: float


def _winding(values: np.ndarray) -> int:
    """Winding number about the origin of the closed polyline through ``values``."""
    closed = np.append(values, values[:1])
    with np.errstate(divide="ignore", invalid="ignore"):
        turns = np.angle(closed[1:] / closed[:-1])
    if not np.all(np.isfinite(turns)):
        return 0
    return int(round(float(np.sum(turns)) / (2 * math.pi)))


def winding_inclusion(poly: UncertainPolynomial, z: complex, box: ParameterBox,
                      samples: int = 64, grid: int = 128) -> WindingResult:
    """Winding of the image of the box boundary, plus min ``|p|`` on an interior grid."""
    if box.dim != 2 or poly.n_params != 2:
        raise CapacityError("winding_inclusion handles exactly two parameters")
    if samples < 64 or grid < 2:
        raise InputError("need at least 64 samples per edge and a 2x2 grid")
    (l1, l2), (u1, u2) = box.lower, box.upper
    corners = [(l1, l2), (u1, l2), (u1, u2), (l1, u2)]
    t = np.arange(samples) / samples
    pts = []
    for a, b in zip(corners, corners[1:] + corners[:1]):
        pts.append(np.column_stack([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]))
    ring = poly.eval_batch(z, np.vstack(pts))
    g1, g2 = np.meshgrid(np.linspace(l1, u1, grid), np.linspace(l2, u2, grid), indexing="ij")
    inner = poly.eval_batch(z, np.column_stack([g1.ravel(), g2.ravel()]))
    min_abs = float(min(np.min(np.abs(inner)), np.min(np.abs(ring))))
    return WindingResult(_winding(ring), min_abs)


@dataclass(frozen=True)
class OracleConfig:
    """``k_res`` is the absolute resolution of the returned scale factor."""

    k_res: float = 1e-4
    k_max: float = 1e4
    max_cells: int = 2_000_000


def _gauge_lower(a, b, q0, up, dn) -> float:
    """Smallest ``k`` such that the cell ``[a, b]`` meets ``q0 + k (Q - q0)``."""
    g = 0.0
    for ai, bi, ci, ui, di in zip(a, b, q0, up, dn):
        if ai > ci:
            g = max(g, (ai - ci) / ui)
        elif bi < ci:
            g = max(g, (ci - bi) / di)
    return g


def _gauge(q, q0, up, dn) -> float:
    d = q - q0
    return float(np.max(np.where(d > 0, d / up, -d / dn), initial=0.0))


def _newton_zero(poly, z, start, lower, upper):
    """Gauss-Newton on the real and imaginary parts of ``p``; a zero or ``None``."""
    q = start.copy()
    dim = len(q)
    mag = max(abs(poly.eval(z, lower)), abs(poly.eval(z, upper)), 1.0)
    for _ in range(40):
        # p is affine in each coordinate, so the partials are exact differences
        pts = [q]
        for i in range(dim):
            a = q.copy()
            b = q.copy()
            a[i] = 0.0
            b[i] = 1.0
            pts += [a, b]
        vals = poly.eval_batch(z, np.array(pts))
        f = vals[0]
        if abs(f) <= 1e-13 * mag:
            return q
        grad = vals[2::2] - vals[1::2]
        jac = np.vstack([grad.real, grad.imag])
        step = np.linalg.lstsq(jac, -np.array([f.real, f.imag]), rcond=None)[0]
        q = q + step
        if not np.all(np.isfinite(q)) or np.any(q < lower) or np.any(q > upper):
            return None
    return None


def oracle_k_m(poly: UncertainPolynomial, z: complex, box: ParameterBox,
               cfg: OracleConfig | None = None, anchor=None) -> float:
    """True per-frequency margin: first ``k`` with ``0 in p(z, kQ)``.

    The zero set of ``p(z, .)`` does not depend on ``k``, so the answer is the
    smallest box gauge (about ``anchor``) of any zero.  Best-first subdivision
    of ``k_max * Q`` finds it.  A cell is discarded only when
    ``|p(center)|`` exceeds the multilinear bound on the variation of ``p``
    over the cell (half the largest edge difference per coordinate, summed),
    so zeros are never missed.  A cell at resolution ``k_res`` is confirmed
    by a Newton solve started at its center: the zero found bounds the answer
    from above and the cell gauge from below.  Unconfirmed cells keep
    splitting down to a hard floor, where they count as hits.  Returns
    ``inf`` when no zero lies in ``k_max * Q``.
    """
    cfg = cfg or OracleConfig()
    dim = box.dim
    if dim > 3:
        raise CapacityError("oracle_k_m handles at most three parameters")
    if poly.n_params != dim:
        raise InputError("polynomial and box disagree on the parameter count")
    q0 = np.asarray(box.nominal if anchor is None else anchor, dtype=float)
    lower, upper = np.asarray(box.lower), np.asarray(box.upper)
    up = upper - q0
    dn = q0 - lower
    if np.any(up < 0) or np.any(dn < 0):
        raise InputError("anchor must lie inside the box")
    if poly.eval(z, q0) == 0:
        return 0.0
    live = [i for i in range(dim) if upper[i] > lower[i]]
    if not live:
        return math.inf
    # gauge scale per coordinate: a width w moves the gauge by at most w / scale
    scale = np.array([min(x for x in (up[i], dn[i]) if x > 0) if i in live else 1.0
                      for i in range(dim)])
    up_safe = np.where(up > 0, up, 1.0)
    dn_safe = np.where(dn > 0, dn, 1.0)
    resolution = cfg.k_res / (8.0 * len(live))
    floor = resolution * 1e-3

    corners = np.array(list(itertools.product((0, 1), repeat=dim)), dtype=float)
    edges = []
    for i in range(dim):
        lo_idx = [v for v in range(len(corners)) if corners[v, i] == 0]
        hi_idx = [v for v in range(len(corners)) if corners[v, i] == 1]
        edges.append((lo_idx, hi_idx))

    root_a = q0 - cfg.k_max * dn
    root_b = q0 + cfg.k_max * up
    tie = itertools.count()
    heap = [(_gauge_lower(root_a, root_b, q0, up_safe, dn_safe), next(tie), False, root_a, root_b)]
    cells = 0
    while heap:
        batch = []
        while heap and len(batch) < 64:
            entry = heapq.heappop(heap)
            if entry[2]:
                if not batch:
                    return entry[0]
                heapq.heappush(heap, entry)
                break
            batch.append(entry)
        if not batch:
            break
        if batch[0][0] > cfg.k_max:
            return math.inf
        cells += len(batch)
        if cells > cfg.max_cells:
            raise CapacityError("oracle_k_m exceeded its cell budget")
        a = np.array([e[3] for e in batch])
        b = np.array([e[4] for e in batch])
        verts = a[:, None, :] + corners[None, :, :] * (b - a)[:, None, :]
        pts = np.concatenate([verts.reshape(-1, dim), 0.5 * (a + b)], axis=0)
        vals = poly.eval_batch(z, pts)
        nv = len(corners)
        vv = vals[: len(batch) * nv].reshape(len(batch), nv)
        vc = vals[len(batch) * nv:]
        bound = np.zeros(len(batch))
        for i in live:
            lo_idx, hi_idx = edges[i]
            bound += 0.5 * np.max(np.abs(vv[:, hi_idx] - vv[:, lo_idx]), axis=1)
        slack = 1e-9 * bound + 1e-13 * np.max(np.abs(vv), axis=1)
        for t, (g, _, _, ca, cb) in enumerate(batch):
            if abs(vc[t]) > bound[t] + slack[t]:
                continue
            rel = (cb - ca) / scale
            width = max(rel[i] for i in live)
            if width <= resolution:
                root = _newton_zero(poly, z, 0.5 * (ca + cb), root_a, root_b)
                if root is not None:
                    g_root = _gauge(root, q0, up_safe, dn_safe)
                    if g_root <= g + cfg.k_res:
                        heapq.heappush(heap, (g_root, next(tie), True, ca, cb))
                        continue
                if width <= floor:
                    heapq.heappush(heap, (g, next(tie), True, ca, cb))
                    continue
            i = max(live, key=lambda j: (rel[j], -j))
            mid = 0.5 * (ca[i] + cb[i])
            left_b = cb.copy()
            left_b[i] = mid
            right_a = ca.copy()
            right_a[i] = mid
            for na, nb in ((ca, left_b), (right_a, cb)):
                heapq.heappush(heap, (_gauge_lower(na, nb, q0, up_safe, dn_safe),
                                      next(tie), False, na, nb))
    return math.inf


def cofactor_det(matrix):
    """Laplace expansion along the first row; works for any ring entries."""
    rows = [list(r) for r in matrix]
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise InputError("matrix must be square")
    if n > 6:
        raise CapacityError("cofactor_det handles at most 6x6 matrices")
    return _laplace(rows)


def _laplace(rows):
    n = len(rows)
    if n == 0:
        return 1
    if n == 1:
        return rows[0][0]
    total = 0
    for j in range(n):
        minor = [r[:j] + r[j + 1:] for r in rows[1:]]
        term = rows[0][j] * _laplace(minor)
        total = total + term if j % 2 == 0 else total - term
    return total


def expand_state_space(poly: StateSpacePolynomial) -> MonomialPolynomial:
    """Monomial form of ``det(sI - A(q))`` by symbolic cofactor expansion (needs sympy)."""
    import sympy

    n = poly.degree
    s = sympy.Symbol("s")
    qs = sympy.symbols(f"q0:{poly.n_params}")
    entries = []
    for r in range(n):
        row = []
        for c in range(n):
            e = sympy.nsimplify(-poly.a0[r, c], rational=True)
            for i, q in enumerate(qs):
                if poly.a_params[i, r, c] != 0:
                    e -= sympy.nsimplify(poly.a_params[i, r, c], rational=True) * q
            if r == c:
                e += s
            row.append(e)
        entries.append(row)
    det = sympy.Poly(sympy.expand(cofactor_det(entries)), s, *qs)
    terms = [[] for _ in range(n + 1)]
    for exps, coef in det.terms():
        terms[exps[0]].append((float(coef), tuple(exps[1:])))
    return MonomialPolynomial(tuple(tuple(t) for t in terms), poly.n_params)

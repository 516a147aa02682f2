"""Uncertainty boxes and uncertain polynomial families.

Two coefficient backends are supported: explicit monomials in the
parameters, and characteristic polynomials ``det(sI - A(q))`` of an affinely
parameterized state matrix.  Both expose the same evaluation surface.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import CapacityError, InputError

MAX_PARAMS = 20


def _as_tuple(values, name: str) -> tuple[float, ...]:
    try:
        out = tuple(float(v) for v in values)
    except TypeError as exc:
        raise InputError(f"{name} must be a sequence of reals") from exc
    if any(not np.isfinite(v) for v in out):
        raise InputError(f"{name} must be finite")
    return out


@dataclass(frozen=True)
class ParameterBox:
    """Axis-aligned box ``[lower, upper]`` with a nominal point inside it.

    ``nominal`` defaults to the box center.
    """

    lower: tuple[float, ...]
    upper: tuple[float, ...]
    nominal: tuple[float, ...] | None = None

    def __post_init__(self):
        lower = _as_tuple(self.lower, "lower")
        upper = _as_tuple(self.upper, "upper")
        if len(lower) != len(upper):
            raise InputError("lower and upper differ in length")
        if not lower:
            raise InputError("a box needs at least one parameter")
        if len(lower) > MAX_PARAMS:
            raise CapacityError(f"{len(lower)} parameters exceeds the cap of {MAX_PARAMS}")
        if any(lo > hi for lo, hi in zip(lower, upper)):
            raise InputError("lower bound above upper bound")
        if self.nominal is None:
            nominal = tuple(0.5 * (lo + hi) for lo, hi in zip(lower, upper))
        else:
            nominal = _as_tuple(self.nominal, "nominal")
            if len(nominal) != len(lower):
                raise InputError("nominal has the wrong length")
            if any(not (lo <= q <= hi) for lo, q, hi in zip(lower, nominal, upper)):
                raise InputError("nominal point lies outside the box")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "nominal", nominal)

    @property
    def dim(self) -> int:
        return len(self.lower)

    @property
    def widths(self) -> np.ndarray:
        return np.subtract(self.upper, self.lower)

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (np.asarray(self.lower) + np.asarray(self.upper))

    @property
    def diameter(self) -> float:
        return float(np.linalg.norm(self.widths))

    def contains_point(self, q, tol: float = 0.0) -> bool:
        q = np.asarray(q, dtype=float)
        return bool(np.all(q >= np.asarray(self.lower) - tol) and np.all(q <= np.asarray(self.upper) + tol))

    def contains_box(self, other: "ParameterBox") -> bool:
        return all(a <= b for a, b in zip(self.lower, other.lower)) and all(
            a >= b for a, b in zip(self.upper, other.upper)
        )


def vertices(box: ParameterBox) -> list[tuple[float, ...]]:
    """Corners of ``box``; bit ``i`` of the vertex index picks upper for coordinate ``i``."""
    if box.dim > MAX_PARAMS:
        raise CapacityError(f"{box.dim} parameters exceeds the cap of {MAX_PARAMS}")
    out = []
    for j in range(1 << box.dim):
        out.append(tuple(box.upper[i] if (j >> i) & 1 else box.lower[i] for i in range(box.dim)))
    return out


def vertex_array(lower, upper) -> np.ndarray:
    """Same ordering as :func:`vertices`, as a ``(2**l, l)`` array."""
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    dim = lower.size
    bits = (np.arange(1 << dim)[:, None] >> np.arange(dim)[None, :]) & 1
    return np.where(bits == 1, upper[None, :], lower[None, :])


def scale_box(box: ParameterBox, k: float) -> ParameterBox:
    """The box ``q0 + k (Q - q0)`` about the box's own nominal point."""
    if k < 0:
        raise InputError("scale factor must be nonnegative")
    q0 = np.asarray(box.nominal)
    lower = q0 + k * (np.asarray(box.lower) - q0)
    upper = q0 + k * (np.asarray(box.upper) - q0)
    return ParameterBox(tuple(lower), tuple(upper), box.nominal)


class UncertainPolynomial:
    """Common surface of the two coefficient backends."""

    degree: int
    n_params: int

    def eval(self, z: complex, q) -> complex:
        return complex(self.eval_batch(z, np.asarray(q, dtype=float)[None, :])[0])

    def eval_batch(self, z: complex, qs: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def coefficients(self, q) -> np.ndarray:
        """Real coefficients ``a_0 .. a_n`` at the parameter vector ``q``."""
        raise NotImplementedError

    def _check_q(self, qs: np.ndarray) -> np.ndarray:
        qs = np.asarray(qs, dtype=float)
        if qs.ndim == 1:
            qs = qs[None, :]
        if qs.shape[-1] != self.n_params:
            raise InputError(f"expected {self.n_params} parameters, got {qs.shape[-1]}")
        return qs


@dataclass(frozen=True, eq=False)
class MonomialPolynomial(UncertainPolynomial):
    """``p(s, q) = sum_i a_i(q) s^i`` with each ``a_i`` a sum of monomials.

    ``terms[i]`` lists ``(coefficient, exponents)`` pairs for power ``i``.
    """

    terms: tuple
    n_params: int
    degree: int = field(init=False)

    def __post_init__(self):
        if not self.terms:
            raise InputError("polynomial needs at least one power")
        clean = []
        for power in self.terms:
            row = []
            for coef, exps in power:
                exps = tuple(int(e) for e in exps)
                if len(exps) != self.n_params:
                    raise InputError(f"exponent vector {exps} does not have {self.n_params} entries")
                if any(e < 0 for e in exps):
                    raise InputError("negative exponent")
                row.append((float(coef), exps))
            clean.append(tuple(row))
        object.__setattr__(self, "terms", tuple(clean))
        object.__setattr__(self, "degree", len(clean) - 1)
        # Dense form for vectorized evaluation.
        coefs, exps, powers = [], [], []
        for i, row in enumerate(clean):
            for c, e in row:
                coefs.append(c)
                exps.append(e)
                powers.append(i)
        object.__setattr__(self, "_coef", np.array(coefs, dtype=float))
        object.__setattr__(self, "_exp", np.array(exps, dtype=float).reshape(len(coefs), self.n_params))
        object.__setattr__(self, "_power", np.array(powers, dtype=int))

    def coefficient_batch(self, qs: np.ndarray) -> np.ndarray:
        qs = self._check_q(qs)
        # monomial values, shape (N, terms)
        mono = np.prod(qs[:, None, :] ** self._exp[None, :, :], axis=2) * self._coef[None, :]
        out = np.zeros((qs.shape[0], self.degree + 1))
        for t, power in enumerate(self._power):
            out[:, power] += mono[:, t]
        return out

    def coefficients(self, q) -> np.ndarray:
        return self.coefficient_batch(q)[0]

    def eval_batch(self, z: complex, qs: np.ndarray) -> np.ndarray:
        a = self.coefficient_batch(qs)
        acc = np.zeros(a.shape[0], dtype=complex)
        for i in range(self.degree, -1, -1):
            acc = acc * z + a[:, i]
        return acc


@dataclass(frozen=True, eq=False)
class StateSpacePolynomial(UncertainPolynomial):
    """``p(s, q) = det(sI - A0 - sum_i q_i A_i)``."""

    a0: np.ndarray
    a_params: np.ndarray
    degree: int = field(init=False)
    n_params: int = field(init=False)

    def __post_init__(self):
        a0 = np.array(self.a0, dtype=float)
        ap = np.array(self.a_params, dtype=float)
        if a0.ndim != 2 or a0.shape[0] != a0.shape[1] or a0.shape[0] == 0:
            raise InputError("A0 must be a nonempty square matrix")
        if ap.ndim != 3 or ap.shape[1:] != a0.shape:
            raise InputError("each parameter matrix must match A0 in shape")
        object.__setattr__(self, "a0", a0)
        object.__setattr__(self, "a_params", ap)
        object.__setattr__(self, "degree", a0.shape[0])
        object.__setattr__(self, "n_params", ap.shape[0])

    def matrix(self, q) -> np.ndarray:
        q = self._check_q(q)[0]
        return self.a0 + np.tensordot(q, self.a_params, axes=1)

    def eval_batch(self, z: complex, qs: np.ndarray) -> np.ndarray:
        qs = self._check_q(qs)
        a = self.a0[None, :, :] + np.tensordot(qs, self.a_params, axes=1)
        m = z * np.eye(self.degree)[None, :, :] - a
        # LAPACK LU with partial pivoting
        return np.linalg.det(m)

    def coefficients(self, q) -> np.ndarray:
        return np.poly(self.matrix(q))[::-1].real.copy()


def evaluate(poly: UncertainPolynomial, z: complex, q: Sequence[float]) -> complex:
    return poly.eval(z, q)


@dataclass(frozen=True)
class VertexImages:
    vertices: np.ndarray
    images: np.ndarray
    z: complex


def value_set_vertex_images(poly: UncertainPolynomial, z: complex, box: ParameterBox) -> VertexImages:
    verts = vertex_array(box.lower, box.upper)
    return VertexImages(verts, poly.eval_batch(z, verts), z)


def multilinear_expansion(poly: UncertainPolynomial, z: complex, anchor, scales=None) -> np.ndarray:
    """Coefficients ``c[S]`` with ``p(z, q) = sum_S c[S] prod_{i in S} (q_i - anchor_i)``.

    ``S`` is a bitmask over coordinates.  Exact for multilinear families.
    """
    anchor = np.asarray(anchor, dtype=float)
    dim = anchor.size
    if scales is None:
        scales = np.ones(dim)
    scales = np.where(np.asarray(scales, dtype=float) > 0, scales, 1.0)
    bits = (np.arange(1 << dim)[:, None] >> np.arange(dim)[None, :]) & 1
    probes = anchor[None, :] + bits * scales[None, :]
    c = poly.eval_batch(z, probes).astype(complex)
    for i in range(dim):
        bit = 1 << i
        for mask in range(1 << dim):
            if mask & bit:
                c[mask] -= c[mask ^ bit]
    c /= np.prod(np.where(bits == 1, scales[None, :], 1.0), axis=1)
    return c


_PROBE_Z = (0.5j, 1.0 + 2.0j, -0.3 + 3.7j)


def verify_multilinearity(poly: UncertainPolynomial, box: ParameterBox, tol: float = 1e-9,
                          seed: int = 0, n_fixings: int = 5) -> bool:
    """Probe the second difference of ``p(z, .)`` along every coordinate."""
    if tol <= 0:
        raise InputError("tolerance must be positive")
    if poly.n_params != box.dim:
        raise InputError("polynomial and box disagree on the parameter count")
    rng = np.random.default_rng(seed)
    lower, upper = np.asarray(box.lower), np.asarray(box.upper)
    half = np.where(box.widths > 0, 0.5 * box.widths, 1.0)
    for z in _PROBE_Z:
        for _ in range(n_fixings):
            base = lower + rng.random(box.dim) * (upper - lower)
            for i in range(box.dim):
                step = np.zeros(box.dim)
                step[i] = half[i]
                f_minus, f_0, f_plus = poly.eval_batch(z, np.stack([base - step, base, base + step]))
                scale = abs(f_minus) + 2 * abs(f_0) + abs(f_plus)
                if abs(f_plus - 2 * f_0 + f_minus) > tol * max(scale, 1e-300):
                    return False
    return True

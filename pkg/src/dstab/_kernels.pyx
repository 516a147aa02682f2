# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels; same API and semantics as ``_kernels_py``."""

import numpy as np

from libc.math cimport sqrt, fabs, INFINITY
from libc.stdlib cimport malloc, free, qsort


cdef inline double _norm(double x, double y) noexcept nogil:
    return sqrt(x * x + y * y)


cdef enum:
    _OUTSIDE = 0
    _BOUNDARY = 1
    _INSIDE = 2

OUTSIDE = _OUTSIDE
BOUNDARY = _BOUNDARY
INSIDE = _INSIDE


cdef inline bint _less(const double* xs, const double* ys, int a, int b) noexcept nogil:
    if xs[a] != xs[b]:
        return xs[a] < xs[b]
    if ys[a] != ys[b]:
        return ys[a] < ys[b]
    return a < b


cdef void _sort(const double* xs, const double* ys, int* idx, int* tmp, int n) noexcept nogil:
    # bottom-up merge sort on (x, y, index)
    cdef int width = 1, lo, mid, hi, i, j, t
    cdef int* src = idx
    cdef int* dst = tmp
    cdef int* swap
    while width < n:
        lo = 0
        while lo < n:
            mid = lo + width
            if mid > n:
                mid = n
            hi = lo + 2 * width
            if hi > n:
                hi = n
            i = lo
            j = mid
            t = lo
            while i < mid and j < hi:
                if _less(xs, ys, src[j], src[i]):
                    dst[t] = src[j]
                    j += 1
                else:
                    dst[t] = src[i]
                    i += 1
                t += 1
            while i < mid:
                dst[t] = src[i]
                i += 1
                t += 1
            while j < hi:
                dst[t] = src[j]
                j += 1
                t += 1
            lo += 2 * width
        swap = src
        src = dst
        dst = swap
        width *= 2
    if src != idx:
        for i in range(n):
            idx[i] = src[i]


cdef inline double _cross(const double* xs, const double* ys, int o, int a, int b) noexcept nogil:
    return (xs[a] - xs[o]) * (ys[b] - ys[o]) - (ys[a] - ys[o]) * (xs[b] - xs[o])


cdef int _hull(const double* xs, const double* ys, int n, int* out, int* work) noexcept nogil:
    """Writes counterclockwise hull indices to ``out``; returns their count.

    ``work`` needs room for ``3 * n`` ints; ``out`` for ``2 * n``.
    """
    cdef int* order = work
    cdef int* tmp = work + n
    cdef int* uniq = work + 2 * n
    cdef int i, t, u, nu, h, start
    if n == 0:
        return 0
    for i in range(n):
        order[i] = i
    _sort(xs, ys, order, tmp, n)
    uniq[0] = order[0]
    nu = 1
    for i in range(1, n):
        t = order[i]
        u = uniq[nu - 1]
        if xs[t] != xs[u] or ys[t] != ys[u]:
            uniq[nu] = t
            nu += 1
    if nu <= 2:
        for i in range(nu):
            out[i] = uniq[i]
        return nu
    h = 0
    for i in range(nu):
        t = uniq[i]
        while h >= 2 and _cross(xs, ys, out[h - 2], out[h - 1], t) <= 0.0:
            h -= 1
        out[h] = t
        h += 1
    start = h  # lower chain occupies out[0:start]
    for i in range(nu - 1, -1, -1):
        t = uniq[i]
        while h - start >= 2 and _cross(xs, ys, out[h - 2], out[h - 1], t) <= 0.0:
            h -= 1
        out[h] = t
        h += 1
    # drop the last point of each chain: lower[:-1] + upper[:-1]
    for i in range(start, h - 1):
        out[i - 1] = out[i]
    return h - 2


cdef inline double _segdist(double ax, double ay, double bx, double by) noexcept nogil:
    cdef double dx = bx - ax, dy = by - ay
    cdef double den = dx * dx + dy * dy
    cdef double t
    if den == 0.0:
        return _norm(ax, ay)
    t = -(ax * dx + ay * dy) / den
    if t < 0.0:
        t = 0.0
    elif t > 1.0:
        t = 1.0
    return _norm(ax + t * dx, ay + t * dy)


cdef int _locate(const double* xs, const double* ys, const int* hull, int h, double tol,
                 int* edge, double* dist) noexcept nogil:
    cdef double scale = 0.0, r, thr, min_signed, best_d, d, signed, ex, ey, length
    cdef double ax, ay, bx, by
    cdef int e, a, b, t, best_edge
    for e in range(h):
        t = hull[e]
        r = _norm(xs[t], ys[t])
        if r > scale:
            scale = r
    thr = tol * scale
    if h == 1:
        d = _norm(xs[hull[0]], ys[hull[0]])
        edge[0] = -1
        dist[0] = d
        return _BOUNDARY if d <= thr else _OUTSIDE
    if h == 2:
        d = _segdist(xs[hull[0]], ys[hull[0]], xs[hull[1]], ys[hull[1]])
        edge[0] = 0
        dist[0] = d
        return _BOUNDARY if d <= thr else _OUTSIDE
    min_signed = INFINITY
    best_d = INFINITY
    best_edge = 0
    for e in range(h):
        a = hull[e]
        b = hull[(e + 1) % h]
        ax = xs[a]
        ay = ys[a]
        bx = xs[b]
        by = ys[b]
        ex = bx - ax
        ey = by - ay
        length = _norm(ex, ey)
        signed = (ex * (-ay) - ey * (-ax)) / length
        if signed < min_signed:
            min_signed = signed
        d = _segdist(ax, ay, bx, by)
        if d < best_d:
            best_d = d
            best_edge = e
    edge[0] = best_edge
    dist[0] = best_d
    if min_signed > thr:
        return _INSIDE
    if best_d <= thr:
        return _BOUNDARY
    return _OUTSIDE


def hull_indices(xs, ys):
    cdef double[::1] x = np.ascontiguousarray(xs, dtype=np.float64)
    cdef double[::1] y = np.ascontiguousarray(ys, dtype=np.float64)
    cdef int n = x.shape[0]
    if n == 0:
        return []
    cdef int* out = <int*> malloc(2 * n * sizeof(int))
    cdef int* work = <int*> malloc(3 * n * sizeof(int))
    cdef int h, i
    try:
        h = _hull(&x[0], &y[0], n, out, work)
        return [out[i] for i in range(h)]
    finally:
        free(out)
        free(work)


def locate_origin(xs, ys, hull, double tol):
    cdef double[::1] x = np.ascontiguousarray(xs, dtype=np.float64)
    cdef double[::1] y = np.ascontiguousarray(ys, dtype=np.float64)
    cdef int[::1] hv = np.ascontiguousarray(hull, dtype=np.intc)
    cdef int edge = -1
    cdef double dist = 0.0
    cdef int code = _locate(&x[0], &y[0], &hv[0], hv.shape[0], tol, &edge, &dist)
    return code, edge, dist


def segment_distance(double ax, double ay, double bx, double by):
    return _segdist(ax, ay, bx, by)


def vertex_polys(c_re, c_im, d):
    cdef double[::1] cr = np.ascontiguousarray(c_re, dtype=np.float64)
    cdef double[::1] ci = np.ascontiguousarray(c_im, dtype=np.float64)
    cdef double[:, ::1] dv = np.ascontiguousarray(d, dtype=np.float64)
    cdef int nv = dv.shape[0], dim = dv.shape[1]
    cdef int nm = 1 << dim
    out_re = np.zeros((nv, dim + 1))
    out_im = np.zeros((nv, dim + 1))
    cdef double[:, ::1] ore = out_re
    cdef double[:, ::1] oim = out_im
    cdef double[::1] prods = np.empty(nm)
    cdef int[::1] sizes = np.zeros(nm, dtype=np.intc)
    cdef int j, mask, low, rest
    for mask in range(1, nm):
        low = 0
        while not (mask >> low) & 1:
            low += 1
        sizes[mask] = sizes[mask ^ (1 << low)] + 1
    for j in range(nv):
        prods[0] = 1.0
        ore[j, 0] += cr[0]
        oim[j, 0] += ci[0]
        for mask in range(1, nm):
            low = 0
            while not (mask >> low) & 1:
                low += 1
            rest = mask ^ (1 << low)
            prods[mask] = prods[rest] * dv[j, low]
            ore[j, sizes[mask]] += prods[mask] * cr[mask]
            oim[j, sizes[mask]] += prods[mask] * ci[mask]
    return out_re, out_im


cdef void _images(const double[:, ::1] pre, const double[:, ::1] pim, double k,
                  double* xs, double* ys) noexcept nogil:
    cdef int nv = pre.shape[0], nc = pre.shape[1]
    cdef int j, m
    cdef double xr, xi
    for j in range(nv):
        xr = 0.0
        xi = 0.0
        for m in range(nc - 1, -1, -1):
            xr = xr * k + pre[j, m]
            xi = xi * k + pim[j, m]
        xs[j] = xr
        ys[j] = xi


def images_at(pre, pim, double k):
    cdef double[:, ::1] a = np.ascontiguousarray(pre, dtype=np.float64)
    cdef double[:, ::1] b = np.ascontiguousarray(pim, dtype=np.float64)
    cdef int nv = a.shape[0]
    xs = np.empty(nv)
    ys = np.empty(nv)
    cdef double[::1] xv = xs
    cdef double[::1] yv = ys
    _images(a, b, k, &xv[0], &yv[0])
    return xs.tolist(), ys.tolist()


cdef bint _hit(const double[:, ::1] pre, const double[:, ::1] pim, double k, double tol,
               const int* ea, const int* eb, int ne,
               double* xs, double* ys, int* hull, int* work) noexcept nogil:
    cdef int nv = pre.shape[0]
    cdef int h, t, edge
    cdef double scale, r, thr, dist
    _images(pre, pim, k, xs, ys)
    if ne == 0:
        h = _hull(xs, ys, nv, hull, work)
        return _locate(xs, ys, hull, h, tol, &edge, &dist) != _OUTSIDE
    scale = 0.0
    for t in range(nv):
        r = _norm(xs[t], ys[t])
        if r > scale:
            scale = r
    thr = tol * scale
    for t in range(ne):
        if _segdist(xs[ea[t]], ys[ea[t]], xs[eb[t]], ys[eb[t]]) <= thr:
            return True
    return False


def first_entry(pre, pim, samples, double k_from, double k_tol, double tol, ea, eb):
    cdef double[:, ::1] a = np.ascontiguousarray(pre, dtype=np.float64)
    cdef double[:, ::1] b = np.ascontiguousarray(pim, dtype=np.float64)
    cdef double[::1] s = np.ascontiguousarray(samples, dtype=np.float64)
    cdef int[::1] va = np.ascontiguousarray(np.asarray(ea, dtype=np.intc).reshape(-1))
    cdef int[::1] vb = np.ascontiguousarray(np.asarray(eb, dtype=np.intc).reshape(-1))
    cdef int nv = a.shape[0], ne = va.shape[0], ns = s.shape[0]
    cdef const int* pa = &va[0] if ne > 0 else NULL
    cdef const int* pb = &vb[0] if ne > 0 else NULL
    cdef double* xs = <double*> malloc(2 * nv * sizeof(double))
    cdef int* hull = <int*> malloc(2 * nv * sizeof(int))
    cdef int* work = <int*> malloc(3 * nv * sizeof(int))
    cdef double* ys = xs + nv
    cdef double lo, hi, mid, sv
    cdef int t
    cdef bint found = False
    try:
        with nogil:
            if _hit(a, b, k_from, tol, pa, pb, ne, xs, ys, hull, work):
                hi = k_from
                found = True
            else:
                lo = k_from
                hi = INFINITY
                for t in range(ns):
                    sv = s[t]
                    if sv <= lo:
                        continue
                    if _hit(a, b, sv, tol, pa, pb, ne, xs, ys, hull, work):
                        hi = sv
                        found = True
                        break
                    lo = sv
                if found:
                    while hi - lo > k_tol * hi:
                        mid = 0.5 * (lo + hi)
                        if _hit(a, b, mid, tol, pa, pb, ne, xs, ys, hull, work):
                            hi = mid
                        else:
                            lo = mid
                else:
                    hi = lo
        return hi, bool(found)
    finally:
        free(xs)
        free(hull)
        free(work)


cdef enum:
    _MAXDEG = 64


cdef inline double _horner(const double* c, int d, double x) noexcept nogil:
    cdef double acc = 0.0
    cdef int t
    for t in range(d, -1, -1):
        acc = acc * x + c[t]
    return acc


cdef inline double _magnitude(const double* c, int d, double x) noexcept nogil:
    cdef double acc = 0.0, ax = fabs(x)
    cdef int t
    for t in range(d, -1, -1):
        acc = acc * ax + fabs(c[t])
    return acc


cdef double _bisect_root(const double* c, int d, double a, double b, double fa) noexcept nogil:
    cdef double m, fm
    cdef int it
    for it in range(200):
        m = 0.5 * (a + b)
        if m <= a or m >= b:
            break
        fm = _horner(c, d, m)
        if fm == 0.0:
            return m
        if (fm < 0.0) == (fa < 0.0):
            a = m
            fa = fm
        else:
            b = m
    return 0.5 * (a + b)


cdef void _roots(const double* c_in, int d, double lo, double hi,
                 double* roots, int* n_roots, double* ext, int* n_ext) noexcept nogil:
    cdef double c[_MAXDEG + 1]
    cdef double dc[_MAXDEG]
    cdef double pts[_MAXDEG + 2]
    cdef double sub_ext[_MAXDEG]
    cdef int ne = 0, nsub = 0, t
    cdef double r, a, b, fa, fb
    n_roots[0] = 0
    n_ext[0] = 0
    while d >= 0 and c_in[d] == 0.0:
        d -= 1
    if d <= 0:
        return
    if d == 1:
        r = -c_in[0] / c_in[1]
        if lo < r and r <= hi:
            roots[0] = r
            n_roots[0] = 1
        return
    for t in range(d + 1):
        c[t] = c_in[t]
    for t in range(1, d + 1):
        dc[t - 1] = t * c[t]
    _roots(dc, d - 1, lo, hi, ext, &ne, sub_ext, &nsub)
    n_ext[0] = ne
    pts[0] = lo
    for t in range(ne):
        pts[t + 1] = ext[t]
    pts[ne + 1] = hi
    for t in range(ne + 1):
        a = pts[t]
        b = pts[t + 1]
        if not b > a:
            continue
        fa = _horner(c, d, a)
        fb = _horner(c, d, b)
        if fb == 0.0:
            roots[n_roots[0]] = b
            n_roots[0] += 1
        elif fa * fb < 0.0:
            roots[n_roots[0]] = _bisect_root(c, d, a, b, fa)
            n_roots[0] += 1


cdef int _candidates(const double* c, int d, double lo, double hi, double* out) noexcept nogil:
    """Roots then near-zero extrema of ``c`` in ``(lo, hi]``; returns the count."""
    cdef double ext[_MAXDEG]
    cdef int nr = 0, ne = 0, t
    _roots(c, d, lo, hi, out, &nr, ext, &ne)
    for t in range(ne):
        if fabs(_horner(c, d, ext[t])) <= 1e-8 * _magnitude(c, d, ext[t]):
            out[nr] = ext[t]
            nr += 1
    return nr


cdef int _pair_events(const double[:, ::1] pre, const double[:, ::1] pim, int a, int b,
                      double lo, double hi, double* out) noexcept nogil:
    cdef int nc = pre.shape[1], m1, m2, t
    cdef double cross[2 * _MAXDEG + 1]
    cdef double dot[2 * _MAXDEG + 1]
    cdef double ma = 0.0, mb = 0.0, mx = 0.0, v
    for t in range(2 * nc - 1):
        cross[t] = 0.0
        dot[t] = 0.0
    for m1 in range(nc):
        for m2 in range(nc):
            cross[m1 + m2] += pre[a, m1] * pim[b, m2] - pim[a, m1] * pre[b, m2]
            dot[m1 + m2] += pre[a, m1] * pre[b, m2] + pim[a, m1] * pim[b, m2]
    for t in range(nc):
        v = _norm(pre[a, t], pim[a, t])
        if v > ma:
            ma = v
        v = _norm(pre[b, t], pim[b, t])
        if v > mb:
            mb = v
    for t in range(2 * nc - 1):
        if fabs(cross[t]) > mx:
            mx = fabs(cross[t])
    if mx <= 1e-12 * ma * mb:
        return _candidates(dot, 2 * nc - 2, lo, hi, out)
    return _candidates(cross, 2 * nc - 2, lo, hi, out)


def event_points(pre, pim, ea, eb, double lo, double hi):
    cdef double[:, ::1] a = np.ascontiguousarray(pre, dtype=np.float64)
    cdef double[:, ::1] b = np.ascontiguousarray(pim, dtype=np.float64)
    cdef int[::1] va = np.ascontiguousarray(np.asarray(ea, dtype=np.intc).reshape(-1))
    cdef int[::1] vb = np.ascontiguousarray(np.asarray(eb, dtype=np.intc).reshape(-1))
    cdef int ne = va.shape[0], t, n
    cdef double buf[2 * _MAXDEG + 1]
    if a.shape[1] > _MAXDEG // 2:
        raise ValueError("polynomial degree too large for the compiled kernel")
    out = []
    for t in range(ne):
        n = _pair_events(a, b, va[t], vb[t], lo, hi, buf)
        out.extend([buf[i] for i in range(n)])
    return out


cdef int _cmp_double(const void* x, const void* y) noexcept nogil:
    cdef double u = (<const double*> x)[0], v = (<const double*> y)[0]
    return (u > v) - (u < v)


def search(pre, pim, ea, eb, bint path_mode, double k_from, double k_cap, double k_step,
           double growth, double k_tol, double tol):
    cdef double[:, ::1] a = np.ascontiguousarray(pre, dtype=np.float64)
    cdef double[:, ::1] b = np.ascontiguousarray(pim, dtype=np.float64)
    cdef int nv = a.shape[0], nc = a.shape[1]
    cdef int[::1] va, vb
    cdef int np_, t, u, n, nev = 0, ns = 0, cap_ev, cap_s
    if nc > _MAXDEG // 2:
        raise ValueError("polynomial degree too large for the compiled kernel")
    if path_mode:
        va = np.ascontiguousarray(np.asarray(ea, dtype=np.intc).reshape(-1))
        vb = np.ascontiguousarray(np.asarray(eb, dtype=np.intc).reshape(-1))
    else:
        iu = np.triu_indices(nv, 1)
        va = np.ascontiguousarray(iu[0], dtype=np.intc)
        vb = np.ascontiguousarray(iu[1], dtype=np.intc)
    np_ = va.shape[0]
    cap_ev = np_ * (4 * nc) + 1
    cdef double* events = <double*> malloc(cap_ev * sizeof(double))
    cdef double* samples = NULL
    cdef double step, s, mn, p, k
    cdef bint found
    try:
        with nogil:
            for t in range(np_):
                nev += _pair_events(a, b, va[t], vb[t], k_from, k_cap, events + nev)
        if path_mode:
            step = k_step * max(k_from, 1e-12)
        elif nev > 0:
            mn = events[0]
            for t in range(1, nev):
                if events[t] < mn:
                    mn = events[t]
            step = k_step * mn
        else:
            step = k_step
        n = 0
        s = step
        while k_from + s <= k_cap:
            n += 1
            s *= growth
        cap_s = n + 2 * nev + 1
        samples = <double*> malloc(cap_s * sizeof(double))
        with nogil:
            s = step
            while k_from + s <= k_cap:
                samples[ns] = k_from + s
                ns += 1
                s *= growth
            for t in range(nev):
                samples[ns] = events[t]
                samples[ns + 1] = events[t] * (1.0 - 0.5 * k_tol)
                ns += 2
            samples[ns] = k_cap
            ns += 1
            u = 0
            for t in range(ns):
                p = samples[t]
                if k_from < p and p <= k_cap:
                    samples[u] = p
                    u += 1
            qsort(samples, u, sizeof(double), _cmp_double)
            ns = 0
            for t in range(u):
                if ns == 0 or samples[t] != samples[ns - 1]:
                    samples[ns] = samples[t]
                    ns += 1
        arr = np.array([samples[t] for t in range(ns)], dtype=np.float64)
    finally:
        free(events)
        free(samples)
    if path_mode:
        return first_entry(a, b, arr, k_from, k_tol, tol, va, vb)
    return first_entry(a, b, arr, k_from, k_tol, tol, (), ())

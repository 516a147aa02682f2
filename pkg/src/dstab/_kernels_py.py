"""Pure-Python implementations of the hot kernels.

Used when the compiled ``_kernels`` extension is unavailable (or when
``DSTAB_PURE_PYTHON=1``).  Must stay behaviorally identical to
``_kernels.pyx``; the test suite runs both against each other.
"""

import math

import numpy as np

OUTSIDE = 0
BOUNDARY = 1
INSIDE = 2


def hull_indices(xs, ys):
    """Andrew monotone chain; counterclockwise from the lexicographic minimum."""
    n = len(xs)
    if n == 0:
        return []
    order = sorted(range(n), key=lambda t: (xs[t], ys[t]))
    uniq = [order[0]]
    for t in order[1:]:
        u = uniq[-1]
        if xs[t] != xs[u] or ys[t] != ys[u]:
            uniq.append(t)
    if len(uniq) <= 2:
        return uniq

    def cross(o, a, b):
        return (xs[a] - xs[o]) * (ys[b] - ys[o]) - (ys[a] - ys[o]) * (xs[b] - xs[o])

    lower = []
    for t in uniq:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], t) <= 0.0:
            lower.pop()
        lower.append(t)
    upper = []
    for t in reversed(uniq):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], t) <= 0.0:
            upper.pop()
        upper.append(t)
    return lower[:-1] + upper[:-1]


def _norm(x, y):
    # sqrt is correctly rounded everywhere; hypot is not, and the backends must agree
    return math.sqrt(x * x + y * y)


def _segment_distance(ax, ay, bx, by):
    dx = bx - ax
    dy = by - ay
    den = dx * dx + dy * dy
    if den == 0.0:
        return _norm(ax, ay)
    t = -(ax * dx + ay * dy) / den
    if t < 0.0:
        t = 0.0
    elif t > 1.0:
        t = 1.0
    return _norm(ax + t * dx, ay + t * dy)


def segment_distance(ax, ay, bx, by):
    """Distance from the origin to the segment ``[a, b]``."""
    return _segment_distance(ax, ay, bx, by)


def locate_origin(xs, ys, hull, tol):
    """Classify the origin against the hull polygon ``hull`` (indices into xs/ys).

    Returns ``(code, edge, distance)`` where ``edge`` is the index into ``hull``
    of the edge nearest the origin (``-1`` for a single point) and ``distance``
    is the unsigned distance from the origin to the hull boundary.
    """
    h = len(hull)
    scale = 0.0
    for t in hull:
        r = _norm(xs[t], ys[t])
        if r > scale:
            scale = r
    thr = tol * scale
    if h == 1:
        d = _norm(xs[hull[0]], ys[hull[0]])
        return (BOUNDARY if d <= thr else OUTSIDE), -1, d
    if h == 2:
        d = _segment_distance(xs[hull[0]], ys[hull[0]], xs[hull[1]], ys[hull[1]])
        return (BOUNDARY if d <= thr else OUTSIDE), 0, d
    min_signed = math.inf
    best_edge = 0
    best_d = math.inf
    for e in range(h):
        a = hull[e]
        b = hull[(e + 1) % h]
        ax, ay, bx, by = xs[a], ys[a], xs[b], ys[b]
        ex, ey = bx - ax, by - ay
        length = _norm(ex, ey)
        signed = (ex * (-ay) - ey * (-ax)) / length
        if signed < min_signed:
            min_signed = signed
        d = _segment_distance(ax, ay, bx, by)
        if d < best_d:
            best_d = d
            best_edge = e
    if min_signed > thr:
        return INSIDE, best_edge, best_d
    if best_d <= thr:
        return BOUNDARY, best_edge, best_d
    return OUTSIDE, best_edge, best_d


def vertex_polys(c_re, c_im, d):
    """Image of every scaled vertex as a polynomial in the scale factor.

    ``c`` is the multilinear expansion about the anchor (indexed by subset
    bitmask) and ``d[j]`` the offset of vertex ``j`` from the anchor.  Returns
    ``(re, im)`` arrays of shape ``(n_vertices, n_params + 1)``, ascending powers.
    """
    c = np.asarray(c_re, dtype=float) + 1j * np.asarray(c_im, dtype=float)
    d = np.asarray(d, dtype=float)
    nv, dim = d.shape
    nm = 1 << dim
    prods = np.empty((nv, nm))
    prods[:, 0] = 1.0
    sizes = np.zeros(nm, dtype=int)
    for mask in range(1, nm):
        low = (mask & -mask).bit_length() - 1
        prods[:, mask] = prods[:, mask ^ (1 << low)] * d[:, low]
        sizes[mask] = sizes[mask ^ (1 << low)] + 1
    out = np.zeros((nv, dim + 1), dtype=complex)
    for m in range(dim + 1):
        sel = sizes == m
        out[:, m] = prods[:, sel] @ c[sel]
    return np.ascontiguousarray(out.real), np.ascontiguousarray(out.imag)


def images_at(pre, pim, k):
    """Evaluate every vertex polynomial at scale ``k`` (Horner)."""
    xs = []
    ys = []
    for row_re, row_im in zip(pre, pim):
        xr = 0.0
        xi = 0.0
        for m in range(len(row_re) - 1, -1, -1):
            xr = xr * k + row_re[m]
            xi = xi * k + row_im[m]
        xs.append(xr)
        ys.append(xi)
    return xs, ys


def _hit(pre, pim, k, tol, ea, eb):
    xs, ys = images_at(pre, pim, k)
    if not ea:
        code = locate_origin(xs, ys, hull_indices(xs, ys), tol)[0]
        return code != OUTSIDE
    scale = 0.0
    for x, y in zip(xs, ys):
        r = _norm(x, y)
        if r > scale:
            scale = r
    thr = tol * scale
    for a, b in zip(ea, eb):
        if _segment_distance(xs[a], ys[a], xs[b], ys[b]) <= thr:
            return True
    return False


def first_entry(pre, pim, samples, k_from, k_tol, tol, ea, eb):
    """First scale factor at which the origin is reached.

    With empty ``ea``/``eb`` the test is origin-in-hull of all vertex images;
    otherwise it is origin-on-some-segment ``[P_ea[t], P_eb[t]]``.  ``samples``
    must be sorted ascending.  Scans ``k_from`` then each sample, then bisects
    the first bracket down to relative width ``k_tol``.  Returns
    ``(k, found)``; ``k`` is the included end of the final bracket.
    """
    if hasattr(pre, "tolist"):
        pre = pre.tolist()
        pim = pim.tolist()
    ea = list(ea)
    eb = list(eb)
    if _hit(pre, pim, k_from, tol, ea, eb):
        return k_from, True
    lo = k_from
    hi = math.inf
    for s in samples:
        if s <= lo:
            continue
        if _hit(pre, pim, s, tol, ea, eb):
            hi = s
            break
        lo = s
    if hi == math.inf:
        return lo, False
    while hi - lo > k_tol * hi:
        mid = 0.5 * (lo + hi)
        if _hit(pre, pim, mid, tol, ea, eb):
            hi = mid
        else:
            lo = mid
    return hi, True


def _horner(c, x):
    acc = 0.0
    for t in range(len(c) - 1, -1, -1):
        acc = acc * x + c[t]
    return acc


def _magnitude(c, x):
    acc = 0.0
    ax = abs(x)
    for t in range(len(c) - 1, -1, -1):
        acc = acc * ax + abs(c[t])
    return acc


def _bisect_root(c, a, b, fa):
    for _ in range(200):
        m = 0.5 * (a + b)
        if m <= a or m >= b:
            break
        fm = _horner(c, m)
        if fm == 0.0:
            return m
        if (fm < 0.0) == (fa < 0.0):
            a = m
            fa = fm
        else:
            b = m
    return 0.5 * (a + b)


def _roots(c, lo, hi):
    """Sign-change roots of ``c`` in ``(lo, hi]`` and its extrema there, both ascending.

    Extrema are the sign-change roots of the derivative, so they split the
    interval into pieces on which ``c`` is monotone.
    """
    d = len(c) - 1
    while d >= 0 and c[d] == 0.0:
        d -= 1
    if d <= 0:
        return [], []
    if d == 1:
        r = -c[0] / c[1]
        return ([r] if lo < r <= hi else []), []
    ext, _ = _roots([t * c[t] for t in range(1, d + 1)], lo, hi)
    pts = [lo] + ext + [hi]
    roots = []
    for t in range(len(pts) - 1):
        a, b = pts[t], pts[t + 1]
        if not b > a:
            continue
        fa = _horner(c, a)
        fb = _horner(c, b)
        if fb == 0.0:
            roots.append(b)
        elif fa * fb < 0.0:
            roots.append(_bisect_root(c, a, b, fa))
    return roots, ext


def _candidates(c, lo, hi, out):
    roots, ext = _roots(c, lo, hi)
    out.extend(roots)
    # extrema where c nearly touches zero (tangencies)
    for x in ext:
        if abs(_horner(c, x)) <= 1e-8 * _magnitude(c, x):
            out.append(x)


def event_points(pre, pim, ea, eb, lo, hi):
    """Scales in ``(lo, hi]`` where the origin can lie on a segment ``[P_ea[t], P_eb[t]]``.

    Roots of the cross product of the two image polynomials; for pairs that
    stay collinear with the origin, roots of the dot product instead.
    """
    if hasattr(pre, "tolist"):
        pre = pre.tolist()
        pim = pim.tolist()
    nc = len(pre[0]) if pre else 0
    out = []
    for a, b in zip(ea, eb):
        ar, ai, br, bi = pre[a], pim[a], pre[b], pim[b]
        cross = [0.0] * (2 * nc - 1)
        dot = [0.0] * (2 * nc - 1)
        for m1 in range(nc):
            for m2 in range(nc):
                cross[m1 + m2] += ar[m1] * bi[m2] - ai[m1] * br[m2]
                dot[m1 + m2] += ar[m1] * br[m2] + ai[m1] * bi[m2]
        ma = max(_norm(x, y) for x, y in zip(ar, ai))
        mb = max(_norm(x, y) for x, y in zip(br, bi))
        if max(abs(x) for x in cross) <= 1e-12 * ma * mb:
            cross = dot
        _candidates(cross, lo, hi, out)
    return out


def search(pre, pim, ea, eb, path_mode, k_from, k_cap, k_step, growth, k_tol, tol):
    """Event points, forward march and bisection in one call.

    Hull mode (``path_mode`` false) tests origin-in-hull and takes its event
    pairs from all vertex pairs; path mode tests the segments ``ea/eb``.
    Returns ``(k, found)``.
    """
    if hasattr(pre, "tolist"):
        pre = pre.tolist()
        pim = pim.tolist()
    n = len(pre)
    if path_mode:
        pa, pb = list(ea), list(eb)
    else:
        pa = [a for a in range(n) for b in range(a + 1, n)]
        pb = [b for a in range(n) for b in range(a + 1, n)]
    events = event_points(pre, pim, pa, pb, k_from, k_cap)
    if path_mode:
        step = k_step * max(k_from, 1e-12)
    else:
        step = k_step * (min(events) if events else 1.0)
    pts = []
    s = step
    while k_from + s <= k_cap:
        pts.append(k_from + s)
        s *= growth
    for r in events:
        pts.append(r)
        pts.append(r * (1.0 - 0.5 * k_tol))
    pts.append(k_cap)
    samples = sorted(set(p for p in pts if k_from < p <= k_cap))
    if path_mode:
        return first_entry(pre, pim, samples, k_from, k_tol, tol, pa, pb)
    return first_entry(pre, pim, samples, k_from, k_tol, tol, (), ())

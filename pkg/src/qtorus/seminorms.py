"""Lipschitz seminorm, connection D-norm and the inequality checkers.

Every supremum here is of a convex, positively homogeneous function ``f`` of
a real direction ``r`` over the unit ball of a norm ``N`` on ``R^n``:

* l1 and l-infinity balls are polytopes, so ``f`` peaks at a vertex and the
  vertex list is enumerated exactly;
* for the Euclidean ball the lower bound comes from a direction search whose
  best witness is re-evaluated on the full truncation schedule, and the upper
  bound from a covering of the sphere by small cells.  On a cell with corner
  directions ``c_i`` convexity gives ``f <= max_i f(c_i) * ratio`` where the
  ratio only depends on the cell geometry, and ``f(c_i)`` is replaced by a
  cheap coefficient bound evaluated in one vectorised pass.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
import scipy.optimize

from .algebra import (
    TorusElement,
    adjoint,
    act,
    derive,
    imag_part,
    is_self_adjoint,
    monomial,
    multiply,
    real_part,
    trace,
)
from .connection import der_norm, nabla_coordinate
from .geometry import inner_g, norm_g
from .gns import CompressionFamily, GNSConfig, NormInterval, interval_max, norm_interval, norm_lower_at
from .norms import NormChoice

SPHERE_CELLS = {2: 8192, 3: 64}
SEARCH_POINTS = {2: 48, 3: 96}
ASCENT_STEPS = 10


@dataclass
class SeminormEstimate:
    interval: NormInterval
    witness: dict = field(default_factory=dict)
    method: str = "grid"
    seed: int = 0
    truncation: int = 0
    gap: float = 0.0

    @property
    def lower(self):
        return self.interval.lower

    @property
    def upper(self):
        return self.interval.upper

    def to_dict(self):
        return {
            "lower": float(self.interval.lower),
            "upper": float(self.interval.upper),
            "witness": self.witness,
            "method": self.method,
            "seed": int(self.seed),
            "truncation": int(self.truncation),
        }


def _unit(r):
    r = np.asarray(r, dtype=float)
    return r / np.linalg.norm(r)


def fibonacci_directions(n, count):
    """Quasi-uniform directions on the half sphere ``S^{n-1} / {+-1}``."""
    if n == 1:
        return np.ones((1, 1))
    if n == 2:
        phi = np.pi * (np.arange(count) + 0.5) / count
        return np.stack([np.cos(phi), np.sin(phi)], axis=1)
    if n == 3:
        i = np.arange(count) + 0.5
        z = i / count  # upper hemisphere only
        rho = np.sqrt(1 - z * z)
        ang = np.pi * (1 + 5 ** 0.5) * i
        return np.stack([rho * np.cos(ang), rho * np.sin(ang), z], axis=1)
    pts = np.random.default_rng(0).standard_normal((count, n))
    return pts / np.linalg.norm(pts, axis=1, keepdims=True)


def sphere_cells(n, cells=None):
    """Corner directions and inflation ratios covering ``S^{n-1}``.

    Returns ``(corners, ratio)`` with ``corners`` of shape ``(C, k, n)`` unit
    vectors and ``ratio`` of shape ``(C,)``: for ``r`` in cell ``c`` and convex
    homogeneous ``f``, ``f(r) <= ratio[c] * max_i f(corners[c, i])``.
    """
    cells = cells or SPHERE_CELLS.get(n, 16)
    if n == 2:
        # arcs: the chord midpoint lies at distance cos(d/2) from the origin
        phi = np.linspace(0.0, np.pi, cells + 1)
        pts = np.stack([np.cos(phi), np.sin(phi)], axis=1)
        corners = np.stack([pts[:-1], pts[1:]], axis=1)
        ratio = np.full(cells, 1.0 / np.cos(np.pi / cells / 2))
        return corners, ratio
    if n != 3:
        raise ValueError("cell covering implemented for n = 2, 3")
    # three cube faces x_j = 1 cover the half sphere up to sign
    t = np.linspace(-1.0, 1.0, cells + 1)
    lo, hi = t[:-1], t[1:]
    A, B = np.meshgrid(np.arange(cells), np.arange(cells), indexing="ij")
    A, B = A.ravel(), B.ravel()
    quad = [(lo[A], lo[B]), (hi[A], lo[B]), (lo[A], hi[B]), (hi[A], hi[B])]
    # nearest point of the cell to the face centre
    ca = np.clip(0.0, lo[A], hi[A])
    cb = np.clip(0.0, lo[B], hi[B])
    dmin = np.sqrt(1 + ca * ca + cb * cb)
    all_corners, all_ratio = [], []
    for face in range(3):
        others = [j for j in range(3) if j != face]
        pts = np.zeros((A.size, 4, 3))
        for i, (x, y) in enumerate(quad):
            pts[:, i, face] = 1.0
            pts[:, i, others[0]] = x
            pts[:, i, others[1]] = y
        lens = np.linalg.norm(pts, axis=2)
        all_corners.append(pts / lens[..., None])
        all_ratio.append(lens.max(axis=1) / dmin)
    return np.concatenate(all_corners), np.concatenate(all_ratio)


def certified_sphere_upper(upper_batch, n, cells=None):
    """Upper bound of ``sup_{|r|=1} f(r)`` given vectorised ``upper_batch >= f``."""
    if n == 1:
        return float(upper_batch(np.ones((1, 1)))[0])
    corners, ratio = sphere_cells(n, cells)
    C, k, _ = corners.shape
    vals = upper_batch(corners.reshape(C * k, n)).reshape(C, k)
    return float((vals.max(axis=1) * ratio).max())


def _ascend(objective, r0, scale=0.25):
    """Coordinate-free local ascent on the sphere (Nelder-Mead in angles)."""
    n = r0.shape[0]
    if n == 1:
        return r0, objective(r0)
    if n == 2:
        phi0 = np.arctan2(r0[1], r0[0])
        res = scipy.optimize.minimize_scalar(
            lambda p: -objective(np.array([np.cos(p), np.sin(p)])),
            bounds=(phi0 - scale, phi0 + scale), method="bounded",
            options={"xatol": 1e-8, "maxiter": 40},
        )
        r = np.array([np.cos(res.x), np.sin(res.x)])
        return r, -res.fun
    res = scipy.optimize.minimize(
        lambda x: -objective(_unit(x)), r0, method="Nelder-Mead",
        options={"xatol": 1e-9, "fatol": 1e-13, "maxiter": 60 * n},
    )
    return _unit(res.x), -res.fun


def sphere_sup(n, norm, evaluate, search, upper_batch, config):
    """Generic sup of a convex homogeneous objective over the ``N``-unit ball.

    ``evaluate(r)`` returns a NormInterval on the full schedule, ``search(r)``
    a cheap lower bound, ``upper_batch(R)`` a vectorised upper bound.
    """
    norm = NormChoice.parse(norm)
    # every norm on R^1 has the unit ball [-1, 1]
    verts = np.ones((1, 1)) if n == 1 else norm.extreme_points(n)
    if verts is not None:
        best, best_r = None, None
        for v in verts:
            iv = evaluate(v)
            if best is None or iv.lower > best.lower:
                best_r = v
            best = iv if best is None else NormInterval(
                max(best.lower, iv.lower), max(best.upper, iv.upper),
                max(best.radius, iv.radius), best.converged and iv.converged, iv.method,
            )
        return best, best_r, "exact-vertex", 0.0
    dirs = fibonacci_directions(n, SEARCH_POINTS.get(n, 32))
    dirs = np.concatenate([np.eye(n), dirs])
    vals = np.array([search(r) for r in dirs])
    order = np.argsort(vals)[::-1]
    best_r, best_v = dirs[order[0]], vals[order[0]]
    for i in order[:3]:
        r, v = _ascend(search, dirs[i], scale=np.pi / SEARCH_POINTS.get(n, 32))
        if v > best_v:
            best_r, best_v = r, v
    for _ in range(ASCENT_STEPS):
        r, v = _ascend(search, best_r, scale=0.05)
        if v <= best_v + 1e-13:
            break
        best_r, best_v = r, v
    final = evaluate(best_r)
    up = certified_sphere_upper(upper_batch, n)
    up = max(up, final.lower)
    iv = NormInterval(final.lower, up, final.radius, final.converged, final.method)
    return iv, best_r, "grid", max(0.0, up - final.lower)


# -- Lipschitz seminorm ----------------------------------------------------------


def _is_scalar(a):
    return (a - trace(a)).is_zero()


def _derivative_family(a):
    """Coefficient table ``D[k, j]`` of ``d_j a`` on the shared support."""
    k = a.keys.astype(float)
    return 2j * np.pi * k * a.coeffs[:, None]


def lipschitz_L(a, norm=NormChoice.L2, config=None):
    """``sup_{N(r) <= 1} ||sum r_j d_j a||`` as a SeminormEstimate."""
    config = config or GNSConfig()
    norm = NormChoice.parse(norm)
    if not is_self_adjoint(a, 1e-10 * max(1.0, a.max_abs())):
        raise ValueError("Lipschitz seminorm is defined on self-adjoint elements")
    n = a.n
    if _is_scalar(a):
        return SeminormEstimate(NormInterval.exact(0.0), {"r": [0.0] * n}, "exact", config.seed, 0)
    table = _derivative_family(a)
    R = config.search(n)

    def element(r):
        return TorusElement(a.theta, a.keys, table @ np.asarray(r, dtype=float))

    def evaluate(r):
        return norm_interval(element(r), config)

    family = CompressionFamily([derive(a, j + 1) for j in range(n)], R, config, "skew")

    def upper_batch(rs):
        return np.abs(rs @ table.T).sum(axis=1)

    iv, r, method, gap = sphere_sup(n, norm, evaluate, family, upper_batch, config)
    return SeminormEstimate(iv, {"r": [float(x) for x in r]}, method, config.seed, iv.radius, gap)


def lipschitz_L_def(a, norm=NormChoice.L2, samples=64, seed=0, config=None):
    """Difference-quotient lower bound ``max_t ||alpha_t(a) - a|| / N(t)``.

    ``samples`` is either an array of points of ``R^n`` or a count of random
    points.  Points are reduced to ``[-1/2, 1/2)^n``; ``t = 0`` is skipped.
    """
    config = config or GNSConfig()
    norm = NormChoice.parse(norm)
    if not is_self_adjoint(a, 1e-10 * max(1.0, a.max_abs())):
        raise ValueError("Lipschitz seminorm is defined on self-adjoint elements")
    if np.isscalar(samples):
        samples = np.random.default_rng(seed).uniform(-0.5, 0.5, size=(int(samples), a.n))
    pts = np.asarray(samples, dtype=float).reshape(-1, a.n)
    pts = pts - np.floor(pts + 0.5)
    best, best_t, trail = 0.0, None, []
    for t in pts:
        nt = norm(t)
        if nt == 0.0:
            trail.append(best)
            continue
        val = norm_interval(act(a, t) - a, config).lower / nt
        if val > best:
            best, best_t = val, t
        trail.append(best)
    return {"lower": best, "witness": None if best_t is None else best_t.tolist(), "trail": trail}


# -- connection D-norm -------------------------------------------------------------


def _quadratic_table(g, vs):
    """Coefficients of ``<V_m|V_m'>_g`` on a shared support, shape ``(K, n, n)``."""
    n = len(vs)
    grams = [[inner_g(g, vs[m], vs[q]) for q in range(n)] for m in range(n)]
    keys = np.unique(np.concatenate([np.zeros((1, g.n), dtype=np.int64)] +
                                    [x.keys for row in grams for x in row]), axis=0)
    table = np.zeros((keys.shape[0], n, n), dtype=complex)
    index = {tuple(k): i for i, k in enumerate(keys)}
    for m in range(n):
        for q in range(n):
            x = grams[m][q]
            for k, c in zip(x.keys, x.coeffs):
                table[index[tuple(k)], m, q] = c
    return keys, table


def nabla_family(gamma, x):
    return [nabla_coordinate(gamma, x, m + 1) for m in range(x.n)]


def s_partial(g, gamma, x, norm=NormChoice.L2, config=None):
    """``S_d = sup_{N(r) <= 1} ||sum r_m nabla_{d_m} X||_g``."""
    config = config or GNSConfig()
    n = x.n
    vs = nabla_family(gamma, x)
    if all(v.max_abs() == 0.0 for v in vs):
        return SeminormEstimate(NormInterval.exact(0.0), {"r": [0.0] * n}, "exact", config.seed, 0)
    keys, table = _quadratic_table(g, vs)
    R = config.search(n)

    def gram(r):
        r = np.asarray(r, dtype=float)
        return TorusElement(g.theta, keys, np.einsum("kmq,m,q->k", table, r, r))

    def evaluate(r):
        return norm_interval(gram(r), config).sqrt()

    flat = [TorusElement(g.theta, keys, table[:, m, q]) for m in range(n) for q in range(n)]
    family = CompressionFamily(flat, R, config, "hermitian")

    def search(r):
        r = np.asarray(r, dtype=float)
        return float(np.sqrt(family(np.outer(r, r).ravel())))

    flat_table = table.reshape(table.shape[0], n * n)

    def upper_batch(rs):
        outer = (rs[:, :, None] * rs[:, None, :]).reshape(rs.shape[0], n * n)
        return np.sqrt(np.abs(outer @ flat_table.T).sum(axis=1))

    iv, r, method, gap = sphere_sup(n, norm, evaluate, search, upper_batch, config)
    return SeminormEstimate(iv, {"r": [float(v) for v in r]}, method, config.seed, iv.radius, gap)


def d_norm_upper(g, gamma, x, norm=NormChoice.L2, cells=512):
    """Cheap sound upper bound of ``D_g(X)`` from coefficient sums only.

    A coarse sphere covering only inflates the bound slightly.
    """
    norm = NormChoice.parse(norm)
    n = x.n
    nx = float(np.sqrt(inner_g(g, x, x).l1()))
    vs = nabla_family(gamma, x)
    if all(v.max_abs() == 0.0 for v in vs):
        return nx
    keys, table = _quadratic_table(g, vs)
    flat_table = table.reshape(table.shape[0], n * n)

    def upper_batch(rs):
        outer = (rs[:, :, None] * rs[:, None, :]).reshape(rs.shape[0], n * n)
        return np.sqrt(np.abs(outer @ flat_table.T).sum(axis=1))

    verts = np.ones((1, 1)) if n == 1 else norm.extreme_points(n)
    if verts is not None:
        sd = float(upper_batch(np.asarray(verts, dtype=float)).max())
    else:
        sd = certified_sphere_upper(upper_batch, n, cells)
    return max(nx, sd)


def _half_box(n, radius):
    pts = itertools.product(range(-radius, radius + 1), repeat=n)
    return [np.array(p) for p in pts if tuple(p) > (0,) * n]


def ad_candidates(theta, radius=None):
    """Normalised self-adjoint traceless ``h``; the inner part is ``b = i h``."""
    n = theta.n
    radius = radius or (2 if n == 1 else 1)
    base = []
    for k in _half_box(n, radius):
        for c in (1.0, 1j):
            m = monomial(theta, k, c)
            h = m + adjoint(m)
            base.append(h.scale(1.0 / h.l1()))
    combos = list(base)
    for h1, h2 in itertools.combinations(base, 2):
        for sgn in (1.0, -1.0):
            h = h1 + h2.scale(sgn)
            if not h.is_zero():
                combos.append(h.scale(1.0 / h.l1()))
    return combos


def _ad_value(h, p, R, config):
    """``||i h X||_g^2 = ||h <X|X>_g h||`` at search radius."""
    return norm_lower_at(multiply(multiply(h, p), h), R, config)


def s_ad(g, x, config=None, norm_x=None):
    """Interval for ``sup_{||b|| <= 1} ||b . X||_g`` over skew traceless ``b``.

    The lower end comes from a candidate search with a few rounds of pairwise
    refinement; the upper end is ``||X||_g``.
    """
    config = config or GNSConfig()
    norm_x = norm_x or norm_g(g, x, config)
    if norm_x.upper == 0.0:
        return SeminormEstimate(NormInterval.exact(0.0), {"b": []}, "exact", config.seed, 0)
    p = inner_g(g, x, x)
    R = config.search(x.n)
    cands = ad_candidates(x.theta)
    vals = np.array([_ad_value(h, p, R, config) for h in cands])
    order = np.argsort(vals)[::-1]
    best_h, best_v = cands[order[0]], vals[order[0]]
    top = [cands[i] for i in order[:3]]
    rng = np.random.default_rng(config.seed)
    for _ in range(ASCENT_STEPS):
        w = rng.standard_normal(len(top))
        h = best_h
        for c, t in zip(w, top):
            h = h + t.scale(0.25 * c)
        h = h - trace(h)
        if h.is_zero():
            continue
        h = h.scale(1.0 / h.l1())
        v = _ad_value(h, p, R, config)
        if v > best_v:
            best_h, best_v = h, v
    b = best_h.scale(1j)
    lower = norm_interval(multiply(multiply(best_h, p), best_h), config).sqrt().lower
    lower = min(lower, norm_x.upper)
    iv = NormInterval(lower, norm_x.upper, norm_x.radius, norm_x.converged, "sampled")
    return SeminormEstimate(iv, {"b": b.to_records()}, "sampled", config.seed, iv.radius)


def op_seminorm(g, gamma, x, norm=NormChoice.L2, config=None, norm_x=None):
    """``sup ||nabla_delta X||_g`` over the Der-ball, as ``max(S_d, S_ad)``."""
    config = config or GNSConfig()
    sd = s_partial(g, gamma, x, norm, config)
    sa = s_ad(g, x, config, norm_x)
    iv = interval_max(sd.interval, sa.interval, method="max")
    method = "exact-vertex" if sd.method == "exact-vertex" else sd.method
    est = SeminormEstimate(iv, {"partial": sd.witness, "inner": sa.witness}, method,
                           config.seed, iv.radius, sd.gap)
    est.parts = {"S_partial": sd, "S_ad": sa}
    return est


def d_norm(g, gamma, x, norm=NormChoice.L2, config=None):
    """``D_g(X) = max(||X||_g, |||X|||_g)``.

    Also attaches ``Dp = max(||X||_g, S_d)``; since ``S_ad <= ||X||_g`` the
    two coincide mathematically, which the intervals reflect.
    """
    config = config or GNSConfig()
    nx = norm_g(g, x, config)
    op = op_seminorm(g, gamma, x, norm, config, nx)
    iv = interval_max(nx, op.interval, method="max")
    est = SeminormEstimate(iv, op.witness, op.method, config.seed, iv.radius, op.gap)
    est.parts = dict(op.parts, norm_g=nx)
    est.dp = interval_max(nx, op.parts["S_partial"].interval, method="max")
    return est


# -- inequality checks ---------------------------------------------------------------


def _verdict(lhs, rhs, tol):
    return {"lhs": float(lhs), "rhs": float(rhs), "tol": tol, "pass": bool(lhs <= rhs + tol)}


def check_G_inequality(g, gamma, a, x, norm=NormChoice.L2, config=None, tol=1e-6):
    """``D(a.X) <= (3||a|| + L(a)) D(X)`` in sound mode."""
    config = config or GNSConfig()
    ax = x.left(a)
    dax = d_norm(g, gamma, ax, norm, config)
    dx = d_norm(g, gamma, x, norm, config)
    na = norm_interval(a, config)
    la = lipschitz_L(a, norm, config)
    sound = _verdict(dax.lower, (3 * na.upper + la.upper) * dx.upper, tol)
    mid = lambda iv: 0.5 * (iv.lower + iv.upper)
    sharp = _verdict(mid(dax.interval), (3 * mid(na) + mid(la.interval)) * mid(dx.interval), tol)
    return {"check": "G", "sound": sound, "sharp": sharp, "pass": sound["pass"]}


def check_H_inequality(g, gamma, x, y, norm=NormChoice.L2, config=None, tol=1e-6):
    """``max(L(Re<X|Y>), L(Im<X|Y>)) <= 2 D(X) D(Y)`` plus the derivative-level form."""
    config = config or GNSConfig()
    m = inner_g(g, x, y)
    lre = lipschitz_L(real_part(m), norm, config)
    lim = lipschitz_L(imag_part(m), norm, config)
    lhs = max(lre.lower, lim.lower)
    dx = d_norm(g, gamma, x, norm, config)
    dy = d_norm(g, gamma, y, norm, config)
    sound = _verdict(lhs, 2 * dx.upper * dy.upper, tol)
    sx, sy = dx.parts["S_partial"], dy.parts["S_partial"]
    nx, ny = dx.parts["norm_g"], dy.parts["norm_g"]
    sharp = _verdict(lhs, sx.upper * ny.upper + nx.upper * sy.upper, tol)
    return {"check": "H", "sound": sound, "sharp": sharp, "pass": sound["pass"] and sharp["pass"]}


def check_leibniz_L(a, b, norm=NormChoice.L2, config=None, tol=1e-6):
    """Jordan and Lie products against ``||a|| L(b) + L(a) ||b||``."""
    config = config or GNSConfig()
    ab, ba = multiply(a, b), multiply(b, a)
    jordan = (ab + ba).scale(0.5)
    lie = (ab - ba).scale(-0.5j)
    na, nb = norm_interval(a, config), norm_interval(b, config)
    la, lb = lipschitz_L(a, norm, config), lipschitz_L(b, norm, config)
    rhs = na.upper * lb.upper + la.upper * nb.upper
    rj = _verdict(lipschitz_L(jordan, norm, config).lower, rhs, tol)
    rl = _verdict(lipschitz_L(lie, norm, config).lower, rhs, tol)
    return {"check": "leibniz", "jordan": rj, "lie": rl, "pass": rj["pass"] and rl["pass"]}


def check_lemma45(delta, a, norm=NormChoice.L2, config=None, tol=1e-6):
    """``||delta(a)|| <= (2||a|| + L(a)) ||delta||`` in sound mode."""
    config = config or GNSConfig()
    lhs = norm_interval(delta(a), config)
    na = norm_interval(a, config)
    la = lipschitz_L(a, norm, config)
    dn = der_norm(delta, norm, config)
    v = _verdict(lhs.lower, (2 * na.upper + la.upper) * dn.upper, tol)
    return {"check": "lemma45", "sound": v, "pass": v["pass"]}


__all__ = [
    "SeminormEstimate",
    "certified_sphere_upper",
    "check_G_inequality",
    "check_H_inequality",
    "check_leibniz_L",
    "check_lemma45",
    "d_norm",
    "d_norm_upper",
    "lipschitz_L",
    "lipschitz_L_def",
    "op_seminorm",
    "s_ad",
    "s_partial",
    "sphere_sup",
]

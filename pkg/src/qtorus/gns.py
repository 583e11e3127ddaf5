"""Operator-norm enclosures through the tracial GNS representation.

The trace gives the Hilbert space ``l^2(Z^n)`` with orthonormal basis
``u^q``; left multiplication by ``a`` sends ``u^q`` to
``sum_p c_p lambda(p, q) u^{p+q}``.  Because ``Z^n`` is amenable this
representation is faithful and isometric, so the norm of any compression to a
finite box is a lower bound for ``||a||``.  The coefficient l1 sum is an upper
bound since every monomial is unitary.

A second sound lower bound is used when the support of an element only
involves pairwise commuting generators: the C*-subalgebra they generate is
``C(T^m)`` and evaluation at any point of the torus is a character.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.optimize
import scipy.sparse as sp

from .algebra import TorusElement, adjoint, multiply

# dense SVD is cheaper than power iteration below this many columns
DENSE_LIMIT = 1500


class TruncationWarning(UserWarning):
    """The truncation box does not contain the support of the element."""


class NormEngineError(RuntimeError):
    pass


def default_radii(n):
    return (4, 8, 12) if n <= 2 else (2, 4, 6)


@dataclass(frozen=True)
class GNSConfig:
    """Settings for the norm engine.

    ``radii`` is the truncation schedule; ``search_radius`` (default: the
    first radius) is used inside optimisation loops, with the final witness
    re-evaluated on the full schedule.
    """

    radii: tuple = None
    tol: float = 1e-10
    seed: int = 0
    restarts: int = 3
    max_iter: int = 2000
    stop_delta: float = 1e-8
    characters: bool = True
    char_grid: int = 0
    search_radius: int = None

    def for_dim(self, n):
        radii = tuple(self.radii) if self.radii else default_radii(n)
        if any(r < 1 for r in radii) or list(radii) != sorted(radii):
            raise ValueError(f"radius schedule must be positive and increasing: {radii}")
        return radii

    def search(self, n):
        return self.search_radius or self.for_dim(n)[0]

    def to_dict(self):
        return {
            "radii": list(self.radii) if self.radii else None,
            "tol": self.tol,
            "seed": self.seed,
            "restarts": self.restarts,
            "characters": self.characters,
        }


@dataclass(frozen=True)
class TruncationBox:
    radius: int
    n: int

    def __post_init__(self):
        if self.radius < 1:
            raise ValueError("box radius must be >= 1")

    @property
    def side(self):
        return 2 * self.radius + 1

    @property
    def size(self):
        return self.side ** self.n

    def points(self):
        axes = [np.arange(-self.radius, self.radius + 1)] * self.n
        grid = np.meshgrid(*axes, indexing="ij")
        return np.stack([g.reshape(-1) for g in grid], axis=1).astype(np.int64)

    def index(self, pts):
        """Row indices of lattice points; ``-1`` for points outside the box."""
        pts = np.asarray(pts, dtype=np.int64)
        inside = np.all(np.abs(pts) <= self.radius, axis=-1)
        idx = np.zeros(pts.shape[:-1], dtype=np.int64)
        for j in range(self.n):
            idx = idx * self.side + (pts[..., j] + self.radius)
        return np.where(inside, idx, -1)


@dataclass(frozen=True)
class NormInterval:
    """Certified enclosure ``lower <= ||.|| <= upper``."""

    lower: float
    upper: float
    radius: int = 0
    converged: bool = True
    method: str = "gns"

    def __post_init__(self):
        object.__setattr__(self, "lower", float(self.lower))
        object.__setattr__(self, "upper", float(self.upper))
        if self.lower < 0 or self.upper < 0:
            raise ValueError(f"negative norm bound: [{self.lower}, {self.upper}]")
        if self.lower > self.upper * (1 + 1e-12) + 1e-12:
            raise ValueError(f"inverted interval: [{self.lower}, {self.upper}]")

    @property
    def width(self):
        return self.upper - self.lower

    def contains(self, x, slack=0.0):
        return self.lower - slack <= x <= self.upper + slack

    def overlaps(self, other, slack=0.0):
        return self.lower <= other.upper + slack and other.lower <= self.upper + slack

    def scale(self, c):
        c = abs(c)
        return NormInterval(c * self.lower, c * self.upper, self.radius, self.converged, self.method)

    def sqrt(self):
        return NormInterval(np.sqrt(self.lower), np.sqrt(self.upper), self.radius, self.converged, self.method)

    def __add__(self, other):
        return NormInterval(
            self.lower + other.lower,
            self.upper + other.upper,
            max(self.radius, other.radius),
            self.converged and other.converged,
            self.method,
        )

    @staticmethod
    def exact(x, method="exact"):
        return NormInterval(float(x), float(x), 0, True, method)

    def to_dict(self):
        return {
            "lower": float(self.lower),
            "upper": float(self.upper),
            "radius": int(self.radius),
            "converged": bool(self.converged),
        }


def interval_max(*ivs, method=None):
    return NormInterval(
        max(i.lower for i in ivs),
        max(i.upper for i in ivs),
        max(i.radius for i in ivs),
        all(i.converged for i in ivs),
        method or ivs[0].method,
    )


@dataclass(frozen=True)
class PositivityEvidence:
    min_eig: float
    radius: int
    verdict: str
    tol: float = 1e-9

    @property
    def plausible(self):
        return self.verdict == "plausible"

    def to_dict(self):
        return {"min_eig": self.min_eig, "radius": self.radius, "verdict": self.verdict}


# -- representation -----------------------------------------------------------


def represent(a, box, cobox=None):
    """Compression of left multiplication by ``a`` to the box.

    Entry ``(p+q, q)`` is ``c_p lambda(p, q)`` for ``q`` in ``box`` and
    ``p+q`` in ``cobox`` (default: the same box).  Returns a CSR matrix.
    """
    cobox = cobox or box
    if a.n != box.n:
        raise ValueError("box dimension does not match the element")
    if a.support_radius() > 2 * box.radius:
        warnings.warn(
            f"support radius {a.support_radius()} exceeds box diameter {2 * box.radius}",
            TruncationWarning,
            stacklevel=2,
        )
    shape = (cobox.size, box.size)
    if len(a) == 0:
        return sp.csr_matrix(shape, dtype=complex)
    q = box.points()
    lam = a.theta.phase(a.keys, q)
    vals = a.coeffs[:, None] * lam
    rows = cobox.index(a.keys[:, None, :] + q[None, :, :])
    cols = np.broadcast_to(np.arange(box.size), rows.shape)
    keep = rows >= 0
    return sp.csr_matrix((vals[keep], (rows[keep], cols[keep])), shape=shape)


def represent_matrix(m, box):
    """Block compression of an ``n x n`` grid of elements acting on ``box^n``."""
    blocks = [[represent(x, box) for x in row] for row in m]
    return sp.bmat(blocks, format="csr")


# -- spectral primitives ------------------------------------------------------


def top_singular_value(mat, rng=None, restarts=3, tol=1e-10, max_iter=2000, hermitian=False):
    """Largest singular value; returns ``(value, converged)``.

    Power iteration on ``M^H M`` always reports ``||Mv|| / ||v||`` for its
    final vector, which never exceeds the true value, so an unconverged run
    still yields a valid lower bound.
    """
    if mat.shape[0] == 0 or mat.shape[1] == 0 or mat.nnz == 0:
        return 0.0, True
    if mat.shape[1] <= DENSE_LIMIT:
        if hermitian:
            ev = scipy.linalg.eigvalsh(mat.toarray())
            return float(max(-ev[0], ev[-1])), True
        s = scipy.linalg.svdvals(mat.toarray())
        return float(s[0]), True
    rng = rng if rng is not None else np.random.default_rng(0)
    best, conv_all = 0.0, True
    mh = mat.conj().T.tocsr()
    for _ in range(restarts):
        v = rng.standard_normal(mat.shape[1]) + 1j * rng.standard_normal(mat.shape[1])
        v /= np.linalg.norm(v)
        est, converged = 0.0, False
        for _ in range(max_iter):
            w = mat @ v
            new = float(np.linalg.norm(w))
            if new == 0.0:
                converged = True
                break
            v = mh @ w
            v /= np.linalg.norm(v)
            if abs(new - est) <= tol * new:
                est = new
                converged = True
                break
            est = new
        est = float(np.linalg.norm(mat @ v))
        best = max(best, est)
        conv_all = conv_all and converged
    return best, conv_all


# -- character bound ----------------------------------------------------------


def commuting_axes(theta, axes):
    """True if the generators on ``axes`` pairwise commute."""
    return all(theta.pair_commutes(j, k) for i, j in enumerate(axes) for k in axes[i + 1:])


def _char_grid(m, grid):
    if grid:
        g = grid
    else:
        g = {1: 256, 2: 48, 3: 16}.get(m, 8)
    axes = [np.arange(g) / g] * m
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([x.reshape(-1) for x in mesh], axis=1)


class CharacterSampler:
    """Evaluates linear families of commuting polynomials at torus points.

    ``elements`` is a list (possibly of matrix grids flattened row-major) of
    TorusElements supported on the same commuting axes.  ``value(w, t)``
    returns the weighted sum's values at points ``t``.
    """

    def __init__(self, elements, axes, grid=0, shape=None):
        self.axes = list(axes)
        self.shape = shape
        self.elements = elements
        self.grid = _char_grid(len(self.axes), grid) if self.axes else np.zeros((1, 0))
        self._grid_vals = self._eval(self.grid)

    def _eval(self, t):
        out = np.zeros((len(self.elements), t.shape[0]), dtype=complex)
        for i, e in enumerate(self.elements):
            if len(e) == 0:
                continue
            ks = e.keys[:, self.axes].astype(float)
            out[i] = np.exp(2j * np.pi * (t @ ks.T)) @ e.coeffs
        return out

    def _magnitude(self, vals):
        # vals: (points,) for scalars, or (points, d, d) for matrices
        if self.shape is None:
            return np.abs(vals)
        return np.linalg.norm(vals, ord=2, axis=(1, 2))

    def _combine(self, w, raw):
        if self.shape is not None:
            # matrix grids: w scales the entries, no summation
            d = self.shape
            return (w[:, None] * raw).reshape(d, d, -1).transpose(2, 0, 1)
        return np.tensordot(w, raw, axes=(0, 0))

    def maximize(self, w=None, refine=3):
        w = np.ones(len(self.elements)) if w is None else np.asarray(w)
        mags = self._magnitude(self._combine(w, self._grid_vals))
        best = float(np.max(mags))
        if not self.axes:
            return best, self.grid[0]
        best_t = self.grid[int(np.argmax(mags))]
        order = np.argsort(mags)[::-1][:refine]

        def neg(t):
            return -float(self._magnitude(self._combine(w, self._eval(t.reshape(1, -1))))[0])

        h = 1.0 / round(self.grid.shape[0] ** (1.0 / len(self.axes)))
        for i in order:
            t0 = self.grid[i]
            if len(self.axes) == 1:
                res = scipy.optimize.minimize_scalar(
                    lambda x: neg(np.array([x])), bounds=(t0[0] - h, t0[0] + h),
                    method="bounded", options={"xatol": 1e-12},
                )
                t, val = np.array([res.x]), -res.fun
            else:
                res = scipy.optimize.minimize(
                    neg, t0, method="Nelder-Mead",
                    options={"xatol": 1e-11, "fatol": 1e-14, "maxiter": 400},
                )
                t, val = res.x, -res.fun
            if val > best:
                best, best_t = float(val), t
        return best, best_t


def character_lower(a, grid=0):
    """Max of ``|a(t)|`` over sampled characters, or ``None`` if not applicable."""
    axes = a.support_axes()
    if not commuting_axes(a.theta, axes):
        return None
    if not axes:
        return abs(complex(a.coeffs[0])) if len(a) else 0.0
    val, _ = CharacterSampler([a], axes, grid).maximize()
    return val


CHAR_FFT_GRID = {1: 1 << 16, 2: 1024}


def character_bounds(a):
    """Certified ``(lower, upper)`` for ``sup |a|`` on ``T^m``, ``m <= 2``, or ``None``.

    ``|a|^2`` is a real trigonometric polynomial ``p``.  Sampling it on an FFT
    grid of step ``h`` and adding the curvature term
    ``(m h^2 / 8) * sum (2 pi |k|)^2 |d_k|`` bounds its maximum from above,
    since the gradient vanishes at the true maximiser.
    """
    axes = a.support_axes()
    m = len(axes)
    if m == 0 or m > 2 or not commuting_axes(a.theta, axes):
        return None
    p = multiply(adjoint(a), a)
    ks = p.keys[:, list(axes)]
    G = CHAR_FFT_GRID[m]
    if 2 * int(np.abs(ks).max()) + 1 >= G:
        return None
    arr = np.zeros((G,) * m, dtype=complex)
    np.add.at(arr, tuple((ks % G).T), p.coeffs)
    vals = np.fft.ifftn(arr).real * G ** m
    mass = float(np.abs(p.coeffs).sum())
    rounding = 1e-13 * mass
    peak = float(vals.max())
    curv = float((np.abs(p.coeffs) * (2 * np.pi) ** 2 * (ks.astype(float) ** 2).sum(axis=1)).sum())
    slack = m * curv / (8.0 * G * G)
    lower = np.sqrt(max(peak - rounding, 0.0))
    upper = np.sqrt(peak + slack + rounding)
    return float(lower), float(upper)


def _grid_axes(m):
    axes = set()
    for row in m:
        for x in row:
            axes.update(x.support_axes())
    return tuple(sorted(axes))


def matrix_character_lower(m, grid=0):
    flat = [x for row in m for x in row]
    theta = flat[0].theta
    axes = _grid_axes(m)
    if not commuting_axes(theta, axes):
        return None
    sampler = CharacterSampler(flat, axes, grid, shape=len(m))
    val, _ = sampler.maximize(refine=2)
    return val


# -- norm intervals -----------------------------------------------------------


def _compression_lower(a, config, rng):
    """Lower bounds along the radius schedule; stops early on stagnation."""
    lowers = []
    converged = True
    radius = 0
    # square compressions of self-adjoint elements are Hermitian; a rounding
    # level skew part is split off and charged to the bound
    skew_l1 = 0.0
    herm = False
    ah = adjoint(a)
    if a.isclose(ah, 1e-12 * max(1.0, a.max_abs())):
        skew_l1 = (a - ah).l1() / 2
        a = (a + ah).scale(0.5)
        herm = True
    for R in config.for_dim(a.n):
        box = TruncationBox(R, a.n)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", TruncationWarning)
            mat = represent(a, box)
        val, conv = top_singular_value(mat, rng, config.restarts, config.tol, config.max_iter, herm)
        val = max(0.0, val - skew_l1)
        converged = converged and conv
        if lowers:
            val = max(val, lowers[-1])
        lowers.append(val)
        radius = R
        if len(lowers) > 1 and lowers[-1] - lowers[-2] < config.stop_delta:
            break
    return lowers, radius, converged


def norm_interval(a, config=None, radii=None):
    """Certified ``[lower, upper]`` for the C*-norm of ``a``."""
    config = config or GNSConfig()
    if radii is not None:
        config = GNSConfig(radii=tuple(radii), tol=config.tol, seed=config.seed,
                           restarts=config.restarts, characters=config.characters)
    upper = a.l1()
    if len(a) == 0:
        return NormInterval(0.0, 0.0, 0, True, "exact")
    if len(a) == 1:
        # c u^k is |c| times a unitary
        v = abs(complex(a.coeffs[0]))
        return NormInterval(v, v, 0, True, "monomial")
    rng = np.random.default_rng(config.seed)
    lowers, radius, converged = _compression_lower(a, config, rng)
    lower, method = lowers[-1], "gns"
    if config.characters:
        ch = character_lower(a, config.char_grid)
        if ch is not None and ch > lower:
            lower, method = ch, "character"
        cb = character_bounds(a)
        if cb is not None:
            if cb[0] > lower:
                lower, method = cb[0], "character"
            upper = min(upper, cb[1])
    lower = min(lower, upper)
    return NormInterval(lower, upper, radius, converged, method)


def norm_lower_at(a, radius, config=None):
    """Single-radius lower bound (used inside search loops)."""
    config = config or GNSConfig()
    if len(a) == 0:
        return 0.0
    if len(a) == 1:
        return abs(complex(a.coeffs[0]))
    box = TruncationBox(radius, a.n)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        val, _ = top_singular_value(represent(a, box), np.random.default_rng(config.seed),
                                    config.restarts, config.tol, config.max_iter)
    if config.characters:
        ch = character_lower(a, config.char_grid)
        if ch is not None:
            val = max(val, ch)
    return min(val, a.l1())


class CompressionFamily:
    """Fast lower bounds for ``||sum_i w_i x_i||`` with real weights ``w``.

    The compressions of the ``x_i`` to one box are assembled once, so each
    query is a small dense eigen- or singular-value problem.  ``kind`` is
    ``"hermitian"`` or ``"skew"`` when every combination is (skew-)adjoint.
    """

    def __init__(self, elements, radius, config=None, kind="general"):
        config = config or GNSConfig()
        self.elements = list(elements)
        n = self.elements[0].n
        box = TruncationBox(radius, n)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", TruncationWarning)
            self.mats = np.stack([represent(x, box).toarray() for x in self.elements])
        if kind == "skew":
            self.mats = -1j * self.mats
        self.kind = kind
        self.sampler = None
        if config.characters:
            axes = set()
            for x in self.elements:
                axes.update(x.support_axes())
            axes = tuple(sorted(axes))
            if axes and commuting_axes(self.elements[0].theta, axes):
                self.sampler = CharacterSampler(self.elements, axes, config.char_grid)

    def __call__(self, w):
        w = np.asarray(w, dtype=float)
        m = np.tensordot(w, self.mats, axes=(0, 0))
        if self.kind == "general":
            val = float(scipy.linalg.svdvals(m)[0])
        else:
            ev = scipy.linalg.eigvalsh(m)
            val = float(max(-ev[0], ev[-1]))
        if self.sampler is not None:
            val = max(val, self.sampler.maximize(w, refine=1)[0])
        return val


def l1_matrix_bound(m):
    """Spectral norm of the matrix of coefficient l1 sums (sound upper bound)."""
    mags = np.array([[x.l1() for x in row] for row in m])
    return float(np.linalg.norm(mags, 2)) if mags.size else 0.0


def _check_square(m):
    d = len(m)
    if d == 0 or any(len(row) != d for row in m):
        raise ValueError("expected a square grid of elements")
    theta = m[0][0].theta
    if any(x.theta != theta for row in m for x in row):
        raise ValueError("grid entries belong to different quantum tori")
    return d, theta


def matrix_norm_interval(m, config=None):
    """Norm of ``[m_jk]`` in ``M_d(A_Theta)`` via the block GNS compression."""
    config = config or GNSConfig()
    d, theta = _check_square(m)
    upper = l1_matrix_bound(m)
    if upper == 0.0:
        return NormInterval(0.0, 0.0, 0, True, "exact")
    rng = np.random.default_rng(config.seed)
    lowers, radius, converged = [], 0, True
    for R in config.for_dim(theta.n):
        box = TruncationBox(R, theta.n)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", TruncationWarning)
            mat = represent_matrix(m, box)
        val, conv = top_singular_value(mat, rng, config.restarts, config.tol, config.max_iter)
        converged = converged and conv
        if lowers:
            val = max(val, lowers[-1])
        lowers.append(val)
        radius = R
        if len(lowers) > 1 and lowers[-1] - lowers[-2] < config.stop_delta:
            break
    lower, method = lowers[-1], "gns"
    if config.characters:
        ch = matrix_character_lower(m, config.char_grid)
        if ch is not None and ch > lower:
            lower, method = ch, "character"
    return NormInterval(min(lower, upper), upper, radius, converged, method)


def is_hermitian_grid(m, atol=1e-12):
    d = len(m)
    return all((m[j][k] - adjoint(m[k][j])).max_abs() <= atol for j in range(d) for k in range(d))


def hermitian_compression(m, box):
    if not is_hermitian_grid(m):
        raise ValueError("grid is not Hermitian (m* != m)")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        mat = represent_matrix(m, box).toarray()
    return 0.5 * (mat + mat.conj().T)


def positivity_check(m, radius, tol=1e-9):
    """Smallest eigenvalue of the Hermitian compression.

    A compression of a positive operator is positive, so ``min_eig < -tol``
    proves non-positivity; ``min_eig > tol`` is only supporting evidence.
    """
    d, theta = _check_square(m)
    box = TruncationBox(radius, theta.n)
    h = hermitian_compression(m, box)
    lo = float(scipy.linalg.eigvalsh(h, subset_by_index=[0, 0])[0])
    if lo > tol:
        verdict = "plausible"
    elif lo < -tol:
        verdict = "non-positive"
    else:
        verdict = "inconclusive"
    return PositivityEvidence(lo, radius, verdict, tol)


def _psd_sqrt(h, tol=1e-9, inverse=False):
    w, v = scipy.linalg.eigh(h)
    if w[0] < -tol:
        raise ValueError(f"compression has negative eigenvalue {w[0]:.3g}")
    w = np.clip(w, 0.0, None)
    if inverse:
        if w[0] <= tol:
            raise ValueError("compression is singular")
        w = 1.0 / w
    return (v * np.sqrt(w)) @ v.conj().T


def compression_sqrt(m, box, inverse=False):
    """Hermitian square root (or inverse square root) of the block compression."""
    return _psd_sqrt(hermitian_compression(m, box), inverse=inverse)


def compression_sqrt_norm(h, g, radius):
    """Heuristic estimate of ``||sqrt(h) sqrt(g^-1)||`` from compressions.

    Compression does not commute with products or square roots, so this is an
    estimate rather than a bound.
    """
    _, theta = _check_square(g)
    box = TruncationBox(radius, theta.n)
    sh = compression_sqrt(h, box)
    sgi = compression_sqrt(g, box, inverse=True)
    return float(np.linalg.norm(sh @ sgi, 2))

"""Levi-Civita connection of a metric on the free module.

The connection is determined by ``<nabla_{d_j} e_k | e_l>_g = gnat_jkl`` with

    gnat_jkl = (d_j g_kl + d_k g_jl - d_l g_jk) / 2.

Writing ``nabla_{d_j} e_k = sum_m Gamma^m_jk . e_m`` turns this into
``sum_m Gamma^m_jk g_ml = gnat_jkl``, which is solved with an approximate
inverse of ``g`` computed inside the algebra.  Everything downstream is
therefore quantified by the inverse residual ``eta``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import (
    TorusElement,
    adjoint,
    derive,
    derive_along,
    is_skew_adjoint,
    is_traceless,
    multiply,
    trace,
    truncate,
)
from .geometry import (
    MetricError,
    ModuleVector,
    grid_add,
    grid_identity,
    grid_matmul,
    grid_scale,
    inner_g,
)
from .gns import GNSConfig, NormInterval, l1_matrix_bound, norm_interval
from .norms import NormChoice


class InversionError(RuntimeError):
    """Newton iteration for the metric inverse did not reach the tolerance."""

    def __init__(self, message, residual, iterations):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


@dataclass
class InverseApprox:
    entries: list
    eta: float
    radius: int
    iterations: int
    metric: object = field(repr=False)
    history: list = field(default_factory=list, repr=False)

    def to_dict(self):
        return {"eta": self.eta, "radius": self.radius, "iterations": self.iterations}


def _truncate_grid(x, radius):
    return [[truncate(e, radius) for e in row] for row in x]


def inverse_residual(g, x):
    """l1 bounds of ``g x - I`` and ``x g - I``."""
    ident = grid_identity(g.theta)
    right = grid_add(grid_matmul(g.rows, x), ident, 1.0, -1.0)
    left = grid_add(grid_matmul(x, g.rows), ident, 1.0, -1.0)
    return l1_matrix_bound(right), l1_matrix_bound(left)


MAX_INVERSE_RADIUS = {1: 96, 2: 32, 3: 12}


def invert_metric(g, support_radius=None, tol=1e-8, max_iter=80, max_radius=None):
    """Newton-Hotelling iteration ``X <- X (2I - g X)`` with support truncation.

    Starts from ``I / u`` where ``u`` is the l1 bound of ``||g||``.  The
    inverse of a Laurent polynomial has exponentially decaying coefficients,
    so when the residual stalls at the truncation floor the support radius is
    doubled (up to ``max_radius``).  A fixed ``support_radius`` disables the
    growth.  Raises ``InversionError`` if the budget runs out.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if g.evidence.min_eig < 10 * tol:
        raise MetricError(
            f"metric too close to singular for inversion (min eig {g.evidence.min_eig:.3g})"
        )
    n = g.n
    fixed = support_radius is not None
    radius = support_radius if fixed else max(2, 4 * g.support_radius())
    cap = radius if fixed else (max_radius or MAX_INVERSE_RADIUS.get(n, 8))
    cap = max(cap, radius)
    ident = grid_identity(g.theta)
    x = grid_scale(ident, 1.0 / g.l1_bound())
    history = []
    prev = np.inf
    res = np.inf
    for it in range(max_iter + 1):
        resid = grid_add(grid_matmul(g.rows, x), ident, 1.0, -1.0)
        res = l1_matrix_bound(resid)
        history.append(res)
        if res <= tol:
            left = l1_matrix_bound(grid_add(grid_matmul(x, g.rows), ident, 1.0, -1.0))
            return InverseApprox(x, max(res, left), radius, it, g, history)
        if it == max_iter:
            break
        # Newton squares the residual until the truncation floor takes over
        if res > 0.5 * prev and res > 4.0 * prev * prev:
            if radius >= cap:
                raise InversionError(
                    f"residual stalled at {res:.3g} with support radius {radius}", res, it
                )
            radius = min(cap, 2 * radius)
        prev = res
        # X (2I - gX) = X - X (gX - I)
        x = _truncate_grid(grid_add(x, grid_matmul(x, resid), 1.0, -1.0), radius)
    raise InversionError(f"no convergence after {max_iter} steps (residual {res:.3g})", res, max_iter)


def g_natural(g, j, k, l):
    """``(d_j g_kl + d_k g_jl - d_l g_jk) / 2`` with 1-based indices."""
    j0, k0, l0 = j - 1, k - 1, l - 1
    return (derive(g[k0, l0], j) + derive(g[j0, l0], k) - derive(g[j0, k0], l)).scale(0.5)


@dataclass
class ChristoffelTensor:
    """``gamma[m][j][k]`` holds ``Gamma^{m+1}_{j+1,k+1}`` (0-based storage)."""

    gamma: list
    eta: float
    metric: object = field(repr=False)

    @property
    def n(self):
        return len(self.gamma)

    def symbol(self, m, j, k):
        """1-based accessor ``Gamma^m_jk``."""
        return self.gamma[m - 1][j - 1][k - 1]

    def nabla_basis(self, j, k):
        """``nabla_{d_j} e_k = sum_m Gamma^m_jk e_m`` (1-based)."""
        return ModuleVector([self.gamma[m][j - 1][k - 1] for m in range(self.n)])

    def max_abs(self):
        return max(x.max_abs() for a in self.gamma for b in a for x in b)

    def to_dict(self):
        return {
            "eta": self.eta,
            "gamma": [[[x.to_records() for x in b] for b in a] for a in self.gamma],
        }


def christoffel(g, ginv):
    """``Gamma^m_jk = sum_l gnat_jkl (g^-1)_lm``, symmetric in ``j, k`` by construction."""
    if ginv.metric is not g:
        same = ginv.metric.n == g.n and all(
            ginv.metric[j, k] == g[j, k] for j in range(g.n) for k in range(g.n)
        )
        if not same:
            raise MetricError("inverse was computed for a different metric")
    n = g.n
    zero = TorusElement.zero(g.theta)
    gnat = {}
    for j in range(n):
        for k in range(j, n):
            for l in range(n):
                gnat[j, k, l] = g_natural(g, j + 1, k + 1, l + 1)
    gamma = [[[zero] * n for _ in range(n)] for _ in range(n)]
    for m in range(n):
        for j in range(n):
            for k in range(j, n):
                acc = zero
                for l in range(n):
                    acc = acc + multiply(gnat[j, k, l], ginv.entries[l][m])
                gamma[m][j][k] = acc
                gamma[m][k][j] = acc
    return ChristoffelTensor(gamma, ginv.eta, g)


def levi_civita(g, support_radius=None, tol=1e-8):
    """Convenience: invert ``g`` and build its Christoffel tensor."""
    return christoffel(g, invert_metric(g, support_radius, tol))


# -- derivations ---------------------------------------------------------------


class Derivation:
    """``delta = sum_m r_m d_m + ad(b)`` with ``b`` skew-adjoint and traceless.

    ``ad(b)(a) = b a - a b``.
    """

    def __init__(self, r, b=None, theta=None, atol=1e-12):
        r = np.asarray(r, dtype=float).reshape(-1)
        if b is None:
            if theta is None:
                raise ValueError("need theta when b is omitted")
            b = TorusElement.zero(theta)
        if r.shape[0] != b.n:
            raise ValueError("direction length does not match the torus dimension")
        tol = atol * max(1.0, b.max_abs())
        if not is_skew_adjoint(b, tol):
            raise ValueError("inner part b must be skew-adjoint")
        if not is_traceless(b, tol):
            raise ValueError("inner part b must be traceless")
        self.r = r
        self.b = b

    @classmethod
    def coordinate(cls, theta, j):
        r = np.zeros(theta.n)
        r[j - 1] = 1.0
        return cls(r, theta=theta)

    @classmethod
    def inner(cls, b):
        return cls(np.zeros(b.n), b)

    @property
    def theta(self):
        return self.b.theta

    def __call__(self, a):
        return derive_along(a, self.r) + multiply(self.b, a) - multiply(a, self.b)

    def scale(self, c):
        return Derivation(self.r * c, self.b.scale(c))

    def to_dict(self):
        return {"r": self.r.tolist(), "b": self.b.to_records()}


def skew_part(a):
    """Skew-adjoint traceless part ``(a - a^*)/2 - tau(.)``."""
    s = (a - adjoint(a)).scale(0.5)
    return s - trace(s)


def covariant_derivative(gamma, delta, x):
    """``nabla_delta X`` for ``X = sum_j a_j e_j``.

    Leibniz rule with ``nabla_delta e_j = sum_m r_m nabla_{d_m} e_j + b . e_j``
    gives component ``i``:

        sum_m r_m d_m(a_i) + sum_j a_j sum_m r_m Gamma^i_mj + b a_i.
    """
    n = gamma.n
    if x.n != n:
        raise ValueError("module vector rank does not match the connection")
    r = delta.r
    out = []
    for i in range(n):
        acc = derive_along(x[i], r) + multiply(delta.b, x[i])
        for j in range(n):
            gij = TorusElement.zero(x.theta)
            for m in range(n):
                if r[m] != 0.0:
                    gij = gij + gamma.gamma[i][m][j].scale(r[m])
            if not gij.is_zero():
                acc = acc + multiply(x[j], gij)
        out.append(acc)
    return ModuleVector(out)


def nabla_coordinate(gamma, x, m):
    """``nabla_{d_m} X`` (1-based axis)."""
    return covariant_derivative(gamma, Derivation.coordinate(x.theta, m), x)


# -- axiom checks --------------------------------------------------------------


def compatibility_residual(g, gamma, delta, x, y):
    """``delta<X|Y>_g - <nabla X|Y>_g - <X|nabla Y>_g`` as an element."""
    lhs = delta(inner_g(g, x, y))
    a = inner_g(g, covariant_derivative(gamma, delta, x), y)
    b = inner_g(g, x, covariant_derivative(gamma, delta, y))
    return lhs - a - b


def default_axiom_samples(theta):
    samples = []
    for j in range(1, theta.n + 1):
        for k in range(1, theta.n + 1):
            for l in range(k, theta.n + 1):
                samples.append((Derivation.coordinate(theta, j),
                                ModuleVector.basis(theta, k), ModuleVector.basis(theta, l)))
    return samples


def check_axioms(g, gamma, samples=None, config=None):
    """Report torsion, self-adjointness and compatibility defects.

    Torsion is compared exactly; the other two defects are l1 upper bounds of
    the offending elements.
    """
    n = g.n
    torsion = 0.0
    for m in range(n):
        for j in range(n):
            for k in range(n):
                torsion = max(torsion, (gamma.gamma[m][j][k] - gamma.gamma[m][k][j]).max_abs())
    sa_defect = 0.0
    for j in range(n):
        for k in range(n):
            for l in range(n):
                s = TorusElement.zero(g.theta)
                for m in range(n):
                    s = s + multiply(gamma.gamma[m][j][k], g[m, l])
                sa_defect = max(sa_defect, (s - adjoint(s)).scale(0.5).l1())
    if samples is None:
        samples = default_axiom_samples(g.theta)
    compat = []
    for delta, x, y in samples:
        res = compatibility_residual(g, gamma, delta, x, y)
        compat.append({
            "delta": delta.to_dict(),
            "X": x.to_records(),
            "Y": y.to_records(),
            "residual_upper": res.l1(),
        })
    return {
        "torsion_defect": torsion,
        "self_adjoint_defect": sa_defect,
        "compatibility": compat,
        "eta": gamma.eta,
    }


def der_norm(delta, norm=NormChoice.L2, config=None):
    """``N(r) + ||b||`` as an interval."""
    norm = NormChoice.parse(norm)
    nr = norm(delta.r)
    b = norm_interval(delta.b, config or GNSConfig())
    return NormInterval(nr + b.lower, nr + b.upper, b.radius, b.converged, b.method)

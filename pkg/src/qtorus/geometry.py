"""The free module ``A^n`` with standard and metric-weighted inner products."""

from __future__ import annotations

import numbers

import numpy as np

from .algebra import TorusElement, adjoint, is_self_adjoint, multiply, one, random_element
from .gns import (
    GNSConfig,
    NormInterval,
    PositivityEvidence,
    default_radii,
    matrix_norm_interval,
    norm_interval,
    positivity_check,
)


class MetricError(ValueError):
    pass


class ModuleVector:
    """``sum_j a_j . e_j`` with ``n`` components over one quantum torus."""

    __slots__ = ("components", "theta")

    def __init__(self, components):
        comps = tuple(components)
        if not comps:
            raise ValueError("module vector needs at least one component")
        theta = comps[0].theta
        if len(comps) != theta.n:
            raise ValueError(f"module rank is {theta.n}, got {len(comps)} components")
        if any(c.theta != theta for c in comps):
            raise ValueError("components belong to different quantum tori")
        self.components = comps
        self.theta = theta

    @classmethod
    def basis(cls, theta, j):
        """The unit vector ``e_j`` (1-based)."""
        if not 1 <= j <= theta.n:
            raise IndexError(f"basis index {j} out of range 1..{theta.n}")
        z = TorusElement.zero(theta)
        return cls([one(theta) if i == j - 1 else z for i in range(theta.n)])

    @classmethod
    def zero(cls, theta):
        return cls([TorusElement.zero(theta)] * theta.n)

    @property
    def n(self):
        return len(self.components)

    def __getitem__(self, j):
        return self.components[j]

    def __iter__(self):
        return iter(self.components)

    def __add__(self, other):
        return ModuleVector([a + b for a, b in zip(self, other)])

    def __sub__(self, other):
        return ModuleVector([a - b for a, b in zip(self, other)])

    def __neg__(self):
        return ModuleVector([-a for a in self])

    def scale(self, c):
        return ModuleVector([a.scale(c) for a in self])

    def __mul__(self, c):
        if isinstance(c, numbers.Number):
            return self.scale(c)
        return NotImplemented

    __rmul__ = __mul__

    def left(self, a):
        """Left module action ``a . X``."""
        return ModuleVector([multiply(a, x) for x in self])

    def max_abs(self):
        return max(x.max_abs() for x in self)

    def isclose(self, other, atol=1e-12):
        return (self - other).max_abs() <= atol

    def support_radius(self):
        return max(x.support_radius() for x in self)

    def to_records(self):
        return [x.to_records() for x in self]

    @classmethod
    def from_records(cls, theta, records):
        if len(records) != theta.n:
            raise ValueError(f"module vector needs {theta.n} components, got {len(records)}")
        return cls([TorusElement.from_records(theta, r) for r in records])

    def __repr__(self):
        return "ModuleVector(" + ", ".join(repr(x) for x in self) + ")"


def left_action(a, x):
    return x.left(a)


# -- matrices over the algebra -------------------------------------------------


def grid_identity(theta, d=None):
    d = d or theta.n
    z = TorusElement.zero(theta)
    return [[one(theta) if j == k else z for k in range(d)] for j in range(d)]


def grid_matmul(a, b):
    d = len(a)
    out = []
    for j in range(d):
        row = []
        for k in range(len(b[0])):
            acc = TorusElement.zero(a[0][0].theta)
            for m in range(len(b)):
                acc = acc + multiply(a[j][m], b[m][k])
            row.append(acc)
        out.append(row)
    return out


def grid_add(a, b, alpha=1.0, beta=1.0):
    return [[x.scale(alpha) + y.scale(beta) for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def grid_scale(a, c):
    return [[x.scale(c) for x in row] for row in a]


def grid_max_abs(a):
    return max(x.max_abs() for row in a for x in row)


def grid_adjoint(a):
    d = len(a)
    return [[adjoint(a[k][j]) for k in range(d)] for j in range(d)]


# -- metrics -------------------------------------------------------------------


def evidence_radius(n):
    return default_radii(n)[0]


class MetricMatrix:
    """Riemannian metric: ``n x n`` grid of self-adjoint polynomials.

    ``floor`` is a structural lower bound on the spectrum (``epsilon`` for the
    conformal and rotated-diagonal constructors, ``None`` for explicit
    entries).  Positivity evidence is computed once at construction.
    """

    def __init__(self, entries, kind="explicit", floor=None, evidence=None, source=None,
                 evidence_tol=1e-9):
        rows = [tuple(r) for r in entries]
        d = len(rows)
        if d == 0 or any(len(r) != d for r in rows):
            raise MetricError("metric must be a square grid")
        theta = rows[0][0].theta
        if d != theta.n:
            raise MetricError(f"metric must be {theta.n} x {theta.n}")
        for j in range(d):
            for k in range(d):
                x = rows[j][k]
                if x.theta != theta:
                    raise MetricError("metric entries belong to different quantum tori")
                tol = 1e-12 * max(1.0, x.max_abs())
                if not is_self_adjoint(x, tol):
                    raise MetricError(f"entry g[{j + 1}][{k + 1}] is not self-adjoint")
                if not x.isclose(rows[k][j], tol):
                    raise MetricError(f"metric is not symmetric at ({j + 1}, {k + 1})")
        self.entries = tuple(rows)
        self.theta = theta
        self.kind = kind
        self.floor = floor
        self.source = source
        if evidence is None:
            evidence = positivity_check(self.rows, evidence_radius(theta.n), evidence_tol)
        self.evidence = evidence
        if not evidence.plausible:
            raise MetricError(
                f"positivity evidence failed: min eigenvalue {evidence.min_eig:.3g} "
                f"at radius {evidence.radius} ({evidence.verdict})"
            )

    @property
    def n(self):
        return self.theta.n

    @property
    def rows(self):
        return [list(r) for r in self.entries]

    def __getitem__(self, jk):
        j, k = jk
        return self.entries[j][k]

    def support_radius(self):
        return max(x.support_radius() for r in self.entries for x in r)

    def l1_bound(self):
        mags = np.array([[x.l1() for x in r] for r in self.entries])
        return float(np.linalg.norm(mags, 2))

    def scaled(self, r):
        """The metric ``r . g`` for ``r > 0`` (evidence rescales exactly)."""
        if r <= 0:
            raise MetricError("scale factor must be positive")
        ev = self.evidence
        ev = PositivityEvidence(ev.min_eig * r, ev.radius, ev.verdict, ev.tol)
        src = None
        if self.source is not None:
            src = dict(self.source)
            src["scale"] = src.get("scale", 1.0) * r
        return MetricMatrix(
            [[x.scale(r) for x in row] for row in self.entries],
            kind=self.kind,
            floor=None if self.floor is None else self.floor * r,
            evidence=ev,
            source=src,
        )

    def to_dict(self):
        if self.source is not None:
            return dict(self.source)
        return {"kind": "explicit", "entries": [[x.to_records() for x in r] for r in self.entries]}


def conformal_metric(theta, h, epsilon):
    """``(epsilon + h^2) I`` for a self-adjoint polynomial ``h``."""
    if epsilon <= 0:
        raise MetricError("epsilon must be positive")
    if not is_self_adjoint(h):
        raise MetricError("conformal factor h must be self-adjoint")
    f = multiply(h, h) + epsilon
    z = TorusElement.zero(theta)
    entries = [[f if j == k else z for k in range(theta.n)] for j in range(theta.n)]
    src = {"kind": "conformal", "h": h.to_records(), "epsilon": epsilon}
    return MetricMatrix(entries, "conformal", floor=epsilon, source=src)


def rotated_diagonal_metric(theta, diag, epsilon, rotation=None):
    """``O^T diag(epsilon + d_j^2) O`` for a real orthogonal constant ``O``."""
    n = theta.n
    if epsilon <= 0:
        raise MetricError("epsilon must be positive")
    if len(diag) != n:
        raise MetricError(f"need {n} diagonal polynomials")
    o = np.eye(n) if rotation is None else np.asarray(rotation, dtype=float)
    if o.shape != (n, n) or not np.allclose(o.T @ o, np.eye(n), atol=1e-12):
        raise MetricError("rotation must be a real orthogonal matrix")
    for d in diag:
        if not is_self_adjoint(d):
            raise MetricError("diagonal polynomials must be self-adjoint")
    lam = [multiply(d, d) + epsilon for d in diag]
    entries = []
    for j in range(n):
        row = []
        for k in range(n):
            acc = TorusElement.zero(theta)
            for m in range(n):
                w = o[m, j] * o[m, k]
                if w != 0.0:
                    acc = acc + lam[m].scale(w)
            row.append(acc)
        entries.append(row)
    # symmetrize exactly: floating sums for (j,k) and (k,j) are identical, but be explicit
    for j in range(n):
        for k in range(j):
            entries[j][k] = entries[k][j]
    src = {
        "kind": "rotated-diagonal",
        "diag": [d.to_records() for d in diag],
        "epsilon": epsilon,
        "rotation": o.tolist(),
    }
    return MetricMatrix(entries, "rotated-diagonal", floor=epsilon, source=src)


def explicit_metric(theta, entries):
    src = {"kind": "explicit", "entries": [[x.to_records() for x in r] for r in entries]}
    return MetricMatrix(entries, "explicit", source=src)


def identity_metric(theta):
    return MetricMatrix(grid_identity(theta), "identity", floor=1.0,
                        source={"kind": "identity"})


def make_metric(theta, spec):
    """Build a metric from its serialized dictionary form."""
    kind = spec.get("kind")
    scale = float(spec.get("scale", 1.0))
    if kind == "identity":
        g = identity_metric(theta)
    elif kind == "conformal":
        h = TorusElement.from_records(theta, spec.get("h", []))
        g = conformal_metric(theta, h, float(spec["epsilon"]))
    elif kind == "rotated-diagonal":
        diag = [TorusElement.from_records(theta, d) for d in spec["diag"]]
        g = rotated_diagonal_metric(theta, diag, float(spec["epsilon"]), spec.get("rotation"))
    elif kind == "explicit":
        rows = [[TorusElement.from_records(theta, x) for x in r] for r in spec["entries"]]
        g = explicit_metric(theta, rows)
    else:
        raise MetricError(f"unknown metric kind {kind!r}")
    return g.scaled(scale) if scale != 1.0 else g


# -- inner products and norms --------------------------------------------------


def inner_st(x, y):
    """``<X|Y>_st = sum_j a_j b_j^*``."""
    if x.n != y.n or x.theta != y.theta:
        raise ValueError("module vectors do not match")
    acc = TorusElement.zero(x.theta)
    for a, b in zip(x, y):
        acc = acc + multiply(a, adjoint(b))
    return acc


def apply_Tg(g, x):
    """``T_g(X)``: k-th component ``sum_j a_j g_jk`` (right multiplication)."""
    if x.n != g.n:
        raise ValueError("module vector and metric differ in rank")
    out = []
    for k in range(g.n):
        acc = TorusElement.zero(x.theta)
        for j in range(g.n):
            acc = acc + multiply(x[j], g[j, k])
        out.append(acc)
    return ModuleVector(out)


def inner_g(g, x, y):
    """``<X|Y>_g = <T_g X | Y>_st``."""
    if g.evidence is None or not g.evidence.plausible:
        raise MetricError("metric lacks positivity evidence")
    return inner_st(apply_Tg(g, x), y)


def _positive_norm(p, config):
    tol = 1e-10 * max(1.0, p.max_abs())
    if not is_self_adjoint(p, tol):
        raise ValueError("<X|X> is not self-adjoint")
    return norm_interval(p, config).sqrt()


def norm_g(g, x, config=None):
    """``||X||_g = ||<X|X>_g||^(1/2)`` as a certified interval."""
    return _positive_norm(inner_g(g, x, x), config or GNSConfig())


def norm_st(x, config=None):
    return _positive_norm(inner_st(x, x), config or GNSConfig())


def inverse_sqrt_bound(g):
    """Sound upper bound for ``||sqrt(g^-1)||`` from the structural floor."""
    if g.floor is None:
        return None
    return 1.0 / np.sqrt(g.floor)


def sqrt_norm_upper(g, config=None):
    """Sound upper bound for ``||sqrt(g)|| = ||g||^(1/2)``."""
    return float(np.sqrt(matrix_norm_interval(g.rows, config or GNSConfig()).upper))


def random_module_vector(theta, rng, radius=1, terms=2, scale=1.0):
    return ModuleVector([random_element(theta, rng, radius, terms, scale) for _ in range(theta.n)])


__all__ = [
    "MetricError",
    "MetricMatrix",
    "ModuleVector",
    "NormInterval",
    "apply_Tg",
    "conformal_metric",
    "explicit_metric",
    "identity_metric",
    "inner_g",
    "inner_st",
    "make_metric",
    "norm_g",
    "norm_st",
    "random_module_vector",
    "rotated_diagonal_metric",
    "sqrt_norm_upper",
    "inverse_sqrt_bound",
]

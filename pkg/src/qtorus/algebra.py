"""Finitely supported Fourier polynomials in the smooth quantum torus.

An element ``a = sum_k c_k u^k`` is stored as an array of integer lattice
points ``k`` (shape ``(m, n)``) and an array of complex coefficients.  The
monomial ``u^k`` is the ordered product ``u_1^{k_1} ... u_n^{k_n}`` and the
generators obey ``u_k u_j = exp(2 pi i Theta_jk) u_j u_k``.  Reordering
``u^p u^q`` into normal form gives

    u^p u^q = lambda(p, q) u^{p+q},
    lambda(p, q) = exp(2 pi i sum_{j<k} Theta_jk p_k q_j).

Everything here is exact up to floating point; coefficients whose modulus
falls below ``DROP_TOL`` are removed after every operation.
"""

from __future__ import annotations

import numbers

import numpy as np

DROP_TOL = 1e-15

# lattice points are packed into one int64 per point for sorting/merging
_KEY_BITS = 12
_KEY_OFFSET = 1 << (_KEY_BITS - 1)
_KEY_BASE = 1 << _KEY_BITS


class UnsupportedTheta(ValueError):
    """Raised for deformation matrices outside the real antisymmetric class."""


class ThetaMatrix:
    """Real antisymmetric ``n x n`` deformation matrix.

    Complex entries are rejected: only real ``Theta_jk`` give unimodular
    commutation phases, which is what makes the generators unitary.
    """

    def __init__(self, entries, atol=1e-14):
        arr = np.atleast_2d(np.asarray(entries))
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError(f"theta must be square, got shape {arr.shape}")
        if np.iscomplexobj(arr):
            if np.any(np.abs(arr.imag) > 0):
                raise UnsupportedTheta("complex theta entries are not supported")
            arr = arr.real
        arr = np.array(arr, dtype=float)
        if not np.allclose(arr, -arr.T, rtol=0.0, atol=atol):
            raise UnsupportedTheta("theta must be antisymmetric")
        arr = 0.5 * (arr - arr.T)
        arr.setflags(write=False)
        self.entries = arr
        self.n = arr.shape[0]
        if self.n * _KEY_BITS > 63:
            raise ValueError(f"dimension {self.n} too large for key packing")
        upper = np.triu(arr, 1)
        upper.setflags(write=False)
        self._upper = upper

    @classmethod
    def zero(cls, n):
        return cls(np.zeros((n, n)))

    @classmethod
    def from_pairs(cls, n, pairs):
        """Build from ``{(j, k): value}`` with 1-based ``j < k``."""
        m = np.zeros((n, n))
        for (j, k), v in pairs.items():
            m[j - 1, k - 1] = v
            m[k - 1, j - 1] = -v
        return cls(m)

    def phase(self, p, q):
        """Phase matrix ``lambda(p_i, q_j)`` for key arrays ``p`` and ``q``."""
        p = np.atleast_2d(p)
        q = np.atleast_2d(q)
        expo = p @ self._upper.T @ q.T
        return np.exp(2j * np.pi * expo)

    def pair_commutes(self, j, k, atol=1e-14):
        """True when ``u_j`` and ``u_k`` commute (0-based axes)."""
        t = self.entries[j, k]
        return abs(t - round(t)) <= atol

    def __eq__(self, other):
        if not isinstance(other, ThetaMatrix):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.entries, other.entries)

    def __hash__(self):
        return hash((self.n, self.entries.tobytes()))

    def __repr__(self):
        return f"ThetaMatrix({self.entries.tolist()})"

    def to_list(self):
        return self.entries.tolist()


def _encode(keys):
    keys = np.asarray(keys, dtype=np.int64)
    if keys.size and np.max(np.abs(keys)) >= _KEY_OFFSET:
        raise OverflowError("lattice point outside the supported range")
    code = np.zeros(keys.shape[0], dtype=np.int64)
    for j in range(keys.shape[1]):
        code = code * _KEY_BASE + (keys[:, j] + _KEY_OFFSET)
    return code


def _decode(codes, n):
    codes = np.asarray(codes, dtype=np.int64).copy()
    keys = np.empty((codes.shape[0], n), dtype=np.int64)
    for j in range(n - 1, -1, -1):
        keys[:, j] = codes % _KEY_BASE - _KEY_OFFSET
        codes //= _KEY_BASE
    return keys


class TorusElement:
    """Immutable finite Fourier polynomial ``sum_k c_k u^k``."""

    __slots__ = ("theta", "keys", "coeffs", "_codes")

    def __init__(self, theta, keys, coeffs, *, _canonical=False):
        self.theta = theta
        n = theta.n
        keys = np.asarray(keys, dtype=np.int64).reshape(-1, n)
        coeffs = np.asarray(coeffs, dtype=complex).reshape(-1)
        if keys.shape[0] != coeffs.shape[0]:
            raise ValueError("keys and coefficients differ in length")
        if _canonical:
            codes = _encode(keys)
        else:
            codes, keys, coeffs = _canonicalize(keys, coeffs, n)
        keys.setflags(write=False)
        coeffs.setflags(write=False)
        codes.setflags(write=False)
        self.keys = keys
        self.coeffs = coeffs
        self._codes = codes

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, theta):
        return cls(theta, np.zeros((0, theta.n), dtype=np.int64), [], _canonical=True)

    @classmethod
    def scalar(cls, theta, c=1.0):
        return cls(theta, np.zeros((1, theta.n), dtype=np.int64), [c])

    @classmethod
    def from_dict(cls, theta, mapping):
        if not mapping:
            return cls.zero(theta)
        keys = np.array([tuple(k) for k in mapping], dtype=np.int64)
        return cls(theta, keys, list(mapping.values()))

    # -- basic queries ------------------------------------------------------

    @property
    def n(self):
        return self.theta.n

    def __len__(self):
        return self.coeffs.shape[0]

    def to_dict(self):
        return {tuple(int(x) for x in k): complex(c) for k, c in zip(self.keys, self.coeffs)}

    def coefficient(self, k):
        code = _encode(np.asarray(k, dtype=np.int64).reshape(1, -1))[0]
        i = np.searchsorted(self._codes, code)
        if i < len(self._codes) and self._codes[i] == code:
            return complex(self.coeffs[i])
        return 0j

    def support_radius(self):
        """Largest ``|k_j|`` over the support (0 for scalars and zero)."""
        if len(self) == 0:
            return 0
        return int(np.max(np.abs(self.keys)))

    def support_axes(self):
        if len(self) == 0:
            return ()
        return tuple(int(j) for j in np.flatnonzero(np.any(self.keys != 0, axis=0)))

    def l1(self):
        """Sum of coefficient moduli, an upper bound for the C*-norm."""
        return float(np.sum(np.abs(self.coeffs)))

    def l2sq(self):
        return float(np.sum(np.abs(self.coeffs) ** 2))

    def max_abs(self):
        return float(np.max(np.abs(self.coeffs))) if len(self) else 0.0

    def is_zero(self):
        return len(self) == 0

    # -- arithmetic ---------------------------------------------------------

    def _check(self, other):
        if not isinstance(other, TorusElement):
            raise TypeError(f"expected TorusElement, got {type(other).__name__}")
        if other.theta != self.theta:
            raise ValueError("elements belong to different quantum tori")

    def __add__(self, other):
        if isinstance(other, numbers.Number):
            other = TorusElement.scalar(self.theta, other)
        self._check(other)
        return TorusElement(
            self.theta,
            np.concatenate([self.keys, other.keys]),
            np.concatenate([self.coeffs, other.coeffs]),
        )

    __radd__ = __add__

    def __neg__(self):
        return TorusElement(self.theta, self.keys, -self.coeffs, _canonical=True)

    def __sub__(self, other):
        if isinstance(other, numbers.Number):
            return self + (-other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c):
        c = complex(c)
        if c == 0:
            return TorusElement.zero(self.theta)
        return TorusElement(self.theta, self.keys, self.coeffs * c)

    def __mul__(self, other):
        if isinstance(other, numbers.Number):
            return self.scale(other)
        return multiply(self, other)

    def __rmul__(self, other):
        if isinstance(other, numbers.Number):
            return self.scale(other)
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, numbers.Number):
            return self.scale(1.0 / other)
        return NotImplemented

    def adjoint(self):
        return adjoint(self)

    @property
    def H(self):
        return adjoint(self)

    def __eq__(self, other):
        if not isinstance(other, TorusElement):
            return NotImplemented
        return (
            self.theta == other.theta
            and np.array_equal(self._codes, other._codes)
            and np.array_equal(self.coeffs, other.coeffs)
        )

    __hash__ = None

    def isclose(self, other, atol=1e-12):
        """Coefficientwise comparison with absolute tolerance."""
        self._check(other)
        return (self - other).max_abs() <= atol

    def __repr__(self):
        if len(self) == 0:
            return "TorusElement(0)"
        terms = [f"({c:.6g})u^{tuple(int(x) for x in k)}" for k, c in zip(self.keys[:6], self.coeffs[:6])]
        more = " + ..." if len(self) > 6 else ""
        return "TorusElement(" + " + ".join(terms) + more + ")"

    # -- serialization ------------------------------------------------------

    def to_records(self):
        return [
            {"k": [int(x) for x in k], "re": float(c.real), "im": float(c.imag)}
            for k, c in zip(self.keys, self.coeffs)
        ]

    @classmethod
    def from_records(cls, theta, records):
        if not records:
            return cls.zero(theta)
        keys = []
        coeffs = []
        for i, rec in enumerate(records):
            try:
                k = [int(x) for x in rec["k"]]
                c = complex(float(rec.get("re", 0.0)), float(rec.get("im", 0.0)))
            except (KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"bad coefficient record #{i}: {rec!r}") from exc
            if len(k) != theta.n:
                raise ValueError(f"record #{i}: lattice point has length {len(k)}, expected {theta.n}")
            keys.append(k)
            coeffs.append(c)
        return cls(theta, np.array(keys, dtype=np.int64), coeffs)


def _canonicalize(keys, coeffs, n):
    if keys.shape[0] == 0:
        return np.zeros(0, dtype=np.int64), keys, coeffs
    codes = _encode(keys)
    uniq, inv = np.unique(codes, return_inverse=True)
    if uniq.shape[0] != codes.shape[0]:
        re = np.bincount(inv, weights=coeffs.real, minlength=uniq.shape[0])
        im = np.bincount(inv, weights=coeffs.imag, minlength=uniq.shape[0])
        coeffs = re + 1j * im
    else:
        order = np.argsort(codes, kind="stable")
        coeffs = coeffs[order]
    keep = np.abs(coeffs) >= DROP_TOL
    uniq = uniq[keep]
    return uniq, _decode(uniq, n), np.ascontiguousarray(coeffs[keep])


# -- free functions mirroring the operations ---------------------------------


def monomial(theta, k, c=1.0):
    """``c * u^k`` for an integer vector ``k`` of length ``n``."""
    k = np.asarray(k, dtype=np.int64).reshape(-1)
    if k.shape[0] != theta.n:
        raise ValueError(f"lattice point has length {k.shape[0]}, expected {theta.n}")
    return TorusElement(theta, k.reshape(1, -1), [c])


def generator(theta, j):
    """The unitary ``u_j`` (1-based index)."""
    if not 1 <= j <= theta.n:
        raise IndexError(f"generator index {j} out of range 1..{theta.n}")
    k = np.zeros(theta.n, dtype=np.int64)
    k[j - 1] = 1
    return monomial(theta, k)


def one(theta):
    return TorusElement.scalar(theta, 1.0)


def linear_combination(a, b, alpha=1.0, beta=1.0):
    return a.scale(alpha) + b.scale(beta)


def multiply(a, b):
    """Twisted convolution product ``a b``."""
    a._check(b)
    theta = a.theta
    if len(a) == 0 or len(b) == 0:
        return TorusElement.zero(theta)
    lam = theta.phase(a.keys, b.keys)
    vals = (a.coeffs[:, None] * b.coeffs[None, :]) * lam
    keys = (a.keys[:, None, :] + b.keys[None, :, :]).reshape(-1, theta.n)
    return TorusElement(theta, keys, vals.reshape(-1))


def adjoint(a):
    """``a*``: conjugate coefficients, reflect keys, and fix the ordering phase."""
    theta = a.theta
    if len(a) == 0:
        return a
    k = a.keys
    expo = np.einsum("ij,jk,ik->i", k, theta._upper, k)
    vals = np.conj(a.coeffs) * np.exp(2j * np.pi * expo)
    return TorusElement(theta, -k, vals)


def trace(a):
    """Faithful tracial state: the coefficient at the origin."""
    return a.coefficient(np.zeros(a.n, dtype=np.int64))


def derive(a, j):
    """Coordinate derivation ``d_j`` (1-based): ``c_k -> 2 pi i k_j c_k``."""
    if not 1 <= j <= a.n:
        raise IndexError(f"axis {j} out of range 1..{a.n}")
    if len(a) == 0:
        return a
    return TorusElement(a.theta, a.keys, a.coeffs * (2j * np.pi * a.keys[:, j - 1]))


def derive_along(a, r):
    """``sum_j r_j d_j(a)`` for a real vector ``r``."""
    r = np.asarray(r, dtype=float).reshape(-1)
    if r.shape[0] != a.n:
        raise ValueError("direction has wrong length")
    if len(a) == 0:
        return a
    return TorusElement(a.theta, a.keys, a.coeffs * (2j * np.pi * (a.keys @ r)))


def act(a, s):
    """Gauge action at ``t_j = exp(2 pi i s_j)``: ``c_k -> exp(2 pi i s.k) c_k``."""
    s = np.asarray(s, dtype=float).reshape(-1)
    if s.shape[0] != a.n:
        raise ValueError("torus point has wrong length")
    if len(a) == 0:
        return a
    return TorusElement(a.theta, a.keys, a.coeffs * np.exp(2j * np.pi * (a.keys @ s)))


def fejer_weights(keys, order):
    if order < 1:
        raise ValueError("Fejer order must be >= 1")
    w = np.clip(1.0 - np.abs(keys) / (order + 1.0), 0.0, None)
    return np.prod(w, axis=1)


def fejer_smooth(a, order):
    """Average of the gauge action against the product Fejer kernel of ``order``."""
    if len(a) == 0:
        return a
    return TorusElement(a.theta, a.keys, a.coeffs * fejer_weights(a.keys, order))


def truncate(a, radius):
    """Drop every coefficient outside the box ``max_j |k_j| <= radius``."""
    if len(a) == 0:
        return a
    keep = np.max(np.abs(a.keys), axis=1) <= radius
    return TorusElement(a.theta, a.keys[keep], a.coeffs[keep], _canonical=True)


def real_part(a):
    return (a + adjoint(a)).scale(0.5)


def imag_part(a):
    return (a - adjoint(a)).scale(-0.5j)


def is_self_adjoint(a, atol=1e-12):
    return (a - adjoint(a)).max_abs() <= atol


def is_skew_adjoint(a, atol=1e-12):
    return (a + adjoint(a)).max_abs() <= atol


def is_traceless(a, atol=1e-12):
    return abs(trace(a)) <= atol


def commutator(a, b):
    return multiply(a, b) - multiply(b, a)


def random_element(theta, rng, radius=1, terms=3, scale=1.0):
    """Random polynomial with up to ``terms`` coefficients in the given box."""
    keys = rng.integers(-radius, radius + 1, size=(terms, theta.n))
    coeffs = scale * (rng.standard_normal(terms) + 1j * rng.standard_normal(terms))
    return TorusElement(theta, keys, coeffs)


def random_self_adjoint(theta, rng, radius=1, terms=3, scale=1.0):
    return real_part(random_element(theta, rng, radius, terms, scale))


def _defect(x, y):
    return (x - y).max_abs()


def algebra_invariants(theta, count=100, seed=0, radius=2, terms=3):
    """Largest defects of the defining identities over random instances.

    Checks the generator relation, associativity, the trace property, the
    adjoint anti-multiplicativity, and that each ``d_j`` is a *-derivation
    commuting with the adjoint.
    """
    rng = np.random.default_rng(seed)
    n = theta.n
    out = {"relation": 0.0, "associativity": 0.0, "trace": 0.0, "adjoint": 0.0,
           "leibniz": 0.0, "star_derivation": 0.0}
    for j in range(1, n + 1):
        for k in range(1, n + 1):
            uj, uk = generator(theta, j), generator(theta, k)
            lhs = multiply(uk, uj)
            rhs = multiply(uj, uk).scale(np.exp(2j * np.pi * theta.entries[j - 1, k - 1]))
            out["relation"] = max(out["relation"], _defect(lhs, rhs))
    for _ in range(count):
        a, b, c = (random_element(theta, rng, radius, terms) for _ in range(3))
        ab = multiply(a, b)
        out["associativity"] = max(out["associativity"], _defect(multiply(ab, c), multiply(a, multiply(b, c))))
        out["trace"] = max(out["trace"], abs(trace(ab) - trace(multiply(b, a))))
        out["adjoint"] = max(out["adjoint"], _defect(adjoint(ab), multiply(adjoint(b), adjoint(a))))
        for j in range(1, n + 1):
            lhs = derive(ab, j)
            rhs = multiply(derive(a, j), b) + multiply(a, derive(b, j))
            out["leibniz"] = max(out["leibniz"], _defect(lhs, rhs))
            out["star_derivation"] = max(out["star_derivation"],
                                         _defect(derive(adjoint(a), j), adjoint(derive(a, j))))
    return out

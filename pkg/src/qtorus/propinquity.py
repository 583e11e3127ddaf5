"""States, Monge-Kantorovich lower bounds and modular bridges.

Only bridges between two metrized bundles over the same quantum torus are
modelled, with identity embeddings.  Quantities that vanish identically for
the configuration at hand (pivot equal to the unit, identity anchor maps) are
recorded as structural zeros together with the rule that produced them;
everything else is a sampled max-min estimate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import TorusElement, adjoint, multiply, one, random_element, trace
from .connection import levi_civita
from .geometry import ModuleVector, inner_g, random_module_vector
from .gns import GNSConfig, NormInterval, TruncationBox, norm_interval, represent
from .norms import NormChoice
from .seminorms import d_norm, d_norm_upper, lipschitz_L

EXACT_ZERO = 1e-12


# -- states ------------------------------------------------------------------------


class State:
    """A state given by a density matrix on the GNS space of a finite box.

    ``State.tau(n)`` is the trace itself (projection onto the lattice origin),
    evaluated exactly as the coefficient at zero.
    """

    def __init__(self, density, radius, n, tag=None, atol=1e-12):
        rho = np.asarray(density, dtype=complex)
        box = TruncationBox(radius, n)
        if rho.shape != (box.size, box.size):
            raise ValueError(f"density must be {box.size} x {box.size}")
        if np.abs(rho - rho.conj().T).max() > atol:
            raise ValueError("density is not Hermitian")
        if abs(np.trace(rho).real - 1.0) > atol:
            raise ValueError("density must have unit trace")
        if np.linalg.eigvalsh(rho)[0] < -atol:
            raise ValueError("density is not positive")
        self.density = rho
        self.box = box
        self.tag = tag

    @property
    def n(self):
        return self.box.n

    @classmethod
    def tau(cls, n, radius=1):
        box = TruncationBox(radius, n)
        rho = np.zeros((box.size, box.size), dtype=complex)
        i = int(box.index(np.zeros((1, n), dtype=np.int64))[0])
        rho[i, i] = 1.0
        return cls(rho, radius, n, tag="tau")

    @classmethod
    def vector(cls, psi, radius, n):
        psi = np.asarray(psi, dtype=complex)
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()), radius, n)

    @classmethod
    def random(cls, n, rng, radius=1, rank=2):
        box = TruncationBox(radius, n)
        a = rng.standard_normal((box.size, rank)) + 1j * rng.standard_normal((box.size, rank))
        rho = a @ a.conj().T
        rho = (rho + rho.conj().T) / 2
        return cls(rho / np.trace(rho).real, radius, n)

    def to_dict(self):
        return {"tag": self.tag, "radius": self.box.radius, "rank": int(np.linalg.matrix_rank(self.density))}


def state_eval(phi, a):
    """``phi(a) = tr(rho pi(a))``; the trace is read off exactly."""
    if phi.tag == "tau":
        return complex(trace(a))
    m = represent(a, phi.box)
    return complex(np.sum(phi.density.T * m.toarray()))


def level_set_member(phi, pivot, tol=1e-12):
    """Is ``phi`` in the 1-level set of ``pivot``?"""
    d = one(pivot.theta) - pivot
    left = state_eval(phi, multiply(adjoint(d), d))
    right = state_eval(phi, multiply(d, adjoint(d)))
    return abs(left) <= tol and abs(right) <= tol


def normalize_witnesses(witnesses, norm=NormChoice.L2, config=None):
    """Divide each self-adjoint witness by its Lipschitz upper bound; drop scalars."""
    out = []
    for a in witnesses:
        up = lipschitz_L(a, norm, config).upper
        if up > 0.0:
            out.append(a.scale(1.0 / up))
    return out


def mk_lower(phi, psi, witnesses):
    """``max_a |phi(a) - psi(a)|`` over normalised witnesses (lower bound of mk_L)."""
    best = 0.0
    for a in witnesses:
        best = max(best, abs(state_eval(phi, a) - state_eval(psi, a)))
    return best


# -- metrized bundles ------------------------------------------------------------------


class BundleContext:
    """A metric, its Levi-Civita connection and the norm settings."""

    def __init__(self, g, gamma=None, norm=NormChoice.L2, config=None):
        self.g = g
        self.gamma = gamma or levi_civita(g)
        self.norm = NormChoice.parse(norm)
        self.config = config or GNSConfig()

    @property
    def theta(self):
        return self.g.theta

    def scaled(self, r):
        return BundleContext(self.g.scaled(r), None, self.norm, self.config)

    def inner(self, x, y):
        return inner_g(self.g, x, y)

    def d_norm(self, x):
        return d_norm(self.g, self.gamma, x, self.norm, self.config)

    def d_upper(self, x):
        return d_norm_upper(self.g, self.gamma, x, self.norm)

    def to_dict(self):
        return {"metric": self.g.to_dict(), "norm": self.norm.value, "eta": self.gamma.eta}


def modular_mk_lower(ctx, zeta, eta, witnesses):
    """``max_theta ||<zeta - eta | theta>||`` over witnesses with D <= 1."""
    diff = zeta - eta
    best = 0.0
    for t in witnesses:
        best = max(best, norm_interval(ctx.inner(diff, t), ctx.config).lower)
    return best


# -- bridges ---------------------------------------------------------------------


def _is_unit(p):
    return p == one(p.theta)


@dataclass
class ModularBridge:
    domain: BundleContext
    codomain: BundleContext
    pivot: TorusElement
    alpha: list
    beta: list
    evidence: list = field(default_factory=list)
    identity_anchor_range: bool = False
    params: dict = field(default_factory=dict)
    slack: float = 1e-9

    def __post_init__(self):
        if self.domain.theta != self.codomain.theta:
            raise ValueError("bridges between different quantum tori are not supported")
        if len(self.alpha) != len(self.beta):
            raise ValueError("anchor maps must share the index set")
        if len(self.evidence) != len(self.alpha):
            raise ValueError("every anchor needs D-norm evidence")
        for i, (da, db) in enumerate(self.evidence):
            if da > 1 + self.slack or db > 1 + self.slack:
                raise ValueError(f"anchor {i} is outside the unit D-ball ({da:.6g}, {db:.6g})")
        p = norm_interval(self.pivot, self.domain.config)
        if not p.contains(1.0, 1e-12):
            raise ValueError(f"pivot must have norm 1, got {p}")

    @property
    def unit_pivot(self):
        return _is_unit(self.pivot)


def bridge_seminorm(bridge, a1, a2, config=None):
    """``||a1 p - p a2||`` for the pivot ``p``."""
    config = config or bridge.domain.config
    d = multiply(a1, bridge.pivot) - multiply(bridge.pivot, a2)
    up = d.l1()
    if up <= EXACT_ZERO:
        # the l1 sum already certifies the cancellation
        return NormInterval(0.0, up, 0, True, "l1")
    return norm_interval(d, config)


def deck_value(bridge, zeta, eta, config=None):
    """``dn(zeta, eta)``: sup over anchors of both bridge-seminorm orientations."""
    best = NormInterval.exact(0.0)
    dom, cod = bridge.domain, bridge.codomain
    for a, b in zip(bridge.alpha, bridge.beta):
        for iv in (
            bridge_seminorm(bridge, dom.inner(zeta, a), cod.inner(eta, b), config),
            bridge_seminorm(bridge, dom.inner(a, zeta), cod.inner(b, eta), config),
        ):
            best = NormInterval(max(best.lower, iv.lower), max(best.upper, iv.upper),
                                max(best.radius, iv.radius), best.converged and iv.converged, iv.method)
    return best


def _structural(rule):
    return {"lower": 0.0, "upper": 0.0, "structural": True, "justification": rule}


def _estimate(value, upper=None, note="sampled max-min"):
    return {"lower": float(value), "upper": float(value if upper is None else upper),
            "structural": False, "justification": note}


def _hausdorff_maxmin(left, right, dist):
    """Symmetric max-min over finite samples."""
    if not left or not right:
        return float("inf")
    a = max(min(dist(x, y) for y in right) for x in left)
    b = max(min(dist(x, y) for x in left) for y in right)
    return max(a, b)


@dataclass
class QuantityReport:
    bridge_samples: list
    basic_reach: dict
    height: dict
    deck_values: list
    modular_reach: dict
    imprint: dict
    reach: dict = None
    length: dict = None

    def __post_init__(self):
        if self.reach is None:
            self.reach = self.assemble_reach()
        if self.length is None:
            self.length = self.assemble_length()

    def assemble_reach(self):
        lo = max(self.basic_reach["lower"], self.modular_reach["lower"] + self.imprint["lower"])
        up = max(self.basic_reach["upper"], self.modular_reach["upper"] + self.imprint["upper"])
        return {"lower": lo, "upper": up}

    def assemble_length(self):
        return {"lower": max(self.height["lower"], self.reach["lower"]),
                "upper": max(self.height["upper"], self.reach["upper"])}

    def consistent(self):
        return self.reach == self.assemble_reach() and self.length == self.assemble_length()

    def to_dict(self):
        return {
            "bridge_seminorm": self.bridge_samples,
            "basic_reach": self.basic_reach,
            "height": self.height,
            "deck": self.deck_values,
            "modular_reach": self.modular_reach,
            "imprint": self.imprint,
            "reach": self.reach,
            "length": self.length,
        }


def bridge_quantities(bridge, samples=None, config=None):
    """All numerical quantities of a bridge.

    ``samples`` may provide ``lipschitz`` (pairs of witness lists with L <= 1),
    ``states`` (lists of State), ``witnesses`` (for mk), ``module`` (lists of
    ModuleVectors with D <= 1) and ``elements`` (pairs for bn samples).
    """
    samples = samples or {}
    config = config or bridge.domain.config
    bn_samples = []
    for a1, a2 in samples.get("elements", []):
        bn_samples.append(bridge_seminorm(bridge, a1, a2, config).to_dict())

    same_algebra = bridge.domain.theta == bridge.codomain.theta and \
        bridge.domain.norm == bridge.codomain.norm
    if bridge.unit_pivot and same_algebra:
        basic = _structural("unit pivot with identity embeddings: each Lipschitz ball "
                            "is matched by itself, bn(a, a) = 0")
    else:
        left, right = samples.get("lipschitz", ([], []))
        val = _hausdorff_maxmin(left, right,
                                lambda x, y: bridge_seminorm(bridge, x, y, config).lower)
        basic = _estimate(val)

    if bridge.unit_pivot:
        height = _structural("unit pivot: the 1-level set is the whole state space")
    else:
        states = samples.get("states", [])
        members = [s for s in states if level_set_member(s, bridge.pivot)]
        wit = samples.get("witnesses", [])
        val = _hausdorff_maxmin(states, members, lambda p, q: mk_lower(p, q, wit))
        height = _estimate(val)

    decks = []
    for a, b in zip(bridge.alpha, bridge.beta):
        decks.append(deck_value(bridge, a, b, config))
    mod = {"lower": max((d.lower for d in decks), default=0.0),
           "upper": max((d.upper for d in decks), default=0.0),
           "structural": False, "justification": "sup of deck values over anchors"}

    if bridge.identity_anchor_range:
        imprint = _structural("anchor maps are the identity of the unit D-ball and a "
                              "D-isometric bijection onto the other unit D-ball")
    else:
        mods = samples.get("module", ([], []))
        wit_a, wit_b = samples.get("module_witnesses", ([], []))
        va = _hausdorff_maxmin(list(bridge.alpha), mods[0],
                               lambda x, y: modular_mk_lower(bridge.domain, x, y, wit_a))
        vb = _hausdorff_maxmin(list(bridge.beta), mods[1],
                               lambda x, y: modular_mk_lower(bridge.codomain, x, y, wit_b))
        imprint = _estimate(max(va, vb))

    return QuantityReport(
        bridge_samples=bn_samples,
        basic_reach=basic,
        height=height,
        deck_values=[d.to_dict() for d in decks],
        modular_reach=mod,
        imprint=imprint,
    )


def anchor_samples(ctx, count, seed=0, radius=1, terms=2):
    """Random module vectors rescaled into the unit D-ball of ``ctx``.

    Returns the anchors and their D upper bounds after rescaling.
    """
    rng = np.random.default_rng(seed)
    out, ups = [], []
    while len(out) < count:
        x = random_module_vector(ctx.theta, rng, radius, terms)
        up = ctx.d_upper(x)
        if up == 0.0:
            continue
        out.append(x.scale(1.0 / up))
        # D is homogeneous, so the rescaled bound is exactly 1 up to rounding
        ups.append(up * (1.0 / up))
    return out, ups


def scaling_bridge(g, r, s, anchors=32, seed=0, norm=NormChoice.L2, config=None):
    """The bridge between ``r.g`` and ``s.g`` with unit pivot and ``beta = sqrt(r/s) Id``."""
    if r <= 0 or s <= 0:
        raise ValueError("scale factors must be positive")
    base = BundleContext(g, None, norm, config)
    dom, cod = base.scaled(r), base.scaled(s)
    alpha, ups = anchor_samples(dom, anchors, seed)
    c = np.sqrt(r / s)
    beta = [x.scale(c) for x in alpha]
    evidence = [(u, cod.d_upper(b)) for u, b in zip(ups, beta)]
    return ModularBridge(dom, cod, one(g.theta), alpha, beta, evidence,
                         identity_anchor_range=True,
                         params={"r": r, "s": s, "anchors": anchors, "seed": seed})


def isometry_check(g, r, s, samples=4, seed=0, norm=NormChoice.L2, config=None):
    """Defects of ``(Id, sqrt(r/s) Id)`` as a full quantum isometry ``r.g -> s.g``."""
    base = BundleContext(g, None, norm, config)
    dom, cod = base.scaled(r), base.scaled(s)
    c = np.sqrt(r / s)
    rng = np.random.default_rng(seed)
    theta = g.theta
    lip, action, inner, dnorm = 0.0, 0.0, 0.0, []
    for _ in range(samples):
        a = random_element(theta, rng, 1, 2)
        a = (a + adjoint(a)).scale(0.5)
        x = random_module_vector(theta, rng, 1, 2)
        y = random_module_vector(theta, rng, 1, 2)
        # the algebra map is the identity, so L is compared with itself
        la = lipschitz_L(a, norm, dom.config)
        lip = max(lip, abs(la.lower - lipschitz_L(a, norm, cod.config).lower))
        lhs = x.left(a).scale(c)
        rhs = x.scale(c).left(a)
        action = max(action, (lhs - rhs).max_abs())
        inner = max(inner, (cod.inner(x.scale(c), y.scale(c)) - dom.inner(x, y)).l1())
        dx = dom.d_norm(x).interval
        dcx = cod.d_norm(x.scale(c)).interval
        dnorm.append({"domain": dx.to_dict(), "codomain": dcx.to_dict(),
                      "overlap": bool(dx.overlaps(dcx, 1e-9))})
    exact_ok = lip <= EXACT_ZERO and action <= EXACT_ZERO and inner <= EXACT_ZERO
    return {
        "lipschitz_defect": lip,
        "action_defect": action,
        "inner_product_defect": inner,
        "d_norm": dnorm,
        "pass": bool(exact_ok and all(d["overlap"] for d in dnorm)),
    }


__all__ = [
    "BundleContext",
    "ModularBridge",
    "QuantityReport",
    "State",
    "bridge_quantities",
    "bridge_seminorm",
    "deck_value",
    "isometry_check",
    "level_set_member",
    "mk_lower",
    "modular_mk_lower",
    "normalize_witnesses",
    "scaling_bridge",
    "state_eval",
]

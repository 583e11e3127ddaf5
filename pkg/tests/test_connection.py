import numpy as np
import pytest

from conftest import theta2, theta3
from qtorus import (
    Derivation,
    GNSConfig,
    InversionError,
    MetricError,
    ModuleVector,
    ThetaMatrix,
    TorusElement,
    check_axioms,
    christoffel,
    conformal_metric,
    covariant_derivative,
    der_norm,
    explicit_metric,
    g_natural,
    generator,
    identity_metric,
    inner_g,
    invert_metric,
    levi_civita,
    multiply,
    one,
    random_element,
    random_module_vector,
    random_self_adjoint,
    rotated_diagonal_metric,
)
from qtorus.connection import compatibility_residual, inverse_residual, skew_part
from qtorus.gns import l1_matrix_bound


def cos_metric(scale=1.0):
    t = ThetaMatrix.zero(1)
    g = TorusElement.from_dict(t, {(-1,): 0.5, (0,): 2.0, (1,): 0.5})
    return explicit_metric(t, [[g.scale(scale)]])


def random_conformal(theta, seed):
    rng = np.random.default_rng(seed)
    return conformal_metric(theta, random_self_adjoint(theta, rng, 1, 2, 0.4), 1.0)


def random_derivation(theta, rng):
    r = rng.standard_normal(theta.n)
    b = skew_part(random_element(theta, rng, 1, 2))
    return Derivation(r, b)


def test_inverse_closed_form(frozen):
    inv = invert_metric(cos_metric(), support_radius=24, tol=1e-8)
    ref = frozen["inverse_two_plus_cos"]
    x = inv.entries[0][0]
    err = max(abs(x.coefficient((k,)) - c) for k, c in zip(ref["k"], ref["c"]))
    assert err < 1e-10
    assert inv.eta <= 1e-8
    assert max(inverse_residual(cos_metric(), inv.entries)) == pytest.approx(inv.eta, rel=1e-9)


@pytest.mark.parametrize("r", [2.0, 5.0])
def test_inverse_of_scaled_metric(r):
    g = random_conformal(theta2(), 0)
    base = invert_metric(g, support_radius=16, tol=1e-8)
    sc = invert_metric(g.scaled(r), support_radius=16, tol=1e-8)
    for j in range(2):
        for k in range(2):
            assert sc.entries[j][k].isclose(base.entries[j][k].scale(1 / r), 1e-12)


def test_inverse_failures():
    with pytest.raises(InversionError) as info:
        invert_metric(cos_metric(), support_radius=2, tol=1e-12)
    assert info.value.residual > 1e-12
    with pytest.raises(ValueError):
        invert_metric(cos_metric(), tol=0.0)


def test_adaptive_radius_grows():
    inv = invert_metric(cos_metric(), tol=1e-10)
    assert inv.radius > 4
    assert inv.eta <= 1e-10


def test_g_natural_symmetries():
    g = random_conformal(theta2(), 1)
    for j in (1, 2):
        for k in (1, 2):
            for l in (1, 2):
                a = g_natural(g, j, k, l)
                assert a == g_natural(g, k, j, l)
                assert a.isclose(a.adjoint(), 1e-14)


def test_identity_metric_flat():
    for t in (ThetaMatrix.zero(1), theta2(), theta3()):
        gam = levi_civita(identity_metric(t))
        assert gam.max_abs() == 0.0
        assert gam.eta == 0.0


def test_christoffel_oracle_and_basis(frozen):
    gam = levi_civita(cos_metric(), support_radius=24)
    ref = frozen["christoffel_two_plus_cos"]
    for k, re, im in zip(ref["k"], ref["re"], ref["im"]):
        assert abs(gam.symbol(1, 1, 1).coefficient((k,)) - complex(re, im)) < 1e-7
    assert gam.nabla_basis(1, 1)[0] == gam.symbol(1, 1, 1)


def test_stale_inverse_rejected():
    g = random_conformal(theta2(), 2)
    other = random_conformal(theta2(), 3)
    with pytest.raises(MetricError):
        christoffel(g, invert_metric(other))
    # an equal metric built separately is accepted
    christoffel(random_conformal(theta2(), 2), invert_metric(g))


def test_covariant_leibniz():
    t = theta2()
    g = random_conformal(t, 4)
    gam = levi_civita(g)
    rng = np.random.default_rng(0)
    for _ in range(5):
        d = random_derivation(t, rng)
        x = random_module_vector(t, rng)
        a = random_element(t, rng, 1, 2)
        lhs = covariant_derivative(gam, d, x.left(a))
        rhs = x.left(d(a)) + covariant_derivative(gam, d, x).left(a)
        assert lhs.isclose(rhs, 1e-11)


def test_covariant_linear_in_delta():
    t = theta2()
    gam = levi_civita(random_conformal(t, 5))
    rng = np.random.default_rng(1)
    d1, d2 = random_derivation(t, rng), random_derivation(t, rng)
    x = random_module_vector(t, rng)
    s = Derivation(d1.r + d2.r, d1.b + d2.b)
    lhs = covariant_derivative(gam, s, x)
    rhs = covariant_derivative(gam, d1, x) + covariant_derivative(gam, d2, x)
    assert lhs.isclose(rhs, 1e-12)


def test_inner_derivations_compatible_exactly():
    # for delta = ad(b) compatibility holds algebraically, whatever Gamma is
    t = theta2()
    g = random_conformal(t, 6)
    gam = levi_civita(g)
    rng = np.random.default_rng(2)
    for _ in range(5):
        d = Derivation.inner(skew_part(random_element(t, rng, 1, 3)))
        x, y = random_module_vector(t, rng), random_module_vector(t, rng)
        assert compatibility_residual(g, gam, d, x, y).max_abs() < 1e-12


def _gnat_bound(g):
    n = g.n
    return max(sum(g_natural(g, m, j, q).l1() for q in range(1, n + 1))
               for m in range(1, n + 1) for j in range(1, n + 1))


@pytest.mark.parametrize("seed", range(4))
def test_compatibility_linear_in_eta(seed):
    t = theta2(0.2 + 0.15 * seed)
    g = random_conformal(t, 10 + seed)
    inv = invert_metric(g, tol=1e-8)
    gam = christoffel(g, inv)
    rng = np.random.default_rng(seed)
    samples = []
    for _ in range(6):
        d = random_derivation(t, rng)
        x = random_module_vector(t, rng)
        y = random_module_vector(t, rng)
        x = x.scale(1 / sum(c.l1() for c in x))
        y = y.scale(1 / sum(c.l1() for c in y))
        samples.append((d, x, y))
    rep = check_axioms(g, gam, samples)
    assert rep["torsion_defect"] == 0.0
    assert rep["self_adjoint_defect"] <= _gnat_bound(g) * inv.eta + 1e-12
    for (d, _, _), c in zip(samples, rep["compatibility"]):
        bound = 2 * np.abs(d.r).sum() * _gnat_bound(g) * inv.eta
        assert c["residual_upper"] <= bound * (1 + 1e-9) + 1e-12


def test_rotated3_connection():
    t = theta3()
    u = [generator(t, j) for j in (1, 2, 3)]
    diag = [(x + x.adjoint()).scale(0.2) for x in u]
    c, s = np.cos(0.3), np.sin(0.3)
    g = rotated_diagonal_metric(t, diag, 1.0, [[c, -s, 0], [s, c, 0], [0, 0, 1]])
    inv = invert_metric(g, tol=1e-8)
    gam = christoffel(g, inv)
    rep = check_axioms(g, gam)
    assert rep["torsion_defect"] == 0.0
    assert max(x["residual_upper"] for x in rep["compatibility"]) <= \
        2 * _gnat_bound(g) * inv.eta + 1e-12


def test_derivation_validation_and_norm():
    t = theta2()
    u = generator(t, 1)
    with pytest.raises(ValueError, match="skew"):
        Derivation([1.0, 0.0], u)
    with pytest.raises(ValueError, match="traceless"):
        Derivation([1.0, 0.0], one(t).scale(1j))
    with pytest.raises(ValueError):
        Derivation([1.0], theta=t)
    b = (u - u.adjoint()).scale(0.5)          # i sin, norm 1
    d = Derivation([3.0, 4.0], b)
    iv = der_norm(d, "l2", GNSConfig(radii=(4, 8)))
    assert iv.contains(6.0, 1e-9)
    assert der_norm(d, "l1").contains(8.0, 1e-9)
    assert der_norm(Derivation.coordinate(t, 2), "linf").upper == 1.0
    # delta(a) = r.d(a) + [b, a]
    a = generator(t, 2)
    assert d(a).isclose(a.scale(2j * np.pi * 4.0) + multiply(b, a) - multiply(a, b), 1e-14)


def test_scaled_metric_rescales_inner_product():
    t = theta2()
    g = random_conformal(t, 7)
    x = random_module_vector(t, np.random.default_rng(3))
    assert inner_g(g.scaled(2.0), x, x).isclose(inner_g(g, x, x).scale(2.0), 1e-12)


def test_l1_matrix_bound_of_identity():
    assert l1_matrix_bound(identity_metric(theta2()).rows) == 1.0
    assert ModuleVector.basis(theta2(), 2)[1] == one(theta2())

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import theta2, theta3
from qtorus import (
    GNSConfig,
    ModuleVector,
    NormChoice,
    ThetaMatrix,
    TorusElement,
    adjoint,
    check_H_inequality,
    conformal_metric,
    d_norm,
    derive,
    derive_along,
    explicit_metric,
    generator,
    identity_metric,
    levi_civita,
    lipschitz_L,
    lipschitz_L_def,
    norm_interval,
    one,
    op_seminorm,
    random_module_vector,
    random_self_adjoint,
)
from qtorus.seminorms import d_norm_upper, fibonacci_directions, sphere_cells

CFG = GNSConfig(radii=(4, 8, 12))
FAST = GNSConfig(radii=(4,))


def cosine(theta, j=1):
    u = generator(theta, j)
    return (u + adjoint(u)).scale(0.5)


def cos_metric():
    t = ThetaMatrix.zero(1)
    g = TorusElement.from_dict(t, {(-1,): 0.5, (0,): 2.0, (1,): 0.5})
    return explicit_metric(t, [[g]])


@pytest.mark.parametrize("norm", ["l1", "l2", "linf"])
def test_cosine_lipschitz(norm):
    # d_1 of the cosine is the sine times 2 pi and every norm has N(e_1) = 1
    for t in (ThetaMatrix.zero(1), theta2(), theta3()):
        est = lipschitz_L(cosine(t), norm, CFG if t.n < 3 else None)
        assert est.interval.contains(2 * np.pi, 1e-6)


def test_scalars_exactly_zero():
    est = lipschitz_L(one(theta2()).scale(3.0), "l2", CFG)
    assert est.lower == est.upper == 0.0


def test_rejects_non_self_adjoint():
    with pytest.raises(ValueError):
        lipschitz_L(generator(theta2(), 1), "l2")


def test_l1_is_exact_max_over_axes():
    rng = np.random.default_rng(0)
    t = theta2()
    for _ in range(5):
        a = random_self_adjoint(t, rng, 2, 3)
        est = lipschitz_L(a, "l1", CFG)
        axes = [norm_interval(derive(a, j), CFG) for j in (1, 2)]
        assert est.lower == pytest.approx(max(x.lower for x in axes), rel=1e-12)
        assert est.upper == pytest.approx(max(x.upper for x in axes), rel=1e-12)


def test_norm_ordering():
    # the unit balls are nested l1 < l2 < linf, so L grows in that order
    a = random_self_adjoint(theta2(), np.random.default_rng(1), 2, 3)
    l1, l2, li = (lipschitz_L(a, n, CFG) for n in ("l1", "l2", "linf"))
    assert l1.lower <= l2.upper + 1e-9
    assert l2.lower <= li.upper + 1e-9


def test_witness_reproduces_lower_bound():
    rng = np.random.default_rng(2)
    for t in (theta2(), theta3()):
        a = random_self_adjoint(t, rng, 1, 3)
        cfg = CFG if t.n < 3 else GNSConfig()
        est = lipschitz_L(a, "l2", cfg)
        w = np.asarray(est.witness["r"])
        assert np.linalg.norm(w) == pytest.approx(1.0)
        again = norm_interval(derive_along(a, w), cfg)
        assert again.lower == pytest.approx(est.lower, rel=1e-9)
        assert again.lower <= est.upper


@settings(max_examples=10, deadline=None)
@given(st.floats(-5, 5).filter(lambda c: abs(c) > 1e-3), st.integers(0, 1000))
def test_homogeneity(c, seed):
    a = random_self_adjoint(theta2(), np.random.default_rng(seed), 1, 2)
    base = lipschitz_L(a, "l2", FAST)
    sc = lipschitz_L(a.scale(c), "l2", FAST)
    assert sc.interval.overlaps(base.interval.scale(c), 1e-9 * max(1.0, abs(c)))


def test_definition_form_below_upper():
    rng = np.random.default_rng(3)
    for t in (ThetaMatrix.zero(1), theta2()):
        a = random_self_adjoint(t, rng, 2, 3)
        defn = lipschitz_L_def(a, "l2", samples=32, seed=0, config=FAST)
        assert defn["lower"] <= lipschitz_L(a, "l2", CFG).upper + 1e-9


def test_sphere_helpers():
    d = fibonacci_directions(3, 50)
    assert np.allclose(np.linalg.norm(d, axis=1), 1.0)
    assert np.all(d[:, 0] >= -1e-12) or np.all(d[:, -1] >= -1e-12)
    assert len(sphere_cells(2, 16)) > 0


# -- D-norm -------------------------------------------------------------------------


def test_identity_metric_basis_vectors():
    t = theta2()
    g = identity_metric(t)
    gam = levi_civita(g)
    for j in (1, 2):
        est = d_norm(g, gam, ModuleVector.basis(t, j), "l2", CFG)
        assert est.interval.contains(1.0, 1e-9)
        assert est.parts["S_partial"].upper == 0.0


def test_five_coefficient_parts(frozen):
    fc = frozen["five_coefficient"]
    t = ThetaMatrix.zero(1)
    x = ModuleVector([TorusElement.from_dict(t, {(k,): complex(re, im) for k, re, im in fc["coeffs"]})])
    g = cos_metric()
    gam = levi_civita(g, support_radius=24)
    est = op_seminorm(g, gam, x, "l2", CFG)
    assert est.parts["S_partial"].interval.contains(fc["s_partial"], 1e-6)
    dn = d_norm(g, gam, x, "l2", CFG)
    assert dn.parts["norm_g"].contains(fc["norm_g"], 1e-6)
    # D and its sound cheap bound
    assert dn.upper <= d_norm_upper(g, gam, x, "l2") + 1e-12
    assert dn.dp.overlaps(dn.interval)


def test_d_norm_dominates_module_norm():
    t = theta2()
    rng = np.random.default_rng(4)
    g = conformal_metric(t, random_self_adjoint(t, rng, 1, 2, 0.4), 1.0)
    gam = levi_civita(g)
    x = random_module_vector(t, rng)
    est = d_norm(g, gam, x, "l2", CFG)
    assert est.upper >= est.parts["norm_g"].lower - 1e-12
    assert est.parts["S_ad"].upper <= est.parts["norm_g"].upper + 1e-9
    d = est.to_dict()
    assert set(d) >= {"lower", "upper", "witness", "method", "seed", "truncation"}


def test_d_norm_scaling():
    t = theta2()
    rng = np.random.default_rng(5)
    g = conformal_metric(t, random_self_adjoint(t, rng, 1, 2, 0.4), 1.0)
    x = random_module_vector(t, rng)
    a = d_norm(g, levi_civita(g), x, "l2", CFG).interval
    b = d_norm(g.scaled(4.0), levi_civita(g.scaled(4.0)), x, "l2", CFG).interval.scale(0.5)
    assert a.overlaps(b)


def test_H_swap_symmetry():
    t = theta2()
    rng = np.random.default_rng(6)
    g = conformal_metric(t, random_self_adjoint(t, rng, 1, 2, 0.4), 1.0)
    gam = levi_civita(g)
    x, y = random_module_vector(t, rng), random_module_vector(t, rng)
    xy = check_H_inequality(g, gam, x, y, "l2", FAST)
    yx = check_H_inequality(g, gam, y, x, "l2", FAST)
    assert xy["sound"]["lhs"] == pytest.approx(yx["sound"]["lhs"], rel=1e-9)
    assert xy["pass"] and yx["pass"]


def test_norm_parse():
    assert NormChoice.parse("L_2") is NormChoice.L2
    assert NormChoice.parse("inf") is NormChoice.LINF
    with pytest.raises(ValueError):
        NormChoice.parse("l3")
    assert NormChoice.LINF.extreme_points(2).shape == (2, 2)

import numpy as np
import pytest

from conftest import theta2
from qtorus import (
    GNSConfig,
    MetricError,
    ModuleVector,
    ThetaMatrix,
    TorusElement,
    adjoint,
    conformal_metric,
    explicit_metric,
    generator,
    identity_metric,
    inner_g,
    inner_st,
    make_metric,
    multiply,
    norm_g,
    one,
    random_element,
    random_module_vector,
    rotated_diagonal_metric,
)
from qtorus.geometry import inverse_sqrt_bound, sqrt_norm_upper

CFG = GNSConfig(radii=(4, 8))


@pytest.fixture
def conformal():
    t = theta2()
    h = TorusElement.from_dict(t, {(1, 0): 0.2, (-1, 0): 0.2, (0, 1): 0.15, (0, -1): 0.15})
    return conformal_metric(t, h, 1.0)


def test_basis_vectors_identity_metric():
    t = theta2()
    g = identity_metric(t)
    for j in (1, 2):
        e = ModuleVector.basis(t, j)
        assert norm_g(g, e, CFG).lower == pytest.approx(1.0)
    assert inner_g(g, ModuleVector.basis(t, 1), ModuleVector.basis(t, 2)).is_zero()
    with pytest.raises(IndexError):
        ModuleVector.basis(t, 3)


def test_inner_product_is_module_sesquilinear(conformal):
    g = conformal
    t = g.theta
    rng = np.random.default_rng(0)
    for _ in range(5):
        x, y = random_module_vector(t, rng), random_module_vector(t, rng)
        a = random_element(t, rng, 1, 2)
        # <aX|Y> = a <X|Y>, and the product is Hermitian
        assert inner_g(g, x.left(a), y).isclose(multiply(a, inner_g(g, x, y)), 1e-12)
        assert adjoint(inner_g(g, x, y)).isclose(inner_g(g, y, x), 1e-12)
        assert inner_g(g, x + y, y).isclose(inner_g(g, x, y) + inner_g(g, y, y), 1e-12)


def test_inner_g_positive(conformal):
    rng = np.random.default_rng(1)
    x = random_module_vector(conformal.theta, rng, 1, 3)
    p = inner_g(conformal, x, x)
    # tau(<X|X>) >= epsilon tau(<X|X>_st) for the conformal floor
    assert p.coefficient((0, 0)).real >= inner_st(x, x).coefficient((0, 0)).real - 1e-12


def test_scaling(conformal):
    rng = np.random.default_rng(2)
    x = random_module_vector(conformal.theta, rng)
    g5 = conformal.scaled(5.0)
    assert inner_g(g5, x, x).isclose(inner_g(conformal, x, x).scale(5.0), 1e-12)
    assert g5.evidence.min_eig == pytest.approx(5 * conformal.evidence.min_eig)
    assert g5.floor == 5.0
    with pytest.raises(MetricError):
        conformal.scaled(0.0)


def test_rejects_non_positive():
    t = theta2()
    c = generator(t, 1) + adjoint(generator(t, 1))
    z = TorusElement.zero(t)
    with pytest.raises(MetricError, match="positivity"):
        explicit_metric(t, [[c.scale(2.0), z], [z, one(t)]])


def test_rejects_non_symmetric_or_non_self_adjoint():
    t = theta2()
    z = TorusElement.zero(t)
    u = generator(t, 1)
    with pytest.raises(MetricError):
        explicit_metric(t, [[one(t) + u, z], [z, one(t)]])
    with pytest.raises(MetricError):
        explicit_metric(t, [[one(t), u.scale(0.1)], [adjoint(u).scale(0.2), one(t)]])
    with pytest.raises(MetricError):
        conformal_metric(t, one(t), 0.0)


def test_rotated_diagonal_symmetric():
    t = ThetaMatrix.from_pairs(3, {(1, 2): 0.3, (2, 3): 0.1})
    c = np.cos(0.4)
    s = np.sin(0.4)
    rot = [[c, -s, 0], [s, c, 0], [0, 0, 1]]
    d = [generator(t, 1) + adjoint(generator(t, 1)), one(t).scale(0.5), TorusElement.zero(t)]
    d = [x.scale(0.3) for x in d]
    g = rotated_diagonal_metric(t, d, 0.5, rot)
    for j in range(3):
        for k in range(3):
            assert g[j, k] == g[k, j]
    with pytest.raises(MetricError):
        rotated_diagonal_metric(t, d, 0.5, [[2, 0, 0], [0, 1, 0], [0, 0, 1]])


def test_make_metric_roundtrip(conformal):
    g = make_metric(conformal.theta, conformal.scaled(2.0).to_dict())
    assert g[0, 0].isclose(conformal[0, 0].scale(2.0), 1e-14)
    with pytest.raises(MetricError):
        make_metric(conformal.theta, {"kind": "bogus"})


def test_norm_bounds_helpers(conformal):
    assert inverse_sqrt_bound(conformal) == 1.0
    up = sqrt_norm_upper(conformal, CFG)
    # ||g|| <= 1 + (0.4 + 0.3)^2
    assert 1.0 <= up <= np.sqrt(1.49) + 1e-9


def test_module_vector_records_roundtrip():
    t = theta2()
    x = random_module_vector(t, np.random.default_rng(3))
    assert ModuleVector.from_records(t, x.to_records()).isclose(x, 0)

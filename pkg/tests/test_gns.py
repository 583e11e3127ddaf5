import numpy as np
import pytest

from conftest import theta2
from qtorus import (
    GNSConfig,
    NormInterval,
    ThetaMatrix,
    TorusElement,
    generator,
    identity_metric,
    matrix_norm_interval,
    monomial,
    norm_interval,
    one,
    positivity_check,
    random_element,
    represent,
)
from qtorus.gns import TruncationBox, character_bounds, norm_lower_at, top_singular_value

CFG = GNSConfig(radii=(4, 8, 12))


def test_monomials_exact():
    t = theta2()
    iv = norm_interval(monomial(t, (2, -3), 3 - 4j))
    assert iv.lower == iv.upper == 5.0


def test_zero_and_scalar():
    t = theta2()
    assert norm_interval(TorusElement.zero(t)).upper == 0.0
    assert norm_interval(one(t).scale(-2.0)).lower == 2.0


def test_one_plus_u(frozen):
    t = ThetaMatrix.zero(1)
    iv = norm_interval(one(t) + generator(t, 1), CFG)
    assert iv.contains(frozen["norm_one_plus_u"], 1e-9)


@pytest.mark.parametrize("key", ["one_plus_u_plus_v", "mixed"])
def test_rational_rotation_oracle(frozen, key):
    rat = frozen["rational_norms"]
    theta = theta2(rat["p"] / rat["q"])
    if key == "one_plus_u_plus_v":
        a = one(theta) + generator(theta, 1) + generator(theta, 2)
        lip = 2 * np.pi * 2
    else:
        a = TorusElement.from_dict(theta, {(1, 0): 0.5, (-1, 0): 0.5, (1, 1): 0.25j, (0, -1): -0.3})
        lip = 2 * np.pi * (0.5 + 0.5 + 2 * 0.25 + 0.3)
    ref = rat[key]
    iv = norm_interval(a, CFG)
    # the oracle samples fibres on a 64 x 64 grid, so it is a lower bound within
    # the Lipschitz constant times half the spacing
    assert iv.upper >= ref - 1e-12
    assert iv.lower <= ref + lip / 128


def test_lower_bounds_monotone_without_characters():
    raw = GNSConfig(characters=False)
    rng = np.random.default_rng(0)
    t = theta2()
    for _ in range(5):
        a = random_element(t, rng, 2, 5)
        vals = [norm_lower_at(a, R, raw) for R in (2, 4, 8)]
        assert vals == sorted(vals) or np.allclose(vals, sorted(vals), atol=1e-12)
        assert vals[-1] <= a.l1() + 1e-12


def test_interval_ordering_random():
    rng = np.random.default_rng(1)
    for t in (ThetaMatrix.zero(1), theta2(), ThetaMatrix.from_pairs(3, {(1, 2): 0.3})):
        for _ in range(4):
            a = random_element(t, rng, 2, 4)
            iv = norm_interval(a, GNSConfig(radii=(2, 4)))
            assert 0 <= iv.lower <= iv.upper <= a.l1() + 1e-12


def test_character_bounds_commutative():
    t = ThetaMatrix.zero(2)
    a = TorusElement.from_dict(t, {(0, 0): 1.0, (1, 0): 0.5, (0, 1): 0.5j})
    lo, up = character_bounds(a)[:2]
    # |1 + z/2 + i w/2| peaks at 2 (z = 1, w = -i)
    assert lo <= 2.0 <= up
    assert up - lo < 1e-4
    assert character_bounds(generator(theta2(), 1) + generator(theta2(), 2)) is None


def test_power_iteration_matches_dense():
    rng = np.random.default_rng(2)
    a = random_element(theta2(), rng, 2, 4)
    m = represent(a, TruncationBox(3, 2))
    dense = np.linalg.norm(m.toarray(), 2)
    val, conv = top_singular_value(m, np.random.default_rng(0), restarts=3, tol=1e-12)
    assert conv
    assert val == pytest.approx(dense, rel=1e-8)


def test_matrix_norm_identity():
    t = theta2()
    iv = matrix_norm_interval(identity_metric(t).rows, CFG)
    assert iv.contains(1.0, 1e-12)


def test_matrix_norm_commutative_grid():
    # diag(2 + cos, 1) on the commutative torus has norm 3
    t = ThetaMatrix.zero(1)
    c = TorusElement.from_dict(t, {(0,): 2.0, (1,): 0.5, (-1,): 0.5})
    z = TorusElement.zero(t)
    iv = matrix_norm_interval([[c, z], [z, one(t)]], CFG)
    assert iv.contains(3.0, 1e-9)
    assert iv.lower > 3.0 - 1e-6


def test_positivity_check_verdicts():
    t = theta2()
    c = generator(t, 1) + generator(t, 1).adjoint()
    good = [[one(t).scale(2.0) + c.scale(0.5), TorusElement.zero(t)],
            [TorusElement.zero(t), one(t)]]
    bad = [[c, TorusElement.zero(t)], [TorusElement.zero(t), one(t)]]
    assert positivity_check(good, 4).plausible
    assert positivity_check(bad, 4).verdict == "non-positive"


def test_interval_arithmetic():
    a = NormInterval(1.0, 2.0)
    assert a.scale(-3).upper == 6.0
    assert a.sqrt().lower == 1.0
    assert (a + a).upper == 4.0
    assert a.overlaps(NormInterval(2.0, 3.0))
    assert not a.overlaps(NormInterval(2.5, 3.0))
    with pytest.raises(ValueError):
        NormInterval(2.0, 1.0)
    assert isinstance(NormInterval(np.float64(1.0), np.float64(1.0)).to_dict()["lower"], float)


def test_bad_schedule():
    with pytest.raises(ValueError):
        GNSConfig(radii=(8, 4)).for_dim(2)

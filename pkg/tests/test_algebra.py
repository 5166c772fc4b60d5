from fractions import Fraction

import numpy as np
import pytest

from kktz import algebra as A
from kktz.errors import MalformedInput, NonzeroConstantTerm


def _relabel(opp, vperm, shifts):
    """Move vertex v to vperm[v] and rotate its cyclic order by shifts[v]."""
    f = {}
    for v in range(len(opp) // 3):
        for t in range(3):
            f[3 * v + t] = 3 * vperm[v] + (t + shifts[v]) % 3
    new = [0] * len(opp)
    for s in range(len(opp)):
        new[f[s]] = f[opp[s]]
    return tuple(new)


# [DERIVED] theta^n plus the connected wheels: 1, 1, 2, 3, 6 in degrees 0..4
@pytest.mark.parametrize("n,dim", [(0, 1), (1, 1), (2, 2), (3, 3)])
def test_dimensions(n, dim):
    assert A.dim_A_n(n) == dim


def test_dimension_degree_four():
    assert A.dim_A_n(4) == 6


def test_canonical_key_ignores_relabelling():
    rng = np.random.default_rng(1)
    for key in A.oriented_generators(3):
        m = len(key) // 3
        for _ in range(5):
            other = _relabel(key, rng.permutation(m).tolist(), rng.integers(0, 3, m).tolist())
            assert A.canonical_rotation(other) == key


def test_antisymmetry():
    for key in A.oriented_generators(2):
        x = A.AlgebraElement.from_rotation(key)
        for v in range(4):
            assert A.AlgebraElement.from_rotation(A.reverse_at(key, v)) == -x


def test_looped_rotation_is_zero():
    looped = (1, 0, 3, 2, 5, 4)
    assert A.has_loop(looped)
    assert A.AlgebraElement.from_rotation(looped).is_zero()


def test_theta_powers_independent():
    th = A.theta_class(2)
    assert not th.is_zero()
    sq = A.product(th, th)
    assert sq.degrees() == [2] and not sq.is_zero()


def test_product_commutative_associative():
    rng = np.random.default_rng(2)
    for _ in range(30):
        x, y, z = (A.random_element(rng, 3) for _ in range(3))
        assert x * y == y * x
        assert (x * y) * z == x * (y * z)
        assert x * (y + z) == x * y + x * z


def test_exp_of_theta_multiple():
    th = A.theta_class(2)
    a = Fraction(3, 5)
    expected = A.AlgebraElement.one(2) + th * a + A.product(th, th) * (a * a / 2)
    assert A.exp_truncated(th * a) == expected


def test_exp_is_multiplicative():
    rng = np.random.default_rng(3)
    for _ in range(20):
        x = A.random_element(rng, 3, min_degree=1)
        y = A.random_element(rng, 3, min_degree=1)
        assert A.exp_truncated(x + y) == A.exp_truncated(x) * A.exp_truncated(y)


def test_exp_rejects_constant_term():
    with pytest.raises(NonzeroConstantTerm):
        A.exp_truncated(A.AlgebraElement.one(2))


def test_bar_involution():
    rng = np.random.default_rng(4)
    for _ in range(20):
        x, y = A.random_element(rng, 3), A.random_element(rng, 3)
        assert A.bar_involution(A.bar_involution(x)) == x
        assert A.bar_involution(x * y) == A.bar_involution(x) * A.bar_involution(y)


def test_truncation_drops_high_degrees():
    th = A.theta_class(1)
    assert A.product(th, th).is_zero()


def test_json_round_trip():
    rng = np.random.default_rng(5)
    for _ in range(10):
        x = A.random_element(rng, 2)
        assert A.element_from_json(x.to_json()) == x


def test_json_errors():
    with pytest.raises(MalformedInput):
        A.element_from_json({"terms": [{"coeff": "1/0", "diagram": {"vertices": [], "edges": []}}]})
    with pytest.raises(MalformedInput):
        A.element_from_json({})


def test_normal_form_uses_survivors_only():
    basis = A.reduction_basis(3)
    surv = set(basis.survivors)
    for key in basis.columns:
        assert set(basis.normal_form({key: Fraction(1)})) <= surv

import itertools

import numpy as np
import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from odkit.errors import BudgetExceeded
from odkit.exact import circulant_shift, identity, kron, ones
from odkit.rings import (RingSpec, build_K, factor_prime_power, is_irreducible, is_unit, least_irreducible,
                         max_unit_difference_family, phi_embed, unit_difference_family)

FIELDS = [2, 3, 4, 5, 7, 8, 9, 16, 25, 27]


def _sympy_mul(R, a, b):
    p, e = R.params
    x = sympy.symbols("x")
    f = sympy.Poly(list(reversed(R.poly)), x, modulus=p)
    pa = sympy.Poly(list(reversed(R.coords(a))), x, modulus=p)
    pb = sympy.Poly(list(reversed(R.coords(b))), x, modulus=p)
    r = (pa * pb).rem(f)
    coeffs = [int(c) % p for c in reversed(r.all_coeffs())]
    return tuple(coeffs + [0] * (e - len(coeffs)))


@pytest.mark.parametrize("q", [4, 8, 9, 16, 25])
def test_gf_multiplication_matches_sympy(q):
    R = RingSpec.gf(q)
    rng = np.random.default_rng(q)
    for a, b in rng.integers(0, q, size=(60, 2)):
        assert R.coords(int(R.mul[a, b])) == _sympy_mul(R, int(a), int(b))


@pytest.mark.parametrize("q", FIELDS)
def test_gf_is_a_field(q):
    R = RingSpec.gf(q)
    one = R.one.index
    assert (R.mul[one] == np.arange(q)).all()
    assert R.units()[1:].all() and not R.units()[0]
    # distributivity on a sample
    for a, b, c in itertools.islice(itertools.product(range(q), repeat=3), 0, None, max(1, q ** 3 // 300)):
        assert R.mul[a, R.add[b, c]] == R.add[R.mul[a, b], R.mul[a, c]]


@pytest.mark.parametrize("p,e", [(2, 2), (2, 3), (2, 4), (3, 2), (5, 2)])
def test_least_irreducible_agrees_with_sympy(p, e):
    f = least_irreducible(p, e)
    x = sympy.symbols("x")
    assert sympy.Poly(list(reversed(f)), x, modulus=p).is_irreducible
    assert is_irreducible(f, p)


def test_factor_prime_power():
    assert factor_prime_power(27) == (3, 3)
    with pytest.raises(ValueError):
        factor_prime_power(12)


def test_is_unit_examples():
    Z6 = RingSpec.zm(6)
    assert not is_unit(Z6.element(3))
    assert is_unit(Z6.element(5))
    F4 = RingSpec.gf(4)
    assert all(is_unit(x) for x in F4.elements()[1:])
    GR = RingSpec.gr(2, 2, 2)
    assert GR.size == 16
    xi = GR.xi
    assert GR.multiplicative_order(xi) == 3
    assert is_unit(xi - xi * xi)


def test_unit_difference_examples():
    Z6 = RingSpec.zm(6)
    assert [x.index for x in unit_difference_family(Z6, 2)] == [0, 1]
    assert unit_difference_family(Z6, 3) is None
    F5 = RingSpec.gf(5)
    assert sorted(x.index for x in unit_difference_family(F5, 5)) == list(range(5))
    Z9 = RingSpec.zm(9)
    assert [x.index for x in unit_difference_family(Z9, 3)] == [0, 1, 2]


def test_unit_difference_cap():
    with pytest.raises(BudgetExceeded):
        unit_difference_family(RingSpec.zm(50), 2, cap=10)


def _least_prime(m):
    return min(sympy.primefactors(m))


@pytest.mark.parametrize("m", range(2, 31))
def test_max_family_is_least_prime(m):
    fam = max_unit_difference_family(RingSpec.zm(m))
    assert len(fam) == _least_prime(m)
    for a, b in itertools.combinations(fam, 2):
        assert np.gcd(a.index - b.index, m) == 1


@pytest.mark.parametrize("R", [RingSpec.zm(6), RingSpec.zm(8), RingSpec.gf(4), RingSpec.gf(9),
                               RingSpec.gf(16), RingSpec.gr(2, 2, 2)], ids=repr)
def test_phi_homomorphism(R):
    n = R.size
    assert phi_embed(R, R.zero) == type(phi_embed(R, R.zero)).identity(n)
    for g, h in itertools.product(range(n), repeat=2):
        assert phi_embed(R, R.at(g)) @ phi_embed(R, R.at(h)) == phi_embed(R, R.at(g) + R.at(h))


@pytest.mark.parametrize("R", [RingSpec.zm(9), RingSpec.gf(8), RingSpec.gr(2, 2, 2)], ids=repr)
def test_unit_multiplication_permutes(R):
    for x in R.elements():
        if is_unit(x):
            assert sorted(int(R.mul[x.index, a]) for a in range(R.size)) == list(range(R.size))


def test_phi_examples():
    F4 = RingSpec.gf(4)
    r2 = circulant_shift(2).to_dense()
    assert np.array_equal(phi_embed(F4, F4.element((1, 0))).to_dense(), kron(r2, identity(2)))
    Z3 = RingSpec.zm(3)
    assert phi_embed(Z3, Z3.element(2)) == circulant_shift(3) ** 2


def _grid_sum(grid, i, j):
    return sum((grid[i][l] @ grid[j][l].T).to_dense() for l in range(len(grid[i])))


def test_build_K_examples():
    F2 = RingSpec.gf(2)
    g = build_K(F2, F2.elements(), F2.elements())
    assert np.array_equal(_grid_sum(g, 0, 1), ones(2))
    F3 = RingSpec.gf(3)
    g = build_K(F3, F3.elements(), F3.elements())
    for i, j in itertools.permutations(range(3), 2):
        assert np.array_equal(_grid_sum(g, i, j), ones(3))
    F4 = RingSpec.gf(4)
    g = build_K(F4, F4.elements(), F4.elements())
    assert len(g) == 4 and all(len(row) == 4 for row in g)


def test_build_K_rejects_repeated_alphas():
    F3 = RingSpec.gf(3)
    with pytest.raises(ValueError):
        build_K(F3, F3.elements()[:2], [F3.one, F3.one])


@given(st.sampled_from([3, 4, 5, 7, 8, 9]), st.data())
def test_build_K_sums_are_zero_one(q, data):
    R = RingSpec.gf(q)
    m = data.draw(st.integers(2, q))
    xs = data.draw(st.lists(st.integers(0, q - 1), min_size=m, max_size=m, unique=True))
    al = data.draw(st.lists(st.integers(0, q - 1), min_size=m, max_size=m, unique=True))
    g = build_K(R, [R.at(x) for x in xs], [R.at(a) for a in al])
    for i, j in itertools.permutations(range(m), 2):
        assert _grid_sum(g, i, j).max() <= 1

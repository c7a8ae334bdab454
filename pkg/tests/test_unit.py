import itertools

import numpy as np
import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from odkit.constructions import H2, base_od
from odkit.errors import SearchError
from odkit.rings import RingSpec
from odkit.scheme import all_members
from odkit.unbiased import ring_family
from odkit.unit import (CycloInt, UnitMatrix, UnitOrthogonalDesign, butson_bush_family, c_embed, cyclo_reduce,
                        cyclotomic_poly, gram_counts, is_unit_quasi_unbiased_pair, is_unit_unbiased_pair,
                        is_unit_weighing, unit_build_K, unit_gram, unit_kron, unit_matmul, unit_ring_family,
                        verify_unit_od)

from .oracles import cyclo_value, to_complex

TOL = 1e-9


@pytest.mark.parametrize("m", range(1, 25))
def test_cyclotomic_poly_matches_sympy(m):
    x = sympy.symbols("x")
    expect = sympy.Poly(sympy.cyclotomic_poly(m, x), x).all_coeffs()
    assert list(cyclotomic_poly(m)) == [int(c) for c in reversed(expect)]


@pytest.mark.parametrize("m", [3, 4, 5])
def test_sum_of_all_roots_is_zero(m):
    assert CycloInt(m, (1,) * m).is_zero()


def test_reduction_examples():
    assert (CycloInt.root(4, 2) + CycloInt.integer(4, 1)).is_zero()
    z = CycloInt.root(6, 1)
    assert (z * z - z + CycloInt.integer(6, 1)).is_zero()
    assert not any(cyclo_reduce(CycloInt.root(6, 2) + CycloInt.integer(6, 1) - CycloInt.root(6, 1)))
    assert not CycloInt.root(5, 1).is_zero()


def cyclo(m):
    return st.lists(st.integers(-5, 5), min_size=m, max_size=m).map(lambda c: CycloInt(m, tuple(c)))


@given(st.sampled_from([2, 3, 4, 5, 6, 8, 12]).flatmap(lambda m: st.tuples(cyclo(m), cyclo(m))))
def test_cyclo_arithmetic_matches_complex(pair):
    a, b = pair
    assert abs(cyclo_value(a * b) - cyclo_value(a) * cyclo_value(b)) < 1e-6
    assert abs(cyclo_value(a + b) - cyclo_value(a) - cyclo_value(b)) < 1e-6
    assert (a * b).conj() == b.conj() * a.conj()
    assert a.is_zero() == (abs(cyclo_value(a)) < 1e-6)


@given(st.sampled_from([3, 4, 6]).flatmap(lambda m: cyclo(m)))
def test_conjugation_fixes_real_combinations(a):
    r = a + a.conj()
    assert r.conj() == r


def test_rescale_preserves_value():
    a = CycloInt.root(3, 1)
    assert abs(cyclo_value(a.rescale(6)) - cyclo_value(a)) < TOL


@st.composite
def unit_matrices(draw, n, m):
    exps = draw(st.lists(st.integers(0, m - 1), min_size=n * n, max_size=n * n))
    mask = draw(st.lists(st.booleans(), min_size=n * n, max_size=n * n))
    return UnitMatrix(np.array(exps).reshape(n, n), np.array(mask).reshape(n, n), m)


@given(st.integers(1, 5), st.sampled_from([2, 3, 4, 5, 6]), st.data())
def test_unit_gram_matches_complex(n, m, data):
    A = data.draw(unit_matrices(n, m))
    B = data.draw(unit_matrices(n, m))
    G = unit_gram(A, B)
    expect = to_complex(A) @ to_complex(B).conj().T
    for r, c in itertools.product(range(n), repeat=2):
        assert abs(cyclo_value(G.entry(r, c)) - expect[r, c]) < 1e-6


@given(st.integers(1, 4), st.data())
def test_unit_kron_matches_complex(n, data):
    A = data.draw(unit_matrices(n, 3))
    B = data.draw(unit_matrices(2, 4))
    K = unit_kron(A, B)
    assert np.allclose(to_complex(K), np.kron(to_complex(A), to_complex(B)))


def test_fourier_is_butson():
    for q in range(2, 8):
        F = UnitMatrix.fourier(q)
        assert is_unit_weighing(F, q)
    assert not is_unit_weighing(UnitMatrix.fourier(4), 3)


def test_c_embed():
    assert UnitMatrix.identity(3, 3) == c_embed(3, 0)
    c2 = c_embed(2, 1)
    assert np.allclose(to_complex(c2), np.array([[0, 1], [-1, 0]]))
    sq = unit_matmul(c2, c2)
    assert np.allclose(to_complex(sq), -np.eye(2))
    for m in range(2, 7):
        for x in range(m):
            assert np.allclose(to_complex(c_embed(m, x)), np.linalg.matrix_power(to_complex(c_embed(m, 1)), x))


def test_unit_grid_sums_are_single_roots():
    R = RingSpec.gf(3)
    grid = unit_build_K(R, [0, 1, 2], [0, 1, 2])
    for i, j in itertools.permutations(range(3), 2):
        C = sum(gram_counts(grid[i][l], grid[j][l]) for l in range(3))
        assert (C.sum(axis=2) == 1).all()
        S = sum(to_complex(grid[i][l]) @ to_complex(grid[j][l]).conj().T for l in range(3))
        assert np.allclose(np.abs(S), 1)


def test_unit_od_from_real():
    D = UnitOrthogonalDesign.from_real(base_od(2))
    assert verify_unit_od(D)
    parts = list(D.parts)
    bump = np.zeros((4, 4), dtype=np.int64)
    bump[0, 0] = 1
    parts[0] = UnitMatrix(parts[0].exps + bump, parts[0].mask, parts[0].modulus)
    rep = verify_unit_od(UnitOrthogonalDesign(tuple(parts), D.type))
    assert not rep


def test_unit_ring_family_small():
    r = unit_ring_family(3, H2, base_od(1), subsets=[[0]])
    F = r.family
    assert F.size == 2 and F.alpha == 4
    assert all(D.order == 6 and D.type == (2, 2) for D in F.members)
    assert r.substituted[(0,)].params == (6, 2, 4, 1)
    rep = is_unit_unbiased_pair(*F.members)
    assert rep.alpha == 4


def test_unit_ring_family_fourier():
    K = UnitOrthogonalDesign((UnitMatrix.identity(3, 3),), (1,))
    r = unit_ring_family(3, UnitMatrix.fourier(3), K)
    assert r.family.size == 3 and r.family.alpha == 9


def test_unit_ring_family_q2_matches_real_support():
    u = unit_ring_family(2, H2, base_od(1)).family
    real = ring_family(2, H2, base_od(1)).family
    for a, b in zip(u.members, real.members):
        for p, c in zip(a.parts, b.coeffs):
            assert np.array_equal(p.mask, c != 0)
    assert all(np.array_equal(p.to_signs(), c) for p, c in zip(u.members[0].parts, real.members[0].coeffs))


@pytest.mark.parametrize("q", [2, 3, 4, 5])
def test_butson_bush_family(q):
    B = butson_bush_family(q)
    assert len(B.members) == q
    for i, j in itertools.combinations(range(q), 2):
        U = B.products[(i, j)]
        assert U.mask.all() and U.modulus == q
        P = to_complex(B.members[i]) @ to_complex(B.members[j]).conj().T
        n = q
        for a in range(n):
            assert np.allclose(P[a * n:(a + 1) * n, a * n:(a + 1) * n], 1)
        assert np.allclose(np.abs(P), 1)
        assert is_unit_quasi_unbiased_pair(B.members[i], B.members[j], q * q, q, q * q, 1)


def test_butson_q2_equals_real_family():
    B = butson_bush_family(2)
    for W, R in zip(B.members, all_members(1)):
        assert np.array_equal(W.to_signs(), R)


def test_butson_cap():
    with pytest.raises(SearchError):
        butson_bush_family(17)

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from odkit.constructions import paley, weighing_power2
from odkit.errors import ShapeError
from odkit.exact import (MonomialMatrix, PackedSignMatrix, back_identity, circulant, circulant_shift, direct_sum,
                         gram, identity, is_hadamard, is_weighing, kron, matmul, ones, sylvester,
                         templated_tensor)

from .oracles import int_matmul

H2 = np.array([[1, 1], [1, -1]])


def small_ints(rows, cols, lo=-9, hi=9):
    return arrays(np.int64, (rows, cols), elements=st.integers(lo, hi))


def sign_matrices(n):
    return arrays(np.int64, (n, n), elements=st.sampled_from([-1, 0, 1]))


@st.composite
def monomials(draw, n):
    perm = draw(st.permutations(range(n)))
    cols = [c if draw(st.booleans()) or n == 1 else -1 for c in perm]
    signs = draw(st.lists(st.sampled_from([1, -1]), min_size=n, max_size=n))
    return MonomialMatrix(tuple(cols), tuple(signs))


@given(st.data())
def test_matmul_matches_object_oracle(data):
    r, k, c = (data.draw(st.integers(1, 7)) for _ in range(3))
    big = data.draw(st.sampled_from([9, 5000, 10 ** 8]))
    A = data.draw(small_ints(r, k, -big, big))
    B = data.draw(small_ints(k, c, -big, big))
    assert (matmul(A, B) == int_matmul(A, B)).all()


def test_matmul_detects_overflow():
    A = np.full((2, 2), 2 ** 40, dtype=np.int64)
    with pytest.raises(OverflowError):
        matmul(A, A)


def test_matmul_shape_error():
    with pytest.raises(ShapeError):
        matmul(np.ones((2, 3), dtype=np.int64), np.ones((2, 3), dtype=np.int64))


@given(small_ints(2, 3), small_ints(3, 2), small_ints(2, 2))
def test_kron_associative(A, B, C):
    assert np.array_equal(kron(kron(A, B), C), kron(A, kron(B, C)))


@given(small_ints(2, 3), small_ints(2, 2), small_ints(3, 2), small_ints(2, 3))
def test_kron_mixed_product(A, B, C, D):
    assert np.array_equal(matmul(kron(A, B), kron(C, D)), kron(matmul(A, C), matmul(B, D)))


def test_kron_examples():
    assert np.array_equal(kron(identity(2), ones(2)), direct_sum(ones(2), ones(2)))
    r2 = circulant_shift(2).to_dense()
    # (x, y) -> (x+1, y+1) on Z2 x Z2 in row-major order
    expect = np.zeros((4, 4), dtype=np.int64)
    for x in range(2):
        for y in range(2):
            expect[2 * x + y, 2 * ((x + 1) % 2) + (y + 1) % 2] = 1
    assert np.array_equal(kron(r2, r2), expect)
    H4 = kron(H2, H2)
    assert np.array_equal(H4, sylvester(2))
    assert np.array_equal(gram(H4), 4 * identity(4))


def test_direct_sum_examples():
    assert np.array_equal(direct_sum(identity(1), identity(1)), identity(2))
    W = weighing_power2(3, 7)
    assert is_weighing(direct_sum(W, W), 7)
    assert is_weighing(direct_sum(H2, -H2), 2)


@pytest.mark.parametrize("h", range(1, 65))
def test_circulant_shift_order(h):
    r = circulant_shift(h)
    assert np.array_equal((r ** h).to_dense(), identity(h))


def test_circulant_shift_examples():
    assert np.array_equal(circulant_shift(1).to_dense(), identity(1))
    r3 = circulant_shift(3).to_dense()
    assert r3[0].tolist() == [0, 1, 0]
    half_turn = np.array([[0, 0, 1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, 1, 0, 0]])
    assert np.array_equal((circulant_shift(4) ** 2).to_dense(), half_turn)


def test_back_identity():
    assert np.array_equal(back_identity(1), identity(1))
    R3 = back_identity(3)
    assert np.array_equal(R3 @ R3, identity(3))
    PR = paley(7) @ back_identity(7)
    assert np.array_equal(PR, PR.T)


def test_circulant_rows():
    C = circulant([1, 2, 3])
    assert C.tolist() == [[1, 2, 3], [3, 1, 2], [2, 3, 1]]


def test_templated_tensor_examples():
    A, B = np.array([[1, 2], [3, 4]]), np.array([[5, 6], [7, 8]])
    assert np.array_equal(templated_tensor(identity(2), [A, B]), direct_sum(A, B))
    I2 = identity(2)
    expect = np.block([[I2, I2], [I2, -I2]])
    assert np.array_equal(templated_tensor(H2, [I2, I2]), expect)
    r2 = circulant_shift(2).to_dense()
    M = templated_tensor(H2, [I2, r2])
    assert np.array_equal(M, np.block([[I2, r2], [I2, -r2]]))
    assert is_weighing(M, 2)
    with pytest.raises(ShapeError):
        templated_tensor(H2, [I2, identity(3)])


@given(sign_matrices(3), small_ints(2, 2))
def test_templated_tensor_constant_is_kron(W, K):
    assert np.array_equal(templated_tensor(W, [K] * 3), kron(W, K))


@given(st.integers(1, 6).flatmap(lambda n: st.tuples(monomials(n), monomials(n))))
def test_monomial_product_matches_dense(pair):
    a, b = pair
    assert np.array_equal((a @ b).to_dense(), a.to_dense() @ b.to_dense())
    assert np.array_equal(a.T.to_dense(), a.to_dense().T)
    assert MonomialMatrix.from_dense(a.to_dense()) == a


@given(st.tuples(monomials(3), monomials(2)))
def test_monomial_kron_matches_dense(pair):
    a, b = pair
    assert np.array_equal(a.kron(b).to_dense(), kron(a.to_dense(), b.to_dense()))


def test_monomial_rejects_bad_input():
    with pytest.raises(ValueError):
        MonomialMatrix((0, 0), (1, 1))
    with pytest.raises(ValueError):
        MonomialMatrix.from_dense(np.array([[1, 1], [0, 1]]))


def test_is_weighing_examples():
    for n in (1, 3, 5):
        assert is_weighing(identity(n), 1)
    assert is_hadamard(sylvester(2))
    assert not is_weighing(2 * identity(2), 4)
    with pytest.raises(ShapeError):
        is_weighing(np.ones((2, 3), dtype=np.int64), 3)


@given(st.integers(1, 40).flatmap(lambda n: st.tuples(sign_matrices(n), sign_matrices(n))))
def test_packed_product_equals_dense(pair):
    A, B = pair
    pa, pb = PackedSignMatrix.from_dense(A), PackedSignMatrix.from_dense(B)
    assert np.array_equal(pa.to_dense(), A)
    assert np.array_equal(pa.gram(pb), gram(A, B))


def test_packed_large_hadamard():
    H = sylvester(7)
    assert np.array_equal(PackedSignMatrix.from_dense(H).gram(), 128 * identity(128))

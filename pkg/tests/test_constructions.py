import itertools

import numpy as np
import pytest

from odkit.constructions import (LatinSquare, are_orthogonal, are_suitable, base_od, double, full_od_power2,
                                 goethals_seidel_pair, mols, msls, od_with_type, paley, partition_type,
                                 subset_sums, subset_with_sum, weighing_power2, williamson)
from odkit.designs import OrthogonalDesign, verify_od
from odkit.errors import BudgetExceeded, SearchError
from odkit.exact import back_identity, gram, identity, is_weighing, kron, ones


def test_base_designs_match_displayed_entries():
    assert base_od(1) == OrthogonalDesign.from_entries(np.array([[1, 2], [-2, 1]]))
    E = base_od(2).entries()
    assert E[0].tolist() == [1, 2, 3, 4]
    assert E[1].tolist() == [-2, 1, 4, -3]
    assert base_od(3).type == (1,) * 8
    with pytest.raises(ValueError):
        base_od(4)


@pytest.mark.parametrize("t", [1, 2, 3, 4, 5])
def test_full_od_power2_subset_sums(t):
    D = full_od_power2(t)
    n = 2 ** t
    assert D.order == n and sum(D.type) == n
    assert subset_sums(D.type) == set(range(1, n + 1))
    assert verify_od(D)


def test_full_od_power2_budget():
    with pytest.raises(BudgetExceeded):
        full_od_power2(6)


@pytest.mark.parametrize("t,parts", [(3, (1, 1, 6)), (3, (2, 6)), (4, (2, 2, 6, 6)), (4, (1, 2, 13)),
                                     (4, (2, 6, 8)), (4, (16,))])
def test_od_with_type(t, parts):
    D = od_with_type(t, parts)
    assert D.type == parts and D.order == 2 ** t
    assert verify_od(D)


def test_od_with_type_reports_unmergeable_type():
    # the order-16 full design has type (1, 1, 2, ..., 2): an odd part of 5 cannot be formed three times
    with pytest.raises(SearchError, match="cannot be merged"):
        od_with_type(4, (1, 5, 5, 5))


def test_partition_type():
    groups = partition_type((1, 1, 2, 4), (3, 5))
    assert sorted(sum((1, 1, 2, 4)[v] for v in g) for g in groups) == [3, 5]
    assert partition_type((2, 2), (3, 1)) is None


def test_subset_with_sum():
    S = subset_with_sum((1, 1, 2, 4), 7)
    assert sum((1, 1, 2, 4)[v] for v in S) == 7
    assert subset_with_sum((2, 2), 3) is None


@pytest.mark.parametrize("t", [1, 2, 3, 4])
def test_weighing_power2_all_weights(t):
    for k in range(1, 2 ** t + 1):
        assert is_weighing(weighing_power2(t, k), k)


def test_weighing_examples():
    assert is_weighing(weighing_power2(3, 7), 7)
    H4 = weighing_power2(2, 4)
    assert np.array_equal(gram(H4), 4 * identity(4)) and (np.abs(H4) == 1).all()
    assert is_weighing(kron(weighing_power2(3, 7), weighing_power2(1, 2)), 14)
    with pytest.raises(ValueError):
        weighing_power2(2, 5)


def _euler_chi(a, p):
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


@pytest.mark.parametrize("p", [3, 5, 7, 11, 13, 17, 19, 23])
def test_paley_prime_matches_euler_criterion(p):
    P = paley(p)
    expect = np.array([[_euler_chi(j - i, p) for j in range(p)] for i in range(p)])
    assert np.array_equal(P, expect)
    assert np.array_equal(gram(P), p * identity(p) - ones(p))
    if p % 4 == 3:
        assert np.array_equal(P.T, -P)
    else:
        assert np.array_equal(P.T, P)


def test_paley_examples():
    assert paley(3)[0].tolist() == [0, 1, -1]
    P7R = paley(7) @ back_identity(7)
    assert np.array_equal(P7R, P7R.T)
    P9 = paley(9)
    assert np.array_equal(P9, P9.T)
    assert np.array_equal(gram(P9), 9 * identity(9) - ones(9))
    with pytest.raises(ValueError):
        paley(8)


@pytest.mark.parametrize("p", [5, 9, 13, 17, 25])
def test_goethals_seidel_pair(p):
    R, S = goethals_seidel_pair(p)
    q = (p + 1) // 2
    assert R.shape == (q, q)
    assert np.array_equal(R, R.T) and np.array_equal(S, S.T)
    assert not np.diag(R).any()
    assert np.array_equal(R @ R.T + S @ S.T, p * identity(q))


def test_goethals_seidel_rejects_bad_p():
    with pytest.raises(ValueError):
        goethals_seidel_pair(7)


@pytest.mark.parametrize("n", [1, 3, 5, 7])
def test_williamson(n):
    quad = williamson(n)
    for M in quad:
        assert np.array_equal(M, M.T)
        assert (np.abs(M) == 1).all()
        assert all(np.array_equal(np.roll(M[0], i), M[i]) for i in range(n))
    assert np.array_equal(sum(M @ M for M in quad), 4 * n * identity(n))


def test_williamson_order_one():
    assert all(M.tolist() == [[1]] for M in williamson(1))


@pytest.mark.parametrize("q,f", [(3, 2), (4, 3), (5, 4), (7, 6), (8, 7), (9, 8)])
def test_mols_and_msls(q, f):
    Ls = mols(q, f)
    assert all(are_orthogonal(a, b) for a, b in itertools.combinations(Ls, 2))
    Ss = msls(q, f)
    assert len(Ss) == f
    assert all(are_suitable(a, b) for a, b in itertools.combinations(Ss, 2))


def test_msls_q3_direct_check():
    a, b = msls(3, 2)
    for r1, r2 in itertools.product(range(3), repeat=2):
        assert sum(a.cells[r1, c] == b.cells[r2, c] for c in range(3)) == 1


def test_msls_single_square():
    (L,) = msls(2, 1)
    assert L.order == 2


def test_latin_square_validation():
    with pytest.raises(ValueError):
        LatinSquare(np.array([[0, 0], [1, 1]]))


def test_doubling_examples():
    T3 = double(base_od(1), "T3")
    assert T3.type == (1, 1, 1) and T3.order == 4 and verify_od(T3)
    T2 = double(od_with_type(3, (1, 1, 6)), "T2")
    assert T2.type == (2, 2, 12) and T2.order == 16
    T1 = double(od_with_type(3, (1, 1, 6)), "T1")
    assert T1.order == 16 and verify_od(T1)
    with pytest.raises(ValueError):
        double(base_od(1), "T9")


def test_t1_reports_missing_mate():
    with pytest.raises(SearchError, match="no commuting mate"):
        double(od_with_type(3, (1, 1, 6)), "T1", fresh=[2])

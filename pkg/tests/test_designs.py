import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from odkit.constructions import base_od, full_od_power2, od_with_type, paley, williamson
from odkit.designs import (Merge, OrthogonalDesign, check_amicable, check_commuting, merge_groups, negate_variable,
                           od_transpose, permute, plug_in, substitute, sum_property, verify_od)
from odkit.errors import PlugInError, ShapeError
from odkit.exact import back_identity, gram, identity, is_hadamard, is_weighing, ones

from .oracles import sampled_od_check

CATALOG = [base_od(1), base_od(2), base_od(3), full_od_power2(4), od_with_type(3, (1, 1, 2, 4)),
           od_with_type(3, (1, 1, 6)), od_with_type(4, (1, 2, 13))]


def test_verify_displayed_designs():
    D2 = OrthogonalDesign.from_entries(np.array([[1, 2], [-2, 1]]))
    assert D2.type == (1, 1)
    rep = verify_od(D2)
    assert rep.ok and rep.checks == ("entries", "disjoint_supports", "diagonal_gram", "anticommutation")
    assert verify_od(base_od(3))


def test_flipped_entry_fails_at_anticommutation():
    E = np.array([[1, 2], [2, 1]])
    rep = verify_od(OrthogonalDesign.from_entries(E))
    assert not rep
    assert rep.check == "anticommutation"
    assert rep.pair == (0, 1)


def test_overlapping_supports_reported_first():
    c = np.array([[[1, 0], [0, 1]], [[1, 0], [0, -1]]])
    rep = verify_od(OrthogonalDesign(c, (1, 1)))
    assert rep.check == "disjoint_supports" and rep.pair == (0, 1)


def test_diagonal_gram_failure():
    rep = verify_od(OrthogonalDesign(np.array([[[1, 0], [0, 0]]]), (1,)))
    assert rep.check == "diagonal_gram"


@given(st.sampled_from(CATALOG), st.integers(0, 10 ** 6))
def test_verify_matches_sampled_oracle(D, seed):
    rng = np.random.default_rng(seed)
    c = D.coeffs.copy()
    if seed % 2:
        v, r, col = np.argwhere(c != 0)[rng.integers(np.count_nonzero(c))]
        c[v, r, col] *= -1
    E = OrthogonalDesign(c, D.type)
    assert bool(verify_od(E)) == sampled_od_check(E, rng)


@pytest.mark.parametrize("D", CATALOG, ids=repr)
def test_full_substitution_hadamard_iff_full(D):
    H = substitute(D, {v: 1 for v in range(D.nvars)})
    assert is_hadamard(H) == (sum(D.type) == D.order)


def test_nonfull_design_is_not_hadamard():
    D = OrthogonalDesign.from_entries(np.array([[1, 0], [0, 1]]))
    assert verify_od(D)
    assert not is_hadamard(substitute(D, {0: 1}))


@given(st.sampled_from(CATALOG), st.data())
def test_subset_substitution_weight(D, data):
    vals = data.draw(st.lists(st.sampled_from([-1, 0, 1]), min_size=D.nvars, max_size=D.nvars))
    M = substitute(D, dict(enumerate(vals)))
    assert is_weighing(M, sum(s for s, v in zip(D.type, vals) if v))


def test_substitute_examples():
    D = base_od(3)
    assert is_hadamard(substitute(D, {v: 1 for v in range(8)}))
    W = substitute(D, {v: int(v < 7) for v in range(8)})
    assert is_weighing(W, 7)
    M = substitute(D, {4: Merge(5), 6: Merge(7)})
    assert M.type == (1, 1, 1, 1, 2, 2)
    assert verify_od(M)


def test_substitute_errors():
    D = base_od(2)
    with pytest.raises(ValueError):
        substitute(D, {0: Merge(0)})
    with pytest.raises(ValueError):
        substitute(D, {0: 0, 1: 0, 2: 0, 3: Merge(2)})
    with pytest.raises(IndexError):
        substitute(D, {5: 1})


def test_merge_groups_keeps_group_order():
    M = merge_groups(base_od(3), [[6, 7], [0]])
    assert M.type == (2, 1)
    assert verify_od(M)


def test_plug_in_identities():
    M = plug_in(base_od(1), [identity(3), identity(3)])
    assert np.array_equal(gram(M), 2 * identity(6))


def test_plug_in_williamson_gives_hadamard_12():
    M = plug_in(base_od(2), list(williamson(3)))
    assert M.shape == (12, 12) and is_hadamard(M)


@given(st.sampled_from(CATALOG), st.data())
def test_plug_in_scalars_agree_with_substitute(D, data):
    vals = data.draw(st.lists(st.sampled_from([-1, 1]), min_size=D.nvars, max_size=D.nvars))
    M = plug_in(D, [np.array([[v]]) for v in vals])
    assert np.array_equal(M, substitute(D, dict(enumerate(vals))))


def test_plug_in_order8_paley_violates_sum_property():
    J, I = ones(7), identity(7)
    Bs = [J, J - 2 * I, paley(7) @ back_identity(7)]
    D = od_with_type(3, (1, 1, 6))
    with pytest.raises(PlugInError, match="sum property"):
        plug_in(D, Bs)


def test_plug_in_order16_paley():
    J, I = ones(7), identity(7)
    P = paley(7)
    Bs = [J, J - 2 * I, (P + I) @ back_identity(7)]
    M = plug_in(od_with_type(4, (1, 2, 13)), Bs)
    assert is_hadamard(M) and M.shape == (112, 112)


def test_plug_in_validation_errors():
    A = np.array([[1, 1], [0, 1]])
    B = np.array([[1, 0], [1, 1]])
    with pytest.raises(PlugInError, match="amicable"):
        check_amicable([A, B])
    with pytest.raises(PlugInError, match="commute"):
        check_commuting([A, B])
    with pytest.raises(PlugInError):
        sum_property([1, 1], [identity(2), 2 * identity(2) + np.array([[0, 1], [0, 0]])])
    with pytest.raises(ShapeError):
        plug_in(base_od(1), [identity(2)])
    with pytest.raises(ShapeError):
        plug_in(base_od(1), [identity(2), identity(3)])


@pytest.mark.parametrize("D", CATALOG, ids=repr)
def test_transpose_and_symmetries_preserve_validity(D):
    assert verify_od(od_transpose(D))
    rng = np.random.default_rng(D.order)
    perm_r, perm_c = rng.permutation(D.order), rng.permutation(D.order)
    E = negate_variable(permute(D, perm_r, perm_c), 0)
    assert E.type == D.type and verify_od(E)


def test_transpose_of_broken_design_fails():
    c = base_od(2).coeffs.copy()
    c[0, 0, 0] = -1
    bad = OrthogonalDesign(c, (1, 1, 1, 1))
    assert not verify_od(bad)
    assert not verify_od(od_transpose(bad))

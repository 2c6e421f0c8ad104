import json
import random

import pytest
from hypothesis import given, settings, strategies as st

import oracles
from artifact import fatten as F
from artifact.exactlin import GF, ZZ
from artifact.hochschild import (algebra_by_name, algebra_from_json, bcy, bcy_monoidal,
                                 bcy_monoidal_sign, bcy_op, builtin_algebras, c_vec,
                                 chopf_group_model, chopf_poly_model, com_model, dual_numbers,
                                 exterior, group_algebra, hh_ranks, hochschild_complex,
                                 induced_vec_map, theta, theta_perm, truncated_poly)
from artifact.natural import shuffle_nat
from artifact.props import builtin_chopf, builtin_com
from artifact.simplicial import face_map


def acyclic_dga():
    """k<1, a, b> with |a| = 1, d a = b and all products of a, b zero; quasi-isomorphic to k."""
    data = {"name": "cone", "basis": [{"name": "1"}, {"name": "a", "degree": 1}, {"name": "b"}],
            "unit": "1",
            "mult": [["1", "1", [["1", 1]]], ["1", "a", [["a", 1]]], ["a", "1", [["a", 1]]],
                     ["1", "b", [["b", 1]]], ["b", "1", [["b", 1]]]],
            "diff": [["a", [["b", 1]]]]}
    return algebra_from_json(json.dumps(data))


@settings(max_examples=12, deadline=None)
@given(st.sampled_from(sorted(oracles.ORACLE_ALGEBRAS)), st.integers(0, 3))
def test_hh_ranks_match_oracle(name, top):
    h = hh_ranks(algebra_by_name(name), top)
    assert [h[n].rank for n in range(top + 1)] == oracles.hochschild_ranks(name, top)


def test_generic_and_fast_agree():
    for A in (dual_numbers(), exterior(), acyclic_dga()):
        a = hh_ranks(A, 2)
        b = hh_ranks(A, 2, method="generic")
        assert [a[n].rank for n in range(3)] == [b[n].rank for n in range(3)]


def test_catalog_complexes_square_to_zero():
    for A in builtin_algebras().values():
        hochschild_complex(A, 3).check()
        bcy(A, 3, check=True)


def test_ground_and_dual_numbers():
    h = hh_ranks(algebra_by_name("k"), 3)
    assert [h[n].rank for n in range(4)] == [1, 0, 0, 0]
    h = hh_ranks(dual_numbers(), 4)
    assert [h[n].rank for n in range(5)] == [2, 1, 1, 1, 1]


def test_commutative_h0_is_algebra():
    for N in (1, 2, 3):
        assert hh_ranks(truncated_poly(N), 0)[0].rank == N + 1


def test_quasi_isomorphic_to_ground():
    h = hh_ranks(acyclic_dga(), 3)
    assert [h[n].rank for n in range(4)] == [1, 0, 0, 0]


def test_group_algebra_integral_torsion():
    h = hh_ranks(group_algebra(2, ZZ), 3)
    assert [h[n].rank for n in range(4)] == [2, 0, 0, 0]
    assert h[1].torsion == [2, 2] and h[3].torsion == [2, 2]
    assert h[2].torsion == []
    h2 = hh_ranks(group_algebra(2, GF(2)), 3)
    assert [h2[n].rank for n in range(4)] == [2, 2, 2, 2]


def test_top_face_sign():
    # d_2(1 ⊗ x ⊗ x) = (-1)^{|x|(|1| + |x|)} x·1 ⊗ x
    A = exterior()
    assert bcy_op(A, face_map(2, 2), (0, 1, 1)) == {(1, 1): -1}
    assert bcy_op(A, face_map(2, 2), (1, 0, 1)) == {}


def test_monoidal_sign_examples():
    A = exterior()
    assert bcy_monoidal_sign(A, A, (1, 0), (0, 1)) == 1
    assert bcy_monoidal_sign(A, A, (0, 1), (1, 0)) == -1
    D = dual_numbers()
    assert bcy_monoidal_sign(D, D, (1, 1), (1, 1)) == 1


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_monoidal_structure_random(seed):
    rng = random.Random(seed)
    A, B = rng.choice([exterior(), dual_numbers(), acyclic_dga()]), exterior()
    M = bcy_monoidal(A, B, 3)
    p = rng.randint(0, 3)
    a = tuple(rng.choice(A.basis) for _ in range(p + 1))
    b = tuple(rng.choice(B.basis) for _ in range(p + 1))
    assert M.check_simplicial(a, b) and M.check_chain(a, b) and M.check_symmetry(a, b)


def test_theta():
    A = exterior()
    assert theta(A, 1, 2).apply(((0, 1),)) == (1, (0, 1))
    assert theta_perm(2, 2) == {1: 1, 2: 3, 3: 2, 4: 4}
    T = theta(A, 2, 2)
    ys = ((0, 1), (1, 1))
    s, x = T.apply(ys)
    assert x == ((0, 1), (1, 1))
    # y^1_1 passes y^2_0, both odd
    assert s == -1
    assert T.inverse(x) == (s, ys)


def test_c_vec_shapes():
    A = dual_numbers()
    assert len(c_vec(A, (1, 1), 2).basis(0)) == 4
    assert c_vec(A, (1,), 2).basis(1) == [(b,) for b in hochschild_complex(A, 2).basis(1)]
    assert len(c_vec(A, (2,), 1).basis(0)) == 4


def test_identity_word_acts_as_identity():
    M = com_model(dual_numbers())
    a = F.act(F.identity_word(builtin_com(), (1, 2)), M, 2)
    for n in range(3):
        m = a.matrix(n).to_dense()
        assert m == [[int(i == j) for j in range(len(m))] for i in range(len(m))]


def test_shuffle_then_multiply_on_h0():
    M = chopf_poly_model(3)
    P = M.prop
    w = F.word_compose(F.gen_word(P, ["m"]), F.n_word(P, shuffle_nat((1, 1))))
    a = F.act(w, M, 1)
    for x in M.algebra.basis:
        for y in M.algebra.basis:
            lab = (((0, 0), (x,)), ((0, 0), (y,)))
            want = {((((0, 0), (x + y,)),)): 1} if x + y <= 2 else {}
            assert {k: v for k, v in a.apply_label(lab).items() if v} == want


@settings(max_examples=12, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_act_commutes_with_differential(seed):
    P = builtin_chopf()
    M = chopf_group_model(2)
    rng = random.Random(seed)
    w = F.random_word(P, rng, 2, max_len=2)
    D = 2
    lhs = F.act(F.word_differential(w), M, D)
    assert F.act(w, M, D).boundary(range(D + 1)).equals(lhs, range(D + 1))


def test_act_natural_quotient_and_augmentation():
    C = builtin_com()
    A, B = truncated_poly(3), dual_numbers()
    w = F.word_compose(F.gen_word(C, ["m"]), F.n_word(C, shuffle_nat((1, 1))))

    def quotient(x):
        return {x: 1} if x < 2 else {}

    assert F.act_natural(quotient, com_model(A), com_model(B), w, 2)
    assert F.act_natural(lambda x: {x: 1}, com_model(A), com_model(A), w, 2)
    with pytest.raises(ValueError):
        F.act_natural(lambda x: {0: 1}, com_model(A), com_model(B), w, 2)


def test_induced_map_is_chain_map():
    A, B = truncated_poly(3), dual_numbers()
    f = induced_vec_map(lambda x: {x: 1} if x < 2 else {}, A, B, (1, 1), 2)
    assert f.boundary(range(2)).is_zero(range(2))


def test_catalog_models():
    M = chopf_group_model(2)
    assert M.evaluate(M.prop.gen("Delta"), (1,)) == {(1, 1): 1}
    assert M.evaluate(M.prop.gen("S"), (1,)) == {(1,): 1}
    P = chopf_poly_model(3)
    assert {k: v for k, v in P.evaluate(P.prop.gen("Delta"), (1,)).items() if v} \
        == {(0, 1): 1, (1, 0): 1}
    D = dual_numbers()
    assert D.mul(1, 1) == {}
    assert exterior().is_commutative()


def test_algebra_from_json():
    data = {"name": "dn", "basis": [{"name": "1"}, {"name": "e"}], "unit": "1",
            "mult": [["1", "1", [["1", 1]]], ["1", "e", [["e", 1]]], ["e", "1", [["e", 1]]]]}
    A = algebra_from_json(data)
    B = dual_numbers()
    assert all(A.mul(x, y) == B.mul(x, y) for x in A.basis for y in A.basis)
    bad = dict(data, mult=data["mult"] + [["e", "e", [["1", 1]]], ["1", "1", [["e", 1]]]])
    with pytest.raises(ValueError):
        algebra_from_json(bad)

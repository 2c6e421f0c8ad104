import random

import pytest
from hypothesis import given, settings, strategies as st

from artifact.chain import ChainMap
from artifact.exactlin import QQ
from artifact.natural import (NatElement, atom_info, aw_nat, block_perm, blocks,
                              boundary_family, canon_atom, canon_word, compose_nat,
                              contract_check, evaluate, family_equal, is_sigma_perm,
                              nat_boundary, nat_homology, pad_nat, par_nat, par_object,
                              par_target, perm_nat, register_handle, shuffle_nat, tensor_nat)
from artifact.simplicial import compose_maps, induced_map, representable

seeds = st.integers(0, 10 ** 6)
SWAP = perm_nat((1, 1), (1, 0))
ID2 = NatElement.identity((1, 1))
AWSH = compose_nat(aw_nat((1, 1)), shuffle_nat((1, 1)))


def test_vectors_and_blocks():
    assert [tuple(b) for b in blocks((2, 1))] == [(0, 1), (2,)]
    assert par_object((1, 2, 3), (2, 1)) == (3, 3)
    assert par_target((1, 2), (1, 0), (1, 1)) == (2, 1)
    with pytest.raises(ValueError):
        par_object((1, 2), (3,))


def test_block_permutations():
    assert block_perm((1, 2), (2, 0, 1)) == ((2, 1), (1, 0))
    assert block_perm((1, 2), (1, 0, 2)) is None
    assert is_sigma_perm((1, 2), (2, 0, 1))
    assert not is_sigma_perm((1, 2), (2, 1, 0))


def test_atom_info_and_canonical_forms():
    s, t, chi, d = atom_info(("pad", (1,), ("sh", (1, 1)), (2,)))
    assert (s, t, d) == ((1, 1, 1, 2), (1, 2, 2), 0)
    assert canon_atom(("pad", (1,), ("perm", (1, 1), (1, 0)), (2,))) == \
        ("perm", (1, 1, 1, 2), (0, 2, 1, 3, 4))
    w = (("sh", (1, 1)),)
    assert canon_word(canon_word(w)) == canon_word(w)


def test_par_with_unit_vector_is_identity_operation():
    for x in (shuffle_nat((1, 1)), SWAP, AWSH):
        y = par_nat((1,) * sum(x.source), x)
        assert (y.source, y.target, y.chi) == (x.source, x.target, x.chi)


def test_par_of_permutation_moves_the_vector():
    y = par_nat((2, 1), SWAP)
    assert (y.source, y.target) == ((2, 1), (1, 2))


def test_compose_with_identity_and_gradings():
    for x in (SWAP, AWSH, ID2):
        assert compose_nat(x, ID2) == x and compose_nat(ID2, x) == x
    assert compose_nat(SWAP, SWAP).chi == (0, 1)
    with pytest.raises(ValueError):
        compose_nat(shuffle_nat((1, 1)), shuffle_nat((1, 1)))


def test_identity_evaluates_to_identity():
    A = representable(1, 3, QQ)
    f = evaluate(ID2, [A, A])
    assert f.equals(ChainMap.identity(f.source))


def test_aw_after_shuffle_is_identity_symbolically_evaluated():
    A, B = representable(1, 3, QQ), representable(2, 3, QQ)
    f = evaluate(AWSH, [A, B])
    assert f.equals(ChainMap.identity(f.source))


def _elements():
    return [ID2, SWAP, AWSH, compose_nat(SWAP, AWSH), SWAP + compose_nat(SWAP, AWSH), AWSH.scale(3) - ID2]


@settings(max_examples=15, deadline=None)
@given(seeds, st.integers(0, 5))
def test_evaluations_are_natural(seed, which):
    rng = random.Random(seed)
    x = _elements()[which]
    D = 3
    p, q, p2, q2 = (rng.randint(0, 2) for _ in range(4))
    th = tuple(sorted(rng.randint(0, p2) for _ in range(p + 1)))
    ps = tuple(sorted(rng.randint(0, q2) for _ in range(q + 1)))
    A, A2 = representable(p, D, QQ), representable(p2, D, QQ)
    B, B2 = representable(q, D, QQ), representable(q2, D, QQ)
    phi = induced_map(lambda lev, y: {compose_maps(th, y): 1}, A, A2)
    psi = induced_map(lambda lev, y: {compose_maps(ps, y): 1}, B, B2)
    maps = [phi, psi]
    fx, fx2 = evaluate(x, [A, B]), evaluate(x, [A2, B2])

    def slots(f_src, f_tgt, order):
        def fun(lab):
            (u,), (v,) = lab
            m0, m1 = maps[order[0]], maps[order[1]]
            return {((a,), (b,)): c * e for a, c in m0.apply_label(u).items()
                    for b, e in m1.apply_label(v).items()}
        return ChainMap.from_function(f_src, f_tgt, fun)

    # slot maps follow the module order through the permutation χ
    order_in = (0, 1)
    order_out = (0, 1) if x.chi == (0, 1) else (1, 0)
    left = fx2 @ slots(fx.source, fx2.source, order_in)
    right = slots(fx.target, fx2.target, order_out) @ fx
    assert left.equals(right, range(D + 1))


@settings(max_examples=20, deadline=None)
@given(st.lists(st.sampled_from(["swap", "awsh", "pad"]), min_size=1, max_size=4))
def test_boundary_squares_to_zero(ops):
    x = ID2
    for o in ops:
        y = {"swap": SWAP, "awsh": AWSH, "pad": tensor_nat(NatElement.identity((1,)),
                                                            NatElement.identity((1,)))}[o]
        x = compose_nat(y, x)
    assert nat_boundary(nat_boundary(x)).is_zero()
    assert nat_boundary(x).is_zero()


def test_pad_and_tensor():
    x = pad_nat((1,), shuffle_nat((1, 1)), ())
    assert (x.source, x.target) == ((1, 1, 1), (1, 2))
    y = tensor_nat(shuffle_nat((1, 1)), SWAP)
    assert (y.source, y.target) == ((1, 1, 1, 1), (2, 1, 1))


def test_handle_solves_its_boundary():
    cyc = compose_nat(shuffle_nat((1, 1)), aw_nat((1, 1))) - NatElement.identity((2,))
    assert nat_boundary(cyc).is_zero()
    h = register_handle("test_beta", cyc)
    fam = h.family(QQ)
    assert family_equal(boundary_family(fam), cyc.family(QQ), 3)


def test_small_contractibility():
    rep = contract_check(1, 3)
    assert rep["test_degree_bound"] == 4 and rep["bound_kind"] == "heuristic"
    assert rep["ok"] and rep["square"] == {0: 1, 1: 0, 2: 0}
    h, per = nat_homology(QQ, (1, 1), (1, 1), 3, range(0, 2))
    assert h == {0: 2, 1: 0}
    assert set(per) == {(0, 1), (1, 0)}


def test_guard():
    from artifact.natural import GuardExceeded
    with pytest.raises(GuardExceeded):
        contract_check(4, 2)

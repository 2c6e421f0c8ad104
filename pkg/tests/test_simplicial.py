import itertools
import random
from math import comb

from hypothesis import given, settings, strategies as st

from artifact.chain import ChainMap, homology
from artifact.exactlin import GF, QQ
from artifact.hochschild import bcy, dual_numbers, ground
from artifact.simplicial import (aw, aw_map, compose_maps, constant, deg_tensor, degen_map,
                                 face_map, from_complex, induced_map, monotone_maps, n_delta,
                                 normalize, representable, shuffle, shuffle_map, solve_homotopy,
                                 word_map)
from artifact.verify import random_complex

import oracles

seeds = st.integers(0, 10 ** 6)


def ranks(C):
    return {n: h.rank for n, h in homology(C).items()}


def test_cosimplicial_identities():
    for p in range(1, 5):
        for i in range(p + 1):
            for j in range(i + 1, p + 1):
                # δ_j δ_i = δ_i δ_{j-1}
                assert compose_maps(face_map(p, j), face_map(p - 1, i)) == \
                    compose_maps(face_map(p, i), face_map(p - 1, j - 1))
        for i in range(p + 1):
            assert compose_maps(degen_map(p, i), face_map(p + 1, i)) == tuple(range(p + 1))
            assert compose_maps(degen_map(p, i), face_map(p + 1, i + 1)) == tuple(range(p + 1))


def test_word_map_is_composite_of_cofaces():
    # the operator d_0 d_1 on level 3 pulls back along δ_1 ∘ δ_0
    assert word_map("d", (0, 1), 3) == compose_maps(face_map(3, 1), face_map(2, 0))
    assert word_map("s", (0,), 1) == degen_map(1, 0)


def test_representable_checks_and_normalized_ranks():
    for p in range(4):
        R = representable(p, 4, QQ)
        R.check()
        N = normalize(R)
        assert [N.dim(q) for q in range(5)] == [comb(p + 1, q + 1) for q in range(5)]
        h = ranks(N)
        assert h[0] == 1 and all(h[q] == 0 for q in range(1, 4))


def test_constant_normalizes_to_point():
    N = normalize(constant(QQ, 3))
    assert [N.dim(q) for q in range(4)] == [1, 0, 0, 0]
    assert representable(0, 3, QQ).ranks() == constant(QQ, 3).ranks()


def test_tensor_with_constant_and_rank_products():
    rng = random.Random(2)
    A = from_complex(random_complex(rng, QQ), 3)
    B = from_complex(random_complex(rng, QQ), 3)
    T = deg_tensor(A, B)
    assert list(T.ranks()) == [a * b for a, b in zip(A.ranks(), B.ranks())]
    K = deg_tensor(A, constant(QQ, 3))
    assert list(K.ranks()) == list(A.ranks())
    assert [normalize(K).dim(q) for q in range(4)] == [normalize(A).dim(q) for q in range(4)]


def test_shuffle_terms_match_oracle():
    assert shuffle(0, 0) == [(1, (), ())]
    for p in range(4):
        for q in range(4):
            terms = shuffle(p, q)
            assert len(terms) == comb(p + q, p)
            want = {tuple(sorted(perm[:p])): s for s, perm in oracles.shuffles(p, q)}
            for s, left, right in terms:
                first = tuple(sorted(x for x in right))
                assert want[first] == s


def test_aw_terms():
    assert aw(0) == [((), ())]
    assert len(aw(3)) == 4


@settings(max_examples=12, deadline=None)
@given(seeds, st.sampled_from([0, 3]))
def test_aw_sh_identity_and_chain_maps(seed, p):
    ring = GF(p) if p else QQ
    rng = random.Random(seed)
    A = from_complex(random_complex(rng, ring), 3)
    B = from_complex(random_complex(rng, ring), 3)
    A.check()
    sh, a = shuffle_map(A, B), aw_map(A, B)
    assert sh.is_chain_map() and a.is_chain_map()
    assert (a @ sh).equals(ChainMap.identity(sh.source))


@settings(max_examples=10, deadline=None)
@given(seeds)
def test_from_complex_recovers_complex(seed):
    C = random_complex(random.Random(seed), QQ)
    M = from_complex(C, 4)
    M.check()
    N = normalize(M)
    assert [N.dim(n) for n in range(4)] == [C.dim(n) for n in range(4)]
    assert {n: r for n, r in ranks(N).items() if n < 3} == \
        {n: r for n, r in ranks(C).items() if n < 3}


def _mono(p, p2, rng):
    return tuple(sorted(rng.choice(range(p2 + 1)) for _ in range(p + 1)))


@settings(max_examples=10, deadline=None)
@given(seeds)
def test_shuffle_and_aw_natural(seed):
    rng = random.Random(seed)
    D = 3
    p, q = rng.randint(0, 2), rng.randint(0, 2)
    p2, q2 = rng.randint(0, 2), rng.randint(0, 2)
    th, ps = _mono(p, p2, rng), _mono(q, q2, rng)
    A, A2 = representable(p, D, QQ), representable(p2, D, QQ)
    B, B2 = representable(q, D, QQ), representable(q2, D, QQ)
    phi = induced_map(lambda lev, x: {compose_maps(th, x): 1}, A, A2)
    psi = induced_map(lambda lev, x: {compose_maps(ps, x): 1}, B, B2)
    both = induced_map(lambda lev, x: {(compose_maps(th, x[0]), compose_maps(ps, x[1])): 1},
                       deg_tensor(A, B), deg_tensor(A2, B2))
    sh, sh2 = shuffle_map(A, B), shuffle_map(A2, B2)
    a, a2 = aw_map(A, B), aw_map(A2, B2)
    def on_blocks(lab):
        (x,), (y,) = lab
        return {((u,), (v,)): c * e for u, c in phi.apply_label(x).items()
                for v, e in psi.apply_label(y).items()}

    pp = ChainMap.from_function(sh.source, sh2.source, on_blocks)
    window = range(0, D + 1)
    assert (sh2 @ pp).equals(both @ sh, window)
    assert (a2 @ both).equals(pp @ a, window)


def test_homotopy_trivial_case():
    A = representable(1, 3, QQ)
    f = ChainMap.identity(normalize(A))
    h = solve_homotopy(f, f)
    assert h is not None and h.verify()
    assert all(h.matrix(n).is_zero() for n in f.source.degrees)


def test_homotopy_sh_aw_small():
    A, B = representable(1, 3, QQ), representable(1, 3, QQ)
    f = shuffle_map(A, B) @ aw_map(A, B)
    h = solve_homotopy(ChainMap.identity(f.source), f, (0, 2))
    assert h is not None and h.verify()


def test_n_delta_of_ground_field():
    C = n_delta(bcy(ground(QQ), 3))
    assert [C.dim(n) for n in range(4)] == [1, 0, 0, 0]


def test_n_delta_dims_of_dual_numbers():
    C = n_delta(bcy(dual_numbers(QQ), 4))
    dim, unit, _ = oracles.ORACLE_ALGEBRAS["dual-numbers"]
    want = [len(oracles._chains(dim, unit, n)) for n in range(5)]
    assert [C.dim(n) for n in range(5)] == want


def test_monotone_maps_count():
    for q, p in itertools.product(range(4), range(4)):
        assert len(monotone_maps(q, p)) == comb(p + q + 1, q + 1)

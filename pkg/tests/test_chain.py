import itertools
import random

from hypothesis import given, settings, strategies as st

from artifact.chain import (ChainMap, Factor, blowup, complex_from_function, homology,
                            product_multicomplex, reorder, reorder_sign, tensor, tensor_many,
                            totalize, twist, zeta, zeta_sign)
from artifact.exactlin import GF, QQ
from artifact.verify import random_complex

seeds = st.integers(0, 10 ** 6)
perms = st.integers(1, 4).flatmap(lambda n: st.permutations(list(range(n))))


def point(ring=QQ):
    return complex_from_function(ring, {0: ["x"]}, lambda b: {})


def disc(ring=QQ):
    return complex_from_function(ring, {0: ["y"], 1: ["x"]}, lambda b: {"y": 1} if b == "x" else {})


def ranks(C):
    return {n: h.rank for n, h in homology(C).items()}


def test_point_and_disc():
    assert ranks(point()) == {0: 1}
    assert ranks(disc()) == {0: 0, 1: 0}


def test_single_factor_tensor_is_identity_relabelled():
    C = random_complex(random.Random(0), QQ)
    T = tensor_many([C])
    assert T.dims() == C.dims()
    for n in C.degrees:
        assert T.d(n).to_dense() == C.d(n).to_dense()


def test_identity_reorder_sign():
    assert reorder_sign((0, 1, 2), (1, 3, 5)) == 1
    assert reorder_sign((1, 0), (1, 1)) == -1
    assert zeta_sign((1, 1), (1, 0)) == -1


@settings(max_examples=25, deadline=None)
@given(seeds, st.sampled_from([0, 3]))
def test_tensor_d_squared_and_kunneth(seed, p):
    ring = GF(p) if p else QQ
    rng = random.Random(seed)
    A, B = random_complex(rng, ring), random_complex(rng, ring)
    T = tensor(A, B)
    T.check()
    ha, hb, ht = ranks(A), ranks(B), ranks(T)
    for n in T.degrees:
        assert ht[n] == sum(ha.get(i, 0) * hb.get(n - i, 0) for i in A.degrees)


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_tensor_associative_on_labels(seed):
    rng = random.Random(seed)
    A, B, C = (random_complex(rng, QQ, top=2) for _ in range(3))
    flat = tensor_many([A, B, C])
    left = tensor(tensor(A, B), C)
    for n in flat.degrees:
        for lab in flat.basis(n):
            a, b, c = lab
            img = {(x[0][0], x[0][1], x[1]): v
                   for x, v in left.d_label(((a, b), c)).items()}
            assert {k: v for k, v in img.items() if v} == \
                {k: v for k, v in flat.d_label(lab).items() if v}


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_twist_is_chain_map_and_involution(seed):
    rng = random.Random(seed)
    A, B = random_complex(rng, QQ), random_complex(rng, QQ)
    t, u = twist(A, B), twist(B, A)
    assert t.is_chain_map() and u.is_chain_map()
    assert (u @ t).equals(ChainMap.identity(t.source))


def test_truncated_tensor_agrees_below_bound():
    rng = random.Random(3)
    A, B = random_complex(rng, QQ), random_complex(rng, QQ)
    full, cut = tensor_many([A, B]), tensor_many([A, B], max_degree=3)
    for n in range(cut.window[0], 4):
        assert full.basis(n) == cut.basis(n)
        assert full.d(n).to_dense() == cut.d(n).to_dense()


@settings(max_examples=50, deadline=None)
@given(perms.flatmap(lambda c: st.tuples(st.just(tuple(c)), st.permutations(list(range(len(c)))),
                                         st.lists(st.integers(0, 3), min_size=len(c),
                                                  max_size=len(c)))))
def test_reorder_sign_composition(data):
    chi, chi2, degs = data
    chi2 = tuple(chi2)
    moved = [0] * len(chi)
    for i, p in enumerate(degs):
        moved[chi[i]] = p
    comp = tuple(chi2[chi[i]] for i in range(len(chi)))
    assert reorder_sign(comp, degs) == reorder_sign(chi, degs) * reorder_sign(chi2, moved)


def _blowup_oracle(chi, degrees):
    # points of slot i listed in order, then slots placed in the order chi
    blocks, start = [], 0
    for p in degrees:
        blocks.append(list(range(start, start + p)))
        start += p
    order = sorted(range(len(chi)), key=lambda i: chi[i])
    pos, out = 0, {}
    for i in order:
        for t in blocks[i]:
            out[t] = pos
            pos += 1
    return tuple(out[t] for t in range(start))


@settings(max_examples=50, deadline=None)
@given(perms.flatmap(lambda c: st.tuples(st.just(tuple(c)), st.lists(
    st.integers(0, 3), min_size=len(c), max_size=len(c)))))
def test_blowup_matches_oracle(data):
    chi, degs = data
    assert blowup(chi, degs) == _blowup_oracle(chi, degs)


@settings(max_examples=15, deadline=None)
@given(seeds, st.permutations([0, 1, 2]))
def test_reorder_gives_chain_isomorphism(seed, chi):
    rng = random.Random(seed)
    M = product_multicomplex([random_complex(rng, QQ, top=2) for _ in range(3)])
    M.check()
    T = totalize(M)
    T.check()
    N, g = reorder(M, tuple(chi))
    N.check()
    assert g.is_chain_map()
    assert ranks(T) == ranks(totalize(N))


@settings(max_examples=10, deadline=None)
@given(seeds)
def test_zeta_is_chain_isomorphism(seed):
    rng = random.Random(seed)
    facs = [Factor(product_multicomplex([random_complex(rng, QQ, top=1),
                                         random_complex(rng, QQ, top=1)]), nq=1)
            for _ in range(2)]
    M, z = zeta(facs)
    M.check()
    assert z.is_chain_map()
    for n in z.source.degrees:
        assert z.source.dim(n) == z.target.dim(n)
        m = z.matrix(n).to_dense()
        # a signed permutation matrix
        assert all(sum(abs(x) for x in row) == 1 for row in m)


def test_discs_tensor_acyclic():
    T = tensor_many([disc(), point(), disc()])
    assert all(r == 0 for r in ranks(T).values())
    assert list(itertools.chain.from_iterable(T.basis(n) for n in T.degrees))

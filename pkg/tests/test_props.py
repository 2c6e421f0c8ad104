import itertools
import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from artifact.hochschild import (algebra_from_json, ass_model, chopf_group_model,
                                 chopf_poly_model, exterior, odd_model)
from artifact.props import (PMor, PTensorMor, PropMorphism, ass_to_com, builtin_ass,
                            builtin_odd, builtin_props, compose_diagrams, composite,
                            compose_ptensor, equal, evaluate_pmor, identity_morphism,
                            par_mor, prop_by_name, prop_from_json, rewrites,
                            tensor_ptensor, to_pmor, twist)

ODD = builtin_odd()
EXT = exterior()


def h_map(x):
    # a degree one h on the exterior algebra; d = 0 and A is graded commutative
    return {(1,): 1} if x == (0, 0) else {}


ODD_MODEL = odd_model(EXT, h_map)


def ev(f, x):
    return {k: v for k, v in evaluate_pmor(f, ODD_MODEL.gen_map, EXT.deg, x).items() if v}


def tdeg(x):
    return sum(EXT.deg(y) for y in x)


def ev_compose(g, f, x):
    out = {}
    for y, a in ev(f, x).items():
        for z, b in ev(g, y).items():
            out[z] = out.get(z, 0) + a * b
    return {k: v for k, v in out.items() if v}


def ev_tensor(f, g, x):
    """Koszul rule: (f ⊗ g)(x ⊗ y) = (-1)^{|g||x|} f(x) ⊗ g(y)."""
    xa, xb = x[:f.n_in], x[f.n_in:]
    s = -1 if (g.degree * tdeg(xa)) % 2 else 1
    out = {}
    for y, a in ev(f, xa).items():
        for z, b in ev(g, xb).items():
            out[y + z] = out.get(y + z, 0) + s * a * b
    return {k: v for k, v in out.items() if v}


TOKENS = {"id": (1, 1), "swap": (2, 2), "m": (2, 1), "h": (2, 1)}


def random_mor(rng, n, layers):
    """A random composite of the odd prop starting at arity n."""
    seq, cur = [], n
    for _ in range(layers):
        layer, left = [], cur
        while left:
            opts = [t for t, (a, _) in TOKENS.items() if a <= left]
            t = rng.choice(opts)
            layer.append(t)
            left -= TOKENS[t][0]
        seq.append(layer)
        cur = sum(TOKENS[t][1] for t in layer)
    return composite(ODD, seq) if seq else PMor.identity(n)


def inputs(n):
    return list(itertools.product(EXT.basis, repeat=n))


seeds = st.integers(0, 10 ** 6)


def test_odd_model_is_valid():
    assert ODD_MODEL.check()
    assert ODD.d(ODD.gen("h")) == ODD.gen("m") - composite(ODD, [["swap"], ["m"]])


def test_interchange_sign_of_odd_generators():
    h, i = ODD.gen("h"), PMor.identity(1)
    a = h.tensor(i) @ PMor.identity(2).tensor(h)
    b = (i.tensor(h)) @ (h.tensor(PMor.identity(2)))
    assert a == b.scale(-1)
    for x in inputs(4):
        assert ev(a, x) == ev_compose(h.tensor(i), PMor.identity(2).tensor(h), x)


def test_canonical_form_ignores_construction_order():
    m, i = ODD.gen("m"), PMor.identity(1)
    a = m.tensor(i) @ PMor.identity(2).tensor(m)
    b = i.tensor(m) @ m.tensor(PMor.identity(2))
    assert a == b
    assert len(a.terms) == 1


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_composition_associative_and_unital(seed):
    rng = random.Random(seed)
    f = random_mor(rng, rng.randint(1, 3), rng.randint(0, 2))
    g = random_mor(rng, f.n_out, rng.randint(0, 2))
    h = random_mor(rng, g.n_out, rng.randint(0, 2))
    assert (h @ g) @ f == h @ (g @ f)
    assert PMor.identity(f.n_out) @ f == f
    assert f @ PMor.identity(f.n_in) == f


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_tensor_bifunctor_sign(seed):
    rng = random.Random(seed)
    f2 = random_mor(rng, rng.randint(1, 2), 1)
    f1 = random_mor(rng, f2.n_out, 1)
    g2 = random_mor(rng, rng.randint(1, 2), 1)
    g1 = random_mor(rng, g2.n_out, 1)
    s = -1 if (g1.degree * f2.degree) % 2 else 1
    assert f1.tensor(g1) @ f2.tensor(g2) == (f1 @ f2).tensor(g1 @ g2).scale(s)
    assert f1.tensor(g1).tensor(f2) == f1.tensor(g1.tensor(f2))


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_evaluation_is_a_functor(seed):
    rng = random.Random(seed)
    f = random_mor(rng, rng.randint(1, 3), rng.randint(1, 2))
    g = random_mor(rng, f.n_out, rng.randint(1, 2))
    for x in inputs(f.n_in):
        assert ev(g @ f, x) == ev_compose(g, f, x)
    u = random_mor(rng, rng.randint(1, 2), 1)
    for x in inputs(f.n_in + u.n_in):
        assert ev(f.tensor(u), x) == ev_tensor(f, u, x)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_differential_is_a_derivation(seed):
    rng = random.Random(seed)
    f = random_mor(rng, rng.randint(1, 3), rng.randint(1, 2))
    g = random_mor(rng, f.n_out, rng.randint(1, 2))
    s = -1 if g.degree % 2 else 1
    assert ODD.d(g @ f) == ODD.d(g) @ f + (g @ ODD.d(f)).scale(s)
    assert ODD.d(ODD.d(g @ f)).is_zero()


def test_builtin_props_square_to_zero():
    for name, P in builtin_props().items():
        assert P.check()
        assert prop_by_name(name).name == P.name


def test_multi_edge_diagram_evaluates():
    # m ∘ Δ has two edges between the same nodes
    M = chopf_group_model(2)
    P = M.prop
    f = P.gen("m") @ P.gen("Delta")
    assert M.evaluate(f, (1,)) == {(0,): 1}
    assert M.evaluate(f, (0,)) == {(0,): 1}
    _, d = compose_diagrams(next(iter(P.gen("m").terms)), next(iter(P.gen("Delta").terms)))
    assert len(d.nodes) == 2


def test_chopf_models_satisfy_relations():
    for M in (chopf_group_model(2), chopf_group_model(3), chopf_poly_model(3)):
        assert M.check()


def test_relations_are_provable():
    for P in builtin_props().values():
        for lhs, rhs in P.relations:
            assert equal(P, lhs, rhs) == "equal"


def test_noncommutative_probe_separates():
    # upper triangular 2x2 matrices with basis 1, a = e11, b = e12
    data = {"name": "T2", "basis": [{"name": "1"}, {"name": "a"}, {"name": "b"}],
            "unit": "1",
            "mult": [["1", "1", [["1", 1]]], ["1", "a", [["a", 1]]], ["a", "1", [["a", 1]]],
                     ["1", "b", [["b", 1]]], ["b", "1", [["b", 1]]],
                     ["a", "a", [["a", 1]]], ["a", "b", [["b", 1]]]]}
    A = algebra_from_json(json.dumps(data))
    assert not A.is_commutative()
    M = ass_model(A)
    P = builtin_ass()
    m, mt = P.gen("m"), composite(P, [["swap"], ["m"]])
    assert equal(P, m, mt, probes=[M]) == "distinct"
    assert equal(P, m, mt) == "unknown"


def test_rewrites_apply_relations():
    P = builtin_ass()
    lhs = composite(P, [["m", "id"], ["m"]])
    rhs = composite(P, [["id", "m"], ["m"]])
    assert rhs in rewrites(P, lhs)


def test_prop_from_json_matches_builtin():
    data = {"name": "odd", "generators": [
        {"name": "m", "in": 2, "out": 1},
        {"name": "h", "in": 2, "out": 1, "degree": 1,
         "diff": [[1, [["m"]]], [-1, [["swap"], ["m"]]]]}]}
    P = prop_from_json(json.dumps(data))
    assert P.d(P.gen("h")) == ODD.d(ODD.gen("h"))
    assert P.check()


def test_prop_morphisms():
    g = ass_to_com()
    assert g.check()
    assert identity_morphism(ODD).check()
    P = g.source
    assoc = composite(P, [["m", "id"], ["m"]])
    assert g(assoc) == composite(g.target, [["m", "id"], ["m"]])
    with pytest.raises(ValueError):
        PropMorphism(P, g.target, {"m": PMor.identity(1), "eta": g.target.gen("eta")})


def test_twist_involution_and_identity():
    t = twist((1,), (2,))
    back = twist((2,), (1,))
    assert compose_ptensor(back, t) == PTensorMor.identity((1, 2))
    assert to_pmor(twist((1,), (1,))) == PMor.perm((1, 0))
    f = PTensorMor.elementary([ODD.gen("h"), ODD.gen("m")])
    assert compose_ptensor(PTensorMor.identity(f.target), f) == f
    assert compose_ptensor(f, PTensorMor.identity(f.source)) == f


def random_ptensor(rng, source):
    mors = [random_mor(rng, a, rng.randint(0, 1)) for a in source]
    sigma = list(range(len(source)))
    rng.shuffle(sigma)
    return PTensorMor.elementary(mors, sigma)


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_ptensor_composition_associative_and_f_functor(seed):
    rng = random.Random(seed)
    src = tuple(rng.randint(1, 2) for _ in range(rng.randint(1, 3)))
    f = random_ptensor(rng, src)
    g = random_ptensor(rng, f.target)
    h = random_ptensor(rng, g.target)
    assert compose_ptensor(h, compose_ptensor(g, f)) == compose_ptensor(compose_ptensor(h, g), f)
    assert to_pmor(compose_ptensor(g, f)) == to_pmor(g) @ to_pmor(f)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_f_is_monoidal(seed):
    rng = random.Random(seed)
    f = random_ptensor(rng, (rng.randint(1, 2),))
    g = random_ptensor(rng, (rng.randint(1, 2), rng.randint(1, 2)))
    assert to_pmor(tensor_ptensor(f, g)) == to_pmor(f).tensor(to_pmor(g))


def test_par_mor_examples():
    m, h, i1 = ODD.gen("m"), ODD.gen("h"), PMor.identity(1)
    f = PTensorMor.elementary([i1, m, h, m])
    g = par_mor(f, (1, 3))
    assert g.source == (1, 6) and g.target == (1, 3)
    assert g == PTensorMor.elementary([i1, m.tensor(h).tensor(m)])
    assert par_mor(f, (1, 1, 1, 1)) == f
    bad = PTensorMor.elementary([m, h, i1], (1, 0, 2))
    with pytest.raises(ValueError):
        par_mor(bad, (2, 1))


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_par_mor_respects_composition(seed):
    rng = random.Random(seed)
    src = tuple(rng.randint(1, 2) for _ in range(4))
    a = rng.choice([(1, 3), (2, 2), (3, 1), (4,), (1, 1, 2)])
    f = PTensorMor.elementary([random_mor(rng, x, 1) for x in src])
    g = PTensorMor.elementary([random_mor(rng, x, 1) for x in f.target])
    assert compose_ptensor(par_mor(g, a), par_mor(f, a)) == par_mor(compose_ptensor(g, f), a)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_twist_is_natural(seed):
    rng = random.Random(seed)
    f = random_ptensor(rng, (rng.randint(1, 2),))
    g = random_ptensor(rng, (rng.randint(1, 2),))
    s = -1 if (f.degree * g.degree) % 2 else 1
    lhs = compose_ptensor(twist(f.target, g.target), tensor_ptensor(f, g))
    rhs = compose_ptensor(tensor_ptensor(g, f), twist(f.source, g.source))
    assert lhs == rhs.scale(s)

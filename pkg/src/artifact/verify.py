"""Verification suites driven by the command line.

Each check returns a record {"check", "params", "verdict", "detail"} with
verdict "pass", "fail" or "skipped".  Records are deterministic given the
configuration and seed; timings are added only on request.
"""
import random
import time
from dataclasses import dataclass, field

from .chain import ChainMap, complex_from_function
from .exactlin import ring_from_name


@dataclass
class RunConfig:
    ring: str = "q"
    max_degree: int = 3
    word_bound: int = 4
    seed: int = 0
    count: int = 4
    guard: bool = True
    timings: bool = False
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        ring_from_name(self.ring)
        if self.max_degree < 0 or self.word_bound < 0:
            raise ValueError("max-degree and word-bound must be >= 0")

    @property
    def field(self):
        return ring_from_name(self.ring)


def random_complex(rng, ring, top=3, max_rank=2):
    """A random free complex in degrees 0..top built from discs and points."""
    basis = {d: [] for d in range(top + 1)}
    diff = {}
    k = 0
    for d in range(top + 1):
        for _ in range(rng.randint(0, max_rank)):
            k += 1
            if d > 0 and rng.random() < 0.5 and len(basis[d - 1]) < max_rank + 1:
                hi, lo = f"e{k}", f"f{k}"
                basis[d].append(hi)
                basis[d - 1].append(lo)
                diff[hi] = {lo: rng.choice([1, 2, -1])}
            else:
                basis[d].append(f"p{k}")
    return complex_from_function(ring, basis, lambda b: diff.get(b, {}))


def _record(name, params, ok, detail=None):
    return {"check": name, "params": params, "verdict": "pass" if ok else "fail",
            "detail": detail or {}}


# ---------------------------------------------------------------------------
# dold-kan

def suite_dold_kan(cfg):
    from .simplicial import (from_complex, shuffle_map, aw_map, shuffle_vec, aw_vec,
                             nvec_complex, representable, solve_homotopy)
    rng = random.Random(cfg.seed)
    ring = cfg.field
    D = cfg.max_degree
    out = []
    ok_inv = ok_chain = ok_sym = True
    for _ in range(cfg.count):
        A = from_complex(random_complex(rng, ring), D)
        B = from_complex(random_complex(rng, ring), D)
        sh, awm = shuffle_map(A, B), aw_map(A, B)
        ok_chain &= sh.is_chain_map() and awm.is_chain_map()
        ok_inv &= (awm @ sh).equals(ChainMap.identity(sh.source))
        ok_sym &= shuffle_symmetric(A, B, nvec_complex)
    params = {"modules": 2 * cfg.count, "ring": cfg.ring, "D": D}
    out.append(_record("AW∘sh = id", params, ok_inv))
    out.append(_record("sh and AW are chain maps", params, ok_chain))
    out.append(_record("shuffle graded symmetry", params, ok_sym))
    ok_assoc = True
    for _ in range(max(1, cfg.count // 2)):
        mods = [from_complex(random_complex(rng, ring, top=2), min(D, 3)) for _ in range(3)]
        s0 = shuffle_vec((1, 1, 1), mods)
        a0 = aw_vec((1, 1, 1), mods)
        for br in ("left", "right"):
            ok_assoc &= s0.equals(shuffle_vec((1, 1, 1), mods, br))
            ok_assoc &= a0.equals(aw_vec((1, 1, 1), mods, br))
    out.append(_record("shuffle and AW associativity", {"triples": max(1, cfg.count // 2)},
                       ok_assoc))
    top = min(D, 3)
    ok_h = True
    for p in range(top + 1):
        for q in range(top + 1 - p):
            A, B = representable(p, p + q + 1, ring), representable(q, p + q + 1, ring)
            f = shuffle_map(A, B) @ aw_map(A, B)
            h = solve_homotopy(ChainMap.identity(f.source), f, (0, p + q))
            ok_h &= h is not None and h.verify()
    out.append(_record("sh∘AW ≃ id on k[Δ^p]⊗̂k[Δ^q]", {"max_p_plus_q": top}, ok_h))
    return out


def shuffle_symmetric(A, B, nvec_complex):
    """sh_{B,A}(y ⊗ x) (-1)^{|x||y|} equals the swapped sh_{A,B}(x ⊗ y)."""
    from .simplicial import shuffle_map
    sAB, sBA = shuffle_map(A, B), shuffle_map(B, A)
    red = A.ring.red
    _, _, norms = nvec_complex((1, 1), [A, B])
    NA, NB = norms[0].complex, norms[1].complex
    for n in sAB.source.degrees:
        for lab in sAB.source.basis(n):
            x, y = lab
            s = -1 if (NA.degree_of(x) * NB.degree_of(y)) % 2 else 1
            lhs = {(b[1], b[0]): red(c) for b, c in sAB.apply_label(lab).items()}
            rhs = {b: red(s * c) for b, c in sBA.apply_label((y, x)).items()}
            if {k: v for k, v in lhs.items() if v} != {k: v for k, v in rhs.items() if v}:
                return False
    return True


# ---------------------------------------------------------------------------
# cyclic bar construction and Hochschild complexes

def suite_bcy(cfg):
    from .hochschild import (bcy, builtin_algebras, hochschild_complex, bcy_monoidal,
                             hh_ranks, exterior, dual_numbers)
    ring = cfg.field
    D = cfg.max_degree
    rng = random.Random(cfg.seed)
    out = []
    algs = builtin_algebras(ring)
    for name, A in algs.items():
        try:
            bcy(A, D, check=True)
            C = hochschild_complex(A, D)
            C.check()
            ok = True
        except (ValueError, AssertionError):
            ok = False
        out.append(_record("B^cy simplicial identities and d² = 0", {"algebra": name, "D": D},
                           ok))
    pairs = [(exterior(ring), exterior(ring)), (dual_numbers(ring), exterior(ring))]
    for A, B in pairs:
        M = bcy_monoidal(A, B, min(D, 3))
        ok = True
        for _ in range(10 * cfg.count):
            p = rng.randint(0, min(D, 3))
            a = tuple(rng.choice(A.basis) for _ in range(p + 1))
            b = tuple(rng.choice(B.basis) for _ in range(p + 1))
            ok &= M.check_simplicial(a, b) and M.check_chain(a, b) and M.check_symmetry(a, b)
        out.append(_record("B^cy symmetric monoidal", {"pair": f"{A.name},{B.name}"}, ok))
    top = min(D, 3)
    for name in ("k", "dual-numbers", "group:2", "poly:3"):
        A = algs[name]
        fast = hh_ranks(A, top)
        gen = hh_ranks(A, top, method="generic")
        ok = all(fast[n] == gen[n] for n in fast)
        out.append(_record("HH fast = generic", {"algebra": name, "D": top}, ok,
                           {"ranks": [fast[n].rank for n in sorted(fast)]}))
    return out


# ---------------------------------------------------------------------------
# natural transformations

def suite_natural(cfg):
    from .natural import contract_check, shuffle_nat, aw_nat, GuardExceeded
    from .hochschild import act_family, dual_numbers, c_vec
    out = []
    D = min(cfg.max_degree, 3)
    for n in (1, 2):
        try:
            rep = contract_check(n, D, guard=cfg.guard)
            out.append(_record("Ñ^Σ contracts to kΣ_n", {"n": n, "D": D}, rep["ok"],
                               {"H": {str(k): v for k, v in rep["square"].items()},
                                "test_degree_bound": f"{rep['test_degree_bound']} (heuristic)"}))
        except GuardExceeded:
            out.append({"check": "Ñ^Σ contracts to kΣ_n", "params": {"n": n, "D": D},
                        "verdict": "skipped", "detail": {"reason": "guard"}})
    A = dual_numbers(cfg.field)
    sh = act_family(shuffle_nat((1, 1)).family(cfg.field), A, D)
    aw = act_family(aw_nat((1, 1)).family(cfg.field), A, D)
    ok = sh.is_chain_map(range(0, D)) and aw.is_chain_map(range(0, D)) and \
        (aw @ sh).equals(ChainMap.identity(c_vec(A, (1, 1), D)), range(0, D + 1))
    out.append(_record("Ñ^Σ acts on C^{(1,1)}(dual numbers)", {"D": D}, ok))
    return out


# ---------------------------------------------------------------------------
# words

def suite_fatten(cfg):
    from . import fatten as F
    from .props import builtin_chopf, builtin_trivial
    from .hochschild import chopf_group_model
    from .natural import shuffle_nat, aw_nat
    P = builtin_chopf()
    rng = random.Random(cfg.seed)
    out = []
    ok_red = ok_d2 = True
    words = [F.random_word(P, rng, rng.randint(1, cfg.word_bound)) for _ in range(25 * cfg.count)]
    for w in words:
        for word in w.terms:
            r = F.reduce_word(word)
            ok_red &= r == F.reduce_word(word, absorb="left")
            ok_red &= all(F.reduce_word(x) == {x: 1} for x in r)
        ok_d2 &= F.word_differential(F.word_differential(w)).is_zero()
    out.append(_record("reduce idempotent and confluent", {"words": len(words)}, ok_red))
    out.append(_record("d² = 0 on words", {"words": len(words)}, ok_d2))
    ok_f = True
    for _ in range(5 * cfg.count):
        v = F.random_word(P, rng, 2, handles=False)
        w = F.random_word(P, rng, 2, handles=False)
        ok_f &= F.projection_F(F.word_tensor(v, w)) == \
            F.projection_F(v).tensor(F.projection_F(w))
    out.append(_record("F symmetric monoidal", {"pairs": 5 * cfg.count}, ok_f))
    ok_fa = True
    for name, g in P.generators.items():
        f = P.gen(name)
        ok_fa &= F.projection_F(F.section_A(P, f, (1,) * g.n_in, (1,) * g.n_out)) == f
    out.append(_record("F∘A = id on generators", {"prop": P.name}, ok_fa))
    M = chopf_group_model(2, cfg.field)
    D = min(cfg.max_degree, 2)
    leg1 = F.word_compose(F.n_word(P, shuffle_nat((2, 1))), F.gen_word(P, ["Delta", "m"]))
    f12 = F.p_word(P, F.PTensorMor.elementary([P.gen("Delta").tensor(P.gen("m"))]))
    leg2 = F.word_compose(f12, F.n_word(P, shuffle_nat((1, 2))))
    v = F.observational_equal(leg1, leg2, [M], D)
    out.append(_record("partition square", {"D": D}, v == "equal", {"verdict": str(v)}))
    a = F.pad_word(F.gen_word(P, ["Delta"]), (), (2,))
    b = F.pad_word(F.n_word(P, aw_nat((1, 1))), (2,), ())
    b0 = F.pad_word(F.n_word(P, aw_nat((1, 1))), (1,), ())
    a1 = F.pad_word(F.gen_word(P, ["Delta"]), (), (1, 1))
    v = F.observational_equal(F.word_compose(b, a), F.word_compose(a1, b0), [M], D)
    out.append(_record("interchange square", {"D": D}, v == "equal", {"verdict": str(v)}))
    rep = F.tilde_hom(builtin_trivial(), 1, 1, L=cfg.word_bound, degree=2, ring=cfg.field)
    ok = rep["homology"] == {0: 1, 1: 0, 2: 0}
    out.append(_record("Hom_{P̃}((1),(1)) ≃ k for the trivial prop", {"L": cfg.word_bound}, ok,
                       {"homology": {str(k): v for k, v in rep["homology"].items()}}))
    return out


# ---------------------------------------------------------------------------
# commutative Hopf algebras

def suite_chopf(cfg):
    from . import fatten as F
    from .props import builtin_chopf
    from .hochschild import chopf_group_model, augmentation
    from .natural import aw_nat
    P = builtin_chopf()
    D = cfg.max_degree
    out = []
    M = chopf_group_model(2, cfg.field)
    M.check()
    out.append(_record("CHopf relations on k[C_2]", {}, True))
    th, lower, upper = F.bialgebra_words(P)
    a = F.act(th, M, D)
    ok = a.boundary().equals(F.act(lower, M, D) - F.act(upper, M, D), range(0, D + 1))
    out.append(_record("bialgebra homotopy θ", {"D": D, "algebra": "group:2"}, ok))
    K = chopf_group_model(1, cfg.field)
    w = F.word_compose(F.n_word(P, aw_nat((1, 1))), F.gen_word(P, ["Delta"]))
    ok = F.act_natural(augmentation(2), M, K, w, D)
    out.append(_record("naturality along the augmentation", {"word": F.describe(w)}, ok))
    return out


SUITES = {
    "dold-kan": suite_dold_kan,
    "bcy": suite_bcy,
    "natural": suite_natural,
    "fatten": suite_fatten,
    "chopf": suite_chopf,
}


def run_suite(name, cfg):
    """Run one suite (or "all"); returns (records, seconds per suite)."""
    if name == "all":
        names = list(SUITES)
    elif name in SUITES:
        names = [name]
    else:
        raise KeyError(name)
    records, seconds = [], {}
    for n in names:
        t = time.perf_counter()
        for r in SUITES[n](cfg):
            r["suite"] = n
            records.append(r)
        seconds[n] = round(time.perf_counter() - t, 3)
    return records, seconds

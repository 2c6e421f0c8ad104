"""Random partition and interchange squares, built directly from Par_f(a⃗),
Par_{k⃗}(γ) and ⊗_1 padding (not from the word rewriting engine)."""
from artifact import fatten as F
from artifact.natural import aw_nat, par_nat, perm_nat, shuffle_nat, handle_nat
from artifact.props import PMor, PTensorMor, par_mor

FACTORS = {
    "chopf": ["m", "Delta", "S", "id", "Delta.m", "m.Delta"],
    "com": ["m", "id", "swap", "m.id"],
}


def _mor(P, name):
    if name == "swap":
        return PMor.perm((1, 0))
    m = None
    for p in name.split("."):
        g = PMor.identity(1) if p == "id" else P.gen(p)
        m = g if m is None else g @ m
    return m


def _composition(rng, n, parts):
    cuts = sorted(rng.sample(range(1, n), parts - 1))
    bounds = [0] + cuts + [n]
    return tuple(bounds[i + 1] - bounds[i] for i in range(parts))


def random_gamma(rng, l):
    """(a⃗, γ, χ) with γ ∈ Ñ^Σ(a⃗, b⃗), l = |a⃗|, χ the permutation of γ."""
    kind = rng.choice(["sh", "aw", "perm"])
    if kind == "sh":
        a = _composition(rng, l, 2)
        return a, shuffle_nat(a), tuple(range(l))
    if kind == "aw":
        return (l,), aw_nat(_composition(rng, l, 2)), tuple(range(l))
    a = _composition(rng, l, 2)
    # swap the two blocks
    chi = tuple(i + a[1] if i < a[0] else i - a[0] for i in range(l))
    return a, perm_nat(a, chi), chi


def partition_square(P, kind, rng, max_slots=4):
    """(leg1, leg2) with leg1 = Par_{m⃗}(γ)∘Par_f(a⃗), leg2 = Par_{f^χ}(b⃗)∘Par_{k⃗}(γ)."""
    while True:
        l = rng.choice([2, 3])
        mors = [_mor(P, rng.choice(FACTORS[kind])) for _ in range(l)]
        k = tuple(m.n_in for m in mors)
        m = tuple(x.n_out for x in mors)
        if sum(k) <= max_slots and sum(m) <= max_slots:
            break
    a, gamma, chi = random_gamma(rng, l)
    f = PTensorMor.elementary(mors)
    permuted = [None] * l
    for i, x in enumerate(mors):
        permuted[chi[i]] = x
    f_chi = PTensorMor.elementary(permuted)
    leg1 = F.word_compose(F.n_word(P, par_nat(m, gamma)), F.p_word(P, par_mor(f, a)))
    leg2 = F.word_compose(F.p_word(P, par_mor(f_chi, gamma.target)), F.n_word(P, par_nat(k, gamma)))
    return leg1, leg2


def random_nat(rng, handles=False):
    kinds = ["sh", "aw", "perm"] + (["theta"] if handles else [])
    kind = rng.choice(kinds)
    if kind == "sh":
        return shuffle_nat((1, 1))
    if kind == "aw":
        return aw_nat((1, 1))
    if kind == "perm":
        return perm_nat((1, 1), (1, 0))
    F.theta_handle()
    return handle_nat("theta")


def interchange_square(P, kind, rng, handles=False):
    """(f ⊗_1 id)∘(id ⊗_1 ψ) against (-1)^{|f||ψ|} (id ⊗_1 ψ)∘(f ⊗_1 id)."""
    while True:
        mor = _mor(P, rng.choice(FACTORS[kind]))
        if mor.n_in <= 2 and mor.n_out <= 2:
            break
    f = F.p_word(P, PTensorMor.elementary([mor]))
    psi = F.n_word(P, random_nat(rng, handles))
    left = F.word_compose(F.pad_word(f, (), psi.target), F.pad_word(psi, f.source, ()))
    right = F.word_compose(F.pad_word(psi, f.target, ()), F.pad_word(f, (), psi.source))
    if (f.degree * psi.degree) % 2:
        right = right.scale(-1)
    return left, right

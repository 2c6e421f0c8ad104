"""Words in P^⊗ and Ñ^Σ: the categories Q_0(P), Q_1(P), Q(P) and P̃.

A word is (source, segments) in application order.  Segments are

  ("P", source, target, sigma, diagrams)   an elementary tensor of P^⊗
  ("N", source, atoms)                     an atom word of Ñ^Σ

A WordSum is a linear combination of words with common boundary and degree.
"""
import itertools
import random
from dataclasses import dataclass
from functools import lru_cache

from .chain import ChainMap, blowup
from .exactlin import QQ
from .hochschild import act_family, act_ptensor, c_vec
from .natural import (NatElement, atom_info, aw_nat, block_perm, canon_atom, canon_word,
                      compose_nat, compose_perm, identity_perm, is_sigma_perm,
                      nat_boundary, nat_homology, GuardExceeded, par_object, perm_nat, register_handle,
                      shuffle_nat, tensor_nat, word_family, HANDLES)
from .props import (PMor, PTensorMor, canonical, compose_ptensor, identity_diagram,
                    tensor_all, tensor_ptensor, to_pmor)


def _add(acc, key, c):
    v = acc.get(key, 0) + c
    if v:
        acc[key] = v
    else:
        acc.pop(key, None)


# ---------------------------------------------------------------------------
# segments

@lru_cache(maxsize=None)
def n_info(source, atoms):
    """(target, chi, degree) of an atom word on the given source."""
    t, chi, d = tuple(source), identity_perm(sum(source)), 0
    for a in atoms:
        s, t2, c, dd = atom_info(a)
        if s != t:
            raise ValueError(f"atom {a!r} does not start at {t}")
        t, chi, d = t2, compose_perm(c, chi), d + dd
    return t, chi, d


def seg_target(seg):
    return seg[2] if seg[0] == "P" else n_info(seg[1], seg[2])[0]


def seg_degree(seg):
    if seg[0] == "P":
        return sum(d.degree for d in seg[4])
    return n_info(seg[1], seg[2])[2]


def word_target(word):
    src, segs = word
    return seg_target(segs[-1]) if segs else src


def word_degree(word):
    return sum(seg_degree(s) for s in word[1])


def _p_identity(v):
    v = tuple(v)
    return ("P", v, v, identity_perm(len(v)), tuple(identity_diagram(a) for a in v))


def _n_identity(v):
    return ("N", tuple(v), ())


def _is_identity(seg):
    if seg[0] == "N":
        return not seg[2]
    return seg[3] == identity_perm(len(seg[3])) and \
        all(d == identity_diagram(d.n_in) for d in seg[4])


def _sigma_of(seg):
    """The Σ⃗ permutation a segment represents, or None."""
    if seg[0] == "P":
        if all(d == identity_diagram(d.n_in) for d in seg[4]):
            return seg[1], seg[3]
        return None
    atoms = seg[2]
    if len(atoms) == 1 and atoms[0][0] == "perm" and is_sigma_perm(atoms[0][1], atoms[0][2]):
        return atoms[0][1], block_perm(atoms[0][1], atoms[0][2])[1]
    return None


def _perm_atom(src, sigma):
    return canon_atom(("perm", tuple(src), blowup(tuple(sigma), tuple(src))))


def _sigma_atom(a):
    if a[0] == "perm" and is_sigma_perm(a[1], a[2]):
        return a[1], block_perm(a[1], a[2])[1]
    return None


def _as_ptensor(seg):
    return PTensorMor(seg[1], seg[2], {(seg[3], seg[4]): 1})


def _perm_ptensor(src, sigma):
    return PTensorMor.elementary([PMor.identity(a) for a in src], sigma)


def _from_ptensor(f):
    return {("P", f.source, f.target, s, ds): c for (s, ds), c in f.terms.items()}


# ---------------------------------------------------------------------------
# reduction

def _step(word, absorb):
    src, segs = word
    # identity segments
    for i, s in enumerate(segs):
        if _is_identity(s):
            return {(src, segs[:i] + segs[i + 1:]): 1}
    # permutation segments
    n = len(segs)
    idxs = range(n) if absorb == "right" else reversed(range(n))
    for i in idxs:
        sg = _sigma_of(segs[i])
        if sg is None:
            continue
        if n == 1:
            if segs[0][0] == "N":
                return None
            return {(src, (("N", sg[0], (_perm_atom(*sg),)),)): 1}
        psrc, sigma = sg
        right = i + 1 < n and (absorb == "right" or i == 0)
        if right:
            nb = segs[i + 1]
            if nb[0] == "P":
                f = compose_ptensor(_as_ptensor(nb), _perm_ptensor(psrc, sigma))
                return {(src, segs[:i] + (s,) + segs[i + 2:]): c
                        for s, c in _from_ptensor(f).items()}
            atoms = canon_word((_perm_atom(psrc, sigma),) + nb[2])
            return {(src, segs[:i] + (("N", psrc, atoms),) + segs[i + 2:]): 1}
        nb = segs[i - 1]
        if nb[0] == "P":
            f = compose_ptensor(_perm_ptensor(psrc, sigma), _as_ptensor(nb))
            return {(src, segs[:i - 1] + (s,) + segs[i + 1:]): c
                    for s, c in _from_ptensor(f).items()}
        atoms = canon_word(nb[2] + (_perm_atom(psrc, sigma),))
        return {(src, segs[:i - 1] + (("N", nb[1], atoms),) + segs[i + 1:]): 1}
    # merge neighbours of the same type
    for i in range(n - 1):
        a, b = segs[i], segs[i + 1]
        if a[0] == b[0] == "P":
            f = compose_ptensor(_as_ptensor(b), _as_ptensor(a))
            return {(src, segs[:i] + (s,) + segs[i + 2:]): c
                    for s, c in _from_ptensor(f).items()}
        if a[0] == b[0] == "N":
            atoms = canon_word(a[2] + b[2])
            return {(src, segs[:i] + (("N", a[1], atoms),) + segs[i + 2:]): 1}
    # Σ⃗ permutations at the ends of an N segment move into P neighbours
    for i, s in enumerate(segs):
        if s[0] != "N" or len(s[2]) < 2:
            continue
        if i > 0:
            sg = _sigma_atom(s[2][0])
            if sg is not None:
                f = compose_ptensor(_perm_ptensor(*sg), _as_ptensor(segs[i - 1]))
                rest = ("N", sg_target(sg), s[2][1:])
                return {(src, segs[:i - 1] + (p, rest) + segs[i + 1:]): c
                        for p, c in _from_ptensor(f).items()}
        if i + 1 < n:
            sg = _sigma_atom(s[2][-1])
            if sg is not None:
                f = compose_ptensor(_as_ptensor(segs[i + 1]), _perm_ptensor(*sg))
                rest = ("N", s[1], s[2][:-1])
                return {(src, segs[:i] + (rest, p) + segs[i + 2:]): c
                        for p, c in _from_ptensor(f).items()}
    return None


def sg_target(sg):
    src, sigma = sg
    out = [0] * len(src)
    for i, a in enumerate(src):
        out[sigma[i]] = a
    return tuple(out)


def _pad(word):
    src, segs = word
    if not segs:
        return (src, (_p_identity(src), _n_identity(src)))
    if segs[0][0] == "N":
        segs = (_p_identity(src),) + segs
    if segs[-1][0] == "P":
        segs = segs + (_n_identity(segs[-1][2]),)
    return (src, segs)


def reduce_word(word, absorb="right"):
    """Normal form of a word as {word: coeff}.

    Identity segments are dropped, Σ⃗ permutation segments are absorbed into
    a neighbour (the right one unless absorb="left"), neighbours of equal
    type are composed, and Σ⃗ permutations at the ends of an N segment move
    into adjacent P segments.  The result starts with P and ends with N.
    """
    out = {}
    stack = [(word, 1)]
    while stack:
        w, c = stack.pop()
        r = _step(w, absorb)
        if r is None:
            _add(out, _pad(w), c)
        else:
            for w2, c2 in r.items():
                stack.append((w2, c * c2))
    return out


class WordSum:
    """A linear combination of words of common boundary and degree."""

    def __init__(self, prop, source, target, terms=None, degree=None, reduce=True):
        self.prop = prop
        self.source = tuple(source)
        self.target = tuple(target)
        t = {}
        for w, c in (terms or {}).items():
            if not c:
                continue
            if w[0] != self.source or word_target(w) != self.target:
                raise ValueError("word boundary mismatch")
            if reduce:
                for w2, c2 in reduce_word(w).items():
                    _add(t, w2, c * c2)
            else:
                _add(t, w, c)
        self.terms = t
        if degree is None:
            degs = {word_degree(w) for w in t}
            if len(degs) > 1:
                raise ValueError("inhomogeneous word sum")
            degree = degs.pop() if degs else 0
        self.degree = degree

    def is_zero(self):
        return not self.terms

    def _like(self, other):
        if (self.source, self.target) != (other.source, other.target):
            raise ValueError("boundary mismatch")

    def __add__(self, other):
        self._like(other)
        t = dict(self.terms)
        for w, c in other.terms.items():
            _add(t, w, c)
        deg = self.degree if self.terms else other.degree
        return WordSum(self.prop, self.source, self.target, t, deg, reduce=False)

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, s):
        return WordSum(self.prop, self.source, self.target,
                       {w: s * c for w, c in self.terms.items()}, self.degree, reduce=False)

    def __eq__(self, other):
        return isinstance(other, WordSum) and self.source == other.source and \
            self.target == other.target and self.terms == other.terms

    def __hash__(self):
        return hash((self.source, self.target, frozenset(self.terms.items())))

    def key(self):
        return frozenset(self.terms.items())

    def __repr__(self):
        return f"WordSum({self.source}->{self.target}, deg={self.degree}, {len(self.terms)} words)"


def _fmt_atom(a):
    kind = a[0]
    if kind == "perm":
        return f"perm{a[1]}{list(a[2])}"
    if kind == "sh":
        return f"sh{a[1]}"
    if kind == "aw":
        return f"AW{a[1]}"
    if kind == "h":
        return a[1]
    if kind == "pad":
        return f"pad({a[1]},{_fmt_atom(a[2])},{a[3]})"
    return f"Par{a[1]}({_fmt_atom(a[2])})"


def _fmt_seg(seg):
    if seg[0] == "N":
        return " ; ".join(_fmt_atom(a) for a in seg[2]) or f"id{seg[1]}"
    names = []
    for d in seg[4]:
        names.append(".".join(n[0] for n in d.nodes) or f"id{d.n_in}")
    out = "(" + ",".join(names) + ")"
    if seg[3] != identity_perm(len(seg[3])):
        out += f"_{list(seg[3])}"
    return out


def describe(ws):
    """A readable rendering: words in application order, ';' between segments."""
    if ws.is_zero():
        return "0"
    parts = []
    for (src, segs), c in sorted(ws.terms.items(), key=lambda x: repr(x[0])):
        body = " | ".join(_fmt_seg(s) for s in segs if not _is_identity(s)) or f"id{src}"
        parts.append(f"{c}*[{body}]")
    return " + ".join(parts)


# ---------------------------------------------------------------------------
# constructors

def identity_word(prop, v):
    v = tuple(v)
    return WordSum(prop, v, v, {(v, ()): 1}, 0)


def p_word(prop, f):
    """A PTensorMor as a one-segment word sum."""
    terms = {(f.source, (s,)): c for s, c in _from_ptensor(f).items()}
    return WordSum(prop, f.source, f.target, terms, f.degree)


def n_word(prop, x):
    """A NatElement as a word sum."""
    terms = {(x.source, (("N", x.source, w),)): c for w, c in x.body.items()}
    return WordSum(prop, x.source, x.target, terms, x.degree)


def gen_word(prop, names):
    """(f_1, ..., f_n) with f_i composites of generator names in application order."""
    mors = []
    for nm in names:
        parts = nm.split(".") if isinstance(nm, str) else nm
        m = None
        for p in parts:
            g = PMor.identity(1) if p == "id" else prop.gen(p)
            m = g if m is None else g @ m
        mors.append(m)
    return p_word(prop, PTensorMor.elementary(mors))


def twist_word(prop, a, b):
    a, b = tuple(a), tuple(b)
    sigma = tuple(len(b) + i for i in range(len(a))) + tuple(range(len(b)))
    return n_word(prop, perm_nat(a + b, blowup(sigma, a + b)))


# ---------------------------------------------------------------------------
# composition, ⊗_1 and the differential

def word_compose(v, w):
    """v ∘ w: concatenate and reduce."""
    if w.target != v.source:
        raise ValueError("boundary mismatch in composition")
    t = {}
    for wv, a in v.terms.items():
        for ww, b in w.terms.items():
            _add(t, (ww[0], ww[1] + wv[1]), a * b)
    return WordSum(v.prop, w.source, v.target, t, v.degree + w.degree)


def _pad_seg(seg, pre, post):
    pre, post = tuple(pre), tuple(post)
    if seg[0] == "P":
        f = _as_ptensor(seg)
        if pre:
            f = tensor_ptensor(PTensorMor.identity(pre), f)
        if post:
            f = tensor_ptensor(f, PTensorMor.identity(post))
        (key, c), = f.terms.items()
        return ("P", f.source, f.target, key[0], key[1]), c
    atoms = tuple(canon_atom(("pad", pre, a, post)) for a in seg[2])
    atoms = canon_word(atoms)
    return ("N", pre + seg[1] + post, atoms), 1


def pad_word(ws, pre, post):
    """id_pre ⊗_1 w ⊗_1 id_post, segmentwise."""
    pre, post = tuple(pre), tuple(post)
    t = {}
    for (src, segs), c in ws.terms.items():
        new = []
        for s in segs:
            s2, c2 = _pad_seg(s, pre, post)
            new.append(s2)
            c *= c2
        _add(t, (pre + src + post, tuple(new)), c)
    return WordSum(ws.prop, pre + ws.source + post, pre + ws.target + post, t, ws.degree)


def word_tensor(v, w):
    """v ⊗_1 w = (-1)^{|v||w|} (id ⊗_1 w) ∘ (v ⊗_1 id)."""
    a = pad_word(v, (), w.source)
    b = pad_word(w, v.target, ())
    out = word_compose(b, a)
    return out.scale(-1) if (v.degree * w.degree) % 2 else out


def _p_differential(prop, seg):
    """Leibniz differential of an elementary tensor of P^⊗."""
    out = {}
    s = 1
    for i, d in enumerate(seg[4]):
        dd = prop.d(PMor.diagram(d))
        for nd, c in dd.terms.items():
            ds = seg[4][:i] + (nd,) + seg[4][i + 1:]
            _add(out, ("P", seg[1], seg[2], seg[3], ds), s * c)
        if d.degree % 2:
            s = -s
    return out


def _n_differential(seg):
    src, atoms = seg[1], seg[2]
    t, chi, d = n_info(src, atoms)
    x = NatElement(src, t, chi, d, {atoms: 1})
    return {("N", src, w): c for w, c in nat_boundary(x).body.items()}


def word_differential(ws):
    """Leibniz rule over segments; a segment's sign counts later-applied degrees."""
    t = {}
    for (src, segs), c in ws.terms.items():
        degs = [seg_degree(s) for s in segs]
        for i, s in enumerate(segs):
            sign = -1 if sum(degs[i + 1:]) % 2 else 1
            parts = _p_differential(ws.prop, s) if s[0] == "P" else _n_differential(s)
            for s2, c2 in parts.items():
                _add(t, (src, segs[:i] + (s2,) + segs[i + 1:]), sign * c * c2)
    return WordSum(ws.prop, ws.source, ws.target, t, ws.degree - 1)


# ---------------------------------------------------------------------------
# F, A and Q(g)

def projection_F(ws):
    """F: words -> P; P segments map to Par_f((n)), N segments of degree 0 to
    their permutation and positive-degree N segments to 0."""
    out = PMor.zero(sum(ws.source), sum(ws.target), ws.degree)
    for (src, segs), c in ws.terms.items():
        acc = PMor.identity(sum(src))
        for s in segs:
            if s[0] == "P":
                f = to_pmor(_as_ptensor(s))
            else:
                t, chi, d = n_info(s[1], s[2])
                if d:
                    acc = None
                    break
                f = PMor.perm(chi)
            acc = f @ acc
        if acc is not None:
            out = out + acc.scale(c)
    return out


def section_A(prop, f, kvec, mvec):
    """AW_{m⃗} ∘ (f) ∘ sh_{k⃗} as a word sum."""
    kvec, mvec = tuple(kvec), tuple(mvec)
    if (f.n_in, f.n_out) != (sum(kvec), sum(mvec)):
        raise ValueError("arity mismatch")
    mid = p_word(prop, PTensorMor.elementary([f]))
    sh = n_word(prop, shuffle_nat(kvec))
    aw = n_word(prop, aw_nat(mvec))
    return word_compose(aw, word_compose(mid, sh))


def q_of_morphism(g, ws):
    """Q(g): act by g on P segments and by the identity on N segments."""
    t = {}
    for (src, segs), c in ws.terms.items():
        partial = {(): c}
        for s in segs:
            if s[0] == "N":
                partial = {k + (s,): v for k, v in partial.items()}
                continue
            mors = [g(PMor.diagram(d)) for d in s[4]]
            f = PTensorMor.elementary(mors, s[3])
            options = _from_ptensor(f)
            partial = {k + (s2,): v * c2 for k, v in partial.items()
                       for s2, c2 in options.items()}
        for segs2, v in partial.items():
            _add(t, (src, segs2), v)
    return WordSum(g.target, ws.source, ws.target, t, ws.degree)


# ---------------------------------------------------------------------------
# the action on Hochschild complexes

def act(ws, model, D):
    """The chain map C^{source}(A) -> C^{target}(A) of a word sum, exact on
    source degrees <= D.  Each segment is evaluated on the degrees it sees."""
    A = model.algebra
    ring = A.ring
    total = None
    for (src, segs), c in ws.terms.items():
        f = None
        dcur = D
        for s in segs:
            if s[0] == "P":
                g = act_ptensor(_as_ptensor(s), model, dcur)
            else:
                g = act_family(word_family(s[2], s[1], ring), A, dcur)
            f = g if f is None else g @ f
            dcur += seg_degree(s)
        f = f.scale(ring(c)) if c != 1 else f
        total = f if total is None else total + f
    if total is None:
        total = ChainMap(c_vec(A, ws.source, D), c_vec(A, ws.target, D + ws.degree), {},
                         ws.degree)
    return total


def _phi_power(phi, xs):
    acc = {(): 1}
    for x in xs:
        acc = {t + (y,): c * v for t, c in acc.items() for y, v in phi(x).items()}
    return acc


def is_model_map(phi, model_a, model_b):
    """Whether φ: A -> B (on basis labels) intertwines every generator."""
    A, B = model_a.algebra, model_b.algebra
    red = B.ring.red
    for name, g in model_a.prop.generators.items():
        f = model_a.prop.gen(name)
        for x in itertools.product(A.basis, repeat=g.n_in):
            lhs = {}
            for y, c in model_a.evaluate(f, x).items():
                for z, v in _phi_power(phi, y).items():
                    _add(lhs, z, c * v)
            rhs = {}
            for y, c in _phi_power(phi, x).items():
                for z, v in model_b.evaluate(f, y).items():
                    _add(rhs, z, c * v)
            if any(red(lhs.get(k, 0) - rhs.get(k, 0)) for k in set(lhs) | set(rhs)):
                return False
    return True


def act_natural(phi, model_a, model_b, ws, D):
    """C^{m⃗}(φ) ∘ act_A(w) == act_B(w) ∘ C^{k⃗}(φ) on degrees <= D."""
    from .hochschild import induced_vec_map
    if not is_model_map(phi, model_a, model_b):
        raise ValueError("phi is not a map of P-algebras")
    A, B = model_a.algebra, model_b.algebra
    top = D + max(ws.degree, 0)
    lhs = induced_vec_map(phi, A, B, ws.target, top) @ act(ws, model_a, D)
    rhs = act(ws, model_b, D) @ induced_vec_map(phi, A, B, ws.source, D)
    return lhs.equals(rhs, range(0, D + 1))


# ---------------------------------------------------------------------------
# syntactic moves

def _p_prefix(seg, j):
    """(sigma, diagrams) of f if seg = f ⊗ id with f on the first j entries."""
    sigma, ds = seg[3], seg[4]
    n = len(sigma)
    if sorted(sigma[:j]) != list(range(j)):
        return None
    for i in range(j, n):
        if sigma[i] != i or ds[i] != identity_diagram(ds[i].n_in):
            return None
    return sigma[:j], ds[:j]


def _p_suffix(seg, j):
    """(sigma, diagrams) of f if seg = id ⊗ f with f on entries j, j+1, ..."""
    sigma, ds = seg[3], seg[4]
    for i in range(j):
        if sigma[i] != i or ds[i] != identity_diagram(ds[i].n_in):
            return None
    rest = sigma[j:]
    if sorted(rest) != list(range(j, len(sigma))):
        return None
    return tuple(x - j for x in rest), ds[j:]


def _strip_prefix(atoms, j):
    out = []
    for a in atoms:
        if a[0] == "pad" and len(a[1]) >= j:
            b = canon_atom(("pad", a[1][j:], a[2], a[3]))
        elif a[0] == "perm":
            npre = sum(a[1][:j])
            chi = a[2]
            if chi[:npre] != identity_perm(npre) or any(x < npre for x in chi[npre:]):
                return None
            b = canon_atom(("perm", a[1][j:], tuple(x - npre for x in chi[npre:])))
        else:
            return None
        if b is not None:
            out.append(b)
    return tuple(out)


def _strip_suffix(atoms, r):
    out = []
    for a in atoms:
        if a[0] == "pad" and len(a[3]) >= r:
            b = canon_atom(("pad", a[1], a[2], a[3][:len(a[3]) - r]))
        elif a[0] == "perm":
            keep = len(a[1]) - r
            npre = sum(a[1][:keep])
            chi = a[2]
            tail = chi[npre:]
            if tail != tuple(range(npre, len(chi))) or any(x >= npre for x in chi[:npre]):
                return None
            b = canon_atom(("perm", a[1][:keep], chi[:npre]))
        else:
            return None
        if b is not None:
            out.append(b)
    return tuple(out)


def _add_prefix(atoms, pre):
    return canon_word(tuple(canon_atom(("pad", tuple(pre), a, ())) for a in atoms))


def _add_suffix(atoms, post):
    return canon_word(tuple(canon_atom(("pad", (), a, tuple(post))) for a in atoms))


def _p_seg(src, tgt, sigma, ds):
    return ("P", tuple(src), tuple(tgt), tuple(sigma), tuple(ds))


def _interchange_moves(word):
    src, segs = word
    for i in range(len(segs) - 1):
        a, b = segs[i], segs[i + 1]
        if {a[0], b[0]} != {"P", "N"}:
            continue
        before = segs[:i]
        after = segs[i + 2:]
        if a[0] == "P":
            P, N = a, b
            n = len(P[1])
            for j in range(1, n):
                # f on the prefix, ψ on the suffix
                fp = _p_prefix(P, j)
                psi = _strip_prefix(N[2], j) if fp else None
                if fp and psi is not None:
                    suffix_t = n_info(P[2][j:], psi)[0]
                    newN = ("N", P[1], _add_prefix(psi, P[1][:j]))
                    newP = _p_seg(P[1][:j] + suffix_t, P[2][:j] + suffix_t,
                                  fp[0] + tuple(range(j, j + len(suffix_t))),
                                  fp[1] + tuple(identity_diagram(x) for x in suffix_t))
                    yield _sign(P, psi, N), (src, before + (newN, newP) + after)
                # ψ on the prefix, f on the suffix
                fs = _p_suffix(P, j)
                psi = _strip_suffix(N[2], n - j) if fs else None
                if fs and psi is not None:
                    prefix_t = n_info(P[2][:j], psi)[0]
                    newN = ("N", P[1], _add_suffix(psi, P[1][j:]))
                    k = len(prefix_t)
                    newP = _p_seg(prefix_t + P[1][j:], prefix_t + P[2][j:],
                                  tuple(range(k)) + tuple(k + x for x in fs[0]),
                                  tuple(identity_diagram(x) for x in prefix_t) + fs[1])
                    yield _sign(P, psi, N), (src, before + (newN, newP) + after)
        else:
            N, P = a, b
            n = len(P[1])
            for j in range(1, n):
                fp = _p_prefix(P, j)
                psi = None
                if fp:
                    npre = len(P[1][:j])
                    psi = _strip_prefix(N[2], npre)
                if fp and psi is not None and tuple(N[1][:j]) == tuple(P[1][:j]):
                    newP = _p_seg(N[1][:j] + N[1][j:], P[2][:j] + N[1][j:],
                                  fp[0] + tuple(range(j, j + len(N[1][j:]))),
                                  fp[1] + tuple(identity_diagram(x) for x in N[1][j:]))
                    newN = ("N", P[2][:j] + N[1][j:], _add_prefix(psi, P[2][:j]))
                    yield _sign(P, psi, N), (src, before + (newP, newN) + after)
                fs = _p_suffix(P, j)
                psi = None
                if fs and len(N[1]) >= n - j:
                    psi = _strip_suffix(N[2], n - j)
                if fs and psi is not None and tuple(N[1][len(N[1]) - (n - j):]) == tuple(P[1][j:]):
                    pre_src = N[1][:len(N[1]) - (n - j)]
                    k = len(pre_src)
                    newP = _p_seg(pre_src + P[1][j:], pre_src + P[2][j:],
                                  tuple(range(k)) + tuple(k + x for x in fs[0]),
                                  tuple(identity_diagram(x) for x in pre_src) + fs[1])
                    newN = ("N", pre_src + P[2][j:], _add_suffix(psi, P[2][j:]))
                    yield _sign(P, psi, N), (src, before + (newP, newN) + after)


def _sign(P, psi, N):
    fd = seg_degree(P)
    nd = sum(atom_info(a)[3] for a in psi)
    return -1 if (fd * nd) % 2 else 1


def _components(d):
    """Union-find over nodes and boundary ports: comp id per node, input, output."""
    parent = {}

    def find(x):
        while parent.setdefault(x, x) != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x, y):
        parent[find(x)] = find(y)

    def src_key(s):
        return ("in", s[1]) if s[0] < 0 else ("node", s[0])

    for i, srcs in enumerate(d.inputs):
        find(("node", i))
        for s in srcs:
            union(("node", i), src_key(s))
    for j, s in enumerate(d.outputs):
        union(("out", j), src_key(s))
    for j in range(d.n_in):
        find(("in", j))
    return find


def split_diagram(d, sizes, by="out"):
    """Split d as D_1 ⊗ ... ⊗ D_r with the given output (or input) sizes.

    Returns (sign, [D_g]) with d = sign * (D_1 ⊗ ... ⊗ D_r), or None.
    """
    find = _components(d)
    r = len(sizes)
    groups = []
    for g, s in enumerate(sizes):
        groups.extend([g] * s)
    n_main = d.n_out if by == "out" else d.n_in
    if len(groups) != n_main:
        return None
    main = "out" if by == "out" else "in"
    other = "in" if by == "out" else "out"
    n_other = d.n_in if by == "out" else d.n_out
    comp_group = {}
    for j in range(n_main):
        c = find((main, j))
        if comp_group.setdefault(c, groups[j]) != groups[j]:
            return None
    cur = 0
    other_group = []
    for j in range(n_other):
        c = find((other, j))
        if c not in comp_group:
            comp_group[c] = cur
        g = comp_group[c]
        if g < cur:
            return None
        cur = g
        other_group.append(g)
    node_group = []
    for i in range(len(d.nodes)):
        c = find(("node", i))
        node_group.append(comp_group.get(c, 0))
    in_group = other_group if by == "out" else groups
    out_group = groups if by == "out" else other_group
    parts = []
    for g in range(r):
        nodes = [i for i in range(len(d.nodes)) if node_group[i] == g]
        ins = [j for j in range(d.n_in) if in_group[j] == g]
        outs = [j for j in range(d.n_out) if out_group[j] == g]
        npos = {v: k for k, v in enumerate(nodes)}
        ipos = {v: k for k, v in enumerate(ins)}

        def loc(s):
            return (-1, ipos[s[1]]) if s[0] < 0 else (npos[s[0]], s[1])

        try:
            inputs = [tuple(loc(s) for s in d.inputs[i]) for i in nodes]
            outputs = [loc(d.outputs[j]) for j in outs]
            _, dg = canonical(len(ins), len(outs), [d.nodes[i] for i in nodes], inputs,
                              outputs)
        except (KeyError, ValueError):
            return None
        parts.append(dg)
    total = tensor_all([PMor.diagram(p) for p in parts])
    c = total.terms.get(d)
    if c is None or len(total.terms) != 1:
        return None
    return c, parts


def _unpar(atom):
    """(k⃗, γ) with atom = Par_{k⃗}(γ), or None."""
    if atom[0] == "par":
        return atom[1], atom[2]
    if atom[0] in ("sh", "aw"):
        v = atom[1]
        return v, (atom[0], (1,) * len(v))
    return None


def _unpar_word(atoms):
    kk, gam = None, []
    for a in atoms:
        u = _unpar(a)
        if u is None:
            return None
        if kk is None:
            kk = u[0]
        elif u[0] != kk:
            return None
        gam.append(u[1])
    return (kk, tuple(gam)) if kk is not None else None


def _partition_moves(word):
    src, segs = word
    for i in range(len(segs) - 1):
        a, b = segs[i], segs[i + 1]
        if {a[0], b[0]} != {"P", "N"}:
            continue
        P, N = (a, b) if a[0] == "P" else (b, a)
        if P[3] != identity_perm(len(P[3])):
            continue
        u = _unpar_word(N[2])
        if u is None:
            continue
        kk, gam = u
        a_vec = atom_info(gam[0])[0] if gam else (1,) * len(kk)
        if sum(a_vec) != len(kk):
            continue
        gt, gchi, gdeg = n_info(a_vec, gam)
        if gchi != identity_perm(len(gchi)):
            continue
        b_vec = gt
        if a[0] == "P":
            # P = Par_f(a⃗) then Par_{m⃗}(γ)
            if par_object(kk, a_vec) != P[2]:
                continue
            fine = _split_all(P, a_vec, kk, "out")
            if fine is None:
                continue
            sign, fs = fine
            k_fine = tuple(f.n_in for f in fs)
            newN = ("N", par_object(k_fine, a_vec),
                    canon_word(tuple(canon_atom(("par", k_fine, g)) for g in gam)))
            newP = _regroup(fs, b_vec)
            s = sign * (-1 if (seg_degree(P) * gdeg) % 2 else 1)
            yield s, (src, segs[:i] + (newN, newP) + segs[i + 2:])
        else:
            # Par_{k⃗}(γ) then P = Par_f(b⃗)
            if par_object(kk, b_vec) != P[1]:
                continue
            fine = _split_all(P, b_vec, kk, "in")
            if fine is None:
                continue
            sign, fs = fine
            m_fine = tuple(f.n_out for f in fs)
            newP = _regroup(fs, a_vec)
            newN = ("N", par_object(m_fine, a_vec),
                    canon_word(tuple(canon_atom(("par", m_fine, g)) for g in gam)))
            s = sign * (-1 if (seg_degree(P) * gdeg) % 2 else 1)
            yield s, (src, segs[:i] + (newP, newN) + segs[i + 2:])


def _split_all(P, avec, kk, by):
    sign = 1
    fs = []
    pos = 0
    for g, a in enumerate(avec):
        sizes = kk[pos:pos + a]
        pos += a
        r = split_diagram(P[4][g], sizes, by)
        if r is None:
            return None
        sign *= r[0]
        fs.extend(r[1])
    return sign, fs


def _regroup(fs, bvec):
    mors, pos = [], 0
    for b in bvec:
        mors.append(tensor_all([PMor.diagram(f) for f in fs[pos:pos + b]]))
        pos += b
    f = PTensorMor.elementary(mors)
    (key, c), = f.terms.items()
    if c != 1:
        raise ValueError("unexpected sign in regrouping")
    return ("P", f.source, f.target, key[0], key[1])


def moves(word):
    """Interchange and partition moves from a word: (sign, word) pairs."""
    yield from _interchange_moves(word)
    yield from _partition_moves(word)


# ---------------------------------------------------------------------------
# equality in Q(P)

@dataclass(frozen=True)
class Verdict:
    value: str
    basis: str = ""

    def __eq__(self, other):
        if isinstance(other, str):
            return self.value == other
        return isinstance(other, Verdict) and self.value == other.value

    def __hash__(self):
        return hash(self.value)

    def __str__(self):
        return f"{self.value} ({self.basis})" if self.basis else self.value


def _probe_fits(model, ws):
    names = set(model.maps)
    for (_, segs) in ws.terms:
        for s in segs:
            if s[0] == "P":
                for d in s[4]:
                    if any(nd[0] not in names for nd in d.nodes):
                        return False
    return True


def provably_equal(v, w, depth=2, limit=4000):
    """Search for a chain of interchange and partition moves making v - w vanish."""
    diff = v - w
    if diff.is_zero():
        return True
    frontier = {diff.key(): diff}
    seen = set(frontier)
    for _ in range(depth):
        nxt = {}
        for h in frontier.values():
            for word, c in h.terms.items():
                rest = {k: x for k, x in h.terms.items() if k != word}
                for s, w2 in moves(word):
                    t = dict(rest)
                    for w3, c3 in reduce_word(w2).items():
                        _add(t, w3, s * c * c3)
                    if not t:
                        return True
                    k = frozenset(t.items())
                    if k not in seen:
                        seen.add(k)
                        nxt[k] = WordSum(h.prop, h.source, h.target, t, h.degree,
                                         reduce=False)
                    if len(seen) > limit:
                        return False
        frontier = nxt
    return False


def observational_equal(v, w, probes, D=2, depth=2):
    """'equal' (provable), 'distinct' or 'unknown' (possibly observational)."""
    if not probes:
        raise ValueError("no probes registered")
    if (v.source, v.target) != (w.source, w.target):
        raise ValueError("boundary mismatch")
    if v.degree != w.degree and not (v.is_zero() or w.is_zero()):
        return Verdict("distinct", "degree")
    used = 0
    for model in probes:
        if not (_probe_fits(model, v) and _probe_fits(model, w)):
            continue
        used += 1
        if not act(v, model, D).equals(act(w, model, D), range(0, D + 1)):
            return Verdict("distinct", model.name)
    if provably_equal(v, w, depth):
        return Verdict("equal", "provable")
    return Verdict("unknown", "observational" if used else "")


# ---------------------------------------------------------------------------
# the bialgebra homotopy θ for CHopf

BIALG_F = (0, 2, 1, 3)


def bialgebra_boundary():
    """AW_{(2,2)} ∘ F_* ∘ sh_{(2,2)} - (sh ⊗ sh) ∘ F ∘ (AW ⊗ AW) in Ñ^Σ((2,2),(2,2))."""
    lower = compose_nat(aw_nat((2, 2)), compose_nat(perm_nat((4,), BIALG_F),
                                                    shuffle_nat((2, 2))))
    upper = compose_nat(tensor_nat(shuffle_nat((1, 1)), shuffle_nat((1, 1))),
                        compose_nat(perm_nat((1, 1, 1, 1), BIALG_F),
                                    tensor_nat(aw_nat((1, 1)), aw_nat((1, 1)))))
    return lower - upper


def theta_handle():
    if "theta" not in HANDLES:
        register_handle("theta", bialgebra_boundary(), 1)
    return HANDLES["theta"]


def bialgebra_words(prop):
    """(θ-word, lower leg, upper leg) for the bialgebra square of CHopf."""
    theta_handle()
    dd = gen_word(prop, ["Delta", "Delta"])
    mm = gen_word(prop, ["m", "m"])
    th = n_word(prop, NatElement.atom(("h", "theta")))
    theta_word = word_compose(mm, word_compose(th, dd))
    lower = word_compose(n_word(prop, aw_nat((1, 1))),
                         word_compose(gen_word(prop, ["Delta"]),
                                      word_compose(gen_word(prop, ["m"]),
                                                   n_word(prop, shuffle_nat((1, 1))))))
    mid = compose_nat(tensor_nat(shuffle_nat((1, 1)), shuffle_nat((1, 1))),
                      compose_nat(perm_nat((1, 1, 1, 1), BIALG_F),
                                  tensor_nat(aw_nat((1, 1)), aw_nat((1, 1)))))
    upper = word_compose(mm, word_compose(n_word(prop, mid), dd))
    return theta_word, lower, upper


# ---------------------------------------------------------------------------
# Hom complexes of P̃

def tilde_hom(prop, n, m, L=4, degree=2, ring=QQ, guard=True):
    """Hom_{P̃}((1)^n, (1)^m) in the window (word length <= L, degree <= degree).

    Returns a report with the spanning object paths and, when every P^⊗
    morphism is a permutation (no generators), the homology of the
    reduced word complex, which is Ñ^Σ((1)^n, (1)^m).
    """
    if guard and (n > 3 or m > 3 or L > 6 or degree > 3):
        raise GuardExceeded("tilde_hom window too large")
    report = {"n": n, "m": m, "L": L, "degree": degree}
    if n == 0 or m == 0:
        report["homology"] = {0: 1 if n == m else 0}
        report["paths"] = 1 if n == m else 0
        return report
    vecs = [v for v in _vectors(n)]
    paths = 0
    for length in range(1, L + 1):
        for path in itertools.product(vecs, repeat=length - 1):
            paths += 1 if _path_ok(prop, (1,) * n, path, (1,) * m) else 0
    report["paths"] = paths
    if prop.generators:
        report["homology"] = None
        report["generators_degree0"] = {
            name: describe(section_A(prop, prop.gen(name), (1,) * g.n_in, (1,) * g.n_out))
            for name, g in prop.generators.items() if g.degree == 0}
        return report
    if n != m:
        report["homology"] = {d: 0 for d in range(degree + 1)}
        return report
    h, _ = nat_homology(ring, (1,) * n, (1,) * n, degree + 1, range(0, degree + 1))
    report["homology"] = {d: h[d] for d in range(degree + 1)}
    report["F_degree0"] = _factorial(n)
    return report


def _factorial(n):
    out = 1
    for i in range(2, n + 1):
        out *= i
    return out


def _vectors(total):
    if total == 0:
        yield ()
        return
    for first in range(1, total + 1):
        for rest in _vectors(total - first):
            yield (first,) + rest


def _path_ok(prop, start, path, end):
    objs = (start,) + tuple(path) + (end,)
    for a, b in zip(objs, objs[1:]):
        if sum(a) != sum(b) and not prop.generators:
            return False
    return True


# ---------------------------------------------------------------------------
# random words

def _small_mors(prop):
    """Small composites by input arity, with positive output arity."""
    out = {1: [PMor.identity(1)], 2: [PMor.identity(2), PMor.perm((1, 0))]}
    for name, g in prop.generators.items():
        if g.n_in in (1, 2) and g.n_out >= 1 and g.n_out <= 2:
            out.setdefault(g.n_in, []).append(prop.gen(name))
    return out


def random_word(prop, rng, length=3, max_entry=2, max_len=3, handles=True):
    """A random word of given segment count over prop (for tests)."""
    n = rng.randint(1, max_len)
    src = tuple(rng.randint(1, max_entry) for _ in range(n))
    small = _small_mors(prop)
    ws = identity_word(prop, src)
    cur = src
    for _ in range(length):
        kind = rng.choice("PNN" if handles else "PN")
        if kind == "P":
            mors = []
            for a in cur:
                choices = small.get(a, [PMor.identity(a)])
                mors.append(rng.choice(choices))
            sigma = list(range(len(cur)))
            rng.shuffle(sigma)
            seg = p_word(prop, PTensorMor.elementary(mors, sigma))
        else:
            seg = n_word(prop, _random_nat(rng, cur, handles))
        ws = word_compose(seg, ws)
        cur = seg.target
    return ws


def _random_nat(rng, cur, handles):
    opts = ["perm", "sigma"]
    if len(cur) >= 2:
        opts.append("sh")
    if any(a >= 2 for a in cur):
        opts.append("aw")
    if handles and cur == (2, 2):
        opts.append("theta")
    kind = rng.choice(opts)
    if kind == "sh":
        i = rng.randrange(len(cur) - 1)
        return _pad_nat(cur[:i], shuffle_nat(cur[i:i + 2]), cur[i + 2:])
    if kind == "aw":
        i = rng.choice([j for j, a in enumerate(cur) if a >= 2])
        a = rng.randint(1, cur[i] - 1)
        return _pad_nat(cur[:i], aw_nat((a, cur[i] - a)), cur[i + 1:])
    if kind == "theta":
        theta_handle()
        return NatElement.atom(("h", "theta"))
    if kind == "sigma":
        sigma = list(range(len(cur)))
        rng.shuffle(sigma)
        return perm_nat(cur, blowup(tuple(sigma), cur))
    sigma = list(range(len(cur)))
    rng.shuffle(sigma)
    chi = list(blowup(tuple(sigma), cur))
    pos = 0
    for a in cur:
        part = chi[pos:pos + a]
        rng.shuffle(part)
        chi[pos:pos + a] = part
        pos += a
    return perm_nat(cur, tuple(chi))


def _pad_nat(pre, x, post):
    from .natural import pad_nat
    return pad_nat(tuple(pre), x, tuple(post))


def make_rng(seed):
    return random.Random(seed)


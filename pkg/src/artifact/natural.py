"""Natural transformations between the functors N^{k⃗}.

A degree-d natural transformation N^{k⃗} => N^{m⃗}∘χ is determined by its
values on universal elements: for every e⃗ (one entry per block of k⃗) the
image x_{e⃗} of ι_{e⃗} = ⊗_j (id, ..., id) in N^{m⃗}(Δ^{p⃗}), where slot s of
the source sees Δ^{e_j} for its block j.  A basis element of that target is
a key: one monotone map per target slot, nondegenerate blockwise.

``Family`` computes these values lazily.  ``NatElement`` is the symbolic
layer: linear combinations of words in generator atoms.
"""
import itertools
import math

from .chain import ChainMap, blowup, reorder_sign
from .exactlin import QQ, SparseMatrix, rank, solve, kernel_basis
from .simplicial import nvec_complex, _vec_tensor


# ---------------------------------------------------------------------------
# vectors

def vec_len(v):
    return sum(v)


def blocks(v):
    out, i = [], 0
    for k in v:
        out.append(tuple(range(i, i + k)))
        i += k
    return out


def block_of(v):
    out = []
    for j, k in enumerate(v):
        out.extend([j] * k)
    return out


def par_object(k, a):
    """Par_{k⃗}(a⃗): sums of consecutive groups of k⃗ of sizes a_1, a_2, ..."""
    k, a = tuple(k), tuple(a)
    if len(k) != sum(a):
        raise ValueError(f"l(k)={len(k)} differs from |a|={sum(a)}")
    out, i = [], 0
    for n in a:
        out.append(sum(k[i:i + n]))
        i += n
    return tuple(out)


def par_target(k, chi, b):
    """Par_{χ(k⃗)}(b⃗): the target of Par_{k⃗}(γ) for γ with permutation χ."""
    kt = [None] * len(k)
    for i, j in enumerate(chi):
        kt[j] = k[i]
    return par_object(kt, b)


def invert(chi):
    inv = [0] * len(chi)
    for i, c in enumerate(chi):
        inv[c] = i
    return tuple(inv)


def compose_perm(g, f):
    """g ∘ f as slot maps."""
    return tuple(g[f[i]] for i in range(len(f)))


def identity_perm(n):
    return tuple(range(n))


def block_perm(source, chi):
    """(target vector, block map) if chi maps source blocks onto blocks, else None."""
    bl = blocks(source)
    images = [sorted(chi[s] for s in b) for b in bl]
    order = sorted(range(len(bl)), key=lambda j: images[j][0] if images[j] else -1)
    pos = 0
    target = [0] * len(bl)
    bmap = [0] * len(bl)
    for new, j in enumerate(order):
        img = images[j]
        if img != list(range(pos, pos + len(img))):
            return None
        target[new] = len(img)
        bmap[j] = new
        pos += len(img)
    return tuple(target), tuple(bmap)


def is_sigma_perm(source, chi):
    """True if chi permutes whole entries of the vector, keeping slot order."""
    bp = block_perm(source, chi)
    if bp is None:
        return False
    for b in blocks(source):
        imgs = [chi[s] for s in b]
        if imgs != sorted(imgs):
            return False
    return True


# ---------------------------------------------------------------------------
# keys

def _nondeg(key, slots):
    if len(slots) == 1:
        a = key[slots[0]]
        return all(x < y for x, y in zip(a, a[1:]))
    pts = list(zip(*[key[t] for t in slots]))
    return all(x != y for x, y in zip(pts, pts[1:]))


def _nondeg_all(key, tblocks):
    return all(_nondeg(key, b) for b in tblocks if b)


def _key_levels(key, tblocks):
    return tuple((len(key[b[0]]) - 1) if b else 0 for b in tblocks)


def _add(acc, key, c):
    v = acc.get(key, 0) + c
    if v:
        acc[key] = v
    else:
        acc.pop(key, None)


_SIMPLEX_CACHE = {}


def nondeg_simplices(dims, q):
    """Nondegenerate q-simplices of Δ^{dims[0]} x ... as tuples of slot maps."""
    ck = (tuple(dims), q)
    r = _SIMPLEX_CACHE.get(ck)
    if r is not None:
        return r
    out = []
    n = len(dims)
    if n == 0:
        out = [()] if q == 0 else []
        _SIMPLEX_CACHE[ck] = out
        return out

    def rec(chain):
        if len(chain) == q + 1:
            out.append(tuple(tuple(v[t] for v in chain) for t in range(n)))
            return
        last = chain[-1]
        # successors: componentwise >= and distinct
        ranges = [range(last[t], dims[t] + 1) for t in range(n)]
        for nxt in itertools.product(*ranges):
            if nxt != last:
                rec(chain + [nxt])

    for start in itertools.product(*[range(d + 1) for d in dims]):
        rec([start])
    _SIMPLEX_CACHE[ck] = out
    return out


def _compositions(total, parts):
    if parts == 0:
        if total == 0:
            yield ()
        return
    for x in range(total + 1):
        for rest in _compositions(total - x, parts - 1):
            yield (x,) + rest


# ---------------------------------------------------------------------------
# families

class Family:
    """Lazily computed universal values of a natural transformation."""

    def __init__(self, ring, source, target, chi, degree, fn, name=None):
        self.ring = ring
        self.source = tuple(source)
        self.target = tuple(target)
        self.chi = tuple(chi)
        self.degree = degree
        self._fn = fn
        self._memo = {}
        self.name = name
        self.sblock = block_of(self.source)
        self.tblocks = blocks(self.target)
        self.inv = invert(self.chi)

    def at(self, e):
        e = tuple(e)
        r = self._memo.get(e)
        if r is None:
            r = self._memo[e] = self._fn(e)
        return r

    def slot_dims(self, e):
        """Simplex dimension seen by each target slot."""
        return tuple(e[self.sblock[self.inv[t]]] for t in range(len(self.chi)))

    def __repr__(self):
        return (f"Family({self.name or '?'}: {self.source} -> {self.target}, "
                f"chi={self.chi}, deg={self.degree})")


def identity_family(ring, v):
    v = tuple(v)
    sb = block_of(v)

    def fn(e):
        return {tuple(tuple(range(e[sb[s]] + 1)) for s in range(len(sb))): 1}

    return Family(ring, v, v, identity_perm(len(sb)), 0, fn, "id")


def perm_family(ring, source, chi):
    """χ_*: permute slots, blocks move with the Koszul sign of their degrees."""
    source = tuple(source)
    bp = block_perm(source, chi)
    if bp is None:
        raise ValueError(f"{chi} does not map blocks of {source} onto blocks")
    target, bmap = bp
    sb = block_of(source)
    inv = invert(chi)

    def fn(e):
        key = tuple(tuple(range(e[sb[inv[t]]] + 1)) for t in range(len(chi)))
        return {key: reorder_sign(bmap, e)}

    return Family(ring, source, target, chi, 0, fn, "perm")


def sh_family(ring, v):
    """sh_{v}: N^{v} -> N^{(|v|)} on universal elements."""
    v = tuple(v)
    sb = block_of(v)
    from .simplicial import multi_shuffle_maps

    def fn(e):
        out = {}
        for sign, alphas in multi_shuffle_maps(list(e)):
            key = tuple(alphas[sb[s]] for s in range(len(sb)))
            _add(out, key, sign)
        return out

    return Family(ring, v, (sum(v),), identity_perm(sum(v)), 0, fn, "sh")


def aw_family(ring, v):
    """AW_{v}: N^{(|v|)} -> N^{v} on universal elements."""
    v = tuple(v)
    tb = block_of(v)
    from .simplicial import multi_aw_maps

    def fn(e):
        (n,) = e
        out = {}
        for alphas in multi_aw_maps(n, len(v)):
            key = tuple(alphas[tb[t]] for t in range(len(tb)))
            _add(out, key, 1)
        return out

    return Family(ring, (sum(v),), v, identity_perm(sum(v)), 0, fn, "aw")


def compose_family(g, f):
    """g ∘ f; g is evaluated on the simplices classified by f's value."""
    if g.source != f.target:
        raise ValueError(f"boundary mismatch {f.target} vs {g.source}")
    red = f.ring.red
    ginv = g.inv
    chi = compose_perm(g.chi, f.chi)

    def fn(e):
        out = {}
        for key, c in f.at(e).items():
            q = _key_levels(key, f.tblocks)
            for gkey, c2 in g.at(q).items():
                new = tuple(tuple(key[ginv[u]][t] for t in gkey[u]) for u in range(len(gkey)))
                if _nondeg_all(new, g.tblocks):
                    _add(out, new, c * c2)
        return {k: red(v) for k, v in out.items() if red(v)}

    return Family(f.ring, f.source, g.target, chi, f.degree + g.degree, fn, "comp")


def tensor_family(f, g):
    """f ⊗ g with the Koszul sign (-1)^{|g||e_f|}."""
    nf = len(f.source)
    nsf = len(f.chi)
    chi = f.chi + tuple(nsf + c for c in g.chi)

    def fn(e):
        e1, e2 = e[:nf], e[nf:]
        s = -1 if (g.degree * sum(e1)) % 2 else 1
        out = {}
        x2 = g.at(e2)
        for k1, c1 in f.at(e1).items():
            for k2, c2 in x2.items():
                _add(out, k1 + k2, s * c1 * c2)
        return out

    return Family(f.ring, f.source + g.source, f.target + g.target, chi,
                  f.degree + g.degree, fn, "tensor")


def par_family(k, f):
    """Par_{k⃗}(f): replicate each slot coordinate along the diagonal."""
    k = tuple(k)
    if len(k) != len(f.chi):
        raise ValueError("l(k) must equal the number of slots")
    source = par_object(k, f.source)
    target = par_target(k, f.chi, f.target)
    chi = blowup(f.chi, k)
    finv = f.inv
    reps = [k[finv[u]] for u in range(len(f.chi))]

    def fn(e):
        out = {}
        for key, c in f.at(e).items():
            new = tuple(itertools.chain.from_iterable([key[u]] * reps[u]
                                                      for u in range(len(key))))
            _add(out, new, c)
        return out

    return Family(f.ring, source, target, chi, f.degree, fn, "par")


def linear_family(terms, like):
    """Σ c_i f_i for families with equal boundaries, degree and grading."""
    ring = like.ring
    red = ring.red
    for c, f in terms:
        if (f.source, f.target, f.chi, f.degree) != (like.source, like.target,
                                                     like.chi, like.degree):
            raise ValueError("incompatible families in a linear combination")

    def fn(e):
        out = {}
        for c, f in terms:
            for key, v in f.at(e).items():
                _add(out, key, c * v)
        return {k: red(v) for k, v in out.items() if red(v)}

    return Family(ring, like.source, like.target, like.chi, like.degree, fn, "sum")


def zero_family(ring, source, target, chi, degree):
    return Family(ring, source, target, chi, degree, lambda e: {}, "zero")


def _coface_push(key, slots, l):
    """Compose the coordinates of the given slots with δ_l."""
    return tuple(tuple(v + 1 if (t in slots and v >= l) else v for v in a)
                 for t, a in enumerate(key))


def _codegen_push(key, slots, l):
    return tuple(tuple(v - 1 if (t in slots and v > l) else v for v in a)
                 for t, a in enumerate(key))


def _d_target(key, tblocks):
    """Differential of N^{m⃗}(Δ^{p⃗}) on a key."""
    out = {}
    sign = 1
    for b in tblocks:
        if not b:
            continue
        q = len(key[b[0]]) - 1
        if q > 0:
            for i in range(q + 1):
                new = list(key)
                for t in b:
                    new[t] = key[t][:i] + key[t][i + 1:]
                new = tuple(new)
                if _nondeg(new, b):
                    _add(out, new, sign * (-1 if i % 2 else 1))
        if q % 2:
            sign = -sign
    return out


def _coface_terms(fam, e, x_of):
    """Σ_j (-1)^{e_<j} Σ_l (-1)^l δ_l^{(j)} x_{e-u_j}."""
    out = {}
    for j in range(len(e)):
        if e[j] == 0:
            continue
        ej = e[:j] + (e[j] - 1,) + e[j + 1:]
        sj = -1 if sum(e[:j]) % 2 else 1
        slots = {t for t in range(len(fam.chi)) if fam.sblock[fam.inv[t]] == j}
        for key, c in x_of(ej).items():
            for l in range(e[j] + 1):
                _add(out, _coface_push(key, slots, l), sj * c * (-1 if l % 2 else 1))
    return out


def boundary_family(f):
    """D f = d f - (-1)^{|f|} f d on universal values."""
    red = f.ring.red
    s = -1 if f.degree % 2 else 1

    def fn(e):
        out = {}
        for key, c in f.at(e).items():
            for k2, v in _d_target(key, f.tblocks).items():
                _add(out, k2, c * v)
        for key, c in _coface_terms(f, e, f.at).items():
            _add(out, key, -s * c)
        return {k: red(v) for k, v in out.items() if red(v)}

    return Family(f.ring, f.source, f.target, f.chi, f.degree - 1, fn, "D")


def family_equal(f, g, E):
    """Compare universal values for all e⃗ with |e⃗| <= E."""
    if (f.source, f.target, f.chi) != (g.source, g.target, g.chi):
        return False
    red = f.ring.red
    for e in _all_e(len(f.source), E):
        a, b = f.at(e), g.at(e)
        for k in set(a) | set(b):
            if red(a.get(k, 0) - b.get(k, 0)):
                return False
    return True


def _all_e(n, E):
    for tot in range(E + 1):
        yield from _compositions(tot, n)


# ---------------------------------------------------------------------------
# the complexes Ñ_χ(k⃗, m⃗)

def ambient_keys(fam_shape, e, total):
    """All nondegenerate keys of degree ``total`` at e⃗."""
    source, target, chi = fam_shape
    sb = block_of(source)
    inv = invert(chi)
    tbl = blocks(target)
    dims = [e[sb[inv[t]]] for t in range(len(chi))]
    out = []
    for qs in _compositions(total, len(tbl)):
        parts = [nondeg_simplices([dims[t] for t in b], q) for b, q in zip(tbl, qs)]
        for combo in itertools.product(*parts):
            key = [None] * len(chi)
            for b, simp in zip(tbl, combo):
                for t, a in zip(b, simp):
                    key[t] = a
            out.append(tuple(key))
    return out


def _codegeneracy_rows(fam_shape, e, keys):
    """Rows of the conormalization constraints σ_l^{(j)} x = 0."""
    source, target, chi = fam_shape
    sb = block_of(source)
    inv = invert(chi)
    tbl = blocks(target)
    rows = {}
    for j in range(len(e)):
        slots = {t for t in range(len(chi)) if sb[inv[t]] == j}
        for l in range(e[j]):
            for col, key in enumerate(keys):
                new = _codegen_push(key, slots, l)
                if _nondeg_all(new, tbl):
                    rows.setdefault((j, l, new), {})[col] = 1
    return rows


class NatComplex:
    """The truncated complex Ñ_χ(k⃗, m⃗) on e⃗ with |e⃗| <= E.

    Families supported on |e⃗| > E form a subcomplex, so the truncation is a
    quotient complex.
    """

    def __init__(self, ring, source, target, chi, E):
        self.ring = ring
        self.shape = (tuple(source), tuple(target), tuple(chi))
        self.E = E
        self.es = list(_all_e(len(source), E))
        self._cycles = {}
        self._amb = {}
        self._cn = {}
        self._sig = {}
        fam = Family(ring, source, target, chi, 0, lambda e: {})
        self._fam = fam

    def ambient(self, e, d):
        k = (e, d)
        r = self._amb.get(k)
        if r is None:
            tot = sum(e) + d
            r = ambient_keys(self.shape, e, tot) if tot >= 0 else []
            self._amb[k] = r
        return r

    def conormal_basis(self, e, d):
        """Basis (sparse dicts over keys) of the conormalized part."""
        k = (e, d)
        r = self._cn.get(k)
        if r is None:
            keys = self.ambient(e, d)
            rows = _codegeneracy_rows(self.shape, e, keys)
            M = SparseMatrix.from_rows(len(rows), len(keys), self.ring,
                                       {i: row for i, row in enumerate(rows.values())})
            r = [{keys[c]: v for c, v in vec.items()} for vec in kernel_basis(M, sparse=True)]
            self._cn[k] = r
        return r

    def basis(self, d):
        """Basis of Ñ_d: pairs (e⃗, vector)."""
        return [(e, v) for e in self.es for v in self.conormal_basis(e, d)]

    def apply_D(self, d, e, vec):
        """D of a family supported at e⃗, as {(e', key): coeff}."""
        fam = self._fam
        s = -1 if d % 2 else 1
        out = {}
        for key, c in vec.items():
            for k2, v in _d_target(key, fam.tblocks).items():
                _add(out, (e, k2), c * v)
        # contributions to e + u_j from the coface terms
        for j in range(len(e)):
            e2 = e[:j] + (e[j] + 1,) + e[j + 1:]
            if sum(e2) > self.E:
                continue
            sj = -1 if sum(e2[:j]) % 2 else 1
            slots = {t for t in range(len(fam.chi)) if fam.sblock[fam.inv[t]] == j}
            for key, c in vec.items():
                for l in range(e2[j] + 1):
                    _add(out, (e2, _coface_push(key, slots, l)),
                         -s * sj * c * (-1 if l % 2 else 1))
        return out

    def _sigma(self, e, d):
        k = (e, d)
        r = self._sig.get(k)
        if r is None:
            keys = self.ambient(e, d)
            rows = list(_codegeneracy_rows(self.shape, e, keys).values())
            M = SparseMatrix.from_rows(len(rows), len(keys), self.ring, dict(enumerate(rows)))
            r = self._sig[k] = (rows, rank(M))
        return r

    def dim(self, d):
        return sum(len(self.ambient(e, d)) - self._sigma(e, d)[1] for e in self.es)

    def d_rank(self, d):
        """Rank of D restricted to Ñ_d = ker Σ, as rank [D; Σ] - rank Σ."""
        offset, off = {}, 0
        for e in self.es:
            offset[e] = off
            off += len(self.ambient(e, d))
        if off == 0:
            return 0
        rows = []
        sig_rank = 0
        out_rows = {}
        for e in self.es:
            o = offset[e]
            srows, r = self._sigma(e, d)
            sig_rank += r
            rows.extend({o + c: v for c, v in row.items()} for row in srows)
            for c, key in enumerate(self.ambient(e, d)):
                for k2, v in self.apply_D(d, e, {key: 1}).items():
                    out_rows.setdefault(k2, {})[o + c] = v
        rows.extend(out_rows.values())
        M = SparseMatrix.from_rows(len(rows), off, self.ring, dict(enumerate(rows)))
        return rank(M) - sig_rank

    def homology(self, degrees):
        out = {}
        ranks = {}
        for d in degrees:
            for dd in (d, d + 1):
                if dd not in ranks:
                    ranks[dd] = self.d_rank(dd)
            out[d] = self.dim(d) - ranks[d] - ranks[d + 1]
        return out


class QuotientNatComplex(NatComplex):
    """The same complex modelled as the quotient by coface images δ_l, l >= 1.

    Conormalized cochains are a complement of that subcomplex, so the two
    models have isomorphic homology.  The quotient has a monomial basis: keys
    whose coordinates in each source block hit every vertex 1..e_j.
    """

    def _block_slots(self):
        fam = self._fam
        return [[t for t in range(len(fam.chi)) if fam.sblock[fam.inv[t]] == j]
                for j in range(len(self.shape[0]))]

    def _survives(self, e, key, bslots):
        for j, slots in enumerate(bslots):
            hit = set()
            for t in slots:
                hit.update(key[t])
            if any(v not in hit for v in range(1, e[j] + 1)):
                return False
        return True

    def quotient_basis(self, e, d):
        k = ("q", e, d)
        r = self._cn.get(k)
        if r is None:
            bs = self._block_slots()
            r = self._cn[k] = [key for key in self.ambient(e, d) if self._survives(e, key, bs)]
        return r

    def dim(self, d):
        return sum(len(self.quotient_basis(e, d)) for e in self.es)

    def d_rank(self, d):
        bs = self._block_slots()
        rows = {}
        col = 0
        for e in self.es:
            for key in self.quotient_basis(e, d):
                for (e2, k2), v in self.apply_D(d, e, {key: 1}).items():
                    if self._survives(e2, k2, bs):
                        rows.setdefault((e2, k2), {})[col] = v
                col += 1
        if not col:
            return 0
        M = SparseMatrix.from_rows(len(rows), col, self.ring, dict(enumerate(rows.values())))
        return rank(M)


def sigma_components(source, target):
    """All slot permutations χ for which Ñ_χ(source, target) is defined."""
    n = sum(source)
    return list(itertools.permutations(range(n)))


def nat_homology(ring, source, target, E, degrees, chis=None):
    """Homology of the truncated Ñ^Σ(source, target), summed over χ."""
    chis = chis if chis is not None else sigma_components(source, target)
    total = {d: 0 for d in degrees}
    per = {}
    for chi in chis:
        h = QuotientNatComplex(ring, source, target, chi, E).homology(degrees)
        per[chi] = h
        for d in degrees:
            total[d] += h[d]
    return total, per


def nat_basis(source, target, chi, d, D, ring=QQ):
    """Basis of the degree-d natural chain-level cycles on test degrees <= D.

    Each element is a dict e⃗ -> {key: coeff}.
    """
    C = NatComplex(ring, source, target, chi, D)
    basis = C.basis(d)
    if not basis:
        return []
    cols = [C.apply_D(d, e, v) for e, v in basis]
    index = {}
    for col in cols:
        for k in col:
            index.setdefault(k, len(index))
    M = SparseMatrix(len(index), len(cols), ring,
                     {(index[k], j): v for j, col in enumerate(cols) for k, v in col.items()})
    out = []
    for z in kernel_basis(M, sparse=True):
        fam = {}
        for j, c in z.items():
            e, v = basis[j]
            acc = fam.setdefault(e, {})
            for key, x in v.items():
                _add(acc, key, c * x)
        out.append({e: v for e, v in fam.items() if v})
    return out


class GuardExceeded(Exception):
    pass


def contract_check(n, D, ring=QQ, guard=True):
    """Homology report for Ñ^Σ((n),(n)) and, for n >= 2, Ñ^Σ((1)^n,(n)).

    Test degrees run to D + 1; degrees 0..D-1 are reported.
    """
    if guard and (n > 3 or D > 4):
        raise GuardExceeded(f"n={n}, D={D} exceeds n <= 3, D <= 4")
    E = D + 1
    degrees = list(range(0, D))
    # no proven bound on test degrees is known, so the window is flagged
    report = {"n": n, "D": D, "test_degree_bound": E, "bound_kind": "heuristic",
              "expected_H0": math.factorial(n)}
    h, _ = nat_homology(ring, (n,), (n,), E, degrees)
    report["square"] = h
    if n >= 2:
        h2, _ = nat_homology(ring, (1,) * n, (n,), E, degrees)
        report["mixed"] = h2
    ok = h[0] == math.factorial(n) and all(h[d] == 0 for d in degrees if d > 0)
    if n >= 2:
        ok = ok and report["mixed"] == h
    report["ok"] = ok
    return report


# ---------------------------------------------------------------------------
# solving for homotopies in Ñ

def solve_family(target_fam, degree):
    """A family x of the given degree with D x = target_fam, solved over e⃗.

    target_fam must be a cycle of degree ``degree - 1``.  The value at each
    e⃗ is the solution of d_G x_{e⃗} = y_{e⃗} + (-1)^d (coface terms), taken in
    the conormalized part.  Raises ValueError when no solution exists.
    """
    ring = target_fam.ring
    shape = (target_fam.source, target_fam.target, target_fam.chi)
    s = -1 if degree % 2 else 1
    def fn(e):
        y = dict(target_fam.at(e))
        for key, c in _coface_terms(target_fam, e, fam.at).items():
            _add(y, key, s * c)
        keys = ambient_keys(shape, e, sum(e) + degree)
        if not keys:
            if any(ring.red(v) for v in y.values()):
                raise ValueError(f"no solution at e={e}")
            return {}
        rows = {}
        for j, key in enumerate(keys):
            for k2, v in _d_target(key, target_fam.tblocks).items():
                rows.setdefault(("d", k2), {})[j] = v
        for rk, row in _codegeneracy_rows(shape, e, keys).items():
            rows[("s", rk)] = row
        for k in y:
            rows.setdefault(("d", k), {})
        order = list(rows)
        ridx = {r: i for i, r in enumerate(order)}
        M = SparseMatrix.from_rows(len(order), len(keys), ring,
                                   {ridx[r]: row for r, row in rows.items()})
        b = [0] * len(order)
        for k, v in y.items():
            b[ridx[("d", k)]] = v
        x = solve(M, b, sparse=True)
        if x is None:
            raise ValueError(f"no solution at e={e}")
        return {keys[c]: v for c, v in x.items()}

    fam = Family(ring, target_fam.source, target_fam.target, target_fam.chi, degree, fn,
                 "solved")
    return fam


# ---------------------------------------------------------------------------
# evaluation on simplicial modules

def evaluate_family(fam, modules, max_degree=None):
    """The chain map N^{k⃗}(A⃗) -> N^{m⃗}(A_{χ^{-1}(1)}, ...) of a family."""
    src, sblocks_mod, snorms = nvec_complex(fam.source, modules)
    inv = fam.inv
    tmods = [modules[inv[t]] for t in range(len(fam.chi))]
    tgt, tblocks_mod, tnorms = nvec_complex(fam.target, tmods)
    D = modules[0].D if max_degree is None else max_degree
    from .simplicial import _truncated
    src = _truncated(src, D)
    red = fam.ring.red

    def fun(lab):
        levels = tuple(n.complex.degree_of(x) for n, x in zip(snorms, lab))
        x = fam.at(levels)
        # expand the sections into pure slot tensors
        pure = {(): 1}
        for j, (n, xj) in enumerate(zip(snorms, lab)):
            vec = n.section(levels[j], xj)
            pure = {k + tuple(y): c * v for k, c in pure.items() for y, v in vec.items()}
        out = {}
        for slots, c in pure.items():
            for key, c2 in x.items():
                parts = []
                for bj, b in enumerate(fam.tblocks):
                    vecs = []
                    for t in b:
                        s = inv[t]
                        p = levels[fam.sblock[s]]
                        vecs.append(modules[s].apply(key[t], p, {slots[s]: 1}))
                    q = len(key[b[0]]) - 1 if b else 0
                    parts.append(tnorms[bj].project(q, _vec_tensor(vecs)))
                for k, v in _vec_tensor(parts).items():
                    _add(out, k, c * c2 * v)
        return {k: red(v) for k, v in out.items() if red(v)}

    hi = D + fam.degree
    from .simplicial import _truncated as tr
    tgt = tr(tgt, max(hi, 0))
    return ChainMap.from_function(src, tgt, fun, shift=fam.degree)


# ---------------------------------------------------------------------------
# symbolic elements

class Handle:
    """A named homotopy: a family of given degree solving D h = boundary."""

    def __init__(self, name, boundary, degree):
        self.name = name
        self.boundary = boundary
        self.degree = degree
        self.source = boundary.source
        self.target = boundary.target
        self.chi = boundary.chi
        self._fams = {}

    def family(self, ring):
        f = self._fams.get(ring)
        if f is None:
            f = self._fams[ring] = solve_family(self.boundary.family(ring), self.degree)
        return f


HANDLES = {}


def register_handle(name, boundary, degree=None):
    """Register a homotopy h with D h = boundary (a NatElement)."""
    if degree is None:
        degree = boundary.degree + 1
    h = Handle(name, boundary, degree)
    HANDLES[name] = h
    return h


def atom_info(a):
    """(source, target, chi, degree) of an atom."""
    kind = a[0]
    if kind == "perm":
        src, chi = a[1], a[2]
        return src, block_perm(src, chi)[0], chi, 0
    if kind == "sh":
        v = a[1]
        return v, (sum(v),), identity_perm(sum(v)), 0
    if kind == "aw":
        v = a[1]
        return (sum(v),), v, identity_perm(sum(v)), 0
    if kind == "h":
        h = HANDLES[a[1]]
        return h.source, h.target, h.chi, h.degree
    if kind == "pad":
        pre, inner, post = a[1], a[2], a[3]
        s, t, chi, d = atom_info(inner)
        npre, ninner = sum(pre), len(chi)
        full = identity_perm(npre) + tuple(npre + c for c in chi) + \
            tuple(npre + ninner + i for i in range(sum(post)))
        return pre + s + post, pre + t + post, full, d
    if kind == "par":
        k, inner = a[1], a[2]
        s, t, chi, d = atom_info(inner)
        return par_object(k, s), par_target(k, chi, t), blowup(chi, k), d
    raise ValueError(f"unknown atom {a!r}")


def _pad_full(pre, inner, post):
    return atom_info(("pad", pre, inner, post))


def canon_atom(a):
    """Canonical form of an atom; returns None for an identity."""
    kind = a[0]
    if kind == "perm":
        src, chi = tuple(a[1]), tuple(a[2])
        if chi == identity_perm(len(chi)):
            return None
        return ("perm", src, chi)
    if kind in ("sh", "aw"):
        v = tuple(a[1])
        if len(v) <= 1:
            return None
        return (kind, v)
    if kind == "h":
        return a
    if kind == "pad":
        pre, inner, post = tuple(a[1]), a[2], tuple(a[3])
        inner_c = canon_atom(inner)
        if inner_c is None:
            return None
        if inner_c[0] == "pad":
            return canon_atom(("pad", pre + inner_c[1], inner_c[2], inner_c[3] + post))
        if inner_c[0] == "perm":
            s, t, chi, d = _pad_full(pre, inner_c, post)
            return canon_atom(("perm", s, chi))
        if not pre and not post:
            return inner_c
        return ("pad", pre, inner_c, post)
    if kind == "par":
        k, inner = tuple(a[1]), a[2]
        inner_c = canon_atom(inner)
        if inner_c is None:
            return None
        if all(x == 1 for x in k):
            return inner_c
        ik = inner_c[0]
        if ik == "perm":
            s = par_object(k, inner_c[1])
            return canon_atom(("perm", s, blowup(inner_c[2], k)))
        if ik in ("sh", "aw"):
            return canon_atom((ik, par_object(k, inner_c[1])))
        if ik == "par":
            return canon_atom(("par", par_object(k, inner_c[1]), inner_c[2]))
        if ik == "pad":
            pre, mid, post = inner_c[1], inner_c[2], inner_c[3]
            npre, nmid = sum(pre), len(atom_info(mid)[2])
            kpre, kmid, kpost = k[:npre], k[npre:npre + nmid], k[npre + nmid:]
            return canon_atom(("pad", par_object(kpre, pre), ("par", kmid, mid),
                               par_object(kpost, post)))
        return ("par", k, inner_c)
    raise ValueError(f"unknown atom {a!r}")


def canon_word(atoms):
    """Canonical atom word (application order): merge perms, drop identities."""
    out = []
    for a in atoms:
        c = canon_atom(a)
        if c is None:
            continue
        if c[0] == "perm" and out and out[-1][0] == "perm":
            prev = out.pop()
            merged = canon_atom(("perm", prev[1], compose_perm(c[2], prev[2])))
            if merged is not None:
                out.append(merged)
            continue
        out.append(c)
    return tuple(out)


_FAMILY_CACHE = {}


def atom_family(a, ring):
    key = (a, ring)
    f = _FAMILY_CACHE.get(key)
    if f is not None:
        return f
    kind = a[0]
    if kind == "perm":
        f = perm_family(ring, a[1], a[2])
    elif kind == "sh":
        f = sh_family(ring, a[1])
    elif kind == "aw":
        f = aw_family(ring, a[1])
    elif kind == "h":
        f = HANDLES[a[1]].family(ring)
    elif kind == "pad":
        pre, inner, post = a[1], a[2], a[3]
        f = atom_family(inner, ring)
        if pre:
            f = tensor_family(identity_family(ring, pre), f)
        if post:
            f = tensor_family(f, identity_family(ring, post))
    elif kind == "par":
        f = par_family(a[1], atom_family(a[2], ring))
    else:
        raise ValueError(f"unknown atom {a!r}")
    _FAMILY_CACHE[key] = f
    return f


def word_family(word, source, ring):
    key = (word, tuple(source), ring)
    f = _FAMILY_CACHE.get(key)
    if f is not None:
        return f
    f = identity_family(ring, source)
    for a in word:
        f = compose_family(atom_family(a, ring), f)
    _FAMILY_CACHE[key] = f
    return f


def atom_boundary(a):
    """D(atom) as a dict {word: coeff}; only handles have nonzero boundary."""
    kind = a[0]
    if kind == "h":
        return dict(HANDLES[a[1]].boundary.body)
    if kind == "pad":
        inner = atom_boundary(a[2])
        return {tuple(("pad", a[1], x, a[3]) for x in w): c for w, c in inner.items()}
    if kind == "par":
        inner = atom_boundary(a[2])
        return {tuple(("par", a[1], x) for x in w): c for w, c in inner.items()}
    return {}


class NatElement:
    """A linear combination of atom words with common boundary data."""

    def __init__(self, source, target, chi, degree, body):
        self.source = tuple(source)
        self.target = tuple(target)
        self.chi = tuple(chi)
        self.degree = degree
        clean = {}
        for w, c in body.items():
            w = canon_word(w)
            v = clean.get(w, 0) + c
            if v:
                clean[w] = v
            else:
                clean.pop(w, None)
        self.body = clean

    @classmethod
    def atom(cls, a):
        s, t, chi, d = atom_info(a)
        return cls(s, t, chi, d, {(a,): 1})

    @classmethod
    def identity(cls, v):
        v = tuple(v)
        return cls(v, v, identity_perm(sum(v)), 0, {(): 1})

    def is_zero(self):
        return not self.body

    def __add__(self, other):
        self._check_like(other)
        body = dict(self.body)
        for w, c in other.body.items():
            body[w] = body.get(w, 0) + c
        return NatElement(self.source, self.target, self.chi, self.degree, body)

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, s):
        return NatElement(self.source, self.target, self.chi, self.degree,
                          {w: c * s for w, c in self.body.items()})

    def _check_like(self, other):
        if (self.source, self.target, self.chi, self.degree) != \
                (other.source, other.target, other.chi, other.degree):
            raise ValueError("incompatible NatElements")

    def __eq__(self, other):
        return isinstance(other, NatElement) and \
            (self.source, self.target, self.chi, self.degree, self.body) == \
            (other.source, other.target, other.chi, other.degree, other.body)

    def __hash__(self):
        return hash((self.source, self.target, self.chi, self.degree,
                     frozenset(self.body.items())))

    def family(self, ring):
        terms = [(c, word_family(w, self.source, ring)) for w, c in self.body.items()]
        like = Family(ring, self.source, self.target, self.chi, self.degree, None)
        return linear_family([(ring(c), f) for c, f in terms], like)

    def __repr__(self):
        return f"NatElement({self.source}->{self.target}, deg={self.degree}, {self.body})"


def compose_nat(g, f):
    """g ∘ f: the words of f followed by those of g."""
    if g.source != f.target:
        raise ValueError(f"boundary mismatch {f.target} vs {g.source}")
    body = {}
    for wf, cf in f.body.items():
        for wg, cg in g.body.items():
            w = wf + wg
            body[w] = body.get(w, 0) + cf * cg
    return NatElement(f.source, g.target, compose_perm(g.chi, f.chi),
                      f.degree + g.degree, body)


def pad_nat(pre, x, post):
    pre, post = tuple(pre), tuple(post)
    body = {tuple(("pad", pre, a, post) for a in w): c for w, c in x.body.items()}
    npre = sum(pre)
    full = identity_perm(npre) + tuple(npre + c for c in x.chi) + \
        tuple(npre + len(x.chi) + i for i in range(sum(post)))
    return NatElement(pre + x.source + post, pre + x.target + post, full, x.degree, body)


def tensor_nat(x, y):
    """x ⊗ y = (x ⊗ id) ∘ (id ⊗ y) with the Koszul sign of moving y past x."""
    a = pad_nat((), x, y.target)
    b = pad_nat(x.source, y, ())
    return compose_nat(a, b)


def par_nat(k, x):
    k = tuple(k)
    if len(k) != sum(x.source):
        raise ValueError("l(k) must equal |source|")
    body = {tuple(("par", k, a) for a in w): c for w, c in x.body.items()}
    return NatElement(par_object(k, x.source), par_target(k, x.chi, x.target),
                      blowup(x.chi, k), x.degree, body)


def nat_boundary(x):
    """Leibniz rule on words (application order, later atoms act last)."""
    body = {}
    for w, c in x.body.items():
        degs = [atom_info(a)[3] for a in w]
        for i, a in enumerate(w):
            later = sum(degs[i + 1:])
            s = -1 if later % 2 else 1
            for w2, c2 in atom_boundary(a).items():
                nw = w[:i] + w2 + w[i + 1:]
                body[nw] = body.get(nw, 0) + s * c * c2
    return NatElement(x.source, x.target, x.chi, x.degree - 1, body)


def shuffle_nat(v):
    return NatElement.atom(("sh", tuple(v))) if len(v) > 1 else NatElement.identity((sum(v),))


def aw_nat(v):
    return NatElement.atom(("aw", tuple(v))) if len(v) > 1 else NatElement.identity((sum(v),))


def perm_nat(source, chi):
    source, chi = tuple(source), tuple(chi)
    if chi == identity_perm(len(chi)):
        return NatElement.identity(source)
    return NatElement.atom(("perm", source, chi))


def handle_nat(name):
    return NatElement.atom(("h", name))


def evaluate(x, modules, max_degree=None, ring=None):
    """Evaluate a NatElement on a tuple of simplicial modules."""
    if len(modules) != sum(x.source):
        raise ValueError("tuple length does not match the source vector")
    ring = ring or modules[0].ring
    return evaluate_family(x.family(ring), modules, max_degree)

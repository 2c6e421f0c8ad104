"""Truncated simplicial modules, the normalized Moore complex, and the
shuffle and Alexander-Whitney maps.

A monotone map [q] -> [p] is a tuple ``(a(0), ..., a(q))``.  A simplicial
module is given by level bases and a function ``op(alpha, p, label)``
returning alpha^*(label) as a dict over the level-q basis.  Degeneracies
are indexed from 0.
"""
import itertools
import math

from .chain import ChainMap, FreeComplex, complex_from_function, tensor_many
from .exactlin import SparseMatrix, Solver, _Echelon


def face_map(p, i):
    """The coface δ_i : [p-1] -> [p] skipping i."""
    return tuple(j if j < i else j + 1 for j in range(p))


def degen_map(p, i):
    """The codegeneracy σ_i : [p+1] -> [p] hitting i twice."""
    return tuple(j if j <= i else j - 1 for j in range(p + 2))


def compose_maps(f, g):
    """f ∘ g for monotone maps as tuples."""
    return tuple(f[t] for t in g)


def word_map(kind, word, p):
    """The monotone map whose pullback is the written operator word.

    ``word = (w_1, ..., w_k)`` denotes w_1 w_2 ... w_k acting on level p
    (so w_k is applied first).
    """
    alpha = tuple(range(p + 1))
    level = p
    for w in reversed(word):
        if kind == "s":
            step = degen_map(level, w)
            level += 1
        else:
            step = face_map(level, w)
            level -= 1
        alpha = compose_maps(alpha, step)
    return alpha


def monotone_maps(q, p):
    """All monotone maps [q] -> [p]."""
    return list(itertools.combinations_with_replacement(range(p + 1), q + 1))


def is_injective(alpha):
    return all(alpha[t] < alpha[t + 1] for t in range(len(alpha) - 1))


class SimplicialModule:
    """Levels 0..D with free bases and an operator function."""

    def __init__(self, ring, D, bases, op, check=True):
        self.ring = ring
        self.D = D
        self.bases = [list(b) for b in bases]
        if len(self.bases) != D + 1:
            raise ValueError("need one basis per level 0..D")
        self._op = op
        self._index = {}
        self._cache = {}
        if check:
            self.check()

    def basis(self, p):
        return self.bases[p] if 0 <= p <= self.D else []

    def rank(self, p):
        return len(self.basis(p))

    def ranks(self):
        return tuple(len(b) for b in self.bases)

    def index(self, p):
        idx = self._index.get(p)
        if idx is None:
            idx = self._index[p] = {b: i for i, b in enumerate(self.basis(p))}
        return idx

    def apply_label(self, alpha, p, label):
        """alpha^*(label) for alpha : [q] -> [p] and a level-p label."""
        key = (alpha, p, label)
        r = self._cache.get(key)
        if r is None:
            r = self._cache[key] = self._op(alpha, p, label)
        return r

    def apply(self, alpha, p, vec):
        """alpha^* on a vector at level p (alpha may miss the top vertex)."""
        out = {}
        for lab, c in vec.items():
            for y, v in self.apply_label(alpha, p, lab).items():
                out[y] = out.get(y, 0) + c * v
        red = self.ring.red
        return {y: red(v) for y, v in out.items() if red(v)}

    def matrix(self, alpha, p):
        q = len(alpha) - 1
        idx = self.index(q)
        cols = [self.apply(alpha, p, {b: 1}) for b in self.basis(p)]
        data = {}
        for j, col in enumerate(cols):
            for y, v in col.items():
                data.setdefault(idx[y], {})[j] = v
        return SparseMatrix.from_rows(self.rank(q), self.rank(p), self.ring, data)

    def face(self, p, i):
        return self.matrix(face_map(p, i), p)

    def degen(self, p, i):
        return self.matrix(degen_map(p, i), p)

    def check(self):
        """Assert the simplicial identities on all stored levels."""
        D = self.D
        for p in range(1, D + 1):
            for j in range(p + 1):
                for i in range(j):
                    if p >= 2 and self.face(p - 1, i) @ self.face(p, j) != \
                            self.face(p - 1, j - 1) @ self.face(p, i):
                        raise ValueError(f"d_{i} d_{j} identity fails at level {p}")
        for p in range(D):
            for j in range(p + 1):
                one = SparseMatrix.identity(self.rank(p), self.ring)
                if self.face(p + 1, j) @ self.degen(p, j) != one or \
                        self.face(p + 1, j + 1) @ self.degen(p, j) != one:
                    raise ValueError(f"d s_{j} = id fails at level {p}")
                for i in range(p + 2):
                    if i < j:
                        lhs = self.face(p + 1, i) @ self.degen(p, j)
                        rhs = self.degen(p - 1, j - 1) @ self.face(p, i)
                    elif i > j + 1:
                        lhs = self.face(p + 1, i) @ self.degen(p, j)
                        rhs = self.degen(p - 1, j) @ self.face(p, i - 1)
                    else:
                        continue
                    if lhs != rhs:
                        raise ValueError(f"d_{i} s_{j} identity fails at level {p}")
            if p + 2 <= D:
                for j in range(p + 1):
                    for i in range(j + 1):
                        if self.degen(p + 1, i) @ self.degen(p, j) != \
                                self.degen(p + 1, j + 1) @ self.degen(p, i):
                            raise ValueError(f"s_{i} s_{j} identity fails at level {p}")

    def __repr__(self):
        return f"SimplicialModule({self.ring.name}, D={self.D}, ranks={self.ranks()})"


def from_matrices(ring, D, bases, faces, degens, check=True):
    """Build a module from explicit face and degeneracy matrices."""
    bases = [list(b) for b in bases]
    index = [{b: i for i, b in enumerate(bs)} for bs in bases]

    def op(alpha, p, label):
        vec = {index[p][label]: 1}
        level = p
        # factor alpha = (injection) ∘ (surjection); pull back the injection
        # first by faces (largest missing vertex first), then degeneracies
        image = sorted(set(alpha))
        for j in reversed(range(p + 1)):
            if j not in image:
                vec = faces[(level, j)].apply(vec)
                level -= 1
        for t in range(len(alpha) - 1):
            if alpha[t] == alpha[t + 1]:
                vec = degens[(level, t)].apply(vec)
                level += 1
        return {bases[level][i]: v for i, v in vec.items()}

    return SimplicialModule(ring, D, bases, op, check=check)


def representable(p, D, ring):
    """k[Δ^p] truncated at level D; level q basis = monotone maps [q] -> [p]."""
    if p > D:
        raise ValueError(f"representable Δ^{p} needs D >= {p}")
    bases = [monotone_maps(q, p) for q in range(D + 1)]

    def op(alpha, level, x):
        return {compose_maps(x, alpha): 1}

    return SimplicialModule(ring, D, bases, op, check=False)


def constant(ring, D, rank=1):
    bases = [[(i,) for i in range(rank)] for _ in range(D + 1)]
    return SimplicialModule(ring, D, bases, lambda alpha, p, x: {x: 1}, check=False)


def deg_tensor_many(modules):
    """Levelwise tensor product; labels are tuples."""
    ring = modules[0].ring
    D = modules[0].D
    for m in modules:
        if m.D != D:
            raise ValueError("truncation mismatch")
        if m.ring != ring:
            raise ValueError("ring mismatch")
    bases = [list(itertools.product(*[m.basis(q) for m in modules])) for q in range(D + 1)]

    def op(alpha, p, lab):
        out = {(): 1}
        for m, x in zip(modules, lab):
            img = m.apply(alpha, p, {x: 1})
            out = {k + (y,): c * v for k, c in out.items() for y, v in img.items()}
        return out

    return SimplicialModule(ring, D, bases, op, check=False)


def deg_tensor(A, B):
    """A ⊗̂ B; labels are pairs."""
    return deg_tensor_many([A, B])


def direct_sum(A, B):
    bases = [[(0, x) for x in A.basis(q)] + [(1, y) for y in B.basis(q)]
             for q in range(A.D + 1)]

    def op(alpha, p, lab):
        M = A if lab[0] == 0 else B
        return {(lab[0], y): v for y, v in M.apply(alpha, p, {lab[1]: 1}).items()}

    return SimplicialModule(A.ring, A.D, bases, op, check=False)


def _surjection_factor(f):
    """Epi-mono factorisation of a monotone map: (surjection, injection)."""
    image = sorted(set(f))
    pos = {v: i for i, v in enumerate(image)}
    return tuple(pos[v] for v in f), tuple(image)


def from_complex(C, D):
    """The simplicial module with normalized complex C (degrees >= 0).

    Level n has basis (η, c) for surjections η : [n] -> [k] and c in C_k.
    A map θ pulls (η, c) back to (η', c) when η θ is surjective onto [k],
    to (η', d c) when the factorisation misses only the top vertex, and to
    zero otherwise.
    """
    bases = []
    for n in range(D + 1):
        level = []
        for k in range(min(n, C.window[1]) + 1):
            for eta in monotone_maps(n, k):
                if len(set(eta)) == k + 1:
                    level.extend((eta, c) for c in C.basis(k))
        bases.append(level)

    def op(alpha, p, lab):
        eta, c = lab
        k = eta[-1]
        comp = compose_maps(eta, alpha)
        sur, inj = _surjection_factor(comp)
        if len(inj) == k + 1:
            return {(sur, c): 1}
        if len(inj) == k and inj == tuple(range(k)):
            return {(sur, y): v for y, v in C.d_label(c).items()}
        return {}

    return SimplicialModule(C.ring, D, bases, op, check=False)


class Normalized:
    """N(M) with an explicit section and projection.

    The degenerate submodule at each level is row reduced; basis vectors of
    non-pivot columns span a complement and label N(M).
    """

    def __init__(self, M):
        self.M = M
        ring = M.ring
        self.ech = []
        basis = {}
        for p in range(M.D + 1):
            ech = _Echelon(ring)
            idx = M.index(p)
            if p > 0:
                for b in M.basis(p - 1):
                    for i in range(p):
                        v = M.apply(degen_map(p - 1, i), p - 1, {b: 1})
                        ech.add({idx[y]: c for y, c in v.items()})
            self.ech.append(ech)
            piv = set(ech.order)
            basis[p] = [b for j, b in enumerate(M.basis(p)) if j not in piv]

        def dfun(lab):
            p = self._level[lab]
            if p == 0:
                return {}
            vec = {}
            for i in range(p + 1):
                s = -1 if i % 2 else 1
                for y, c in M.apply(face_map(p, i), p, {lab: 1}).items():
                    vec[y] = vec.get(y, 0) + s * c
            return self.project(p - 1, vec)

        self._level = {b: p for p, bs in basis.items() for b in bs}
        self.complex = complex_from_function(ring, basis, dfun, window=(0, M.D), check=False)

    def section(self, p, label):
        return {label: 1}

    def project(self, p, vec):
        """Class of a level-p vector in N(M)_p, as {N label: coeff}."""
        M = self.M
        idx = M.index(p)
        basis = M.basis(p)
        r = self.ech[p].reduce({idx[y]: c for y, c in vec.items() if c})
        return {basis[j]: c for j, c in r.items()}


def normalize(M):
    """The normalized Moore complex N(M) as a FreeComplex."""
    return Normalized(M).complex


def _normalized(M):
    n = getattr(M, "_normalized", None)
    if n is None:
        n = M._normalized = Normalized(M)
    return n


# ---------------------------------------------------------------------------
# shuffle and Alexander-Whitney formulas

def _shuffle_sign(perm):
    inv = sum(1 for i in range(len(perm)) for j in range(i + 1, len(perm)) if perm[i] > perm[j])
    return -1 if inv % 2 else 1


def shuffle(p, q):
    """Terms (sign, left word, right word) of sh on N_p ⊗ N_q.

    Words are written in composition order with 0-based indices: the term
    s_{σ(p+q)}...s_{σ(p+1)} a ⊗ s_{σ(p)}...s_{σ(1)} b is stored as
    (sgn σ, (σ(p+q)-1, ..., σ(p+1)-1), (σ(p)-1, ..., σ(1)-1)).
    """
    out = []
    n = p + q
    for first in itertools.combinations(range(1, n + 1), p):
        rest = [i for i in range(1, n + 1) if i not in first]
        sigma = list(first) + rest
        left = tuple(s - 1 for s in reversed(rest))
        right = tuple(s - 1 for s in reversed(first))
        out.append((_shuffle_sign(sigma), left, right))
    return out


def aw(n):
    """Terms (left face word, right face word) of AW in degree n."""
    return [(tuple(range(i + 1, n + 1)), (0,) * i) for i in range(n + 1)]


def multi_shuffle_maps(ps):
    """(sign, [alpha_1, ..., alpha_r]) over (p_1,...,p_r)-shuffles.

    alpha_j : [n] -> [p_j] is the surjection applied to the j-th factor.
    """
    r = len(ps)
    out = []
    # assign each of the n steps to a factor; factor j advances at its steps
    for assign in _multiset_perms([j for j in range(r) for _ in range(ps[j])]):
        sigma = []
        pos = [[] for _ in range(r)]
        for t, j in enumerate(assign):
            pos[j].append(t)
        for j in range(r):
            sigma.extend(pos[j])
        alphas = []
        for j in range(r):
            level = 0
            alpha = [0]
            for t, jj in enumerate(assign):
                if jj == j:
                    level += 1
                alpha.append(level)
            alphas.append(tuple(alpha))
        out.append((_shuffle_sign(sigma), alphas))
    return out


def _multiset_perms(items):
    if not items:
        yield ()
        return
    seen = set()
    for i, x in enumerate(items):
        if x in seen:
            continue
        seen.add(x)
        for rest in _multiset_perms(items[:i] + items[i + 1:]):
            yield (x,) + rest


def multi_aw_maps(n, r):
    """[alpha_1, ..., alpha_r] over splittings n = i_1 + ... + i_r (front to back)."""
    out = []
    for cuts in itertools.combinations_with_replacement(range(n + 1), r - 1):
        bounds = (0,) + cuts + (n,)
        out.append([tuple(range(bounds[j], bounds[j + 1] + 1)) for j in range(r)])
    return out


def _vec_tensor(vecs):
    out = {(): 1}
    for v in vecs:
        out = {k + (y,): c * w for k, c in out.items() for y, w in v.items()}
    return out


def _shuffle_binary(A, B, a, p, b, q):
    """Unnormalized shuffle of level vectors a in A_p, b in B_q."""
    out = {}
    for sign, alphas in multi_shuffle_maps([p, q]):
        va = A.apply(alphas[0], p, a)
        vb = B.apply(alphas[1], q, b)
        for (x, y), c in _vec_tensor([va, vb]).items():
            out[(x, y)] = out.get((x, y), 0) + sign * c
    return out


def _flatten(lab, shape):
    """Flatten a nested label following ``shape`` (nested tuples of ints)."""
    if isinstance(shape, int):
        return (lab,)
    out = ()
    for x, s in zip(lab, shape):
        out += _flatten(x, s)
    return out


def _blocks(kvec):
    out, i = [], 0
    for k in kvec:
        out.append(list(range(i, i + k)))
        i += k
    return out


def nvec_complex(kvec, modules):
    """N^{k⃗}(A_1..A_k) = ⊗_j N(⊗̂ of block j), with the block product modules."""
    if len(modules) != sum(kvec):
        raise ValueError("tuple length does not match the vector")
    blocks = [deg_tensor_many([modules[i] for i in b]) for b in _blocks(kvec)]
    norms = [_normalized(B) for B in blocks]
    return tensor_many([n.complex for n in norms]), blocks, norms


def _truncated(C, hi):
    basis = {n: C.basis(n) for n in C.degrees if n <= hi}
    diff = {n: C.d(n) for n in basis if n - 1 in basis or n == C.window[0]}
    return FreeComplex(C.ring, basis, diff, window=(C.window[0], min(hi, C.window[1])),
                       check=False)


def _bracket_shuffle(mods, vecs, levels, bracketing):
    """Shuffle of vectors (one per block product) into the total product."""
    if bracketing is None or len(mods) <= 2:
        out = {}
        for sign, alphas in multi_shuffle_maps(levels):
            parts = [M.apply(al, p, v) for M, al, p, v in zip(mods, alphas, levels, vecs)]
            for k, c in _vec_tensor(parts).items():
                out[k] = out.get(k, 0) + sign * c
        return out
    if bracketing == "left":
        cur_mod, cur_vec, cur_p = mods[0], vecs[0], levels[0]
        for M, v, p in zip(mods[1:], vecs[1:], levels[1:]):
            cur_vec = _shuffle_binary(cur_mod, M, cur_vec, cur_p, v, p)
            cur_mod = deg_tensor(cur_mod, M)
            cur_p += p
        return {_flatten(k, _left_shape(len(mods))): c for k, c in cur_vec.items()}
    if bracketing == "right":
        cur_mod, cur_vec, cur_p = mods[-1], vecs[-1], levels[-1]
        for M, v, p in zip(reversed(mods[:-1]), reversed(vecs[:-1]), reversed(levels[:-1])):
            cur_vec = _shuffle_binary(M, cur_mod, v, p, cur_vec, cur_p)
            cur_mod = deg_tensor(M, cur_mod)
            cur_p += p
        return {_flatten(k, _right_shape(len(mods))): c for k, c in cur_vec.items()}
    raise ValueError(f"unknown bracketing {bracketing!r}")


def _left_shape(r):
    shape = 0
    for _ in range(r - 1):
        shape = (shape, 0)
    return shape


def _right_shape(r):
    shape = 0
    for _ in range(r - 1):
        shape = (0, shape)
    return shape


def _flat_key(k):
    # block-product labels are tuples; concatenate them
    out = ()
    for part in k:
        out += tuple(part)
    return out


def shuffle_vec(kvec, modules, bracketing=None, max_degree=None):
    """sh_{k⃗}: N^{k⃗}(A⃗) -> N^{(|k⃗|)}(A⃗) as a ChainMap.

    ``bracketing`` selects the direct multi-shuffle (None) or an iterated
    binary shuffle ("left" or "right").
    """
    src, blocks, norms = nvec_complex(kvec, modules)
    total = deg_tensor_many(list(modules))
    tn = _normalized(total)
    D = modules[0].D if max_degree is None else max_degree
    src = _truncated(src, D)

    def fun(lab):
        levels = [n.complex.degree_of(x) for n, x in zip(norms, lab)]
        vecs = [n.section(p, x) for n, p, x in zip(norms, levels, lab)]
        out = _bracket_shuffle(blocks, vecs, levels, bracketing)
        out = {_flat_key(k): c for k, c in out.items()}
        return tn.project(sum(levels), out)

    return ChainMap.from_function(src, tn.complex, fun)


def aw_vec(kvec, modules, bracketing=None, max_degree=None):
    """AW_{k⃗}: N^{(|k⃗|)}(A⃗) -> N^{k⃗}(A⃗) as a ChainMap."""
    tgt, blocks, norms = nvec_complex(kvec, modules)
    total = deg_tensor_many(list(modules))
    tn = _normalized(total)
    D = modules[0].D if max_degree is None else max_degree
    src = _truncated(tn.complex, D)
    bl = _blocks(kvec)
    r = len(kvec)

    def split(lab):
        return [tuple(lab[i] for i in b) for b in bl]

    def fun(lab):
        n = tn.complex.degree_of(lab)
        out = {}
        for alphas in _aw_terms(n, r, bracketing):
            parts = []
            for j, al in enumerate(alphas):
                block_vec = blocks[j].apply(al, n, {split(lab)[j]: 1})
                parts.append(norms[j].project(len(al) - 1, block_vec))
            for k, c in _vec_tensor(parts).items():
                out[k] = out.get(k, 0) + c
        return out

    return ChainMap.from_function(src, tgt, fun)


def _aw_terms(n, r, bracketing):
    if bracketing is None or r <= 2:
        return multi_aw_maps(n, r)
    # iterated binary AW: split front/back repeatedly
    if bracketing == "left":
        # ((1 2) 3): first split off the last factor, then split the front
        out = []
        for alphas in _aw_terms_left(0, n, r):
            out.append(alphas)
        return out
    if bracketing == "right":
        return list(_aw_terms_right(0, n, r))
    raise ValueError(f"unknown bracketing {bracketing!r}")


def _aw_terms_left(start, end, r):
    if r == 1:
        yield [tuple(range(start, end + 1))]
        return
    for cut in range(start, end + 1):
        for front in _aw_terms_left(start, cut, r - 1):
            yield front + [tuple(range(cut, end + 1))]


def _aw_terms_right(start, end, r):
    if r == 1:
        yield [tuple(range(start, end + 1))]
        return
    for cut in range(start, end + 1):
        for back in _aw_terms_right(cut, end, r - 1):
            yield [tuple(range(start, cut + 1))] + back


def shuffle_map(A, B, max_degree=None):
    """sh: N(A) ⊗ N(B) -> N(A ⊗̂ B)."""
    return shuffle_vec((1, 1), [A, B], max_degree=max_degree)


def aw_map(A, B, max_degree=None):
    """AW: N(A ⊗̂ B) -> N(A) ⊗ N(B)."""
    return aw_vec((1, 1), [A, B], max_degree=max_degree)


def induced_map(f, A, B):
    """N(f) for a levelwise map given as f(p, label) -> {label: coeff}."""
    NA, NB = _normalized(A), _normalized(B)

    def fun(lab):
        p = NA.complex.degree_of(lab)
        return NB.project(p, f(p, lab))

    return ChainMap.from_function(NA.complex, NB.complex, fun)


# ---------------------------------------------------------------------------
# homotopies

class Homotopy:
    """h_n : C_n -> C'_{n+1} with dh + hd = g - f on the window."""

    def __init__(self, f, g, mats, window):
        self.f, self.g = f, g
        self.mats = mats
        self.window = window

    def matrix(self, n):
        m = self.mats.get(n)
        if m is None:
            m = SparseMatrix.zero(self.f.target.dim(n + 1), self.f.source.dim(n),
                                  self.f.source.ring)
        return m

    def as_map(self):
        return ChainMap(self.f.source, self.f.target,
                        {n: self.matrix(n) for n in range(self.window[0], self.window[1] + 1)},
                        self.f.shift + 1)

    def verify(self):
        C, T = self.f.source, self.f.target
        for n in range(self.window[0], self.window[1] + 1):
            lhs = T.d(n + 1) @ self.matrix(n) + self.matrix(n - 1) @ C.d(n)
            if lhs != self.g.matrix(n) - self.f.matrix(n):
                return False
        return True


def solve_homotopy(f, g, window=None):
    """Find h with dh + hd = g - f on the window, or None.

    Solved degree by degree from the bottom of the window.
    """
    if f.source is not g.source and f.source.dims() != g.source.dims():
        raise ValueError("source mismatch")
    if f.shift != g.shift or f.shift != 0:
        raise ValueError("degree-0 maps with equal shift required")
    ring = f.source.ring
    if not ring.is_field:
        raise ValueError("field coefficients required")
    C, T = f.source, f.target
    if window is None:
        window = (C.window[0], C.window[1])
    mats = {}
    for n in range(window[0], window[1] + 1):
        diff = g.matrix(n) - f.matrix(n)
        prev = mats.get(n - 1)
        if prev is not None:
            diff = diff - prev @ C.d(n)
        solver = Solver(T.d(n + 1))
        cols = []
        for j, col in enumerate(diff.columns()):
            x = solver.solve(col)
            if x is None:
                return None
            cols.append(x)
        mats[n] = SparseMatrix.from_columns(T.dim(n + 1), ring, cols) if cols else \
            SparseMatrix.zero(T.dim(n + 1), 0, ring)
    h = Homotopy(f, g, mats, window)
    return h


# ---------------------------------------------------------------------------
# simplicial chain complexes

class SimplicialChainComplex:
    """A simplicial object in chain complexes.

    Bases are indexed by (internal degree a, level p); ``op`` acts on labels
    preserving a, and ``dfun(p, label)`` is the internal differential.
    """

    def __init__(self, ring, D, window, bases, op, dfun, check=True):
        self.ring = ring
        self.D = D
        self.window = tuple(window)
        self.bases = {k: list(v) for k, v in bases.items()}
        self._op = op
        self._dfun = dfun
        self._deg = {}
        for (a, p), labs in self.bases.items():
            for b in labs:
                self._deg[(p, b)] = a
        if check:
            self.check()

    def basis(self, a, p):
        return self.bases.get((a, p), [])

    def internal_degree(self, p, label):
        return self._deg[(p, label)]

    def op(self, alpha, p, label):
        return self._op(alpha, p, label)

    def d(self, p, label):
        return self._dfun(p, label)

    def level(self, a):
        """The simplicial module in internal degree a."""
        bases = [self.basis(a, p) for p in range(self.D + 1)]
        return SimplicialModule(self.ring, self.D, bases, self._op, check=False)

    def check(self):
        for a in range(self.window[0], self.window[1] + 1):
            self.level(a).check()
        for (a, p), labs in self.bases.items():
            for b in labs:
                dd = {}
                for y, c in self.d(p, b).items():
                    for z, v in self.d(p, y).items():
                        dd[z] = dd.get(z, 0) + c * v
                if any(self.ring.red(v) for v in dd.values()):
                    raise ValueError("internal d^2 != 0")
                for i in range(p + 1 if p > 0 else 0):
                    alpha = face_map(p, i)
                    lhs = _apply_lin(lambda y: self.d(p - 1, y), self.op(alpha, p, b))
                    rhs = _apply_lin(lambda y: self.op(alpha, p, y), self.d(p, b))
                    if _diff_nonzero(lhs, rhs, self.ring):
                        raise ValueError("faces are not chain maps")


def _apply_lin(fun, vec):
    out = {}
    for y, c in vec.items():
        for z, v in fun(y).items():
            out[z] = out.get(z, 0) + c * v
    return out


def _diff_nonzero(u, v, ring):
    keys = set(u) | set(v)
    return any(ring.red(u.get(k, 0) - v.get(k, 0)) for k in keys)


def n_epsilon(A):
    """The bicomplex (internal degree a, level p) of levelwise normalizations.

    d_h is the internal differential and d_v = (-1)^a Σ (-1)^i d_i.
    """
    from .chain import multicomplex_from_function
    norms = {a: Normalized(A.level(a)) for a in range(A.window[0], A.window[1] + 1)}
    cells = {}
    for a, n in norms.items():
        for p in range(A.D + 1):
            cells[(a, p)] = n.complex.basis(p)

    def dh(cell, lab):
        a, p = cell
        if a - 1 not in norms:
            return {}
        return norms[a - 1].project(p, A.d(p, lab))

    def dv(cell, lab):
        a, p = cell
        s = -1 if a % 2 else 1
        return {y: s * c for y, c in norms[a].complex.d_label(lab).items()}

    return multicomplex_from_function(A.ring, 2, cells, [dh, dv])


def n_delta(A):
    from .chain import totalize
    return totalize(n_epsilon(A))


def binomial(n, k):
    return math.comb(n, k)

"""Free chain complexes, multicomplexes and chain maps with Koszul signs.

Every complex lives on an explicit bounded window of degrees and is zero
outside it.  Basis labels are arbitrary hashable terms; tensor products use
tuples of labels.
"""
import itertools

from .exactlin import SparseMatrix, homology_rank


class FreeComplex:
    """A bounded complex of free modules with named bases.

    ``basis`` maps degree -> list of labels and ``diff`` maps degree n to
    the matrix of d_n : C_n -> C_{n-1}.
    """

    def __init__(self, ring, basis, diff=None, window=None, check=True):
        self.ring = ring
        self._basis = {n: list(b) for n, b in basis.items()}
        if window is None:
            degs = list(self._basis) or [0]
            window = (min(degs), max(degs))
        self.window = tuple(window)
        self._index = {}
        self._degree_of = None
        self._diff = {}
        for n, m in (diff or {}).items():
            if m.shape != (self.dim(n - 1), self.dim(n)):
                raise ValueError(f"d_{n} has shape {m.shape}, expected "
                                 f"{(self.dim(n - 1), self.dim(n))}")
            if m.ring != ring:
                raise ValueError("ring mismatch in differential")
            self._diff[n] = m
        if check:
            self.check()

    @property
    def degrees(self):
        return range(self.window[0], self.window[1] + 1)

    def basis(self, n):
        return self._basis.get(n, [])

    def dim(self, n):
        return len(self._basis.get(n, ()))

    def dims(self):
        return tuple(self.dim(n) for n in self.degrees)

    def index(self, n):
        idx = self._index.get(n)
        if idx is None:
            idx = {b: i for i, b in enumerate(self.basis(n))}
            self._index[n] = idx
        return idx

    def degree_of(self, label):
        if self._degree_of is None:
            self._degree_of = {b: n for n, bs in self._basis.items() for b in bs}
        return self._degree_of[label]

    def d(self, n):
        m = self._diff.get(n)
        if m is None:
            m = SparseMatrix.zero(self.dim(n - 1), self.dim(n), self.ring)
        return m

    def d_label(self, label):
        """Differential of a basis element as {label: coeff}."""
        n = self.degree_of(label)
        col = self.d(n).column(self.index(n)[label])
        lower = self.basis(n - 1)
        return {lower[r]: v for r, v in col.items()}

    def check(self):
        for n in self.degrees:
            if not (self.d(n - 1) @ self.d(n)).is_zero():
                raise ValueError(f"d_{n - 1} d_{n} != 0")

    def __repr__(self):
        return f"FreeComplex({self.ring.name}, window={self.window}, dims={self.dims()})"


def _matrix_from_images(ring, target_index, n_rows, images):
    """Assemble a matrix whose j-th column is the dict images[j]."""
    data = {}
    red = ring.red
    for j, img in enumerate(images):
        for lab, v in img.items():
            v = red(v)
            if v:
                r = target_index[lab]
                row = data.setdefault(r, {})
                x = red(row.get(j, 0) + v)
                if x:
                    row[j] = x
                else:
                    row.pop(j)
    return SparseMatrix.from_rows(n_rows, len(images), ring, data)


def complex_from_function(ring, basis, dfun, window=None, check=True):
    """Build a FreeComplex from a differential given on labels."""
    tmp = FreeComplex(ring, basis, window=window, check=False)
    diff = {}
    for n in tmp.degrees:
        if tmp.dim(n) == 0:
            continue
        diff[n] = _matrix_from_images(ring, tmp.index(n - 1), tmp.dim(n - 1),
                                      [dfun(b) for b in tmp.basis(n)])
    return FreeComplex(ring, basis, diff, window=tmp.window, check=check)


def tensor_many(factors, max_degree=None):
    """Tensor product of complexes; labels are tuples of factor labels.

    d(x_1 ⊗ ... ⊗ x_k) = sum_i (-1)^{|x_1|+...+|x_{i-1}|} x_1 ⊗ ... ⊗ dx_i ⊗ ...
    With max_degree the product is truncated above that degree.
    """
    if not factors:
        raise ValueError("need at least one factor")
    ring = factors[0].ring
    for f in factors:
        if f.ring != ring:
            raise ValueError("ring mismatch in tensor product")
    lo = sum(f.window[0] for f in factors)
    hi = sum(f.window[1] for f in factors)
    if max_degree is not None:
        hi = min(hi, max_degree)
    basis = {}
    for n in range(lo, hi + 1):
        labs = []
        for degs in _compositions(n, [f.window for f in factors]):
            labs.extend(itertools.product(*[f.basis(d) for f, d in zip(factors, degs)]))
        basis[n] = labs

    def dfun(lab):
        out = {}
        sign = 1
        for i, (f, x) in enumerate(zip(factors, lab)):
            for y, v in f.d_label(x).items():
                key = lab[:i] + (y,) + lab[i + 1:]
                out[key] = out.get(key, 0) + sign * v
            if f.degree_of(x) % 2:
                sign = -sign
        return out

    return complex_from_function(ring, basis, dfun, window=(lo, hi), check=False)


def tensor(A, B):
    """A ⊗ B with d(a⊗b) = da⊗b + (-1)^{|a|} a⊗db; labels are pairs."""
    return tensor_many([A, B])


def _compositions(n, windows):
    if not windows:
        if n == 0:
            yield ()
        return
    lo, hi = windows[0]
    rest_lo = sum(w[0] for w in windows[1:])
    rest_hi = sum(w[1] for w in windows[1:])
    for d in range(max(lo, n - rest_hi), min(hi, n - rest_lo) + 1):
        for tail in _compositions(n - d, windows[1:]):
            yield (d,) + tail


class ChainMap:
    """A graded map C_n -> C'_{n+shift} between FreeComplexes."""

    def __init__(self, source, target, mats=None, shift=0):
        self.source = source
        self.target = target
        self.shift = shift
        self.mats = {}
        for n, m in (mats or {}).items():
            if m.shape != (target.dim(n + shift), source.dim(n)):
                raise ValueError(f"component {n} has shape {m.shape}")
            self.mats[n] = m

    @classmethod
    def from_function(cls, source, target, fun, shift=0, degrees=None):
        """fun(label) -> {target label: coeff}."""
        ring = source.ring
        mats = {}
        for n in degrees if degrees is not None else source.degrees:
            if source.dim(n) == 0:
                continue
            mats[n] = _matrix_from_images(ring, target.index(n + shift),
                                          target.dim(n + shift),
                                          [fun(b) for b in source.basis(n)])
        return cls(source, target, mats, shift)

    @classmethod
    def identity(cls, C):
        return cls(C, C, {n: SparseMatrix.identity(C.dim(n), C.ring) for n in C.degrees})

    def matrix(self, n):
        m = self.mats.get(n)
        if m is None:
            m = SparseMatrix.zero(self.target.dim(n + self.shift), self.source.dim(n),
                                  self.source.ring)
        return m

    def apply_label(self, label):
        n = self.source.degree_of(label)
        col = self.matrix(n).column(self.source.index(n)[label])
        tb = self.target.basis(n + self.shift)
        return {tb[r]: v for r, v in col.items()}

    def compose(self, other):
        """self ∘ other."""
        # degrees missing from mats are zero or outside the valid window
        mats = {}
        for n, m in other.mats.items():
            k = n + other.shift
            if k in self.mats or self.source.dim(k) == 0:
                mats[n] = self.matrix(k) @ m
        return ChainMap(other.source, self.target, mats, self.shift + other.shift)

    def __matmul__(self, other):
        return self.compose(other)

    def _lin(self, other, sign):
        if other.shift != self.shift:
            raise ValueError("shift mismatch")
        degs = set(self.mats) | set(other.mats)
        mats = {n: self.matrix(n) + other.matrix(n).scale(sign) for n in degs}
        return ChainMap(self.source, self.target, mats, self.shift)

    def __add__(self, other):
        return self._lin(other, 1)

    def __sub__(self, other):
        return self._lin(other, -1)

    def scale(self, s):
        return ChainMap(self.source, self.target,
                        {n: m.scale(s) for n, m in self.mats.items()}, self.shift)

    def boundary(self, degrees=None):
        """∂f = d f - (-1)^{|f|} f d."""
        s = -1 if self.shift % 2 else 1
        mats = {}
        for n in degrees if degrees is not None else self.source.degrees:
            a = self.target.d(n + self.shift) @ self.matrix(n)
            b = self.matrix(n - 1) @ self.source.d(n)
            mats[n] = a - b.scale(s)
        return ChainMap(self.source, self.target, mats, self.shift - 1)

    def is_zero(self, degrees=None):
        return all(self.matrix(n).is_zero()
                   for n in (degrees if degrees is not None else self.source.degrees))

    def equals(self, other, degrees=None):
        if self.shift != other.shift:
            return False
        degs = degrees if degrees is not None else self.source.degrees
        return all(self.matrix(n) == other.matrix(n) for n in degs)

    def is_chain_map(self, degrees=None):
        degs = degrees if degrees is not None else self.source.degrees
        return self.boundary(degs).is_zero(degs)

    def __repr__(self):
        return f"ChainMap(shift={self.shift}, degrees={sorted(self.mats)})"


def tensor_maps(maps, source=None, target=None):
    """(f_1 ⊗ ... ⊗ f_k)(x_1 ⊗ ...) with the Koszul sign (-1)^{|f_j||x_i|}, i<j."""
    if source is None:
        source = tensor_many([f.source for f in maps])
    if target is None:
        target = tensor_many([f.target for f in maps])

    def fun(lab):
        out = {(): 1}
        passed = 0
        for f, x in zip(maps, lab):
            img = f.apply_label(x)
            sign = -1 if (f.shift * passed) % 2 else 1
            out = {k + (y,): c * v * sign for k, c in out.items() for y, v in img.items()}
            passed += f.source.degree_of(x)
        return out

    return ChainMap.from_function(source, target, fun, sum(f.shift for f in maps))


def twist(A, B):
    """a ⊗ b -> (-1)^{|a||b|} b ⊗ a."""
    src, tgt = tensor(A, B), tensor(B, A)

    def fun(lab):
        a, b = lab
        s = -1 if (A.degree_of(a) * B.degree_of(b)) % 2 else 1
        return {(b, a): s}

    return ChainMap.from_function(src, tgt, fun)


def homology(C, degrees=None):
    """Per-degree Homology(rank, torsion) of C on the given degrees."""
    out = {}
    for n in degrees if degrees is not None else C.degrees:
        out[n] = homology_rank(C.d(n), C.d(n + 1))
    return out


# ---------------------------------------------------------------------------
# multicomplexes

class MultiComplex:
    """An n-fold complex with anti-commuting differentials.

    ``cells`` maps multidegrees to label lists; ``diffs[(i, p)]`` is the
    matrix of d_i from cell p to cell p - e_i.
    """

    def __init__(self, ring, arity, cells, diffs, check=True):
        self.ring = ring
        self.arity = arity
        self.cells = {tuple(p): list(b) for p, b in cells.items()}
        for p in self.cells:
            if len(p) != arity:
                raise ValueError(f"cell {p} has wrong arity")
        self.diffs = dict(diffs)
        self._index = {}
        if check:
            self.check()

    def basis(self, p):
        return self.cells.get(tuple(p), [])

    def index(self, p):
        idx = self._index.get(p)
        if idx is None:
            idx = {b: i for i, b in enumerate(self.basis(p))}
            self._index[p] = idx
        return idx

    def d(self, i, p):
        p = tuple(p)
        m = self.diffs.get((i, p))
        if m is None:
            q = p[:i] + (p[i] - 1,) + p[i + 1:]
            m = SparseMatrix.zero(len(self.basis(q)), len(self.basis(p)), self.ring)
        return m

    def check(self):
        for p in self.cells:
            for i in range(self.arity):
                qi = p[:i] + (p[i] - 1,) + p[i + 1:]
                for j in range(self.arity):
                    a = self.d(j, qi) @ self.d(i, p)
                    if i == j:
                        if not a.is_zero():
                            raise ValueError(f"d_{i}^2 != 0 at {p}")
                    else:
                        qj = p[:j] + (p[j] - 1,) + p[j + 1:]
                        if not (a + self.d(i, qj) @ self.d(j, p)).is_zero():
                            raise ValueError(f"d_{i}, d_{j} do not anti-commute at {p}")


def multicomplex_from_function(ring, arity, cells, dfuns, check=True):
    """dfuns[i](p, label) -> {label in cell p - e_i: coeff}."""
    tmp = MultiComplex(ring, arity, cells, {}, check=False)
    diffs = {}
    for p in tmp.cells:
        for i in range(arity):
            q = p[:i] + (p[i] - 1,) + p[i + 1:]
            if q not in tmp.cells:
                continue
            diffs[(i, p)] = _matrix_from_images(ring, tmp.index(q), len(tmp.basis(q)),
                                                [dfuns[i](p, b) for b in tmp.basis(p)])
    return MultiComplex(ring, arity, tmp.cells, diffs, check=check)


def product_multicomplex(complexes):
    """The n-fold complex C^1 ⊠ ... ⊠ C^n with d_i = (-1)^{p_1+...+p_{i-1}} d^{C^i}."""
    ring = complexes[0].ring
    n = len(complexes)
    cells = {}
    for degs in itertools.product(*[list(C.degrees) for C in complexes]):
        cells[degs] = list(itertools.product(*[C.basis(d) for C, d in zip(complexes, degs)]))

    def make_d(i):
        def dfun(p, lab):
            sign = -1 if sum(p[:i]) % 2 else 1
            return {lab[:i] + (y,) + lab[i + 1:]: sign * v
                    for y, v in complexes[i].d_label(lab[i]).items()}
        return dfun

    return multicomplex_from_function(ring, n, cells, [make_d(i) for i in range(n)])


def totalize(M):
    """Tot M with labels (multidegree, label) and d = sum of the d_i."""
    basis = {}
    for p, labs in sorted(M.cells.items()):
        basis.setdefault(sum(p), []).extend((p, b) for b in labs)
    if not basis:
        return FreeComplex(M.ring, {0: []})

    def dfun(lab):
        p, b = lab
        out = {}
        for i in range(M.arity):
            q = p[:i] + (p[i] - 1,) + p[i + 1:]
            if q not in M.cells:
                continue
            col = M.d(i, p).column(M.index(p)[b])
            qb = M.basis(q)
            for r, v in col.items():
                out[(q, qb[r])] = out.get((q, qb[r]), 0) + v
        return out

    degs = list(basis)
    return complex_from_function(M.ring, basis, dfun, window=(min(degs), max(degs)),
                                 check=False)


def blowup(chi, degrees):
    """The block permutation of Σ_{p_1+...+p_n} induced by chi.

    Slot i of degree p_i moves to position chi[i]; returns images of the
    p_1+...+p_n points as a tuple.
    """
    n = len(chi)
    if len(degrees) != n or sorted(chi) != list(range(n)):
        raise ValueError("arity mismatch")
    new_degs = [0] * n
    for i in range(n):
        new_degs[chi[i]] = degrees[i]
    offsets = [sum(new_degs[:j]) for j in range(n)]
    out = []
    for i in range(n):
        out.extend(offsets[chi[i]] + t for t in range(degrees[i]))
    return tuple(out)


def reorder_sign(chi, degrees):
    """Sign of the blow-up of chi: (-1)^{sum p_i p_j over inverted pairs}."""
    n = len(chi)
    if len(degrees) != n or sorted(chi) != list(range(n)):
        raise ValueError("arity mismatch")
    e = 0
    for i in range(n):
        for j in range(i + 1, n):
            if chi[i] > chi[j]:
                e += degrees[i] * degrees[j]
    return -1 if e % 2 else 1


def permute_degrees(chi, degrees):
    out = [0] * len(chi)
    for i, p in enumerate(degrees):
        out[chi[i]] = p
    return tuple(out)


def reorder(M, chi):
    """chi·M with differentials conjugated by the g_chi signs.

    Returns (chi·M, g) where g : Tot M -> Tot(chi·M) is the diagonal
    sign isomorphism.
    """
    inv = [0] * len(chi)
    for i, c in enumerate(chi):
        inv[c] = i
    cells = {permute_degrees(chi, p): b for p, b in M.cells.items()}
    diffs = {}
    for (i, p), m in M.diffs.items():
        q = p[:i] + (p[i] - 1,) + p[i + 1:]
        s = reorder_sign(chi, p) * reorder_sign(chi, q)
        diffs[(chi[i], permute_degrees(chi, p))] = m.scale(s)
    N = MultiComplex(M.ring, M.arity, cells, diffs)
    src, tgt = totalize(M), totalize(N)

    def fun(lab):
        p, b = lab
        return {(permute_degrees(chi, p), b): reorder_sign(chi, p)}

    return N, ChainMap.from_function(src, tgt, fun)


# ---------------------------------------------------------------------------
# the isomorphism zeta

class Factor:
    """A multicomplex whose trailing ``nq`` slots are internal tensor slots."""

    def __init__(self, M, nq=1):
        if not 0 <= nq <= M.arity:
            raise ValueError("slot mismatch")
        self.M = M
        self.nq = nq

    @property
    def np(self):
        return self.M.arity - self.nq


def combine(factors):
    """The multicomplex with slot order (p's of all factors, q's of all factors).

    Each slot differential picks up the Koszul sign of the slots preceding
    it in the combined order that did not precede it inside its factor.
    """
    ring = factors[0].M.ring
    nps = [f.np for f in factors]
    nqs = [f.nq for f in factors]
    # position of (factor j, own slot s) in combined order
    pos = []
    p_off = 0
    q_off = sum(nps)
    for f in factors:
        pos.append([p_off + s for s in range(f.np)] + [q_off + s for s in range(f.nq)])
        p_off += f.np
        q_off += f.nq
    arity = sum(nps) + sum(nqs)
    owner = {}
    for j, ps in enumerate(pos):
        for s, c in enumerate(ps):
            owner[c] = (j, s)

    def split(p):
        return [tuple(p[c] for c in pos[j]) for j in range(len(factors))]

    cells = {}
    for combo in itertools.product(*[sorted(f.M.cells) for f in factors]):
        p = [0] * arity
        for j, cell in enumerate(combo):
            for s, c in enumerate(pos[j]):
                p[c] = cell[s]
        cells[tuple(p)] = list(itertools.product(*[f.M.basis(cell)
                                                   for f, cell in zip(factors, combo)]))

    def make_d(c):
        j, s = owner[c]
        fac = factors[j].M

        def dfun(p, lab):
            cell = split(p)[j]
            before = sum(p[:c])
            own = sum(cell[:s])
            sign = -1 if (before - own) % 2 else 1
            q = cell[:s] + (cell[s] - 1,) + cell[s + 1:]
            if q not in fac.cells:
                return {}
            col = fac.d(s, cell).column(fac.index(cell)[lab[j]])
            qb = fac.basis(q)
            return {lab[:j] + (qb[r],) + lab[j + 1:]: sign * v for r, v in col.items()}

        return dfun

    return multicomplex_from_function(ring, arity, cells,
                                      [make_d(c) for c in range(arity)], check=False)


def zeta_sign(ps, qs):
    """(-1)^{sum_j |q_j| (|p_{j+1}| + ... + |p_n|)} for per-factor degree sums."""
    e = 0
    for j in range(len(qs)):
        e += qs[j] * sum(ps[j + 1:])
    return -1 if e % 2 else 1


def zeta(factors):
    """ζ: Tot(combine(factors)) -> Tot(F^1) ⊗ ... ⊗ Tot(F^n).

    Returns (combined multicomplex, chain map).
    """
    M = combine(factors)
    src = totalize(M)
    tots = [totalize(f.M) for f in factors]
    tgt = tensor_many(tots)
    nps = [f.np for f in factors]
    nqs = [f.nq for f in factors]

    def fun(lab):
        p, b = lab
        cells = []
        ps, qs = [], []
        po, qo = 0, sum(nps)
        for j in range(len(factors)):
            pp = p[po:po + nps[j]]
            qq = p[qo:qo + nqs[j]]
            po += nps[j]
            qo += nqs[j]
            cells.append(pp + qq)
            ps.append(sum(pp))
            qs.append(sum(qq))
        key = tuple((cells[j], b[j]) for j in range(len(factors)))
        return {key: zeta_sign(ps, qs)}

    return M, ChainMap.from_function(src, tgt, fun)

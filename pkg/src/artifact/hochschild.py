"""Dg-algebras, the cyclic bar construction and Hochschild complexes.

Basis labels of a dg-algebra are ints; the n-th tensor power (n >= 2) has
tuple labels and A^{⊗1} is A itself.  An element of B^cy_p(A) is a tuple
(x_0, ..., x_p) of basis labels.
"""
import itertools
import json
from fractions import Fraction

from .chain import (ChainMap, FreeComplex, complex_from_function, reorder_sign,
                    tensor_many, zeta_sign)
from .exactlin import QQ
from .natural import blocks
from .simplicial import SimplicialChainComplex, face_map


def _add(acc, key, c):
    v = acc.get(key, 0) + c
    if v:
        acc[key] = v
    else:
        acc.pop(key, None)


def koszul_perm_sign(perm, degrees):
    """Sign of moving items with the given degrees to positions perm[i]."""
    e = 0
    n = len(perm)
    for i in range(n):
        if degrees[i] % 2:
            for j in range(i + 1, n):
                if degrees[j] % 2 and perm[i] > perm[j]:
                    e += 1
    return -1 if e % 2 else 1


class DgAlgebra:
    """A finite dimensional dg-algebra given by structure constants."""

    def __init__(self, ring, basis, degree, unit, mul, diff=None, name="A",
                 names=None, check=True):
        self.ring = ring
        self.basis = list(basis)
        self.degree = dict(degree)
        self.unit = unit
        self._mul = mul
        self._diff = diff or {}
        self.name = name
        self.names = names or {b: str(b) for b in self.basis}
        self._cache = {}
        if check:
            self.check()

    def deg(self, x):
        return self.degree[x]

    def mul(self, x, y):
        k = (x, y)
        r = self._cache.get(k)
        if r is None:
            m = self._mul(x, y) if callable(self._mul) else self._mul.get(k, {})
            r = self._cache[k] = {z: c for z, c in m.items() if self.ring.red(c)}
        return r

    def d(self, x):
        if callable(self._diff):
            return self._diff(x)
        return self._diff.get(x, {})

    def mul_vec(self, u, v):
        out = {}
        for x, a in u.items():
            for y, b in v.items():
                for z, c in self.mul(x, y).items():
                    _add(out, z, a * b * c)
        return out

    def product(self, xs):
        """x_1 ⋯ x_r as a vector; the empty product is the unit."""
        out = {self.unit: 1}
        for x in xs:
            out = self.mul_vec(out, {x: 1})
        return out

    def max_degree(self):
        return max(self.degree.values()) if self.degree else 0

    def check(self):
        red = self.ring.red
        B = self.basis
        for x in B:
            if self.mul(self.unit, x) != {x: 1} or self.mul(x, self.unit) != {x: 1}:
                raise ValueError(f"{self.name}: unit law fails at {x}")
        for x, y, z in itertools.product(B, repeat=3):
            lhs = self.mul_vec(self.mul(x, y), {z: 1})
            rhs = self.mul_vec({x: 1}, self.mul(y, z))
            if any(red(lhs.get(k, 0) - rhs.get(k, 0)) for k in set(lhs) | set(rhs)):
                raise ValueError(f"{self.name}: not associative at {(x, y, z)}")
        for x in B:
            for y, c in self.d(x).items():
                if self.deg(y) != self.deg(x) - 1:
                    raise ValueError(f"{self.name}: d does not have degree -1")
            dd = self._lin_d(self.d(x))
            if any(red(v) for v in dd.values()):
                raise ValueError(f"{self.name}: d^2 != 0")
        for x, y in itertools.product(B, repeat=2):
            lhs = self._lin_d(self.mul(x, y))
            s = -1 if self.deg(x) % 2 else 1
            rhs = self.mul_vec(self.d(x), {y: 1})
            for k, v in self.mul_vec({x: 1}, self.d(y)).items():
                _add(rhs, k, s * v)
            if any(red(lhs.get(k, 0) - rhs.get(k, 0)) for k in set(lhs) | set(rhs)):
                raise ValueError(f"{self.name}: Leibniz rule fails at {(x, y)}")

    def _lin_d(self, vec):
        out = {}
        for x, c in vec.items():
            for y, v in self.d(x).items():
                _add(out, y, c * v)
        return out

    def is_commutative(self):
        red = self.ring.red
        for x, y in itertools.product(self.basis, repeat=2):
            s = -1 if (self.deg(x) * self.deg(y)) % 2 else 1
            a, b = self.mul(x, y), self.mul(y, x)
            if any(red(a.get(k, 0) - s * b.get(k, 0)) for k in set(a) | set(b)):
                return False
        return True

    def __repr__(self):
        return f"DgAlgebra({self.name}, dim={len(self.basis)})"


def tensor_power(A, n):
    """A^{⊗n} with the Koszul product; A^{⊗1} is A and A^{⊗0} is the ground ring."""
    if n == 1:
        return A
    key = ("pow", n)
    cached = A._cache.get(key)
    if cached is not None:
        return cached
    basis = list(itertools.product(A.basis, repeat=n))
    degree = {b: sum(A.deg(x) for x in b) for b in basis}

    def mul(x, y):
        e = 0
        for i in range(n):
            for j in range(i):
                e += A.deg(x[i]) * A.deg(y[j])
        out = {(): (-1 if e % 2 else 1)}
        for a, b in zip(x, y):
            m = A.mul(a, b)
            out = {k + (z,): c * v for k, c in out.items() for z, v in m.items()}
        return out

    def diff(x):
        out = {}
        s = 1
        for i, a in enumerate(x):
            for z, v in A.d(a).items():
                _add(out, x[:i] + (z,) + x[i + 1:], s * v)
            if A.deg(a) % 2:
                s = -s
        return out

    T = DgAlgebra(A.ring, basis, degree, (A.unit,) * n, mul, diff,
                  name=f"{A.name}^{n}", check=False)
    A._cache[key] = T
    return T


def parts(x, k):
    """Components of an element label of A^{⊗k}."""
    return (x,) if k == 1 else x


def join(xs, k):
    return xs[0] if k == 1 else tuple(xs)


# ---------------------------------------------------------------------------
# catalog

def _algebra(ring, names, degrees, table, unit=0, diff=None, name="A"):
    basis = list(range(len(names)))
    mul = {}
    for (i, j), out in table.items():
        mul[(i, j)] = dict(out)
    return DgAlgebra(ring, basis, dict(zip(basis, degrees)), unit, mul, diff or {},
                     name=name, names=dict(zip(basis, names)))


def ground(ring=QQ):
    return _algebra(ring, ["1"], [0], {(0, 0): {0: 1}}, name="k")


def dual_numbers(ring=QQ):
    return _algebra(ring, ["1", "e"], [0, 0],
                    {(0, 0): {0: 1}, (0, 1): {1: 1}, (1, 0): {1: 1}}, name="dual-numbers")


def truncated_poly(N, ring=QQ):
    table = {(i, j): {i + j: 1} for i in range(N + 1) for j in range(N + 1) if i + j <= N}
    return _algebra(ring, [f"x^{i}" for i in range(N + 1)], [0] * (N + 1), table,
                    name=f"poly:{N}")


def group_algebra(n, ring=QQ):
    table = {(i, j): {(i + j) % n: 1} for i in range(n) for j in range(n)}
    return _algebra(ring, [f"g^{i}" for i in range(n)], [0] * n, table, name=f"group:{n}")


def exterior(ring=QQ):
    return _algebra(ring, ["1", "x"], [0, 1],
                    {(0, 0): {0: 1}, (0, 1): {1: 1}, (1, 0): {1: 1}}, name="exterior")


def builtin_algebras(ring=QQ):
    return {
        "k": ground(ring),
        "dual-numbers": dual_numbers(ring),
        "group:2": group_algebra(2, ring),
        "group:3": group_algebra(3, ring),
        "poly:3": truncated_poly(3, ring),
        "exterior": exterior(ring),
    }


def algebra_by_name(name, ring=QQ):
    if name.startswith("group:"):
        return group_algebra(int(name.split(":")[1]), ring)
    if name.startswith("poly:"):
        return truncated_poly(int(name.split(":")[1]), ring)
    table = {"k": ground, "dual-numbers": dual_numbers, "exterior": exterior}
    if name not in table:
        raise KeyError(f"unknown algebra {name!r}")
    return table[name](ring)


def _coeff(x):
    if isinstance(x, str):
        return Fraction(x)
    return x


def algebra_from_json(data, ring=QQ):
    """Load {basis: [{name, degree}], unit, mult: [[i, j, [[k, c]]]], diff: [[i, [[k, c]]]]}."""
    if isinstance(data, str):
        data = json.loads(data)
    names = [b["name"] for b in data["basis"]]
    degrees = [int(b.get("degree", 0)) for b in data["basis"]]
    idx = {n: i for i, n in enumerate(names)}

    def ref(x):
        return idx[x] if isinstance(x, str) else int(x)

    table = {}
    for i, j, out in data["mult"]:
        table[(ref(i), ref(j))] = {ref(k): ring.red(ring(_coeff(c))) for k, c in out}
    diff = {}
    for i, out in data.get("diff", []):
        diff[ref(i)] = {ref(k): ring.red(ring(_coeff(c))) for k, c in out}
    return _algebra(ring, names, degrees, table, unit=ref(data.get("unit", 0)), diff=diff,
                    name=data.get("name", "A"))


# ---------------------------------------------------------------------------
# the cyclic bar construction

def bcy_op(A, alpha, x):
    """θ^*(x) for a monotone θ = alpha : [q] -> [p] on x in B^cy_p(A).

    b_0 = (x_{θ(q)+1} ⋯ x_p)(x_0 ⋯ x_{θ(0)}) with the Koszul sign of the
    rotation, and b_j = x_{θ(j-1)+1} ⋯ x_{θ(j)} (empty products are 1).
    """
    q = len(alpha) - 1
    top = alpha[q]
    tail = x[top + 1:]
    head = x[:top + 1]
    dt = sum(A.deg(y) for y in tail)
    dh = sum(A.deg(y) for y in head)
    sign = -1 if (dt * dh) % 2 else 1
    factors = [A.product(tail + x[:alpha[0] + 1])]
    for j in range(1, q + 1):
        factors.append(A.product(x[alpha[j - 1] + 1:alpha[j] + 1]))
    out = {(): sign}
    for f in factors:
        out = {k + (z,): c * v for k, c in out.items() for z, v in f.items()}
    return out


def bcy_d(A, x):
    """Internal differential on A^{⊗p+1} with Koszul signs."""
    out = {}
    s = 1
    for i, a in enumerate(x):
        for z, v in A.d(a).items():
            _add(out, x[:i] + (z,) + x[i + 1:], s * v)
        if A.deg(a) % 2:
            s = -s
    return out


def _tuples_by_degree(A, length):
    out = {}
    for t in itertools.product(A.basis, repeat=length):
        out.setdefault(sum(A.deg(y) for y in t), []).append(t)
    return out


def bcy(A, D, check=True):
    """B^cy(A) on levels 0..D as a simplicial chain complex."""
    bases = {}
    amax = 0
    for p in range(D + 1):
        for a, ts in _tuples_by_degree(A, p + 1).items():
            bases[(a, p)] = ts
            amax = max(amax, a)

    def op(alpha, p, x):
        return bcy_op(A, alpha, x)

    def dfun(p, x):
        return bcy_d(A, x)

    return SimplicialChainComplex(A.ring, D, (0, amax), bases, op, dfun, check=check)


def is_degenerate(A, x):
    return any(y == A.unit for y in x[1:])


def normalized_tuples(A, length):
    others = [b for b in A.basis if b != A.unit]
    for first in A.basis:
        for rest in itertools.product(others, repeat=length - 1):
            yield (first,) + rest


def project(A, vec):
    """Class in the normalized quotient: drop tuples with a unit at t >= 1."""
    return {x: c for x, c in vec.items() if c and not is_degenerate(A, x)}


_HH_CACHE = {}


def hochschild_complex(A, D, method="fast"):
    """C(A) = N_δ of the levelwise normalized B^cy(A) in total degrees 0..D+1.

    Homology is exact through degree D.  Labels are ((a, p), tuple) with a the
    internal degree and p the simplicial level.  method="generic" builds the
    same complex through bcy, levelwise normalization and totalization.
    """
    key = (id(A), D, method)
    r = _HH_CACHE.get(key)
    if r is not None and r[0] is A:
        return r[1]
    if method == "generic":
        from .simplicial import n_delta
        from .simplicial import _truncated
        C = _truncated(n_delta(bcy(A, D + 1, check=False)), D + 1)
    else:
        C = _hochschild_fast(A, D + 1)
    _HH_CACHE[key] = (A, C)
    return C


def _hochschild_fast(A, top):
    basis = {n: [] for n in range(top + 1)}
    for p in range(top + 1):
        for x in normalized_tuples(A, p + 1):
            a = sum(A.deg(y) for y in x)
            if a + p <= top:
                basis[a + p].append(((a, p), x))
    faces = {p: [face_map(p, i) for i in range(p + 1)] for p in range(1, top + 1)}

    def dfun(lab):
        (a, p), x = lab
        out = {}
        for y, c in bcy_d(A, x).items():
            if not is_degenerate(A, y):
                _add(out, ((a - 1, p), y), c)
        if p > 0:
            s = -1 if a % 2 else 1
            for i, f in enumerate(faces[p]):
                si = s * (-1 if i % 2 else 1)
                for y, c in bcy_op(A, f, x).items():
                    if not is_degenerate(A, y):
                        _add(out, ((a, p - 1), y), si * c)
        return out

    return complex_from_function(A.ring, basis, dfun, window=(0, top), check=False)


def c_vec(A, kvec, D):
    """C^{k⃗}(A) = C(A^{⊗k_1}) ⊗ ... ⊗ C(A^{⊗k_n}) in total degrees 0..D+1."""
    key = (id(A), tuple(kvec), D, "cvec")
    r = _HH_CACHE.get(key)
    if r is not None and r[0] is A:
        return r[1]
    factors = [hochschild_complex(tensor_power(A, k), D) for k in kvec]
    if len(factors) == 1:
        C = factors[0]
        C = FreeComplex(C.ring, {n: [(b,) for b in C.basis(n)] for n in C.degrees},
                        {n: C.d(n) for n in C.degrees}, window=C.window, check=False)
    else:
        C = tensor_many(factors, max_degree=D + 1)
    _HH_CACHE[key] = (A, C)
    return C


# ---------------------------------------------------------------------------
# symmetric monoidal structure

def bcy_monoidal_sign(A, B, a, b):
    """(-1)^{Σ_i |b_i| (Σ_{j>i} |a_j|)}."""
    e = 0
    for i, y in enumerate(b):
        e += B.deg(y) * sum(A.deg(x) for x in a[i + 1:])
    return -1 if e % 2 else 1


class BcyMonoidal:
    """B^cy(A) ⊗̂ B^cy(B) -> B^cy(A ⊗ B) levelwise."""

    def __init__(self, A, B, D):
        self.A, self.B, self.D = A, B, D
        self.AB = tensor_algebra_pair(A, B)

    def apply(self, a, b):
        return bcy_monoidal_sign(self.A, self.B, a, b), tuple(zip(a, b))

    def check_simplicial(self, a, b):
        """Compatibility with every face and degeneracy on (a, b)."""
        p = len(a) - 1
        maps = [face_map(p, i) for i in range(p + 1) if p > 0]
        maps += [tuple(sorted(list(range(p + 1)) + [i])) for i in range(p + 1)]
        s, x = self.apply(a, b)
        for alpha in maps:
            lhs = {}
            for y, c in bcy_op(self.AB, alpha, x).items():
                _add(lhs, y, s * c)
            rhs = {}
            for ya, ca in bcy_op(self.A, alpha, a).items():
                for yb, cb in bcy_op(self.B, alpha, b).items():
                    s2, y = self.apply(ya, yb)
                    _add(rhs, y, s2 * ca * cb)
            if _differs(lhs, rhs, self.A.ring):
                return False
        return True

    def check_chain(self, a, b):
        """Compatibility with the internal differentials."""
        s, x = self.apply(a, b)
        lhs = {}
        for y, c in bcy_d(self.AB, x).items():
            _add(lhs, y, s * c)
        rhs = {}
        da = sum(self.A.deg(y) for y in a)
        for ya, c in bcy_d(self.A, a).items():
            s2, y = self.apply(ya, b)
            _add(rhs, y, s2 * c)
        for yb, c in bcy_d(self.B, b).items():
            s2, y = self.apply(a, yb)
            _add(rhs, y, s2 * c * (-1 if da % 2 else 1))
        return not _differs(lhs, rhs, self.A.ring)

    def check_symmetry(self, a, b):
        """B^cy(τ) ∘ θ = θ ∘ (Koszul twist)."""
        s, x = self.apply(a, b)
        lhs = {}
        e = sum(self.A.deg(u) * self.B.deg(v) for u, v in x)
        lhs[tuple((v, u) for u, v in x)] = s * (-1 if e % 2 else 1)
        da = sum(self.A.deg(y) for y in a)
        db = sum(self.B.deg(y) for y in b)
        s2, y = BcyMonoidal(self.B, self.A, self.D).apply(b, a)
        rhs = {y: s2 * (-1 if (da * db) % 2 else 1)}
        return not _differs(lhs, rhs, self.A.ring)


def bcy_monoidal(A, B, D):
    return BcyMonoidal(A, B, D)


def tensor_algebra_pair(A, B):
    basis = list(itertools.product(A.basis, B.basis))
    degree = {(x, y): A.deg(x) + B.deg(y) for x, y in basis}

    def mul(u, v):
        s = -1 if (B.deg(u[1]) * A.deg(v[0])) % 2 else 1
        out = {}
        for z1, c1 in A.mul(u[0], v[0]).items():
            for z2, c2 in B.mul(u[1], v[1]).items():
                _add(out, (z1, z2), s * c1 * c2)
        return out

    def diff(u):
        out = {}
        for z, c in A.d(u[0]).items():
            _add(out, (z, u[1]), c)
        s = -1 if A.deg(u[0]) % 2 else 1
        for z, c in B.d(u[1]).items():
            _add(out, (u[0], z), s * c)
        return out

    return DgAlgebra(A.ring, basis, degree, (A.unit, B.unit), mul, diff,
                     name=f"{A.name}⊗{B.name}", check=False)


def _differs(u, v, ring):
    return any(ring.red(u.get(k, 0) - v.get(k, 0)) for k in set(u) | set(v))


def theta_perm(n, k):
    """χ_{n,k} ∈ Σ_{nk} as a 1-based dict: i + d k -> d + 1 + (i - 1) n."""
    return {i + d * k: d + 1 + (i - 1) * n for i in range(1, k + 1) for d in range(n)}


def theta_apply(A, ys):
    """θ_n on slot tuples ys[s] = (y^s_0, ..., y^s_p) in B^cy(A).

    Returns (sign, x) with x_t = (y^1_t, ..., y^n_t) in B^cy(A^{⊗n}).
    """
    n = len(ys)
    if n == 1:
        return 1, ys[0]
    k = len(ys[0])
    perm = theta_perm(n, k)
    flat = [y for ysl in ys for y in ysl]
    degs = [A.deg(y) for y in flat]
    s = koszul_perm_sign([perm[i + 1] - 1 for i in range(n * k)], degs)
    return s, tuple(tuple(ys[d][t] for d in range(n)) for t in range(k))


def theta_inverse(A, x, n):
    """θ_n^{-1}: x in B^cy(A^{⊗n}) -> (sign, slot tuples)."""
    if n == 1:
        return 1, (x,)
    ys = tuple(tuple(xt[d] for xt in x) for d in range(n))
    s, _ = theta_apply(A, ys)
    return s, ys


class Theta:
    """θ_n : B^cy(A)^{⊗̂n} -> B^cy(A^{⊗n}) as a levelwise iso."""

    def __init__(self, A, n, D):
        self.A, self.n, self.D = A, n, D

    def apply(self, ys):
        return theta_apply(self.A, ys)

    def inverse(self, x):
        return theta_inverse(self.A, x, self.n)


def theta(A, n, D):
    return Theta(A, n, D)


# ---------------------------------------------------------------------------
# the action of Ñ^Σ and of P^⊗ on C^{k⃗}(A)

def _label_parts(lab):
    """((a, p), x) of each factor of a C^{k⃗} label."""
    return [(f[0][0], f[0][1], f[1]) for f in lab]


def act_family(fam, A, D):
    """The chain map C^{k⃗}(A) -> C^{m⃗}(A) of a family, on degrees <= D.

    Conjugates the family's value on B^cy(A) by θ and ζ: reorder into slot
    tuples, pass ζ^{-1}, the degree past the internal degrees, apply the
    simplicial operators slotwise, reorder the internal degrees by χ, pass
    ζ and reassemble the target tuples.
    """
    kvec, mvec = fam.source, fam.target
    src = c_vec(A, kvec, D)
    tgt = c_vec(A, mvec, D + max(fam.degree, 0))
    inv = fam.inv
    tblocks = blocks(mvec)
    red = A.ring.red
    op_cache = {}

    def op(alpha, y):
        k = (alpha, y)
        r = op_cache.get(k)
        if r is None:
            r = op_cache[k] = bcy_op(A, alpha, y)
        return r

    def fun(lab):
        fs = _label_parts(lab)
        e = tuple(f[1] for f in fs)
        sign = zeta_sign([f[0] for f in fs], list(e))
        slots = []
        for (a, p, x), k in zip(fs, kvec):
            s, ys = theta_inverse(A, x, k)
            sign *= s
            slots.extend(ys)
        slot_deg = [sum(A.deg(y) for y in ys) for ys in slots]
        if (fam.degree * sum(slot_deg)) % 2:
            sign = -sign
        sign *= reorder_sign(fam.chi, slot_deg)
        out = {}
        for key, c in fam.at(e).items():
            per_block = []
            for b in tblocks:
                acc = {(): 1}
                for t in b:
                    img = op(key[t], slots[inv[t]])
                    acc = {k2 + (y,): c1 * c2 for k2, c1 in acc.items() for y, c2 in img.items()}
                vec = {}
                m = len(b)
                q = len(key[b[0]]) - 1
                TA = tensor_power(A, m)
                for ys, c2 in acc.items():
                    s2, x = theta_apply(A, ys) if m > 1 else (1, ys[0])
                    if m > 1:
                        x = tuple(tuple(xt) for xt in x)
                    if is_degenerate(TA, x):
                        continue
                    a2 = sum(TA.deg(y) for y in x)
                    _add(vec, ((a2, q), x), s2 * c2)
                per_block.append(vec)
            tot = {(): c}
            for vec in per_block:
                tot = {k2 + (y,): c1 * c2 for k2, c1 in tot.items() for y, c2 in vec.items()}
            for k2, v in tot.items():
                zs = zeta_sign([f[0][0] for f in k2], [f[0][1] for f in k2])
                _add(out, k2, sign * zs * v)
        return {k: red(v) for k, v in out.items() if red(v)}

    degrees = [n for n in src.degrees if n <= D and 0 <= n + fam.degree <= tgt.window[1]]
    return ChainMap.from_function(src, tgt, fun, shift=fam.degree, degrees=degrees)


def act_ptensor_elementary(A, kvec, mvec, sigma, maps, D):
    """(f_1 ⊗ ... ⊗ f_n)_σ acting on C^{k⃗}(A); maps[i] sends basis labels of
    A^{⊗k_i} to vectors in A^{⊗m_{σ(i)}} and must be a degree-0 algebra map."""
    src = c_vec(A, kvec, D)
    tgt = c_vec(A, mvec, D)
    red = A.ring.red
    n = len(kvec)

    def apply_factor(i, fac):
        (a, p), x = fac
        TA = tensor_power(A, mvec[sigma[i]])
        acc = {(): 1}
        for xt in x:
            img = maps[i](xt)
            acc = {k + (y,): c * v for k, c in acc.items() for y, v in img.items()}
        out = {}
        for y, c in acc.items():
            if not is_degenerate(TA, y):
                _add(out, ((sum(TA.deg(z) for z in y), p), y), c)
        return out

    def fun(lab):
        imgs = [apply_factor(i, lab[i]) for i in range(n)]
        degs = [lab[i][0][0] + lab[i][0][1] for i in range(n)]
        s = reorder_sign(sigma, degs)
        out = {(): s}
        slots = [None] * n
        for i in range(n):
            slots[sigma[i]] = imgs[i]
        for vec in slots:
            out = {k + (y,): c * v for k, c in out.items() for y, v in vec.items()}
        return {k: red(v) for k, v in out.items() if red(v)}

    degrees = [d for d in src.degrees if d <= D]
    return ChainMap.from_function(src, tgt, fun, degrees=degrees)


def hh_ranks(A, D, ring=None, method="fast"):
    """Ranks (and torsion) of HH_n(A) for n = 0..D."""
    from .chain import homology
    C = hochschild_complex(A, D, method=method)
    return homology(C, range(0, D + 1))


# ---------------------------------------------------------------------------
# P-algebra models

class PAlgebraModel:
    """A P-algebra in dg-algebras: a map for each generator of P.

    maps[name] sends a tuple of basis labels of A (one per input) to
    {tuple of labels: coeff} (one label per output).
    """

    def __init__(self, prop, algebra, maps, name=None, check=True):
        self.prop = prop
        self.algebra = algebra
        self.maps = dict(maps)
        self.name = name or f"{prop.name}@{algebra.name}"
        self._cache = {}
        if check:
            self.check()

    def gen_map(self, name):
        return self.maps[self.prop.aliases.get(name, name)]

    def prop_accepts(self, f):
        return all(node[0] in self.maps for d in f.terms for node in d.nodes)

    def evaluate(self, f, x):
        """Φ(f) on a tuple of basis labels."""
        from .props import evaluate_pmor
        return evaluate_pmor(f, self.gen_map, self.algebra.deg, tuple(x))

    def diagram_map(self, diag, k, m):
        """Φ(diag) as a function on labels of A^{⊗k} with values in A^{⊗m}."""
        from .props import evaluate_diagram
        A = self.algebra

        def f(x):
            key = (diag, x)
            r = self._cache.get(key)
            if r is None:
                vals = evaluate_diagram(diag, self.gen_map, A.deg, parts(x, k))
                r = self._cache[key] = {join(y, m): c for y, c in vals.items()}
            return r
        return f

    def check(self):
        """Relations hold exactly and Φ commutes with the differentials."""
        from .props import PMor
        A = self.algebra
        red = A.ring.red
        for lhs, rhs in self.prop.relations:
            for x in itertools.product(A.basis, repeat=lhs.n_in):
                a, b = self.evaluate(lhs, x), self.evaluate(rhs, x)
                if _differs(a, b, A.ring):
                    raise ValueError(f"{self.name}: relation fails at {x}")
        for name, g in self.prop.generators.items():
            f = self.prop.gen(name)
            df = g.diff if g.diff is not None else PMor.zero(g.n_in, g.n_out)
            for x in itertools.product(A.basis, repeat=g.n_in):
                lhs = {}
                for y, c in self.evaluate(f, x).items():
                    for z, v in _tuple_d(A, y).items():
                        _add(lhs, z, c * v)
                s = -1 if g.degree % 2 else 1
                for y, c in _tuple_d(A, x).items():
                    for z, v in self.evaluate(f, y).items():
                        _add(lhs, z, -s * c * v)
                rhs = self.evaluate(df, x) if df.terms else {}
                if any(red(lhs.get(k, 0) - rhs.get(k, 0)) for k in set(lhs) | set(rhs)):
                    raise ValueError(f"{self.name}: {name} does not commute with d")
        return True

    def is_algebra_map(self, f):
        """Whether Φ(f): A^{⊗n} -> A^{⊗m} is multiplicative and unital."""
        A = self.algebra
        Tn, Tm = tensor_power(A, f.n_in), tensor_power(A, f.n_out)
        fm = {x: {join(y, f.n_out): c for y, c in self.evaluate(f, parts(x, f.n_in)).items()}
              for x in Tn.basis}
        if f.n_in == 0:
            return True
        unit = Tm.unit if f.n_out else ()
        if f.n_out and fm[Tn.unit] != {unit: 1}:
            return False
        for x, y in itertools.product(Tn.basis, repeat=2):
            lhs = {}
            for z, c in Tn.mul(x, y).items():
                for w, v in fm[z].items():
                    _add(lhs, w, c * v)
            rhs = Tm.mul_vec(fm[x], fm[y]) if f.n_out else {}
            if _differs(lhs, rhs, A.ring):
                return False
        return True

    def pullback(self, g):
        """The model of g.source obtained by composing with a prop map g."""
        maps = {}
        for name in g.source.generators:
            img = g.images[name]
            maps[name] = (lambda img: lambda x: self.evaluate(img, x))(img)
        return PAlgebraModel(g.source, self.algebra, maps, name=f"{self.name}*",
                             check=False)


def _tuple_d(A, x):
    return bcy_d(A, tuple(x)) if x else {}


def _mult_map(A):
    def m(x):
        return {(z,): c for z, c in A.mul(x[0], x[1]).items()}
    return m


def _unit_map(A):
    return lambda x: {(A.unit,): 1}


def ass_model(A, prop=None):
    from .props import builtin_ass
    P = prop or builtin_ass()
    return PAlgebraModel(P, A, {"m": _mult_map(A), "eta": _unit_map(A)})


def com_model(A, prop=None):
    from .props import builtin_com
    if not A.is_commutative():
        raise ValueError(f"{A.name} is not graded commutative")
    P = prop or builtin_com()
    return PAlgebraModel(P, A, {"m": _mult_map(A), "eta": _unit_map(A)})


def trivial_model(A):
    from .props import builtin_trivial
    return PAlgebraModel(builtin_trivial(), A, {})


def odd_model(A, h=None):
    """The test prop with odd h; h defaults to 0, which needs A commutative."""
    from .props import builtin_odd
    hm = h or (lambda x: {})
    return PAlgebraModel(builtin_odd(), A, {"m": _mult_map(A), "h": hm})


def chopf_group_model(n, ring=QQ):
    """k[C_n] with Δ(g) = g ⊗ g, ε(g) = 1 and S(g) = g^{-1}."""
    from .props import builtin_chopf
    A = group_algebra(n, ring)
    maps = {
        "m": _mult_map(A),
        "eta": _unit_map(A),
        "Delta": lambda x: {(x[0], x[0]): 1},
        "eps": lambda x: {(): 1},
        "S": lambda x: {((-x[0]) % n,): 1},
    }
    return PAlgebraModel(builtin_chopf(), A, maps, name=f"CHopf@group:{n}")


def chopf_poly_model(p):
    """k[x]/(x^p) over F_p with x primitive; only a Hopf algebra in characteristic p."""
    from .props import builtin_chopf
    from .exactlin import GF
    import math
    ring = GF(p)
    A = truncated_poly(p - 1, ring)

    def delta(x):
        i = x[0]
        return {(a, i - a): math.comb(i, a) % p for a in range(i + 1) if math.comb(i, a) % p}

    maps = {
        "m": _mult_map(A),
        "eta": _unit_map(A),
        "Delta": delta,
        "eps": lambda x: {(): 1} if x[0] == 0 else {},
        "S": lambda x: {(x[0],): (-1) ** x[0]},
    }
    return PAlgebraModel(builtin_chopf(), A, maps, name=f"CHopf@poly:{p - 1}")


def augmentation(n, ring=QQ):
    """k[C_n] -> k, g |-> 1, as a label map."""
    return lambda x: {0: 1}


def act_ptensor(f, model, D):
    """A PTensorMor of degree 0 acting on C^{source}(A) in degrees <= D."""
    if f.degree != 0:
        raise ValueError("only degree-0 prop morphisms act on Hochschild complexes")
    A = model.algebra
    total = None
    for (sigma, fs), c in f.terms.items():
        maps = [model.diagram_map(d, d.n_in, d.n_out) for d in fs]
        g = act_ptensor_elementary(A, f.source, f.target, sigma, maps, D)
        g = g.scale(c) if c != 1 else g
        total = g if total is None else total + g
    if total is None:
        src, tgt = c_vec(A, f.source, D), c_vec(A, f.target, D)
        total = ChainMap(src, tgt, {})
    return total


def induced_vec_map(phi, A, B, kvec, D):
    """C^{k⃗}(φ) for an algebra map φ: A -> B given on basis labels."""
    src, tgt = c_vec(A, kvec, D), c_vec(B, kvec, D)
    red = B.ring.red

    def power_map(k):
        TB = tensor_power(B, k)

        def f(x):
            acc = {(): 1}
            for y in parts(x, k):
                acc = {t + (z,): c * v for t, c in acc.items() for z, v in phi(y).items()}
            return {join(t, k): c for t, c in acc.items()}
        return f, TB

    pm = [power_map(k) for k in kvec]

    def fun(lab):
        out = {(): 1}
        for (f, TB), ((a, p), x) in zip(pm, lab):
            acc = {(): 1}
            for xt in x:
                img = f(xt)
                acc = {t + (y,): c * v for t, c in acc.items() for y, v in img.items()}
            vec = {}
            for y, c in acc.items():
                if not is_degenerate(TB, y):
                    _add(vec, ((a, p), y), c)
            out = {t + (y,): c * v for t, c in out.items() for y, v in vec.items()}
        return {k: red(v) for k, v in out.items() if red(v)}

    return ChainMap.from_function(src, tgt, fun, degrees=[n for n in src.degrees if n <= D + 1])

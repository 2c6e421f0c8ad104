"""Exact sparse linear algebra over QQ, ZZ and GF(p).

Scalars are plain Python numbers: ``int`` for ZZ and GF(p) residues,
``int`` or ``fractions.Fraction`` for QQ.  Matrices are stored as a map of
rows to maps of columns, with no stored zeros.
"""
import heapq
from collections import namedtuple
from fractions import Fraction


class Ring:
    """A coefficient ring tag.  ``p == 0`` means characteristic zero."""

    def __init__(self, kind, p=0):
        if kind not in ("q", "z", "f"):
            raise ValueError(f"unsupported ring kind {kind!r}")
        if kind == "f" and not _is_prime(p):
            raise ValueError(f"{p} is not a prime")
        self.kind = kind
        self.p = p if kind == "f" else 0

    @property
    def is_field(self):
        return self.kind != "z"

    @property
    def name(self):
        return {"q": "Q", "z": "Z"}.get(self.kind, f"F{self.p}")

    def __repr__(self):
        return f"Ring({self.name})"

    def __eq__(self, other):
        return isinstance(other, Ring) and (self.kind, self.p) == (other.kind, other.p)

    def __hash__(self):
        return hash((self.kind, self.p))

    def __call__(self, x):
        """Coerce an int, Fraction or "num/den" string into the ring."""
        if isinstance(x, str):
            x = Fraction(x)
        if self.kind == "q":
            x = Fraction(x)
            return x.numerator if x.denominator == 1 else x
        if isinstance(x, Fraction):
            if self.kind == "z":
                if x.denominator != 1:
                    raise ValueError(f"{x} is not an integer")
                return x.numerator
            return x.numerator * pow(x.denominator, -1, self.p) % self.p
        x = int(x)
        return x % self.p if self.p else x

    def inv(self, x):
        if self.p:
            return pow(x, -1, self.p)
        if self.kind == "z":
            if x in (1, -1):
                return x
            raise ZeroDivisionError(f"{x} is not a unit in Z")
        y = Fraction(1) / x
        return y.numerator if y.denominator == 1 else y

    def red(self, x):
        if self.p:
            return x % self.p
        if type(x) is Fraction and x.denominator == 1:
            return x.numerator
        return x

    def to_str(self, x):
        return str(Fraction(x))


def _is_prime(p):
    if not isinstance(p, int) or p < 2:
        return False
    i = 2
    while i * i <= p:
        if p % i == 0:
            return False
        i += 1
    return True


QQ = Ring("q")
ZZ = Ring("z")


def GF(p):
    return Ring("f", p)


def ring_from_name(name):
    """Parse 'q', 'z' or 'f<p>'."""
    s = name.strip().lower()
    if s in ("q", "qq"):
        return QQ
    if s in ("z", "zz"):
        return ZZ
    if s.startswith("f") and s[1:].isdigit():
        return GF(int(s[1:]))
    raise ValueError(f"unknown ring {name!r}")


class SparseMatrix:
    """Immutable sparse matrix; ``data`` maps row -> {col: nonzero}."""

    __slots__ = ("rows", "cols", "ring", "data", "_cols_cache")

    def __init__(self, rows, cols, ring, entries=None):
        self._cols_cache = None
        self.rows = rows
        self.cols = cols
        self.ring = ring
        data = {}
        if entries:
            for (r, c), v in entries.items():
                if not (0 <= r < rows and 0 <= c < cols):
                    raise IndexError(f"entry ({r},{c}) outside {rows}x{cols}")
                v = ring.red(v)
                if v:
                    data.setdefault(r, {})[c] = v
        self.data = data

    @classmethod
    def from_rows(cls, rows, cols, ring, data):
        m = cls(rows, cols, ring)
        m.data = {r: row for r, row in data.items() if row}
        return m

    @classmethod
    def from_dense(cls, dense, ring, cols=None):
        rows = len(dense)
        if cols is None:
            cols = len(dense[0]) if rows else 0
        return cls(rows, cols, ring, {(i, j): v for i, row in enumerate(dense)
                                      for j, v in enumerate(row) if v})

    @classmethod
    def identity(cls, n, ring):
        return cls.from_rows(n, n, ring, {i: {i: 1} for i in range(n)})

    @classmethod
    def zero(cls, rows, cols, ring):
        return cls(rows, cols, ring)

    @classmethod
    def from_columns(cls, rows, ring, columns):
        """Build from a list of sparse column dicts."""
        data = {}
        for c, col in enumerate(columns):
            for r, v in col.items():
                if v:
                    data.setdefault(r, {})[c] = v
        return cls.from_rows(rows, len(columns), ring, data)

    @property
    def shape(self):
        return (self.rows, self.cols)

    def get(self, r, c):
        return self.data.get(r, {}).get(c, 0)

    def entries(self):
        for r, row in self.data.items():
            for c, v in row.items():
                yield (r, c), v

    def nnz(self):
        return sum(len(row) for row in self.data.values())

    def is_zero(self):
        return not self.data

    def to_dense(self):
        out = [[0] * self.cols for _ in range(self.rows)]
        for (r, c), v in self.entries():
            out[r][c] = v
        return out

    def transpose(self):
        data = {}
        for r, row in self.data.items():
            for c, v in row.items():
                data.setdefault(c, {})[r] = v
        return SparseMatrix.from_rows(self.cols, self.rows, self.ring, data)

    T = property(transpose)

    def columns(self):
        cols = [{} for _ in range(self.cols)]
        for r, row in self.data.items():
            for c, v in row.items():
                cols[c][r] = v
        return cols

    def column(self, c):
        return dict(self._col_index().get(c, {}))

    def apply(self, vec):
        """Multiply by a sparse column vector given as {index: value}."""
        red = self.ring.red
        out = {}
        cols = self._col_index()
        for c, x in vec.items():
            for r, v in cols.get(c, {}).items():
                out[r] = out.get(r, 0) + v * x
        return {r: red(v) for r, v in out.items() if red(v)}

    def _col_index(self):
        if self._cols_cache is None:
            cache = {}
            for r, row in self.data.items():
                for c, v in row.items():
                    cache.setdefault(c, {})[r] = v
            self._cols_cache = cache
        return self._cols_cache

    def __matmul__(self, other):
        if self.cols != other.rows:
            raise ValueError(f"cannot multiply {self.shape} by {other.shape}")
        red = self.ring.red
        odata = other.data
        data = {}
        for r, row in self.data.items():
            acc = {}
            for k, v in row.items():
                orow = odata.get(k)
                if orow:
                    for c, w in orow.items():
                        acc[c] = acc.get(c, 0) + v * w
            acc = {c: red(x) for c, x in acc.items()}
            acc = {c: x for c, x in acc.items() if x}
            if acc:
                data[r] = acc
        return SparseMatrix.from_rows(self.rows, other.cols, self.ring, data)

    def _combine(self, other, sign):
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")
        red = self.ring.red
        data = {r: dict(row) for r, row in self.data.items()}
        for r, row in other.data.items():
            acc = data.setdefault(r, {})
            for c, v in row.items():
                x = red(acc.get(c, 0) + sign * v)
                if x:
                    acc[c] = x
                else:
                    acc.pop(c, None)
        return SparseMatrix.from_rows(self.rows, self.cols, self.ring, data)

    def __add__(self, other):
        return self._combine(other, 1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, s):
        red = self.ring.red
        data = {r: {c: red(v * s) for c, v in row.items()} for r, row in self.data.items()}
        data = {r: {c: v for c, v in row.items() if v} for r, row in data.items()}
        return SparseMatrix.from_rows(self.rows, self.cols, self.ring, data)

    def __eq__(self, other):
        if not isinstance(other, SparseMatrix):
            return NotImplemented
        return self.shape == other.shape and self.data == other.data

    def __hash__(self):
        return hash((self.rows, self.cols, frozenset(self.entries())))

    def __repr__(self):
        return f"SparseMatrix({self.rows}x{self.cols}, nnz={self.nnz()}, {self.ring.name})"


def block_diag(blocks, ring):
    rows = cols = 0
    data = {}
    for b in blocks:
        for r, row in b.data.items():
            data[r + rows] = {c + cols: v for c, v in row.items()}
        rows += b.rows
        cols += b.cols
    return SparseMatrix.from_rows(rows, cols, ring, data)


def _magnitude(x):
    if isinstance(x, Fraction):
        return (abs(x.numerator), x.denominator)
    return (abs(x), 1)


class _Echelon:
    """Incremental row echelon form over a field.

    Pivot rows are normalised to have leading entry 1 and are reduced
    against all pivots inserted before them, so one ordered sweep suffices
    to reduce a new row.
    """

    def __init__(self, ring, forbidden=None, split=None):
        if not ring.is_field:
            ring = QQ
        self.ring = ring
        self.order = {}   # pivot col -> insertion index
        self.rows = []    # (pivot col, row dict)
        self.forbidden = forbidden
        self.split = split

    def reduce(self, row):
        red = self.ring.red
        r = {c: v for c, v in row.items() if v}
        heap = [self.order[c] for c in r if c in self.order]
        heapq.heapify(heap)
        seen = set(heap)
        while heap:
            i = heapq.heappop(heap)
            col, prow = self.rows[i]
            x = r.get(col)
            if not x:
                continue
            for c, v in prow.items():
                y = red(r.get(c, 0) - x * v)
                if y:
                    r[c] = y
                    j = self.order.get(c)
                    if j is not None and j not in seen:
                        seen.add(j)
                        heapq.heappush(heap, j)
                else:
                    r.pop(c, None)
        return r

    def add(self, row):
        """Insert a row; return its pivot column or None if dependent.

        Returns the string "inconsistent" if only the forbidden column
        survives reduction.
        """
        r = self.reduce(row)
        cands = [c for c in r if c != self.forbidden]
        if not cands:
            return "inconsistent" if r else None
        if self.split is not None:
            low = [c for c in cands if c < self.split]
            cands = low or cands
        ring = self.ring
        if ring.p:
            col = min(cands)
        else:
            col = min(cands, key=lambda c: (_magnitude(r[c]), c))
        inv = ring.inv(r[col])
        r = {c: ring.red(v * inv) for c, v in r.items()}
        self.order[col] = len(self.rows)
        self.rows.append((col, r))
        return col

    def back_substitute(self, values):
        """Fill in pivot variables given the free ones (and rhs column)."""
        red = self.ring.red
        x = dict(values)
        for col, row in reversed(self.rows):
            acc = 0
            for c, v in row.items():
                if c != col:
                    acc += v * x.get(c, 0)
            x[col] = red(-acc)
        return x


def _require_field(ring):
    if not ring.is_field:
        raise ValueError(f"field coefficients required, got {ring.name}")


def rank(M):
    """Rank over the field of fractions (QQ for ZZ)."""
    ech = _Echelon(M.ring)
    # sparse rows first keeps fill-in down
    for row in sorted(M.data.values(), key=len):
        ech.add(row)
    return len(ech.rows)


def _vec_dict(b):
    if isinstance(b, dict):
        return {i: v for i, v in b.items() if v}
    return {i: v for i, v in enumerate(b) if v}


def solve(M, b, sparse=False):
    """Return x with M x = b, or None if the system is inconsistent."""
    _require_field(M.ring)
    bd = _vec_dict(b)
    nb = len(b) if not isinstance(b, dict) else M.rows
    if nb != M.rows or any(not 0 <= i < M.rows for i in bd):
        raise ValueError(f"right-hand side of length {nb} for {M.rows} rows")
    ring = M.ring
    aug = M.cols
    ech = _Echelon(ring, forbidden=aug)
    for r in range(M.rows):
        row = dict(M.data.get(r, {}))
        if r in bd:
            row[aug] = ring(bd[r])
        if ech.add(row) == "inconsistent":
            return None
    x = ech.back_substitute({aug: -1})
    x.pop(aug)
    x = {c: v for c, v in x.items() if v}
    if sparse:
        return x
    return [x.get(c, 0) for c in range(M.cols)]


class Solver:
    """Factor M once and solve M x = b for many right-hand sides.

    Each row of M carries a tag column recording which combination of the
    original rows it is, so the same elimination serves every b.
    """

    def __init__(self, M):
        _require_field(M.ring)
        self.M = M
        n = self.n = M.cols
        self.ech = _Echelon(M.ring, split=n)
        for r in range(M.rows):
            row = dict(M.data.get(r, {}))
            row[n + r] = 1
            self.ech.add(row)

    def solve(self, b):
        """Sparse dict solution of M x = b, or None."""
        red = self.M.ring.red
        n = self.n
        bd = _vec_dict(b)
        x = {}
        for col, row in reversed(self.ech.rows):
            acc = 0
            for c, v in row.items():
                if c >= n:
                    acc += v * bd.get(c - n, 0)
            if col >= n:
                # a combination of rows of M that vanishes
                if red(acc):
                    return None
                continue
            for c, v in row.items():
                if c < n and c != col:
                    acc -= v * x.get(c, 0)
            acc = red(acc)
            if acc:
                x[col] = acc
        return x


def kernel_basis(M, sparse=False):
    """Basis of the right kernel of M."""
    _require_field(M.ring)
    ech = _Echelon(M.ring)
    for row in M.data.values():
        ech.add(row)
    pivots = set(ech.order)
    basis = []
    for f in range(M.cols):
        if f in pivots:
            continue
        x = ech.back_substitute({f: 1})
        x = {c: v for c, v in x.items() if v}
        basis.append(x if sparse else [x.get(c, 0) for c in range(M.cols)])
    return basis


def smith_normal_form(M, transforms=True):
    """Return (invariants, U, V) with U*M*V diagonal and d_i | d_{i+1}.

    U and V are returned as SparseMatrix over ZZ (None if transforms=False).
    """
    m, n = M.rows, M.cols
    A = [[0] * n for _ in range(m)]
    for (r, c), v in M.entries():
        x = Fraction(v)
        if x.denominator != 1:
            raise ValueError("smith_normal_form needs integer entries")
        A[r][c] = int(x)
    U = [[int(i == j) for j in range(m)] for i in range(m)] if transforms else None
    V = [[int(i == j) for j in range(n)] for i in range(n)] if transforms else None

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        if U:
            U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for row in A:
            row[i], row[j] = row[j], row[i]
        if V:
            for row in V:
                row[i], row[j] = row[j], row[i]

    def add_row(dst, src, q):
        # row_dst += q * row_src
        rs, rd = A[src], A[dst]
        for k in range(n):
            if rs[k]:
                rd[k] += q * rs[k]
        if U:
            us, ud = U[src], U[dst]
            for k in range(m):
                if us[k]:
                    ud[k] += q * us[k]

    def add_col(dst, src, q):
        for row in A:
            if row[src]:
                row[dst] += q * row[src]
        if V:
            for row in V:
                if row[src]:
                    row[dst] += q * row[src]

    invariants = []
    t = 0
    while t < min(m, n):
        best = None
        for i in range(t, m):
            row = A[i]
            for j in range(t, n):
                if row[j] and (best is None or abs(row[j]) < best[0]):
                    best = (abs(row[j]), i, j)
        if best is None:
            break
        _, i, j = best
        swap_rows(t, i)
        swap_cols(t, j)
        while True:
            changed = False
            for i in range(t + 1, m):
                if A[i][t]:
                    add_row(i, t, -(A[i][t] // A[t][t]))
                    if A[i][t]:
                        changed = True
            for j in range(t + 1, n):
                if A[t][j]:
                    add_col(j, t, -(A[t][j] // A[t][t]))
                    if A[t][j]:
                        changed = True
            if changed:
                best = None
                for i in range(t, m):
                    if A[i][t] and (best is None or abs(A[i][t]) < best[0]):
                        best = (abs(A[i][t]), i, t)
                for j in range(t, n):
                    if A[t][j] and (best is None or abs(A[t][j]) < best[0]):
                        best = (abs(A[t][j]), t, j)
                _, i, j = best
                swap_rows(t, i)
                swap_cols(t, j)
                continue
            piv = A[t][t]
            bad = None
            for i in range(t + 1, m):
                for j in range(t + 1, n):
                    if A[i][j] % piv:
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is None:
                break
            add_row(t, bad, 1)
        if A[t][t] < 0:
            A[t] = [-x for x in A[t]]
            if U:
                U[t] = [-x for x in U[t]]
        invariants.append(A[t][t])
        t += 1
    if not transforms:
        return invariants, None, None
    return (invariants, SparseMatrix.from_dense(U, ZZ, m),
            SparseMatrix.from_dense(V, ZZ, n))


Homology = namedtuple("Homology", ["rank", "torsion"])


def homology_rank(d_out, d_in):
    """Homology at the middle of C_{n+1} --d_in--> C_n --d_out--> C_{n-1}."""
    if d_out.cols != d_in.rows:
        raise ValueError(f"middle dimensions differ: {d_out.cols} vs {d_in.rows}")
    if d_out.ring != d_in.ring:
        raise ValueError("ring mismatch")
    if not (d_out @ d_in).is_zero():
        raise ValueError("not a complex at this degree")
    r_out = rank(d_out)
    r_in = rank(d_in)
    h = d_out.cols - r_out - r_in
    torsion = []
    if d_in.ring.kind == "z" and not d_in.is_zero():
        inv, _, _ = smith_normal_form(d_in, transforms=False)
        torsion = [d for d in inv if d > 1]
    return Homology(h, torsion)

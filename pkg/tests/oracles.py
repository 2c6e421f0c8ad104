"""Independent oracles.  Nothing here imports the package."""
import itertools
from fractions import Fraction

from sympy import QQ as SQQ
from sympy.polys.matrices import DomainMatrix


# Structure constants written out by hand: (basis size, unit index, mult(i, j) -> {k: c}).

def alg_ground():
    return 1, 0, lambda i, j: {0: 1}


def alg_dual():
    return 2, 0, lambda i, j: {i + j: 1} if i + j < 2 else {}


def alg_group(n):
    return n, 0, lambda i, j: {(i + j) % n: 1}


def alg_trunc(N):
    return N + 1, 0, lambda i, j: {i + j: 1} if i + j <= N else {}


ORACLE_ALGEBRAS = {
    "k": alg_ground(),
    "dual-numbers": alg_dual(),
    "group:2": alg_group(2),
    "poly:3": alg_trunc(3),
}


def _chains(dim, unit, n):
    """Normalized Hochschild n-chains a_0 ⊗ a_1 ⊗ ... ⊗ a_n with a_i != unit for i >= 1."""
    bar = [i for i in range(dim) if i != unit]
    return [(a0,) + rest for a0 in range(dim) for rest in itertools.product(bar, repeat=n)]


def _boundary(x, mult, unit):
    """b = Σ (-1)^i d_i with the wrap-around face d_n (all degrees zero)."""
    n = len(x) - 1
    out = {}

    def add(y, c):
        if any(v == unit for v in y[1:]):
            return
        out[y] = out.get(y, 0) + c

    for i in range(n):
        for k, c in mult(x[i], x[i + 1]).items():
            add(x[:i] + (k,) + x[i + 2:], (-1) ** i * c)
    for k, c in mult(x[n], x[0]).items():
        add((k,) + x[1:n], (-1) ** n * c)
    return out


def _rank(rows, cols, entries):
    if not rows or not cols:
        return 0
    M = [[SQQ(0)] * cols for _ in range(rows)]
    for (r, c), v in entries.items():
        M[r][c] = SQQ(Fraction(v).numerator, Fraction(v).denominator)
    return DomainMatrix(M, (rows, cols), SQQ).rank()


def hochschild_ranks(name, top):
    """Ranks of HH_n, n = 0..top, by dense elimination over Q."""
    dim, unit, mult = ORACLE_ALGEBRAS[name]
    chains = {n: _chains(dim, unit, n) for n in range(top + 2)}
    ranks = {}
    for n in range(1, top + 2):
        idx = {y: i for i, y in enumerate(chains[n - 1])}
        entries = {}
        for j, x in enumerate(chains[n]):
            for y, c in _boundary(x, mult, unit).items():
                if c:
                    entries[(idx[y], j)] = c
        ranks[n] = _rank(len(chains[n - 1]), len(chains[n]), entries)
    ranks[0] = 0
    return [len(chains[n]) - ranks[n] - ranks[n + 1] for n in range(top + 1)]


def shuffles(p, q):
    """(sign, sigma) for (p, q)-shuffles of {0, ..., p+q-1}."""
    out = []
    for first in itertools.combinations(range(p + q), p):
        rest = [i for i in range(p + q) if i not in first]
        perm = list(first) + rest
        inv = sum(1 for a in range(len(perm)) for b in range(a + 1, len(perm))
                  if perm[a] > perm[b])
        out.append(((-1) ** inv, tuple(perm)))
    return out


def dense_rank(rows, p=0):
    """Gaussian elimination on a list of lists, over Q (p = 0) or F_p."""
    M = [[Fraction(x) if not p else x % p for x in r] for r in rows]
    rank, ncols = 0, len(M[0]) if M else 0
    for c in range(ncols):
        piv = next((r for r in range(rank, len(M)) if M[r][c]), None)
        if piv is None:
            continue
        M[rank], M[piv] = M[piv], M[rank]
        inv = (1 / M[rank][c]) if not p else pow(M[rank][c], -1, p)
        for r in range(len(M)):
            if r != rank and M[r][c]:
                f = M[r][c] * inv
                M[r] = [a - f * b for a, b in zip(M[r], M[rank])]
                if p:
                    M[r] = [a % p for a in M[r]]
        rank += 1
    return rank


def invariant_factors(rows):
    """Smith invariants via gcds of k x k minors (tiny matrices only)."""
    from math import gcd
    from sympy import Matrix
    m, n = len(rows), len(rows[0]) if rows else 0
    A = Matrix(rows)
    dets = [1]
    for k in range(1, min(m, n) + 1):
        g = 0
        for r in itertools.combinations(range(m), k):
            for c in itertools.combinations(range(n), k):
                g = gcd(g, int(A.extract(list(r), list(c)).det()))
        if g == 0:
            break
        dets.append(g)
    return [dets[i] // dets[i - 1] for i in range(1, len(dets))]

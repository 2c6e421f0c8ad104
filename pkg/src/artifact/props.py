"""Presented dg-props, string diagrams and the free symmetric monoidal category P^⊗.

A morphism n -> m of a presented prop is a linear combination of diagrams.
A diagram is an ordered list of generator nodes with a wiring: every node
input and every boundary output is fed by exactly one source, a boundary
input (-1, j) or a node output (i, r).  The node order fixes the Koszul
sign; diagrams are stored in a canonical node order with the reordering
sign moved into the coefficient.
"""
import itertools
import json
from collections import deque
from fractions import Fraction

from .chain import blowup


def _add(acc, key, c):
    v = acc.get(key, 0) + c
    if v:
        acc[key] = v
    else:
        acc.pop(key, None)


def _koszul(order, degrees):
    """Sign of listing items (with given degrees) in the given order."""
    e = 0
    for i in range(len(order)):
        if degrees[order[i]] % 2:
            for j in range(i + 1, len(order)):
                if degrees[order[j]] % 2 and order[j] < order[i]:
                    e += 1
    return -1 if e % 2 else 1


# ---------------------------------------------------------------------------
# diagrams

class Diagram:
    """A canonical string diagram.  Nodes are (name, n_in, n_out, degree)."""

    __slots__ = ("n_in", "n_out", "nodes", "inputs", "outputs", "_hash")

    def __init__(self, n_in, n_out, nodes, inputs, outputs):
        self.n_in = n_in
        self.n_out = n_out
        self.nodes = tuple(nodes)
        self.inputs = tuple(tuple(x) for x in inputs)
        self.outputs = tuple(outputs)
        self._hash = hash((n_in, n_out, self.nodes, self.inputs, self.outputs))

    @property
    def degree(self):
        return sum(n[3] for n in self.nodes)

    def key(self):
        return (self.n_in, self.n_out, self.nodes, self.inputs, self.outputs)

    def __eq__(self, other):
        return isinstance(other, Diagram) and self.key() == other.key()

    def __lt__(self, other):
        return repr(self.key()) < repr(other.key())

    def __hash__(self):
        return self._hash

    def sinks(self):
        """source -> sink map; sinks are ('n', i, r) or ('o', j)."""
        out = {}
        for i, srcs in enumerate(self.inputs):
            for r, s in enumerate(srcs):
                out[s] = ("n", i, r)
        for j, s in enumerate(self.outputs):
            out[s] = ("o", j)
        return out

    def __repr__(self):
        names = ",".join(n[0] for n in self.nodes)
        return f"Diagram({self.n_in}->{self.n_out}; {names})"


def _validate(n_in, nodes, inputs, outputs):
    used = []
    for i, srcs in enumerate(inputs):
        if len(srcs) != nodes[i][1]:
            raise ValueError("node input arity mismatch")
        used.extend(srcs)
    used.extend(outputs)
    expected = [(-1, j) for j in range(n_in)]
    for i, n in enumerate(nodes):
        expected.extend((i, r) for r in range(n[2]))
    if sorted(used) != sorted(expected):
        raise ValueError("wiring is not a bijection")


def _bfs_order(nodes, inputs, outputs, n_in, sinks, starts):
    order, seen = [], set()
    queue = deque()

    def visit(i):
        if i not in seen:
            seen.add(i)
            order.append(i)
            queue.append(i)

    for s in starts:
        visit(s)
    while queue:
        i = queue.popleft()
        for s in inputs[i]:
            if s[0] >= 0:
                visit(s[0])
        for r in range(nodes[i][2]):
            t = sinks[(i, r)]
            if t[0] == "n":
                visit(t[1])
    return order


def _encode(nodes, inputs, order):
    pos = {v: k for k, v in enumerate(order)}
    enc_nodes = tuple(nodes[v] for v in order)
    enc_in = tuple(tuple(s if s[0] < 0 else (pos[s[0]], s[1]) for s in inputs[v])
                   for v in order)
    return enc_nodes, enc_in


def canonical(n_in, n_out, nodes, inputs, outputs):
    """(sign, Diagram) in canonical node order."""
    nodes = list(nodes)
    inputs = [tuple(x) for x in inputs]
    outputs = tuple(outputs)
    _validate(n_in, nodes, inputs, outputs)
    tmp = Diagram(n_in, n_out, nodes, inputs, outputs)
    sinks = tmp.sinks()
    starts = []
    for j in range(n_in):
        t = sinks[(-1, j)]
        if t[0] == "n":
            starts.append(t[1])
    for s in outputs:
        if s[0] >= 0:
            starts.append(s[0])
    order = _bfs_order(nodes, inputs, outputs, n_in, sinks, starts)
    rest = [i for i in range(len(nodes)) if i not in set(order)]
    comps = []
    while rest:
        comp = _bfs_order(nodes, inputs, outputs, n_in, sinks, [rest[0]])
        best = None
        for v in comp:
            o = _bfs_order(nodes, inputs, outputs, n_in, sinks, [v])
            e = repr(_encode(nodes, inputs, o))
            if best is None or e < best[0]:
                best = (e, o)
        comps.append(best)
        cs = set(comp)
        rest = [i for i in rest if i not in cs]
    comps.sort()
    for _, o in comps:
        order.extend(o)
    sign = _koszul(order, [n[3] for n in nodes])
    pos = {v: k for k, v in enumerate(order)}

    def remap(s):
        return s if s[0] < 0 else (pos[s[0]], s[1])

    new_nodes = [nodes[v] for v in order]
    new_inputs = [tuple(remap(s) for s in inputs[v]) for v in order]
    new_outputs = tuple(remap(s) for s in outputs)
    return sign, Diagram(n_in, n_out, new_nodes, new_inputs, new_outputs)


def identity_diagram(n):
    return Diagram(n, n, (), (), tuple((-1, j) for j in range(n)))


def perm_diagram(sigma):
    """Input i goes to output sigma[i]."""
    n = len(sigma)
    outputs = [None] * n
    for i, t in enumerate(sigma):
        outputs[t] = (-1, i)
    return Diagram(n, n, (), (), tuple(outputs))


def generator_diagram(node):
    name, a, b, d = node
    return Diagram(a, b, (node,), (tuple((-1, j) for j in range(a)),),
                   tuple((0, r) for r in range(b)))


def compose_diagrams(g, f):
    """(sign, g ∘ f); g's nodes come first."""
    if f.n_out != g.n_in:
        raise ValueError("boundary mismatch in composition")
    off = len(g.nodes)

    def fs(s):
        return s if s[0] < 0 else (s[0] + off, s[1])

    def gs(s):
        return fs(f.outputs[s[1]]) if s[0] < 0 else s

    nodes = g.nodes + f.nodes
    inputs = [tuple(gs(s) for s in x) for x in g.inputs] + \
        [tuple(fs(s) for s in x) for x in f.inputs]
    outputs = tuple(gs(s) for s in g.outputs)
    return canonical(f.n_in, g.n_out, nodes, inputs, outputs)


def tensor_diagrams(f, g):
    """(sign, f ⊗ g); f's nodes come first."""
    off = len(f.nodes)

    def gs(s):
        return (-1, s[1] + f.n_in) if s[0] < 0 else (s[0] + off, s[1])

    nodes = f.nodes + g.nodes
    inputs = list(f.inputs) + [tuple(gs(s) for s in x) for x in g.inputs]
    outputs = f.outputs + tuple(gs(s) for s in g.outputs)
    return canonical(f.n_in + g.n_in, f.n_out + g.n_out, nodes, inputs, outputs)


def splice(diag, i, repl):
    """(sign, diagram) replacing node i by the diagram repl (same arity)."""
    node = diag.nodes[i]
    if (repl.n_in, repl.n_out) != (node[1], node[2]):
        raise ValueError("arity mismatch in substitution")
    nodes = list(diag.nodes)
    k = len(repl.nodes)
    # new index of old node j
    def old(j):
        return j if j < i else j + k - 1

    def rs(s):
        # source inside repl
        if s[0] < 0:
            src = diag.inputs[i][s[1]]
            return outer(src)
        return (i + s[0], s[1])

    def outer(s):
        if s[0] < 0:
            return s
        if s[0] == i:
            return rs(repl.outputs[s[1]])
        return (old(s[0]), s[1])

    new_nodes = nodes[:i] + list(repl.nodes) + nodes[i + 1:]
    new_inputs = []
    for j in range(len(diag.nodes)):
        if j == i:
            for x in repl.inputs:
                new_inputs.append(tuple(rs(s) for s in x))
        else:
            new_inputs.append(tuple(outer(s) for s in diag.inputs[j]))
    new_outputs = tuple(outer(s) for s in diag.outputs)
    return canonical(diag.n_in, diag.n_out, new_nodes, new_inputs, new_outputs)


# ---------------------------------------------------------------------------
# morphisms of a presented prop

class PMor:
    """A homogeneous linear combination of diagrams n -> m."""

    def __init__(self, n_in, n_out, terms=None, degree=None):
        self.n_in = n_in
        self.n_out = n_out
        self.terms = {d: c for d, c in (terms or {}).items() if c}
        if degree is None:
            degs = {d.degree for d in self.terms}
            if len(degs) > 1:
                raise ValueError("inhomogeneous morphism")
            degree = degs.pop() if degs else 0
        self.degree = degree

    @classmethod
    def diagram(cls, d, c=1):
        return cls(d.n_in, d.n_out, {d: c}, d.degree)

    @classmethod
    def identity(cls, n):
        return cls.diagram(identity_diagram(n))

    @classmethod
    def perm(cls, sigma):
        return cls.diagram(perm_diagram(tuple(sigma)))

    @classmethod
    def zero(cls, n_in, n_out, degree=0):
        return cls(n_in, n_out, {}, degree)

    def is_zero(self):
        return not self.terms

    def __add__(self, other):
        self._like(other)
        t = dict(self.terms)
        for d, c in other.terms.items():
            _add(t, d, c)
        return PMor(self.n_in, self.n_out, t, self.degree)

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, s):
        return PMor(self.n_in, self.n_out, {d: s * c for d, c in self.terms.items()},
                    self.degree)

    def _like(self, other):
        if (self.n_in, self.n_out) != (other.n_in, other.n_out):
            raise ValueError("boundary mismatch")
        if self.terms and other.terms and self.degree != other.degree:
            raise ValueError("degree mismatch")

    def __matmul__(self, other):
        """self ∘ other."""
        if other.n_out != self.n_in:
            raise ValueError("boundary mismatch in composition")
        t = {}
        for g, a in self.terms.items():
            for f, b in other.terms.items():
                s, d = compose_diagrams(g, f)
                _add(t, d, s * a * b)
        return PMor(other.n_in, self.n_out, t, self.degree + other.degree)

    def tensor(self, other):
        t = {}
        for f, a in self.terms.items():
            for g, b in other.terms.items():
                s, d = tensor_diagrams(f, g)
                _add(t, d, s * a * b)
        return PMor(self.n_in + other.n_in, self.n_out + other.n_out, t,
                    self.degree + other.degree)

    def __eq__(self, other):
        return isinstance(other, PMor) and (self.n_in, self.n_out) == (other.n_in, other.n_out) \
            and self.terms == other.terms

    def __hash__(self):
        return hash((self.n_in, self.n_out, frozenset(self.terms.items())))

    def key(self):
        return (self.n_in, self.n_out, frozenset(self.terms.items()))

    def __repr__(self):
        parts = [f"{c}*{d}" for d, c in sorted(self.terms.items(), key=lambda x: repr(x[0]))]
        return f"PMor({self.n_in}->{self.n_out}: " + " + ".join(parts or ["0"]) + ")"


def tensor_all(mors):
    out = PMor.identity(0)
    for m in mors:
        out = out.tensor(m)
    return out


class Generator:
    def __init__(self, name, n_in, n_out, degree=0, diff=None):
        self.name = name
        self.n_in = n_in
        self.n_out = n_out
        self.degree = degree
        self.diff = diff

    @property
    def node(self):
        return (self.name, self.n_in, self.n_out, self.degree)


class PropPresentation:
    """Generators with differentials and a list of relations lhs = rhs."""

    def __init__(self, name, generators=(), relations=(), aliases=None):
        self.name = name
        self.generators = {}
        for g in generators:
            self.generators[g.name] = g
        self.relations = list(relations)
        self.aliases = dict(aliases or {})

    def gen(self, name):
        name = self.aliases.get(name, name)
        if name not in self.generators:
            raise KeyError(f"{self.name} has no generator {name!r}")
        return PMor.diagram(generator_diagram(self.generators[name].node))

    def add_generator(self, g):
        self.generators[g.name] = g

    def relate(self, lhs, rhs):
        if (lhs.n_in, lhs.n_out) != (rhs.n_in, rhs.n_out):
            raise ValueError("relation is not arity-homogeneous")
        if lhs.terms and rhs.terms and lhs.degree != rhs.degree:
            raise ValueError("relation is not degree-homogeneous")
        self.relations.append((lhs, rhs))

    def d(self, f):
        """Leibniz differential over the node order."""
        t = {}
        for diag, c in f.terms.items():
            s = 1
            for i, node in enumerate(diag.nodes):
                g = self.generators[node[0]]
                if g.diff is not None:
                    for rd, rc in g.diff.terms.items():
                        s2, nd = splice(diag, i, rd)
                        _add(t, nd, s * s2 * c * rc)
                if node[3] % 2:
                    s = -s
        return PMor(f.n_in, f.n_out, t, f.degree - 1)

    def check(self):
        """d² = 0 on generators, modulo relations."""
        bad = []
        for g in self.generators.values():
            if g.diff is None:
                continue
            dd = self.d(g.diff)
            if not dd.is_zero() and equal(self, dd, PMor.zero(g.n_in, g.n_out, g.degree - 2)) \
                    != "equal":
                bad.append(g.name)
        if bad:
            raise ValueError(f"d^2 != 0 on {bad}")
        return True

    def __repr__(self):
        return f"PropPresentation({self.name}, gens={list(self.generators)})"


# ---------------------------------------------------------------------------
# layer expressions

def _layer(P, tokens):
    mors = []
    for tok in tokens:
        tok = tok.strip()
        if tok == "id":
            mors.append(PMor.identity(1))
        elif tok.startswith("id") and tok[2:].isdigit():
            mors.append(PMor.identity(int(tok[2:])))
        elif tok in ("swap", "tau", "τ"):
            mors.append(PMor.perm((1, 0)))
        elif tok.startswith("perm:"):
            mors.append(PMor.perm(tuple(int(x) for x in tok[5:].split(","))))
        else:
            mors.append(P.gen(tok))
    return tensor_all(mors)


def composite(P, layers):
    """A composite given as layers in application order; each layer is a list
    of tokens tensored together (generator names, id, idN, swap, perm:...)."""
    out = None
    for layer in layers:
        if isinstance(layer, str):
            layer = [layer]
        m = _layer(P, layer)
        out = m if out is None else m @ out
    return out


def linear(P, items):
    """[[coeff, layers], ...] as a PMor."""
    out = None
    for c, layers in items:
        m = composite(P, layers).scale(Fraction(c) if isinstance(c, str) else c)
        out = m if out is None else out + m
    return out


def prop_from_json(data):
    """Load {name, generators: [{name, in, out, degree, diff}], relations: [[lhs, rhs]]}.

    A composite is a list of layers in application order; diff is a list of
    [coeff, composite] pairs.
    """
    if isinstance(data, str):
        data = json.loads(data)
    P = PropPresentation(data.get("name", "P"))
    for g in data["generators"]:
        P.add_generator(Generator(g["name"], int(g["in"]), int(g["out"]),
                                  int(g.get("degree", 0))))
    for g in data["generators"]:
        if g.get("diff"):
            P.generators[g["name"]].diff = linear(P, g["diff"])
    for lhs, rhs in data.get("relations", []):
        P.relate(_side(P, lhs), _side(P, rhs))
    return P


def _side(P, expr):
    if expr and isinstance(expr[0], list) and expr[0] and not isinstance(expr[0][0], str):
        return linear(P, expr)
    return composite(P, expr)


# ---------------------------------------------------------------------------
# builtin props

def _ass_core(P, commutative):
    P.add_generator(Generator("eta", 0, 1))
    P.add_generator(Generator("m", 2, 1))
    P.aliases.update({"η": "eta", "mu": "m"})
    c = lambda *layers: composite(P, list(layers))
    P.relate(c(["m", "id"], ["m"]), c(["id", "m"], ["m"]))
    P.relate(c(["eta", "id"], ["m"]), PMor.identity(1))
    P.relate(c(["id", "eta"], ["m"]), PMor.identity(1))
    if commutative:
        P.relate(c(["swap"], ["m"]), c(["m"]))


def builtin_ass():
    P = PropPresentation("Ass")
    _ass_core(P, False)
    return P


def builtin_com():
    P = PropPresentation("Com")
    _ass_core(P, True)
    return P


def builtin_trivial():
    return PropPresentation("trivial")


def builtin_chopf():
    """Commutative Hopf algebras: η, m, ε, Δ, S."""
    P = PropPresentation("CHopf")
    _ass_core(P, True)
    P.add_generator(Generator("eps", 1, 0))
    P.add_generator(Generator("Delta", 1, 2))
    P.add_generator(Generator("S", 1, 1))
    P.aliases.update({"ε": "eps", "Δ": "Delta", "D": "Delta"})
    c = lambda *layers: composite(P, list(layers))
    P.relate(c(["Delta"], ["Delta", "id"]), c(["Delta"], ["id", "Delta"]))
    P.relate(c(["Delta"], ["eps", "id"]), PMor.identity(1))
    P.relate(c(["Delta"], ["id", "eps"]), PMor.identity(1))
    P.relate(c(["m"], ["Delta"]),
             c(["Delta", "Delta"], ["id", "swap", "id"], ["m", "m"]))
    P.relate(c(["m"], ["eps"]), c(["eps", "eps"]))
    P.relate(c(["eta"], ["Delta"]), c(["eta", "eta"]))
    P.relate(c(["eta"], ["eps"]), PMor.identity(0))
    P.relate(c(["Delta"], ["S", "id"], ["m"]), c(["eps"], ["eta"]))
    P.relate(c(["Delta"], ["id", "S"], ["m"]), c(["eps"], ["eta"]))
    return P


def builtin_odd():
    """A test prop: m: 2 -> 1 of degree 0 and h: 2 -> 1 of degree 1 with dh = m - m∘τ."""
    P = PropPresentation("odd")
    P.add_generator(Generator("m", 2, 1))
    P.add_generator(Generator("h", 2, 1, 1))
    P.generators["h"].diff = composite(P, [["m"]]) - composite(P, [["swap"], ["m"]])
    return P


def builtin_props():
    return {"chopf": builtin_chopf(), "ass": builtin_ass(), "com": builtin_com(),
            "trivial": builtin_trivial(), "odd": builtin_odd()}


def prop_by_name(name):
    table = {"chopf": builtin_chopf, "ass": builtin_ass, "com": builtin_com,
             "trivial": builtin_trivial, "odd": builtin_odd}
    if name.lower() not in table:
        raise KeyError(f"unknown prop {name!r}")
    return table[name.lower()]()


class PropMorphism:
    """A map of presented props given on generators."""

    def __init__(self, source, target, images):
        self.source = source
        self.target = target
        self.images = dict(images)
        for name, g in source.generators.items():
            img = self.images.get(name)
            if img is None:
                raise ValueError(f"no image for {name}")
            if (img.n_in, img.n_out) != (g.n_in, g.n_out):
                raise ValueError(f"arity of the image of {name} is wrong")
            if img.terms and img.degree != g.degree:
                raise ValueError(f"degree of the image of {name} is wrong")

    def __call__(self, f):
        out = PMor.zero(f.n_in, f.n_out, f.degree)
        for diag, c in f.terms.items():
            cur = PMor.diagram(diag, c)
            # substitute from the last node so indices stay valid
            for i in reversed(range(len(diag.nodes))):
                t = {}
                for d, a in cur.terms.items():
                    for rd, b in self.images[d.nodes[i][0]].terms.items():
                        s, nd = splice(d, i, rd)
                        _add(t, nd, s * a * b)
                cur = PMor(f.n_in, f.n_out, t, f.degree)
            out = out + cur
        return out

    def check(self, probes=()):
        """Relations map to equal morphisms and d commutes with the map."""
        for lhs, rhs in self.source.relations:
            v = equal(self.target, self(lhs), self(rhs), probes)
            if v == "distinct":
                return False
        for name, g in self.source.generators.items():
            a = self.target.d(self.images[name])
            b = self(g.diff) if g.diff is not None else PMor.zero(g.n_in, g.n_out)
            if equal(self.target, a, b, probes) == "distinct":
                return False
        return True


def ass_to_com():
    A, C = builtin_ass(), builtin_com()
    return PropMorphism(A, C, {"m": C.gen("m"), "eta": C.gen("eta")})


def identity_morphism(P):
    return PropMorphism(P, P, {n: P.gen(n) for n in P.generators})


# ---------------------------------------------------------------------------
# evaluation in a model

def evaluate_diagram(diag, gen_map, deg, x):
    """Value of a diagram on a tuple x of algebra basis labels.

    gen_map(name) maps a tuple of labels to {tuple: coeff}; deg gives label
    degrees.  Nodes are applied in a topological order; the Koszul sign
    relates the node order to the reversed application order.
    """
    n = len(diag.nodes)
    indeg = [sum(1 for s in diag.inputs[i] if s[0] >= 0) for i in range(n)]
    succ = {i: [] for i in range(n)}
    for i, srcs in enumerate(diag.inputs):
        for s in srcs:
            if s[0] >= 0:
                succ[s[0]].append(i)
    ready = sorted(i for i in range(n) if indeg[i] == 0)
    app = []
    indeg = list(indeg)
    while ready:
        i = ready.pop(0)
        app.append(i)
        for j in succ[i]:
            indeg[j] -= 1
            if indeg[j] == 0:
                ready.append(j)
        ready.sort()
    if len(app) != n:
        raise ValueError("diagram has a cycle")
    sign0 = _koszul(list(reversed(app)), [nd[3] for nd in diag.nodes])
    # state: list of (source id, label)
    states = {tuple(((-1, j), y) for j, y in enumerate(x)): sign0}
    for i in app:
        node = diag.nodes[i]
        new = {}
        for st, c in states.items():
            where = {s: k for k, (s, _) in enumerate(st)}
            picks = [where[s] for s in diag.inputs[i]]
            rest = [k for k in range(len(st)) if k not in set(picks)]
            order = picks + rest
            degs = [deg(y) for _, y in st]
            s = _koszul(order, degs)
            args = tuple(st[k][1] for k in picks)
            tail = tuple(st[k] for k in rest)
            for out, v in gen_map(node[0])(args).items():
                head = tuple(((i, r), y) for r, y in enumerate(out))
                _add(new, head + tail, s * c * v)
        states = new
    result = {}
    for st, c in states.items():
        where = {s: k for k, (s, _) in enumerate(st)}
        order = [where[s] for s in diag.outputs]
        s = _koszul(order, [deg(y) for _, y in st])
        _add(result, tuple(st[k][1] for k in order), s * c)
    return result


def evaluate_pmor(f, gen_map, deg, x):
    out = {}
    for diag, c in f.terms.items():
        for y, v in evaluate_diagram(diag, gen_map, deg, x).items():
            _add(out, y, c * v)
    return out


def pmor_matrix(f, gen_map, deg, basis):
    """{x: {y: c}} over all input tuples from the algebra basis."""
    return {x: evaluate_pmor(f, gen_map, deg, x)
            for x in itertools.product(basis, repeat=f.n_in)}


def _probe_differs(f, g, probes):
    for model in probes:
        if model.prop_accepts(f) and model.prop_accepts(g):
            basis = model.algebra.basis
            for x in itertools.product(basis, repeat=f.n_in):
                a = evaluate_pmor(f, model.gen_map, model.algebra.deg, x)
                b = evaluate_pmor(g, model.gen_map, model.algebra.deg, x)
                red = model.algebra.ring.red
                if any(red(a.get(k, 0) - b.get(k, 0)) for k in set(a) | set(b)):
                    return True
    return False


# ---------------------------------------------------------------------------
# bounded rewriting

def _has_passthrough(d):
    return any(s[0] < 0 for s in d.outputs)


def _matches(pat, diag):
    """Embeddings of the pattern's nodes into diag as a convex subdiagram."""
    if not pat.nodes or _has_passthrough(pat):
        return
    sinks = diag.sinks()
    pnodes = pat.nodes
    cands = [[j for j, nd in enumerate(diag.nodes) if nd == pn] for pn in pnodes]

    def rec(k, phi):
        if k == len(pnodes):
            yield list(phi)
            return
        for j in cands[k]:
            if j in phi:
                continue
            phi.append(j)
            if _consistent(pat, diag, phi):
                yield from rec(k + 1, phi)
            phi.pop()

    for phi in rec(0, []):
        if _convex(pat, diag, phi, sinks):
            yield phi


def _consistent(pat, diag, phi):
    k = len(phi)
    img = set(phi)
    for i in range(k):
        for r, s in enumerate(pat.inputs[i]):
            t = diag.inputs[phi[i]][r]
            if s[0] >= 0:
                if s[0] < k and t != (phi[s[0]], s[1]):
                    return False
                if s[0] >= k and t[0] >= 0 and t[0] in img:
                    return False
            else:
                if t[0] >= 0 and t[0] in img:
                    return False
    return True


def _convex(pat, diag, phi, sinks):
    img = set(phi)
    inv = {j: i for i, j in enumerate(phi)}
    # internal edges of the image must be pattern edges
    for i, j in enumerate(phi):
        for r, t in enumerate(diag.inputs[j]):
            if t[0] >= 0 and t[0] in img:
                s = pat.inputs[i][r]
                if s != (inv[t[0]], t[1]):
                    return False
    starts = []
    for j in phi:
        for r in range(diag.nodes[j][2]):
            t = sinks[(j, r)]
            if t[0] == "n" and t[1] not in img:
                starts.append(t[1])
    seen = set(starts)
    stack = list(starts)
    succ = {}
    for i, srcs in enumerate(diag.inputs):
        for s in srcs:
            if s[0] >= 0:
                succ.setdefault(s[0], set()).add(i)
    while stack:
        v = stack.pop()
        if v in img:
            return False
        for w in succ.get(v, ()):
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return True


def _replace(pat, diag, phi, repl):
    """diag with the matched subdiagram replaced by repl (a PMor) as a PMor.

    The matched nodes are first moved, in pattern order, to the position of
    the first matched node; this costs a Koszul sign.
    """
    img = set(phi)
    first = min(phi)
    order = []
    for j in range(len(diag.nodes)):
        if j == first:
            order.extend(phi)
        elif j not in img:
            order.append(j)
    sign = _koszul(order, [nd[3] for nd in diag.nodes])
    # collapse the block into one placeholder node
    ph_in = []
    for i in range(len(pat.nodes)):
        for r, s in enumerate(pat.inputs[i]):
            if s[0] < 0:
                ph_in.append((s[1], diag.inputs[phi[i]][r]))
    ph_in.sort()
    ph_inputs = tuple(t for _, t in ph_in)
    out_src = {}
    for o, s in enumerate(pat.outputs):
        out_src[(phi[s[0]], s[1])] = o

    def remap(s):
        if s[0] < 0:
            return s
        if s[0] in img:
            return ("ph", out_src[s])
        return s

    new_nodes, new_inputs = [], []
    index = {}
    for v in order:
        if v in img and v != phi[0]:
            continue
        index[v] = len(new_nodes)
        if v == phi[0]:
            new_nodes.append(("__ph__", pat.n_in, pat.n_out, pat.degree))
            new_inputs.append(ph_inputs)
        else:
            new_nodes.append(diag.nodes[v])
            new_inputs.append(diag.inputs[v])

    def fix(s):
        s = remap(s)
        if s[0] == "ph":
            return (index[phi[0]], s[1])
        return s if s[0] < 0 else (index[s[0]], s[1])

    new_inputs = [tuple(fix(s) for s in x) for x in new_inputs]
    new_outputs = tuple(fix(s) for s in diag.outputs)
    holder = Diagram(diag.n_in, diag.n_out, new_nodes, new_inputs, new_outputs)
    t = {}
    hi = index[phi[0]]
    for rd, c in repl.terms.items():
        s2, nd = splice(holder, hi, rd)
        _add(t, nd, sign * s2 * c)
    return PMor(diag.n_in, diag.n_out, t, diag.degree)


def _rules(P):
    rules = []
    for lhs, rhs in P.relations:
        for a, b in ((lhs, rhs), (rhs, lhs)):
            if len(a.terms) == 1:
                (pat, c), = a.terms.items()
                rules.append((pat, b.scale(c if c in (1, -1) else Fraction(1) / c)))
    return rules


def rewrites(P, f, limit=200):
    """PMors obtained from f by one relation rewrite in one term."""
    out = []
    for diag, c in f.terms.items():
        rest = PMor(f.n_in, f.n_out, {d: v for d, v in f.terms.items() if d != diag}, f.degree)
        for pat, repl in _rules(P):
            if len(pat.nodes) > len(diag.nodes):
                continue
            for phi in _matches(pat, diag):
                new = _replace(pat, diag, phi, repl).scale(c)
                out.append(rest + new if new.terms or rest.terms else rest)
                if len(out) >= limit:
                    return out
    return out


def equal(P, f, g, probes=(), depth=2, limit=2000):
    """'equal', 'distinct' or 'unknown' for two morphisms of P."""
    if (f.n_in, f.n_out) != (g.n_in, g.n_out):
        return "distinct"
    if f == g:
        return "equal"
    if probes and _probe_differs(f, g, probes):
        return "distinct"
    diff = f - g
    if diff.is_zero():
        return "equal"
    frontier = {diff.key(): diff}
    seen = set(frontier)
    for _ in range(depth):
        nxt = {}
        for h in frontier.values():
            for h2 in rewrites(P, h):
                if h2.is_zero():
                    return "equal"
                k = h2.key()
                if k not in seen:
                    seen.add(k)
                    nxt[k] = h2
                if len(seen) > limit:
                    return "unknown"
        frontier = nxt
    return "unknown"


# ---------------------------------------------------------------------------
# the free symmetric monoidal category P^⊗

def weighted_interleave_sign(gdegs, fdegs, sigma):
    """Sign of reordering g_1..g_n f_1..f_n into g_{σ(1)} f_1 ... g_{σ(n)} f_n."""
    n = len(fdegs)
    degs = list(gdegs) + list(fdegs)
    order = []
    for i in range(n):
        order.append(sigma[i])
        order.append(n + i)
    return _koszul(order, degs)


class PTensorMor:
    """Σ coeff (f_1 ⊗ ... ⊗ f_n)_σ with f_i a diagram a_i -> b_{σ(i)}."""

    def __init__(self, source, target, terms=None, degree=None):
        self.source = tuple(source)
        self.target = tuple(target)
        if len(self.source) != len(self.target):
            raise ValueError("words of different lengths have zero Hom")
        self.terms = {}
        for (sigma, fs), c in (terms or {}).items():
            sigma, fs = tuple(sigma), tuple(fs)
            for i, f in enumerate(fs):
                if (f.n_in, f.n_out) != (self.source[i], self.target[sigma[i]]):
                    raise ValueError("factor does not match the words")
            if c:
                _add(self.terms, (sigma, fs), c)
        if degree is None:
            degs = {sum(f.degree for f in fs) for _, fs in self.terms}
            if len(degs) > 1:
                raise ValueError("inhomogeneous morphism")
            degree = degs.pop() if degs else 0
        self.degree = degree

    @classmethod
    def elementary(cls, mors, sigma=None, c=1):
        """(f_1 ⊗ ... ⊗ f_n)_σ from PMors, expanded multilinearly."""
        n = len(mors)
        sigma = tuple(sigma) if sigma is not None else tuple(range(n))
        source = tuple(m.n_in for m in mors)
        target = [None] * n
        for i, m in enumerate(mors):
            target[sigma[i]] = m.n_out
        terms = {}
        for combo in itertools.product(*[list(m.terms.items()) for m in mors]):
            coeff = c
            for _, v in combo:
                coeff *= v
            _add(terms, (sigma, tuple(d for d, _ in combo)), coeff)
        deg = sum(m.degree for m in mors)
        return cls(source, target, terms, deg)

    @classmethod
    def identity(cls, word):
        return cls.elementary([PMor.identity(a) for a in word])

    def is_zero(self):
        return not self.terms

    def __add__(self, other):
        if (self.source, self.target) != (other.source, other.target):
            raise ValueError("boundary mismatch")
        t = dict(self.terms)
        for k, c in other.terms.items():
            _add(t, k, c)
        return PTensorMor(self.source, self.target, t, self.degree)

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, s):
        return PTensorMor(self.source, self.target,
                          {k: s * c for k, c in self.terms.items()}, self.degree)

    def __eq__(self, other):
        return isinstance(other, PTensorMor) and self.source == other.source and \
            self.target == other.target and self.terms == other.terms

    def __hash__(self):
        return hash((self.source, self.target, frozenset(self.terms.items())))

    def __repr__(self):
        return f"PTensorMor({self.source}->{self.target}, {len(self.terms)} terms)"


def compose_ptensor(g, f):
    """g ∘ f with the weighted interleaving sign."""
    if f.target != g.source:
        raise ValueError("boundary mismatch in composition")
    n = len(f.source)
    terms = {}
    for (sig, fs), a in f.terms.items():
        for (sig2, gs), b in g.terms.items():
            s = weighted_interleave_sign([x.degree for x in gs], [x.degree for x in fs], sig)
            new_sigma = tuple(sig2[sig[i]] for i in range(n))
            parts = []
            for i in range(n):
                parts.append(PMor.diagram(gs[sig[i]]) @ PMor.diagram(fs[i]))
            for combo in itertools.product(*[list(p.terms.items()) for p in parts]):
                c = s * a * b
                for _, v in combo:
                    c *= v
                _add(terms, (new_sigma, tuple(d for d, _ in combo)), c)
    return PTensorMor(f.source, g.target, terms, f.degree + g.degree)


def tensor_ptensor(f, g):
    """f ⊗ g: block permutation σ × σ' and no sign."""
    n = len(f.source)
    terms = {}
    for (s1, fs), a in f.terms.items():
        for (s2, gs), b in g.terms.items():
            sigma = tuple(s1) + tuple(n + x for x in s2)
            _add(terms, (sigma, fs + gs), a * b)
    return PTensorMor(f.source + g.source, f.target + g.target, terms, f.degree + g.degree)


def twist(a, b):
    """(id ⊗ ... ⊗ id)_τ : a ⊗ b -> b ⊗ a."""
    a, b = tuple(a), tuple(b)
    n, m = len(a), len(b)
    sigma = tuple(m + i for i in range(n)) + tuple(range(m))
    return PTensorMor.elementary([PMor.identity(x) for x in a + b], sigma)


def permutation_ptensor(word, sigma):
    return PTensorMor.elementary([PMor.identity(x) for x in word], sigma)


def _groups(avec):
    out, i = [], 0
    for a in avec:
        out.append(list(range(i, i + a)))
        i += a
    return out


def par_mor(f, avec):
    """Par_f(a⃗): group the factors of f by the entries of a⃗."""
    avec = tuple(avec)
    n = len(f.source)
    if sum(avec) != n:
        raise ValueError("|a⃗| must equal the number of factors")
    groups = _groups(avec)
    src = tuple(sum(f.source[i] for i in g) for g in groups)
    terms = {}
    target = None
    for (sigma, fs), c in f.terms.items():
        if len(avec) == 1:
            # a single group: absorb σ as an output permutation
            d = PMor.identity(0)
            for x in fs:
                d = d.tensor(PMor.diagram(x))
            mvec = [None] * n
            for i, x in enumerate(fs):
                mvec[sigma[i]] = x.n_out
            outs = [fs[i].n_out for i in range(n)]
            pblock = blowup(sigma, outs)
            perm = PMor.perm(pblock)
            d = perm @ d
            tgt = (sum(mvec),)
            for dd, v in d.terms.items():
                _add(terms, ((0,), (dd,)), c * v)
            target = tgt
            continue
        gmap = {}
        for gi, g in enumerate(groups):
            imgs = [sigma[i] for i in g]
            tgt_group = None
            for gj, h in enumerate(groups):
                if imgs == h:
                    tgt_group = gj
            if tgt_group is None:
                raise ValueError("σ is not compatible with the grouping")
            gmap[gi] = tgt_group
        tvec = [None] * len(groups)
        parts = []
        for gi, g in enumerate(groups):
            d = PMor.identity(0)
            for i in g:
                d = d.tensor(PMor.diagram(fs[i]))
            parts.append(d)
            tvec[gmap[gi]] = d.n_out
        target = tuple(tvec)
        for combo in itertools.product(*[list(p.terms.items()) for p in parts]):
            v = c
            for _, x in combo:
                v *= x
            _add(terms, (tuple(gmap[i] for i in range(len(groups))),
                         tuple(d for d, _ in combo)), v)
    if target is None:
        target = tuple(sum(f.target[i] for i in g) for g in groups)
    return PTensorMor(src, target, terms, f.degree)


def to_pmor(f):
    """F(f) = Par_f((n)) as a PMor |k⃗| -> |m⃗|."""
    n = len(f.source)
    g = par_mor(f, (n,)) if n else f
    out = PMor.zero(sum(f.source), sum(f.target), f.degree)
    for (_, fs), c in g.terms.items():
        if n == 0:
            out = out + PMor.identity(0).scale(c)
        else:
            out = out + PMor.diagram(fs[0], c)
    return out


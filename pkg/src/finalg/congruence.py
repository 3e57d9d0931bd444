"""Congruences, unary polynomial clones and natural quasiorders."""
import itertools
from dataclasses import dataclass, field

import numpy as np

from . import config
from .closure import Closure
from .errors import PreconditionError, ScaleError, InconsistencyError
from .terms import App, Const, TermExpr, Var


def cached(alg, key, build):
    store = alg.__dict__.setdefault("_cache", {})
    if key not in store:
        store[key] = build()
    return store[key]


class UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))
        self.rank = [0] * n

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x, y):
        rx, ry = self.find(x), self.find(y)
        if rx == ry:
            return False
        if self.rank[rx] < self.rank[ry]:
            rx, ry = ry, rx
        self.parent[ry] = rx
        if self.rank[rx] == self.rank[ry]:
            self.rank[rx] += 1
        return True

    def labels(self):
        return [self.find(x) for x in range(len(self.parent))]


def _canonical(labels):
    seen = {}
    return tuple(seen.setdefault(l, len(seen)) for l in labels)


class Congruence:
    """A partition of {0..n-1}; labels are block numbers by first occurrence."""

    __slots__ = ("labels", "nblocks")

    def __init__(self, labels):
        self.labels = _canonical(labels)
        self.nblocks = (max(self.labels) + 1) if self.labels else 0

    @classmethod
    def equality(cls, n):
        return cls(range(n))

    @classmethod
    def full(cls, n):
        return cls([0] * n)

    @classmethod
    def from_blocks(cls, n, blocks):
        uf = UnionFind(n)
        for b in blocks:
            b = list(b)
            for x in b[1:]:
                uf.union(b[0], x)
        return cls(uf.labels())

    @property
    def size(self):
        return len(self.labels)

    def __eq__(self, other):
        return isinstance(other, Congruence) and self.labels == other.labels

    def __hash__(self):
        return hash(self.labels)

    def __repr__(self):
        return "Congruence(" + "|".join(",".join(map(str, b)) for b in self.blocks()) + ")"

    def blocks(self):
        out = [[] for _ in range(self.nblocks)]
        for x, l in enumerate(self.labels):
            out[l].append(x)
        return out

    def nontrivial_blocks(self):
        return [b for b in self.blocks() if len(b) > 1]

    def block_of(self, a):
        l = self.labels[a]
        return [x for x, m in enumerate(self.labels) if m == l]

    def related(self, a, b):
        return self.labels[a] == self.labels[b]

    def is_equality(self):
        return self.nblocks == self.size

    def is_full(self):
        return self.nblocks <= 1

    def leq(self, other):
        # every pair related here is related there
        rep = {}
        for x, l in enumerate(self.labels):
            if l in rep:
                if other.labels[rep[l]] != other.labels[x]:
                    return False
            else:
                rep[l] = x
        return True

    def __le__(self, other):
        return self.leq(other)

    def __lt__(self, other):
        return self.leq(other) and self != other

    def join(self, other):
        uf = UnionFind(self.size)
        for lab in (self.labels, other.labels):
            first = {}
            for x, l in enumerate(lab):
                if l in first:
                    uf.union(first[l], x)
                else:
                    first[l] = x
        return Congruence(uf.labels())

    def meet(self, other):
        return Congruence(list(zip(self.labels, other.labels)))

    def pairs(self):
        for b in self.blocks():
            for x in b:
                for y in b:
                    yield (x, y)

    def to_list(self):
        return list(self.labels)


def is_compatible(alg, theta):
    lab = np.array(theta.labels)
    for sym, arity, arr in alg.kernel_ops():
        if arity == 0:
            continue
        # compatible iff changing one argument inside a block never changes the block of the value
        for pos in range(arity):
            moved = np.moveaxis(arr, pos, 0)
            for block in theta.blocks():
                if len(block) < 2:
                    continue
                vals = lab[moved[block]]
                if np.any(vals != vals[0]):
                    return False
    return True


# -- translations and Mal'cev chains -------------------------------------------

@dataclass(frozen=True)
class Translation:
    """x -> g(c_1, .., x at `position`, .., c_k)."""
    symbol: str
    position: int
    constants: tuple
    table: tuple = field(compare=False, repr=False)

    def __call__(self, x):
        return self.table[x]

    def node(self, inner):
        args = [Const(c) for c in self.constants]
        args.insert(self.position, inner)
        return App(self.symbol, args)


def translations(alg):
    def build():
        out = []
        n = alg.size
        for sym, arity, arr in alg.kernel_ops():
            for pos in range(arity):
                for consts in itertools.product(range(n), repeat=arity - 1):
                    idx = list(consts)
                    idx.insert(pos, slice(None))
                    table = tuple(int(v) for v in arr[tuple(idx)])
                    if table == tuple(range(n)):
                        continue
                    out.append(Translation(sym, pos, tuple(consts), table))
        # dedupe by action while keeping the first witness
        seen, uniq = set(), []
        for t in out:
            if t.table not in seen:
                seen.add(t.table)
                uniq.append(t)
        return uniq
    return cached(alg, "translations", build)


@dataclass(frozen=True)
class ChainLink:
    """Unary polynomial given as translations applied innermost first.

    forward: p(c) is the lower-index end of the link and p(d) the other,
    where (c, d) is the generating pair of the chain.
    """
    steps: tuple
    forward: bool

    def apply(self, x):
        for t in self.steps:
            x = t(x)
        return x

    def term(self):
        node = Var(0)
        for t in self.steps:
            node = t.node(node)
        return TermExpr(node, 1)


@dataclass(frozen=True)
class MalcevChain:
    pair: tuple
    elements: tuple
    links: tuple

    def validate(self):
        c, d = self.pair
        for i, link in enumerate(self.links):
            pc, pd = link.apply(c), link.apply(d)
            want = (self.elements[i], self.elements[i + 1])
            if link.forward and (pc, pd) != want:
                return False
            if not link.forward and (pd, pc) != want:
                return False
        return True

    def __len__(self):
        return len(self.links)


class PrincipalCongruence:
    def __init__(self, alg, a, b):
        self.alg = alg
        self.pair = (a, b)
        n = alg.size
        uf = UnionFind(n)
        # edge: (x, y, parent edge index or None, translation or None)
        self._edges = []
        if a != b:
            uf.union(a, b)
            self._edges.append((a, b, None, None))
            queue = [0]
            trans = translations(alg)
            while queue:
                e = queue.pop()
                x, y = self._edges[e][0], self._edges[e][1]
                for t in trans:
                    tx, ty = t.table[x], t.table[y]
                    if uf.union(tx, ty):
                        self._edges.append((tx, ty, e, t))
                        queue.append(len(self._edges) - 1)
        self.congruence = Congruence(uf.labels())

    def _steps(self, e):
        steps = []
        while self._edges[e][2] is not None:
            steps.append(self._edges[e][3])
            e = self._edges[e][2]
        return tuple(reversed(steps))

    def chain(self, x, y):
        """A Mal'cev chain from x to y built from polynomial images of the pair."""
        if not self.congruence.related(x, y):
            raise ValueError(f"({x},{y}) not in Cg{self.pair}")
        adj = {}
        for i, (u, v, _, _) in enumerate(self._edges):
            adj.setdefault(u, []).append((v, i, True))
            adj.setdefault(v, []).append((u, i, False))
        prev = {x: None}
        queue = [x]
        while queue:
            u = queue.pop(0)
            if u == y:
                break
            for v, i, fwd in adj.get(u, []):
                if v not in prev:
                    prev[v] = (u, i, fwd)
                    queue.append(v)
        path = []
        u = y
        while prev[u] is not None:
            w, i, fwd = prev[u]
            path.append((w, u, i, fwd))
            u = w
        path.reverse()
        elements = [x] + [step[1] for step in path]
        links = tuple(ChainLink(self._steps(i), fwd) for (_, _, i, fwd) in path)
        return MalcevChain(self.pair, tuple(elements), links)


def principal_congruence(alg, a, b):
    """Cg(a, b) together with a Mal'cev chain extractor."""
    key = ("cg", min(a, b), max(a, b))
    pc = cached(alg, key, lambda: PrincipalCongruence(alg, min(a, b), max(a, b)))
    return pc.congruence, pc


def cg(alg, a, b):
    return principal_congruence(alg, a, b)[0]


def congruence_generated(alg, pairs):
    theta = Congruence.equality(alg.size)
    for a, b in pairs:
        if not theta.related(a, b):
            theta = theta.join(cg(alg, a, b))
    return theta


class CongruenceLattice:
    def __init__(self, alg, cap=None):
        cap = cap or config.CAPS.congruences
        n = alg.size
        self.alg = alg
        bottom = Congruence.equality(n)
        principals = {}
        for a in range(n):
            for b in range(a + 1, n):
                principals[(a, b)] = cg(alg, a, b)
        self.principal = principals
        gens = sorted(set(principals.values()), key=lambda c: (-c.nblocks, c.labels))
        found = {bottom}
        frontier = [bottom]
        while frontier:
            nxt = []
            for c in frontier:
                for p in gens:
                    if p.leq(c):
                        continue
                    j = c.join(p)
                    if j not in found:
                        found.add(j)
                        nxt.append(j)
                        if len(found) > cap:
                            raise ScaleError(f"congruence lattice exceeds cap {cap}",
                                             cap=cap, partial=len(found))
            frontier = nxt
        self.congruences = sorted(found, key=lambda c: (-c.nblocks, c.labels))
        self.bottom = bottom
        self.top = Congruence.full(n)

    def __len__(self):
        return len(self.congruences)

    def __iter__(self):
        return iter(self.congruences)

    def atoms(self):
        nontriv = [c for c in self.congruences if c != self.bottom]
        return [c for c in nontriv if not any(d < c for d in nontriv)]

    def covers(self):
        """All prime quotients (alpha, beta) with beta covering alpha."""
        out = []
        cons = self.congruences
        for a in cons:
            for b in cons:
                if a < b and not any(a < c < b for c in cons):
                    out.append((a, b))
        return out

    def monolith(self):
        atoms = self.atoms()
        if len(atoms) == 1:
            return atoms[0]
        return None


def congruence_lattice(alg, cap=None):
    return cached(alg, "conlat", lambda: CongruenceLattice(alg, cap))


def monolith(alg):
    if alg.size < 2:
        return None
    return congruence_lattice(alg).monolith()


def is_subdirectly_irreducible(alg):
    return monolith(alg) is not None


def is_simple(alg):
    return alg.size > 1 and len(congruence_lattice(alg)) == 2


# -- unary polynomials -----------------------------------------------------------

class UnaryPolynomialSet:
    """Pol_1(A) as function tables with polynomial witnesses."""

    def __init__(self, alg, closure):
        self.alg = alg
        self._closure = closure
        self.functions = closure.elements.astype(np.int64)
        self._tuples = [tuple(int(v) for v in row) for row in self.functions]
        self._pos = {t: i for i, t in enumerate(self._tuples)}

    def __len__(self):
        return len(self._tuples)

    def __iter__(self):
        return iter(self._tuples)

    def __contains__(self, f):
        return tuple(f) in self._pos

    def index(self, f):
        return self._pos[tuple(f)]

    def witness(self, f):
        i = f if isinstance(f, int) else self._pos[tuple(f)]
        n = self.alg.size

        def leaf(g):
            return Var(0) if g == 0 else Const(g - 1)
        del n
        return self._closure.term(i, leaf, 1)

    def idempotents(self):
        F = self.functions
        mask = np.all(F[np.arange(len(F))[:, None], F] == F, axis=1)
        return [self._tuples[i] for i in np.nonzero(mask)[0]]

    def ranges(self):
        return [frozenset(t) for t in self._tuples]


def unary_polynomials(alg, cap=None):
    def build():
        n = alg.size
        c = cap or config.CAPS.unary_enumeration
        gens = [list(range(n))] + [[k] * n for k in range(n)]
        cl = Closure(n, n, alg.kernel_ops(), gens, c, what="unary polynomial")
        return UnaryPolynomialSet(alg, cl)
    return cached(alg, "pol1", build)


def idempotent_unary_polynomials(alg):
    return unary_polynomials(alg).idempotents()


def compose(f, g):
    """(f o g)(x) = f(g(x))."""
    return tuple(f[x] for x in g)


@dataclass(frozen=True, eq=False)
class Quasiorder:
    relation: np.ndarray
    base: tuple

    def leq(self, a, b):
        return bool(self.relation[a, b])

    @property
    def size(self):
        return self.relation.shape[0]

    def is_reflexive(self):
        return bool(np.all(np.diag(self.relation)))

    def is_transitive(self):
        r = self.relation.astype(np.int64)
        return bool(np.all((r @ r > 0) <= self.relation))

    def is_compatible(self, functions):
        r = self.relation
        for f in functions:
            f = np.asarray(f)
            if np.any(r & ~r[f[:, None], f[None, :]]):
                return False
        return True

    def kernel(self):
        sym = self.relation & self.relation.T
        uf = UnionFind(self.size)
        for a, b in zip(*np.nonzero(sym)):
            uf.union(int(a), int(b))
        return Congruence(uf.labels())

    def equals(self, other):
        return np.array_equal(self.relation, other.relation)

    def pairs(self):
        return [(int(a), int(b)) for a, b in zip(*np.nonzero(self.relation))]


def _check_idempotent(alg, e, one):
    e = tuple(e)
    pol = unary_polynomials(alg)
    if e not in pol:
        raise PreconditionError("e is not a unary polynomial")
    if compose(e, e) != e:
        raise PreconditionError("e is not idempotent")
    if one not in set(e):
        raise PreconditionError(f"{one} is not in the range of e")
    return e, pol


def natural_quasiorder(alg, e, one):
    e, pol = _check_idempotent(alg, e, one)
    F = pol.functions
    ef = np.asarray(e)[F]  # rows: e o f
    hit = ef == one
    # a <= b fails iff some f has ef(a)=1 and ef(b)!=1
    bad = hit.T.astype(np.int64) @ (~hit).astype(np.int64)
    return Quasiorder(bad == 0, (e, one))


def quasiorder_kernel(q):
    return q.kernel()


def singleton_condition(theta, e, one):
    return all(not theta.related(u, one) for u in set(e) if u != one)


def largest_singleton_congruence(alg, e, one):
    e, _ = _check_idempotent(alg, e, one)
    lat = congruence_lattice(alg)
    good = [t for t in lat if singleton_condition(t, e, one)]
    res = Congruence.equality(alg.size)
    for t in good:
        res = res.join(t)
    if not singleton_condition(res, e, one):
        raise InconsistencyError("join of singleton congruences lost the property")
    return res

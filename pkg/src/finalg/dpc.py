"""Variable collapse, canonical unary polynomials, principal congruence
formulas of descending-then-ascending shape, and element signatures."""
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import config
from .algebra import evaluate_term, free_algebra, term_table
from .congruence import cached, monolith, is_subdirectly_irreducible, cg
from .errors import InconsistencyError, PreconditionError, ScaleError
from .semilattice import find_compatible_semilattice_term
from .terms import App, Const, TermExpr, Var, compose, substitute


def meet_term_of(alg):
    found = cached(alg, "meet_term_expr", lambda: find_compatible_semilattice_term(alg))
    if found is None:
        raise PreconditionError("no compatible semilattice term operation")
    return found[0]


def _meet_array(alg, mt):
    n = alg.size
    return term_table(alg, mt).reshape(n, n)


# -- variable collapse -----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Collapse:
    term: TermExpr
    blocks: tuple
    original: TermExpr

    @property
    def k(self):
        return len(self.blocks)


def collapse_term_variables(alg, t, meet=None):
    """t(x_1..x_m) = t'(meet X_1, ..., meet X_k) via smallest preimage tuples.

    Blocks are ordered by least variable index, so x_1's block is first.
    """
    mt = meet or meet_term_of(alg)
    n, m = alg.size, t.arity
    M = _meet_array(alg, mt)
    vals = term_table(alg, t)
    grid = np.indices((n,) * m).reshape(m, -1)
    R = sorted(set(int(v) for v in vals))
    smallest = {}
    for a in R:
        cols = grid[:, vals == a]
        b = cols[:, 0].copy()
        for j in range(1, cols.shape[1]):
            b = M[b, cols[:, j]]
        idx = np.ravel_multi_index(tuple(b), (n,) * m) if m else 0
        if int(vals[idx]) != a:
            raise InconsistencyError("meet of preimages is not a preimage")
        smallest[a] = tuple(int(v) for v in b)
    maps = [tuple(smallest[a][i] for a in R) for i in range(m)]
    groups = {}
    for i, mp in enumerate(maps):
        groups.setdefault(mp, []).append(i)
    blocks = tuple(sorted((tuple(g) for g in groups.values()), key=lambda g: g[0]))
    where = {}
    for bi, g in enumerate(blocks):
        for i in g:
            where[i] = bi
    t2 = TermExpr(substitute(t.root, lambda i: Var(where[i])), len(blocks))
    # verify t(x) = t'(meet X_1, ...) on all of A^m
    block_vals = []
    for g in blocks:
        acc = grid[g[0]]
        for i in g[1:]:
            acc = M[acc, grid[i]]
        block_vals.append(acc)
    inner = term_table(alg, t2).reshape((n,) * len(blocks)) if blocks else term_table(alg, t2)
    got = inner[tuple(block_vals)] if blocks else np.full(vals.shape, int(inner[0]))
    if np.any(got != vals):
        raise InconsistencyError("collapsed term differs from the original")
    if len(blocks) > n ** n:
        raise InconsistencyError("more blocks than |A|^|A|")
    return Collapse(t2, blocks, t)


# -- canonical unary polynomials ---------------------------------------------------

def lift_constants(p):
    """A unary polynomial p(x) as a term t(x, y_1..y_s) plus the constants it used."""
    consts = sorted({n.value for n in _consts(p.root)})
    slot = {c: 1 + i for i, c in enumerate(consts)}
    memo = {}

    def go(node):
        key = id(node)
        if key in memo:
            return memo[key]
        if isinstance(node, Const):
            res = Var(slot[node.value])
        elif isinstance(node, App):
            res = App(node.symbol, [go(a) for a in node.args])
        else:
            res = node
        memo[key] = res
        return res
    return TermExpr(go(p.root), 1 + len(consts)), consts


def _consts(root):
    from .terms import walk
    return [n for n in walk(root) if isinstance(n, Const)]


@dataclass(frozen=True, eq=False)
class CanonicalPolynomial:
    r: TermExpr
    b: tuple
    collapse: Collapse
    dummy_first: bool = False


def _top_of(M):
    n = M.shape[0]
    for t in range(n):
        if all(M[a, t] == a for a in range(n)):
            return t
    return None


def canonical_unary_polynomial(A, B, p):
    """p(x) = r^B(x, b) with r of arity k+1, k the number of collapse blocks.

    A generates the variety (collapse is computed there); B is the algebra
    the polynomial lives on. If x sits alone in its block, y_1 is x's
    meet partner: B's top when there is one, otherwise a dummy variable.
    """
    mt = meet_term_of(A)
    t, consts = lift_constants(p)
    col = collapse_term_variables(A, t, mt)
    MB = _meet_array(B, mt)
    k = col.k
    b = []
    for bi, g in enumerate(col.blocks):
        cs = [consts[i - 1] for i in g if i != 0]
        if not cs:
            b.append(None)
            continue
        acc = cs[0]
        for c in cs[1:]:
            acc = int(MB[acc, c])
        b.append(acc)
    dummy = False
    if b[0] is None:
        top = _top_of(MB)
        if top is None:
            dummy = True
            b[0] = 0
        else:
            b[0] = top
    x = Var(0)
    if dummy:
        args = [x] + [Var(i + 1) for i in range(1, k)]
    else:
        xy = compose(mt, [TermExpr(x, k + 1), TermExpr(Var(1), k + 1)]).root
        args = [xy] + [Var(i + 1) for i in range(1, k)]
    r = TermExpr(substitute(col.term.root, lambda i: args[i]), k + 1)
    # re-validate on B
    want = term_table(B, p)
    got = [evaluate_term(B, r, (xv,) + tuple(b)) for xv in range(B.size)]
    if list(want) != got:
        raise InconsistencyError("canonical form disagrees with the polynomial")
    return CanonicalPolynomial(r, tuple(b), col, dummy)


# -- Mal'cev chain normalisation ---------------------------------------------------

@dataclass(frozen=True, eq=False)
class NormalLink:
    start: int
    end: int
    table: tuple
    term: TermExpr
    forward: bool


@dataclass(frozen=True, eq=False)
class NormalChain:
    pair: tuple
    descending: tuple
    ascending: tuple

    def elements(self):
        out = []
        links = self.descending + self.ascending
        if links:
            out.append(links[0].start)
            out.extend(l.end for l in links)
        return out

    def validate(self, M):
        c, d = self.pair
        for l in self.descending + self.ascending:
            pc, pd = l.table[c], l.table[d]
            if (pc, pd) != ((l.start, l.end) if l.forward else (l.end, l.start)):
                return False
        for l in self.descending:
            if M[l.start, l.end] != l.end or l.start == l.end:
                return False
        for l in self.ascending:
            if M[l.start, l.end] != l.start or l.start == l.end:
                return False
        return True


def normalize_malcev_chain(B, chain, meet_term):
    M = _meet_array(B, meet_term)
    a = list(chain.elements)
    c, d = chain.pair
    n = len(a)
    g = [a[0]]
    for i in range(1, n):
        g.append(int(M[g[-1], a[i]]))
    h = [0] * n
    h[n - 1] = a[n - 1]
    for i in range(n - 2, -1, -1):
        h[i] = int(M[a[i], h[i + 1]])
    desc, asc = [], []
    for i, link in enumerate(chain.links):
        ptab = np.array([link.apply(x) for x in range(B.size)])
        for target, lo, hi, out in ((g[i], g[i], g[i + 1], desc), (h[i + 1], h[i], h[i + 1], asc)):
            tab = tuple(int(v) for v in M[ptab, target])
            if lo == hi:
                continue
            fwd = (tab[c], tab[d]) == (lo, hi)
            if not fwd and (tab[d], tab[c]) != (lo, hi):
                raise InconsistencyError("normalised link does not hit its endpoints")
            term = compose(meet_term, [link.term(), TermExpr(Const(target), 1)])
            out.append(NormalLink(lo, hi, tab, term, fwd))
    nc = NormalChain((c, d), tuple(desc), tuple(asc))
    if not nc.validate(M):
        raise InconsistencyError("normalised chain failed validation")
    return nc


# -- principal congruence formulas -----------------------------------------------------

@dataclass(frozen=True)
class SpecialPCF:
    """Links as (index into P, forward); the first `split` links form the descending part."""
    links: tuple
    split: int

    def to_report(self):
        return {"descending": [list(l) for l in self.links[:self.split]],
                "ascending": [list(l) for l in self.links[self.split:]]}


@dataclass(eq=False)
class TermRepresentatives:
    alg: object
    arity: int
    free: object
    full_arity: int

    @property
    def conditional(self):
        return self.arity < self.full_arity

    def __len__(self):
        return len(self.free)

    def term(self, i):
        return self.free.term(i)

    def index_of_term(self, t):
        """Index of a term of arity <= self.arity (padded with unused variables)."""
        if t.arity > self.arity:
            raise ScaleError(f"term arity {t.arity} above representative arity {self.arity}")
        padded = TermExpr(t.root, self.arity)
        return self.free.index_of(term_table(self.alg, padded))

    def distinct(self):
        rows = {tuple(r) for r in self.free.tables.tolist()}
        return len(rows) == len(self)


def term_representatives(alg, arity_cap=None):
    n = alg.size
    full = n ** n + 1
    cap = arity_cap or config.CAPS.dpc_arity
    k = min(full, cap)
    F = cached(alg, f"F{k}", lambda: free_algebra(alg, k))
    return TermRepresentatives(alg, k, F, full)


@dataclass(eq=False)
class DPCFormula:
    """All special formulas over P: a descending part of at most |P| links with
    pairwise distinct terms, then an ascending part of at most |P| links."""
    reps: TermRepresentatives
    max_descending: int
    max_ascending: int
    notes: list = field(default_factory=list)

    @property
    def conditional(self):
        return self.reps.conditional

    def disjunct_count(self):
        p = len(self.reps)
        desc = sum(math.perm(p, L) * 2 ** L for L in range(self.max_descending + 1))
        asc = sum((2 * p) ** L for L in range(self.max_ascending + 1))
        return desc * asc

    def disjuncts(self):
        p = len(self.reps)
        for L1 in range(self.max_descending + 1):
            for terms in itertools.permutations(range(p), L1):
                for o1 in itertools.product((True, False), repeat=L1):
                    head = tuple(zip(terms, o1))
                    for L2 in range(self.max_ascending + 1):
                        for tail in itertools.product(itertools.product(range(p), (True, False)), repeat=L2):
                            yield SpecialPCF(head + tuple(tail), L1)

    def to_report(self, limit=10):
        return {"representative_arity": self.reps.arity, "full_arity": self.reps.full_arity,
                "representatives": len(self.reps),
                "terms": [str(self.reps.term(i)) for i in range(len(self.reps))],
                "max_descending": self.max_descending, "max_ascending": self.max_ascending,
                "disjunct_count": str(self.disjunct_count()),
                "first_disjuncts": [d.to_report() for d in itertools.islice(self.disjuncts(), limit)],
                "conditional_on_cap": self.conditional, "notes": list(self.notes)}


def synthesize_dpc_formula(A, arity_cap=None):
    meet_term_of(A)
    reps = term_representatives(A, arity_cap)
    if not reps.distinct():
        raise InconsistencyError("representatives are not pairwise inequivalent")
    p = len(reps)
    notes = []
    if reps.conditional:
        notes.append(f"representative arity capped at {reps.arity} (full {reps.full_arity}); "
                     "bounds conditional on cap")
    return DPCFormula(reps, p, p, notes)


class PCFEvaluator:
    """Evaluates a DPCFormula on a fixed algebra B."""

    def __init__(self, B, phi):
        self.B = B
        self.phi = phi
        k = phi.reps.arity
        nB = B.size
        if nB ** k > config.CAPS.table_entries:
            raise ScaleError(f"|B|^{k} term tables over cap", cap=config.CAPS.table_entries)
        self.tables = [term_table(B, phi.reps.term(i)).reshape(nB, -1) for i in range(len(phi.reps))]
        self._edges = {}

    def edges(self, c, d):
        key = (c, d)
        if key not in self._edges:
            nB = self.B.size
            per = []
            adj = np.zeros((nB, nB), dtype=bool)
            for T in self.tables:
                u, v = T[c], T[d]
                codes = np.unique(u * nB + v)
                pairs = [(int(x) // nB, int(x) % nB) for x in codes]
                s = set()
                for x, y in pairs:
                    s.add((x, y))
                    s.add((y, x))
                    adj[x, y] = adj[y, x] = True
                per.append(s)
            dist = _all_pairs_bfs(adj)
            self._edges[key] = (per, adj, dist)
        return self._edges[key]

    def holds(self, a, b, c, d, budget=None):
        if a == b:
            return True
        per, adj, dist = self.edges(c, d)
        D = dist[a, b]
        P = len(self.phi.reps)
        if D < 0 or D > self.phi.max_descending + self.phi.max_ascending:
            return False
        if D <= self.phi.max_ascending:
            return True
        # distinct-term descending walk, then a free walk of bounded length
        budget = budget or config.CAPS.pcf_budget
        count = [0]
        seen = set()

        def go(x, used, depth):
            count[0] += 1
            if count[0] > budget:
                raise ScaleError("formula evaluation budget exhausted", cap=budget)
            if 0 <= dist[x, b] <= self.phi.max_ascending:
                return True
            if depth == self.phi.max_descending:
                return False
            key = (x, used)
            if key in seen:
                return False
            seen.add(key)
            for t in range(P):
                if used >> t & 1:
                    continue
                for (u, v) in per[t]:
                    if u == x and v != x and go(v, used | (1 << t), depth + 1):
                        return True
            return False
        return go(a, 0, 0)


def _all_pairs_bfs(adj):
    n = adj.shape[0]
    dist = np.full((n, n), -1, dtype=np.int64)
    for s in range(n):
        dist[s, s] = 0
        frontier = [s]
        while frontier:
            nxt = []
            for x in frontier:
                for y in np.nonzero(adj[x])[0]:
                    if dist[s, y] < 0:
                        dist[s, y] = dist[s, x] + 1
                        nxt.append(int(y))
            frontier = nxt
    return dist


def evaluate_pcf(B, phi, a, b, c, d):
    ev = cached(B, ("pcf", id(phi)), lambda: PCFEvaluator(B, phi))
    return ev.holds(a, b, c, d)


def evaluate_special_pcf(B, reps, pcf, a, b, c, d):
    """A single disjunct: exists a chain a = a_1, ..., a_n = b realised link by link."""
    nB = B.size
    cur = {a}
    for t, fwd in pcf.links:
        T = term_table(B, reps.term(t)).reshape(nB, -1)
        u, v = (c, d) if fwd else (d, c)
        nxt = set()
        for x in cur:
            nxt.update(int(y) for y in T[v][T[u] == x])
        cur = nxt
        if not cur:
            return False
    return b in cur


def chain_to_pcf(A, B, chain, phi):
    """Normalise a Mal'cev chain of B and read it as one disjunct of phi."""
    mt = meet_term_of(A)
    nc = normalize_malcev_chain(B, chain, mt)
    links = []
    desc_terms = []
    for part in (nc.descending, nc.ascending):
        for l in part:
            cp = canonical_unary_polynomial(A, B, l.term)
            idx = phi.reps.index_of_term(cp.r)
            if idx is None:
                raise InconsistencyError("canonical term not among representatives")
            links.append((idx, l.forward))
            if part is nc.descending:
                desc_terms.append(idx)
    if len(set(desc_terms)) != len(desc_terms):
        raise InconsistencyError("a representative term repeats on the descending part")
    return SpecialPCF(tuple(links), len(nc.descending)), nc


# -- signatures of elements ---------------------------------------------------------------

@dataclass(eq=False)
class SignatureMap:
    zero: int
    one: int
    S: list
    injective: bool
    bound_ok: bool
    reps_size: int
    conditional: bool

    def to_report(self):
        return {"zero": self.zero, "one": self.one, "signatures": [sorted(s) for s in self.S],
                "injective": self.injective, "bound_ok": self.bound_ok,
                "representatives": self.reps_size, "conditional_on_cap": self.conditional}


def monolith_pair(B, meet_term):
    """0 < 1 in the meet order with Cg(0, 1) the monolith."""
    mu = monolith(B)
    if mu is None:
        raise PreconditionError("algebra is not subdirectly irreducible")
    M = _meet_array(B, meet_term)
    blk = mu.nontrivial_blocks()[0]
    a, b = blk[0], blk[1]
    m = int(M[a, b])
    lo, hi = (m, a) if m != a else (a, b)
    if cg(B, lo, hi) != mu:
        raise InconsistencyError("chosen pair does not generate the monolith")
    return lo, hi


def signature_map(B, reps, meet_term=None):
    if B.size < 2 or not is_subdirectly_irreducible(B):
        raise PreconditionError("signature map needs a subdirectly irreducible algebra")
    mt = meet_term or meet_term_of(reps.alg)
    zero, one = monolith_pair(B, mt)
    nB = B.size
    k = reps.arity
    if nB ** k > config.CAPS.table_entries:
        raise ScaleError(f"|B|^{k} term tables over cap", cap=config.CAPS.table_entries)
    S = [set() for _ in range(nB)]
    for i in range(len(reps)):
        T = term_table(B, reps.term(i)).reshape(nB, -1)
        hit = (T == one).any(axis=1)
        for u in np.nonzero(hit)[0]:
            S[int(u)].add(i)
    fs = [frozenset(s) for s in S]
    inj = len(set(fs)) == nB
    bound = nB <= 2 ** len(reps)
    return SignatureMap(zero, one, fs, inj, bound, len(reps), reps.conditional)

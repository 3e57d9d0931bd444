"""Minimal sets, coarse typing of prime quotients, and genes."""
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import config
from .algebra import quotient
from .closure import Closure
from .congruence import (Congruence, cached, compose, congruence_lattice,
                         largest_singleton_congruence, monolith,
                         natural_quasiorder, unary_polynomials)
from .errors import InconsistencyError, PreconditionError
from .terms import Const, TermExpr, Var
from . import terms as T


class TypeLabel(str, Enum):
    ABELIAN_12 = "ABELIAN_12"
    BOOLEAN_LATTICE_34 = "BOOLEAN_LATTICE_34"
    SEMILATTICE_5 = "SEMILATTICE_5"


# -- binary polynomial clone ------------------------------------------------------

class BinaryPolynomials:
    """Pol_2(A): tables of length n*n, index x*n + y."""

    def __init__(self, alg, closure):
        self.alg = alg
        self._closure = closure
        self.tables = closure.elements.astype(np.int64)

    def __len__(self):
        return len(self.tables)

    def witness(self, i):
        def leaf(g):
            return Var(g) if g < 2 else Const(g - 2)
        return self._closure.term(i, leaf, 2)

    def index_of(self, table):
        return self._closure.find(np.asarray(table))


def binary_polynomials(alg, cap=None):
    def build():
        n = alg.size
        grids = np.indices((n, n)).reshape(2, -1)
        gens = [grids[0], grids[1]] + [np.full(n * n, c) for c in range(n)]
        c = cap or config.CAPS.binary_clone
        cl = Closure(n, n * n, alg.kernel_ops(), gens, c, what="binary polynomial")
        return BinaryPolynomials(alg, cl)
    return cached(alg, "pol2", build)


# -- minimal sets -------------------------------------------------------------------

@dataclass(frozen=True)
class MinimalSet:
    U: frozenset
    witness: tuple
    witness_term: TermExpr = field(compare=False)
    idempotent: tuple = ()
    body: frozenset = frozenset()
    tail: frozenset = frozenset()
    traces: tuple = ()


def _separating_mask(F, alpha, beta):
    la = np.asarray(alpha.labels)
    pairs = [(x, y) for (x, y) in beta.pairs() if x < y and not alpha.related(x, y)]
    if not pairs:
        return np.zeros(len(F), dtype=bool)
    xs = np.array([p[0] for p in pairs])
    ys = np.array([p[1] for p in pairs])
    return np.any(la[F[:, xs]] != la[F[:, ys]], axis=1)


def _require_prime(alg, alpha, beta):
    if not alpha < beta:
        raise PreconditionError("need alpha < beta")
    lat = congruence_lattice(alg)
    if any(alpha < c < beta for c in lat):
        raise PreconditionError("beta does not cover alpha")


def minimal_sets(alg, alpha, beta, check_prime=True):
    if check_prime:
        _require_prime(alg, alpha, beta)
    pol = unary_polynomials(alg)
    F = pol.functions
    sep = _separating_mask(F, alpha, beta)
    if not sep.any():
        raise InconsistencyError("no unary polynomial separates beta from alpha")
    ranges = {}
    for i in np.nonzero(sep)[0]:
        r = frozenset(int(v) for v in F[i])
        ranges.setdefault(r, int(i))
    minimal = [r for r in ranges if not any(s < r for s in ranges)]
    minimal.sort(key=lambda r: (len(r), sorted(r)))
    idem = [e for e in pol.idempotents()]
    out = []
    for U in minimal:
        fi = ranges[U]
        f = tuple(int(v) for v in F[fi])
        e = f
        seen = set()
        while compose(e, e) != e and e not in seen:
            seen.add(e)
            e = compose(f, e)
        if compose(e, e) != e or frozenset(e) != U:
            cands = [g for g in idem if frozenset(g) == U]
            if not cands:
                raise InconsistencyError(f"no idempotent with range {sorted(U)}")
            e = cands[0]
        traces = []
        for blk in beta.blocks():
            N = frozenset(U) & frozenset(blk)
            if len({alpha.labels[x] for x in N}) > 1:
                traces.append(tuple(sorted(N)))
        body = frozenset(x for t in traces for x in t)
        out.append(MinimalSet(U, f, pol.witness(fi), e, body, frozenset(U) - body, tuple(traces)))
    return out


# -- abelian test ---------------------------------------------------------------------

def matrix_closure(alg, R, S, add_diagonal=True, cap=None):
    """Subuniverse of A^4 generated by (x,x,y,y), (x,y) in R and (u,v,u,v), (u,v) in S."""
    cap = cap or config.CAPS.quadruples
    n = alg.size
    gens, tags = [], []
    for (x, y) in sorted(set(R)):
        gens.append((x, x, y, y))
        tags.append(("row", (x, y)))
    for (u, v) in sorted(set(S)):
        gens.append((u, v, u, v))
        tags.append(("col", (u, v)))
    if add_diagonal:
        for c in range(n):
            gens.append((c, c, c, c))
            tags.append(("diag", c))
    cl = Closure(n, 4, alg.kernel_ops(), gens, cap, what="quadruple")
    return cl, tags


def is_abelian_quotient(alg, alpha, beta):
    if not alpha.leq(beta):
        raise PreconditionError("need alpha <= beta")
    if alpha == beta:
        return True
    pairs = list(beta.pairs())
    cl, _ = matrix_closure(alg, pairs, pairs)
    q = cl.elements.astype(np.int64)
    la = np.asarray(alpha.labels)
    hyp = la[q[:, 0]] == la[q[:, 1]]
    concl = la[q[:, 2]] == la[q[:, 3]]
    return bool(np.all(concl | ~hyp))


# -- typing -------------------------------------------------------------------------

def _reduce(alg, alpha, beta):
    """Move a quotient <alpha, beta> to <0, beta/alpha> on A/alpha."""
    if alpha.is_equality():
        return alg, alpha, beta, list(range(alg.size))
    Q, surj = quotient(alg, alpha)
    image = Congruence.from_blocks(Q.size, [[surj[x] for x in b] for b in beta.blocks()])
    return Q, Congruence.equality(Q.size), image, surj


def _range_in(U, table):
    return set(int(v) for v in table) <= set(U)


def _unit_candidates(alg, ms):
    """Trace elements u that are units of some binary polynomial acting as a
    semilattice operation on a 2-element trace."""
    n = alg.size
    e = np.asarray(ms.idempotent)
    bins = binary_polynomials(alg)
    tabs = {tuple(e[t]) for t in bins.tables}
    units = {}
    for trace in ms.traces:
        found = set()
        for a in trace:
            for b in trace:
                if a == b:
                    continue
                for t in tabs:
                    if t[a * n + a] == a and t[b * n + b] == b and t[a * n + b] == b and t[b * n + a] == b:
                        found.add(a)
                        break
        units[trace] = found
    return units


def classify_type(alg, alpha, beta):
    B, a0, b0, _ = _reduce(alg, alpha, beta)
    if is_abelian_quotient(B, a0, b0):
        return TypeLabel.ABELIAN_12
    ms = minimal_sets(B, a0, b0, check_prime=False)
    for m in ms:
        for trace, found in _unit_candidates(B, m).items():
            if len(trace) == 2 and len(found) == 2:
                return TypeLabel.BOOLEAN_LATTICE_34
    return TypeLabel.SEMILATTICE_5


def pseudo_join(alg, ms):
    """A binary polynomial table with range in U whose unit on a trace is the
    non-unit of the pseudo-meet, or None."""
    n = alg.size
    e = np.asarray(ms.idempotent)
    bins = binary_polynomials(alg)
    for trace in ms.traces:
        if len(trace) != 2:
            continue
        a, b = trace
        hits = {}
        for i, t in enumerate(bins.tables):
            et = e[t]
            for u, v in ((a, b), (b, a)):
                if et[u * n + u] == u and et[v * n + v] == v and et[u * n + v] == v and et[v * n + u] == v:
                    hits.setdefault(u, (i, tuple(int(x) for x in et)))
        if len(hits) == 2:
            return hits
    return None


# -- genes ------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Gene:
    e: tuple
    meet: tuple
    zero: int
    one: int
    rho: Congruence
    meet_term: TermExpr = None
    e_term: TermExpr = None
    U: frozenset = frozenset()
    body: frozenset = frozenset()
    algebra: object = None
    surjection: tuple = None
    notes: tuple = ()

    def meet_at(self, x, y):
        n = int(round(len(self.meet) ** 0.5))
        return self.meet[x * n + y]

    def to_report(self):
        n = len(self.e)
        U = sorted(self.U or set(self.e))
        return {
            "e": list(self.e),
            "meet_on_U": [[self.meet[x * n + y] for y in U] for x in U],
            "U": U,
            "zero": self.zero,
            "one": self.one,
            "rho": list(self.rho.labels),
        }


def check_gene_axioms(alg, g):
    n = alg.size
    e, m, z, o = g.e, g.meet, g.zero, g.one
    U = sorted(set(e))
    g1 = e[z] == z and e[o] == o and z != o
    try:
        rho = largest_singleton_congruence(alg, e, o)
        g2 = rho == g.rho
    except PreconditionError:
        g2 = False
    g3 = all(m[x * n + y] in U for x in U for y in U) and all(
        m[x * n + x] == x and m[x * n + o] == x and m[o * n + x] == x for x in U)
    g4 = all(g.rho.related(a, m[a * n + z]) and g.rho.related(a, m[z * n + a])
             for a in U if a != o)
    return {"g1": bool(g1), "g2": bool(g2), "g3": bool(g3), "g4": bool(g4)}


def _meet_candidates(alg, ms):
    """e o q for q in Pol_2, deduplicated, in closure (simplest-first) order."""
    e = np.asarray(ms.idempotent)
    bins = binary_polynomials(alg)
    seen = {}
    for i, t in enumerate(bins.tables):
        et = tuple(int(v) for v in e[t])
        seen.setdefault(et, i)
    return [(t, i) for t, i in seen.items()]


def _gene_on(alg, ms, beta):
    n = alg.size
    pol = unary_polynomials(alg)
    e = ms.idempotent
    U = sorted(ms.U)
    cands = _meet_candidates(alg, ms)
    bins = binary_polynomials(alg)
    for scope, label in ((U, "full"), (sorted(ms.body), "body")):
        # larger elements first as the unit: gives the (id, meet, 0, 1) orientation
        for one in sorted(ms.body, reverse=True):
            for t, qi in cands:
                if not all(t[x * n + x] == x and t[x * n + one] == x and t[one * n + x] == x
                           for x in scope):
                    continue
                rho = largest_singleton_congruence(alg, e, one)
                for z in U:
                    if z == one:
                        continue
                    if not any(rho.related(z, b) for b in ms.body):
                        continue
                    if all(rho.related(a, t[a * n + z]) and rho.related(a, t[z * n + a])
                           for a in U if a != one):
                        e_term = pol.witness(tuple(e))
                        meet_term = T.compose(e_term, [bins.witness(qi)])
                        notes = () if label == "full" else ("pseudo-meet idempotent on body only",)
                        return Gene(tuple(e), t, z, one, rho, meet_term, e_term,
                                    frozenset(U), ms.body, alg, None, notes)
    return None


def construct_gene(alg, alpha, beta, minimal_set_index=None):
    """An <alpha, beta>-gene.

    For alpha above equality the gene is built on A/alpha for <0, beta/alpha>;
    the returned gene then lives on `gene.algebra` with `gene.surjection`.
    """
    B, a0, b0, surj = _reduce(alg, alpha, beta)
    if B is alg:
        _require_prime(alg, alpha, beta)
    if is_abelian_quotient(B, a0, b0):
        raise PreconditionError("quotient is abelian; genes need a nonabelian quotient")
    sets = minimal_sets(B, a0, b0, check_prime=False)
    order = range(len(sets)) if minimal_set_index is None else [minimal_set_index]
    for k in order:
        g = _gene_on(B, sets[k], b0)
        if g is not None:
            if B is not alg:
                g = Gene(g.e, g.meet, g.zero, g.one, g.rho, g.meet_term, g.e_term,
                         g.U, g.body, B, tuple(surj), g.notes + ("built on quotient",))
            return g
    raise InconsistencyError("no pseudo-meet found on any minimal set")


def monolith_gene(alg):
    mu = monolith(alg)
    if mu is None:
        raise PreconditionError("algebra is not subdirectly irreducible")
    return construct_gene(alg, Congruence.equality(alg.size), mu)


def genes_equivalent(alg, g, h):
    q1 = natural_quasiorder(alg, g.e, g.one)
    q2 = natural_quasiorder(alg, h.e, h.one)
    return q1.equals(q2)


def all_genes(alg, alpha, beta):
    """One gene per minimal set (where one can be found)."""
    sets = minimal_sets(alg, alpha, beta)
    out = []
    for ms in sets:
        g = _gene_on(alg, ms, beta)
        if g is not None:
            out.append(g)
    return out

"""Compatible semilattice operations: detection, extraction, and the
semilattice structure a self-rectangulating gene induces on its minimal set."""
import itertools
from dataclasses import dataclass, field

import numpy as np

from . import config
from .algebra import free_algebra, generate_subuniverse, term_table
from .closure import Closure
from .congruence import (cached, is_subdirectly_irreducible, monolith,
                         natural_quasiorder, unary_polynomials)
from .errors import InconsistencyError, PreconditionError, ScaleError
from .tct import binary_polynomials, is_abelian_quotient, check_gene_axioms
from .terms import App, Const, TermExpr, Var
from . import terms as T


@dataclass(frozen=True, eq=False)
class CompatibleSemilatticeOp:
    table: tuple
    source: str
    term: TermExpr = None

    @property
    def n(self):
        return int(round(len(self.table) ** 0.5))

    def __call__(self, x, y):
        return self.table[x * self.n + y]

    def array(self):
        n = self.n
        return np.array(self.table).reshape(n, n)

    def leq(self, a, b):
        """Meet reading: a <= b iff a ^ b = a."""
        return self(a, b) == a

    def top(self):
        n = self.n
        tops = [t for t in range(n) if all(self.leq(a, t) for a in range(n))]
        return tops[0] if tops else None

    def bottom(self):
        n = self.n
        bots = [b for b in range(n) if all(self.leq(b, a) for a in range(n))]
        return bots[0] if bots else None

    def hasse_edges(self):
        n = self.n
        lt = [(a, b) for a in range(n) for b in range(n) if a != b and self.leq(a, b)]
        return sorted((a, b) for a, b in lt
                      if not any(self.leq(a, c) and self.leq(c, b) and c not in (a, b) for c in range(n)))

    def to_report(self):
        out = {"table": [list(r) for r in self.array().tolist()], "source": self.source,
               "hasse": [list(e) for e in self.hasse_edges()]}
        if self.term is not None:
            out["term"] = str(self.term)
        return out


def is_semilattice_table(table, n, domain=None):
    m = np.asarray(table).reshape(n, n)
    D = list(range(n)) if domain is None else sorted(domain)
    for x in D:
        if m[x, x] != x:
            return False
        for y in D:
            if m[x, y] != m[y, x] or m[x, y] not in D:
                return False
    for x, y, z in itertools.product(D, repeat=3):
        if m[m[x, y], z] != m[x, m[y, z]]:
            return False
    return True


def is_homomorphism_from_square(alg, table):
    """meet(g(x), g(y)) == g(meet(x, y)) for every basic operation g."""
    n = alg.size
    m = np.asarray(table).reshape(n, n)
    for sym, k, arr in alg.kernel_ops():
        if k == 0:
            continue
        if n ** (2 * k) > config.CAPS.table_entries:
            raise ScaleError(f"homomorphism check for {sym} too large")
        g = np.indices((n,) * (2 * k)).reshape(2 * k, -1)
        xs, ys = g[:k], g[k:]
        left = m[arr[tuple(xs)], arr[tuple(ys)]]
        right = arr[tuple(m[xs[i], ys[i]] for i in range(k))]
        if np.any(left != right):
            return False
    return True


def is_compatible_semilattice(alg, table):
    return is_semilattice_table(table, alg.size) and is_homomorphism_from_square(alg, table)


def _no_candidates(alg):
    """True when no compatible semilattice operation exists at all.

    Polynomial and term searches build whole binary clones; this cheap
    table search lets them skip that when nothing could qualify.
    """
    if alg.size > 5:
        return False
    try:
        return cached(alg, "no_compatible_ops", lambda: not compatible_semilattice_operations(alg))
    except ScaleError:
        return False


def find_compatible_semilattice_polynomial(alg):
    if _no_candidates(alg):
        return None
    bins = binary_polynomials(alg)
    found = []
    for i, t in enumerate(bins.tables):
        if is_compatible_semilattice(alg, t):
            found.append(i)
    if len(found) > 1:
        raise InconsistencyError("two distinct compatible semilattice polynomials")
    if not found:
        return None
    i = found[0]
    return CompatibleSemilatticeOp(tuple(int(v) for v in bins.tables[i]), "polynomial",
                                   bins.witness(i))


def find_compatible_semilattice_term(alg):
    if _no_candidates(alg):
        return None
    F2 = cached(alg, "F2", lambda: free_algebra(alg, 2))
    for i, t in enumerate(F2.tables):
        if is_compatible_semilattice(alg, t):
            op = CompatibleSemilatticeOp(tuple(int(v) for v in t), "term", F2.term(i))
            return F2.term(i), op
    return None


def compatible_semilattice_operations(alg, max_size=5):
    """Every compatible semilattice operation, polynomial or not.

    Backtracking over the upper triangle of a commutative idempotent table;
    each compatibility equation is checked as soon as its last cell is set.
    """
    n = alg.size
    if n > max_size:
        raise ScaleError(f"operation search limited to {max_size} elements", cap=max_size)
    cells = [(x, y) for x in range(n) for y in range(x + 1, n)]
    order = {c: i for i, c in enumerate(cells)}

    def cell(x, y):
        return None if x == y else (min(x, y), max(x, y))

    # an equation t(f(xs), f(ys)) = f(t(x1, y1), ..., t(xk, yk))
    pending = [[] for _ in cells]
    for sym, k, arr in alg.kernel_ops():
        if k == 0:
            continue
        if n ** (2 * k) > config.CAPS.table_entries:
            raise ScaleError(f"compatibility equations for {sym} too many")
        for xs in itertools.product(range(n), repeat=k):
            for ys in itertools.product(range(n), repeat=k):
                used = [cell(x, y) for x, y in zip(xs, ys)]
                lhs = (int(arr[xs]), int(arr[ys]))
                used.append(cell(*lhs))
                idx = [order[c] for c in used if c is not None]
                if not idx:
                    continue
                pending[max(idx)].append((arr, xs, ys, lhs))
    t = np.full((n, n), -1, dtype=np.int64)
    np.fill_diagonal(t, np.arange(n))
    found = []

    def ok_at(i):
        for arr, xs, ys, (a, b) in pending[i]:
            inner = tuple(int(t[x, y]) for x, y in zip(xs, ys))
            if t[a, b] != arr[inner]:
                return False
        return True

    def go(i):
        if i == len(cells):
            if is_semilattice_table(t.ravel(), n):
                found.append(tuple(int(v) for v in t.ravel()))
            return
        x, y = cells[i]
        for v in range(n):
            t[x, y] = t[y, x] = v
            if ok_at(i):
                go(i + 1)
        t[x, y] = t[y, x] = -1
    go(0)
    return [CompatibleSemilatticeOp(tab, "operation") for tab in found]


def compatible_meet(alg):
    """The compatible semilattice term operation as a table, or None."""
    def build():
        r = find_compatible_semilattice_term(alg)
        return None if r is None else r[1]
    return cached(alg, "meet_term", build)


def idempotent_term_operations(alg, arity, cap=None):
    F = free_algebra(alg, arity, cap)
    n = alg.size
    diag = np.ravel_multi_index(tuple(np.tile(np.arange(n), (arity, 1))), (n,) * arity) if arity else None
    out = []
    for i, t in enumerate(F.tables):
        if np.array_equal(t[diag], np.arange(n)):
            out.append(F.term(i))
    return out


# -- extraction of a term from a compatible meet with a top -------------------------

@dataclass(frozen=True)
class EssentiallyUnaryWitness:
    u: int
    v: int
    binary_terms_checked: int

    def to_report(self):
        return {"subalgebra": [self.u, self.v], "binary_terms_checked": self.binary_terms_checked}


def _tab(alg, term):
    return tuple(int(v) for v in term_table(alg, term))


def _bin(x, y):
    return TermExpr(None, 2)


def _subst2(outer, first, second):
    """outer(first, second) for binary terms."""
    return T.compose(outer, [first, second])


X = TermExpr(Var(0), 2)
Y = TermExpr(Var(1), 2)


def _iter_first(alg, t):
    """t_{k+1}(x,y) = t(t_k(x,y), y) until t'(t'(x,y), y) = t'(x,y)."""
    cur = t
    seen = set()
    while True:
        nxt = _subst2(cur, cur, Y)
        tc, tn = _tab(alg, cur), _tab(alg, nxt)
        if tc == tn:
            return cur
        if tc in seen:
            raise InconsistencyError("first-variable iteration does not stabilise")
        seen.add(tc)
        cur = _subst2(t, cur, Y)


def _iter_second(alg, t):
    """t_{k+1}(x,y) = t(x, t_k(x,y)) until t'(x, t'(x,y)) = t'(x,y)."""
    cur = t
    seen = set()
    while True:
        nxt = _subst2(cur, X, cur)
        tc, tn = _tab(alg, cur), _tab(alg, nxt)
        if tc == tn:
            return cur
        if tc in seen:
            raise InconsistencyError("second-variable iteration does not stabilise")
        seen.add(tc)
        cur = _subst2(t, X, cur)


def extract_semilattice_term(alg, meet, top=None):
    """Either a binary term equal to `meet`, or a 2-element essentially unary subalgebra.

    meet: CompatibleSemilatticeOp (or table) with a largest element.
    """
    n = alg.size
    if not alg.is_idempotent():
        raise PreconditionError("algebra must be idempotent")
    table = meet.table if isinstance(meet, CompatibleSemilatticeOp) else tuple(meet)
    if not is_compatible_semilattice(alg, table):
        raise PreconditionError("supplied operation is not a compatible semilattice operation")
    op = CompatibleSemilatticeOp(table, "supplied")
    one = op.top() if top is None else top
    if one is None or not all(op.leq(a, one) for a in range(n)):
        raise PreconditionError("semilattice has no largest element")
    m = op.array()
    F2 = cached(alg, "F2", lambda: free_algebra(alg, 2))
    eps = {}
    for i in range(len(F2)):
        t = F2.term(i)
        tt = np.asarray(F2.tables[i]).reshape(n, n)
        alpha, beta = tt[:, one], tt[one, :]
        if np.any(tt != m[alpha[:, None], beta[None, :]]):
            raise InconsistencyError("binary term does not split as alpha(x) ^ beta(y)")
        t1 = _iter_first(alg, t)
        t2 = _iter_second(alg, t1)
        s = _subst2(t2, t2, _subst2(t2, Y, X))
        w = _iter_second(alg, s)
        wt = np.asarray(_tab(alg, w)).reshape(n, n)
        e_fn = tuple(int(v) for v in wt[one, :])
        if np.any(wt != m[np.arange(n)[:, None], np.asarray(e_fn)[None, :]]):
            raise InconsistencyError("extracted term is not of the form x ^ eps(y)")
        eps.setdefault(e_fn, w)
    items = sorted(eps.items())
    d = items[0][1]
    for _, w in items[1:]:
        d = _subst2(w, d, Y)
    D = _iter_second(alg, d)
    dt = np.asarray(_tab(alg, D)).reshape(n, n)
    E = dt[one, :]
    if np.array_equal(E, np.arange(n)):
        if tuple(int(v) for v in dt.reshape(-1)) != table:
            raise InconsistencyError("E is the identity but the term differs from meet")
        return D
    # E moves some u; push u up to a lower cover of v = E(u)
    u = next(a for a in range(n) if E[a] != a)
    v = int(E[u])
    interval = [w_ for w_ in range(n) if op.leq(u, w_) and op.leq(w_, v) and w_ != v]
    cover = [w_ for w_ in interval if not any(op.leq(w_, z) and z != w_ for z in interval)]
    u = cover[0]
    sub = generate_subuniverse(alg, [u, v]).elements
    if set(sub) != {u, v}:
        raise InconsistencyError("{u, v} is not a subuniverse")
    for t in F2.tables:
        tt = np.asarray(t).reshape(n, n)
        r = {(a, b): int(tt[a, b]) for a in (u, v) for b in (u, v)}
        if not (all(r[(a, b)] == a for a, b in r) or all(r[(a, b)] == b for a, b in r)):
            raise InconsistencyError("{u, v} has a non-projection binary term operation")
    return EssentiallyUnaryWitness(u, v, len(F2))


# -- the semilattice on a minimal set of a self-rectangulating gene -------------------

def _ternary_polynomials(alg):
    def build():
        n = alg.size
        grids = np.indices((n, n, n)).reshape(3, -1)
        gens = [grids[0], grids[1], grids[2]] + [np.full(n ** 3, c) for c in range(n)]
        cl = Closure(n, n ** 3, alg.kernel_ops(), gens, config.CAPS.binary_clone,
                     what="ternary polynomial")
        return cl.elements.astype(np.int64)
    return cached(alg, "pol3", build)


def verify_gene_semilattice(alg, g):
    """Meet-semilattice structure of (U; meet) induced by a <0, mu>-gene.

    Clause 3 is checked for p = e o q with q ranging over the binary and
    ternary polynomial closures.
    """
    from .rectangulation import rectangulates_modulo, total_relation
    n = alg.size
    report = {"preconditions": {}, "clauses": {}}
    pre = report["preconditions"]
    pre["subdirectly_irreducible"] = is_subdirectly_irreducible(alg)
    mu = monolith(alg) if pre["subdirectly_irreducible"] else None
    from .congruence import Congruence
    pre["nonabelian_monolith"] = bool(mu is not None and not is_abelian_quotient(
        alg, Congruence.equality(n), mu))
    axioms = check_gene_axioms(alg, g)
    pre["gene_axioms"] = all(axioms.values()) and g.rho.is_equality()
    if all(pre.values()):
        T_ = total_relation(n)
        pre["self_rectangulating"] = rectangulates_modulo(alg, g, T_, T_).holds
    else:
        pre["self_rectangulating"] = False
    if not all(pre.values()):
        report["ok"] = False
        report["reason"] = "preconditions not met"
        return report
    U = sorted(set(g.e))
    mt = np.asarray(g.meet).reshape(n, n)
    e = np.asarray(g.e)
    sub = np.full((n, n), -1)
    for x in U:
        for y in U:
            sub[x, y] = mt[x, y]
    c = report["clauses"]
    semi = is_semilattice_table(mt.reshape(-1), n, domain=U)
    # compatibility with polynomials whose range lies in U (unary and binary)
    comp = semi
    if semi:
        Ua = np.array(U)
        for f in unary_polynomials(alg).functions:
            p = e[f]
            if np.any(mt[p[Ua[:, None]], p[Ua[None, :]]] != p[mt[Ua[:, None], Ua[None, :]]]):
                comp = False
                break
        if comp:
            for q in binary_polynomials(alg).tables:
                p = e[q].reshape(n, n)
                for (x1, y1) in itertools.product(U, repeat=2):
                    lhs = mt[p[x1, y1], p[np.ix_(Ua, Ua)]]
                    rhs = p[mt[x1, Ua][:, None], mt[y1, Ua][None, :]]
                    if np.any(lhs != rhs):
                        comp = False
                        break
                if not comp:
                    break
    c["1_compatible_semilattice_on_U"] = bool(comp)
    q = natural_quasiorder(alg, g.e, g.one)
    c["2_order_matches"] = bool(semi and all(q.leq(x, y) == (mt[x, y] == x) for x in U for y in U))
    sampled = 0
    ok3 = semi
    if semi:
        polys = [(2, t) for t in binary_polynomials(alg).tables]
        try:
            polys += [(3, t) for t in _ternary_polynomials(alg)]
            report["clause3_arities"] = [2, 3]
        except ScaleError:
            report["clause3_arities"] = [2]
        for k, t in polys:
            p = e[t].reshape((n,) * k)
            grid = np.indices((n,) * (2 * k)).reshape(2 * k, -1)
            xs, ys = grid[:k], grid[k:]
            lhs = mt[p[tuple(xs)], p[tuple(ys)]]
            rhs = None
            for i in range(k):
                args = [ys[j] if j != i else xs[i] for j in range(k)]
                val = p[tuple(args)]
                rhs = val if rhs is None else mt[rhs, val]
            sampled += 1
            if np.any(lhs != rhs):
                ok3 = False
                break
    c["3_meet_identity"] = bool(ok3)
    report["clause3_polynomials_checked"] = sampled
    report["meet_on_U"] = [[int(mt[x, y]) for y in U] for x in U]
    report["U"] = U
    report["ok"] = all(c.values())
    return report

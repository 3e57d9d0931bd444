"""Extensions that carry a compatible semilattice operation.

power_quotient_extension  A^N / delta with the range-union meet
coordinate_embedding      A into a reduct of a matrix power of (U; meet)
top_extension             the constrained subset B of U^m with top (1,...,1)
"""
import random
from dataclasses import dataclass, field

import numpy as np

from . import config
from .algebra import FiniteAlgebra, direct_power, free_algebra, quotient, term_table
from .closure import Closure
from .congruence import (Congruence, Quasiorder, cached, cg, is_compatible,
                         is_subdirectly_irreducible, monolith, unary_polynomials)
from .errors import InconsistencyError, PreconditionError, ScaleError
from .semilattice import is_compatible_semilattice
from .tct import is_abelian_quotient, monolith_gene
from .terms import App, TermExpr, Var


def _require_si_nonabelian(alg):
    if not is_subdirectly_irreducible(alg):
        raise PreconditionError("algebra is not subdirectly irreducible")
    mu = monolith(alg)
    if is_abelian_quotient(alg, Congruence.equality(alg.size), mu):
        raise PreconditionError("monolith is abelian")
    return mu


def _require_self_rectangulating(alg, g):
    from .rectangulation import rectangulates_modulo, total_relation
    T = total_relation(alg.size)
    v = rectangulates_modulo(alg, g, T, T)
    if not v.holds:
        raise PreconditionError("algebra does not rectangulate itself modulo the monolith gene")


# -- power quotient ------------------------------------------------------------

@dataclass
class PowerQuotientExtension:
    B: FiniteAlgebra
    embedding: tuple
    meet: tuple
    delta: Congruence
    N: int
    checks: dict
    gap: int
    notes: list = field(default_factory=list)

    @property
    def ok(self):
        return all(self.checks.values())

    def to_report(self):
        return {"N": self.N, "size": self.B.size, "embedding": list(self.embedding),
                "delta_classes": self.delta.nblocks, "checks": dict(self.checks),
                "delta_minus_range_kernel_pairs": self.gap, "notes": list(self.notes),
                "meet": None if self.meet is None else list(self.meet)}


def _pair_set_leq(alg, g, pairs):
    """For a in A^N with the given distinct coordinate pairs (a_i, b_i): is a below b?

    Only the set of pairs matters, since independent constants can be placed on
    repeated coordinates; so the closure lives in A^(2k) with k = len(pairs).
    """
    n, k = alg.size, len(pairs)
    a = [p[0] for p in pairs]
    b = [p[1] for p in pairs]
    digits = np.array(np.unravel_index(np.arange(n ** k), (n,) * k)).T
    gens = [np.array(a + b)] + [np.concatenate([w, w]) for w in digits]
    cl = Closure(n, 2 * k, alg.kernel_ops(), gens, config.CAPS.subuniverse,
                 what="pair closure")
    rows = cl.elements.astype(np.int64)
    E = np.asarray(g.e)[rows] == g.one
    top_left = E[:, :k].all(axis=1)
    top_right = E[:, k:].all(axis=1)
    return not bool(np.any(top_left & ~top_right))


def power_quotient_extension(alg, g=None, N=8):
    mu = _require_si_nonabelian(alg)
    g = g or monolith_gene(alg)
    if g.algebra is not None and g.algebra is not alg:
        raise PreconditionError("gene must live on the algebra itself")
    _require_self_rectangulating(alg, g)
    n = alg.size
    if n ** (2 * N) > config.CAPS.table_entries:
        raise ScaleError(f"power quotient needs {n}^{2 * N} pair cells", cap=config.CAPS.table_entries)
    P = direct_power(alg, N)
    M = P.size
    D = P.digits()
    codes = D[:, None, :] * n + D[None, :, :]
    masks = np.bitwise_or.reduce(np.left_shift(np.int64(1), codes.astype(np.int64)), axis=2)
    verdict = {}
    for m in np.unique(masks):
        pairs = [divmod(c, n) for c in range(n * n) if (int(m) >> c) & 1]
        verdict[int(m)] = _pair_set_leq(alg, g, pairs)
    lut = np.vectorize(lambda m: verdict[int(m)], otypes=[bool])
    leq = lut(masks)
    q = Quasiorder(leq, (g.e, g.one))
    checks = {"quasiorder": q.is_reflexive() and q.is_transitive()}
    delta = q.kernel()
    checks["delta_congruence"] = is_compatible(P, delta)
    if not checks["delta_congruence"]:
        raise InconsistencyError("delta is not a congruence of the power")
    B, surj = quotient(P, delta, name=f"{alg.name}^{N}/delta")
    emb = tuple(surj[P.diagonal(x)] for x in range(n))
    checks["embedding_injective"] = len(set(emb)) == n
    lo, hi = surj[P.diagonal(g.zero)], surj[P.diagonal(g.one)]
    checks["quotient_si"] = is_subdirectly_irreducible(B)
    checks["monolith_generated_by_zero_one"] = bool(
        checks["quotient_si"] and monolith(B) == cg(B, lo, hi))
    checks["embedding_homomorphism"] = all(
        int(B.array(o.symbol)[tuple(emb[x] for x in args)]) == emb[int(alg.array(o.symbol)[args])]
        for o in alg.operations if o.arity
        for args in np.ndindex(*(n,) * o.arity))
    # ranges as bitmasks over A
    ran = np.bitwise_or.reduce(np.left_shift(np.int64(1), D.astype(np.int64)), axis=1)
    sup = (ran[:, None] & ran[None, :]) == ran[None, :]
    checks["range_monotone"] = bool(np.all(leq[sup]))
    same = ran[:, None] == ran[None, :]
    rel = delta.labels
    lab = np.asarray(rel)
    in_delta = lab[:, None] == lab[None, :]
    checks["range_kernel_in_delta"] = bool(np.all(in_delta[same]))
    gap = int(np.count_nonzero(in_delta & ~same))
    meet = None
    notes = []
    if N >= 4 * n:
        rep = {}
        for r in np.unique(ran):
            elems = [a for a in range(n) if (int(r) >> a) & 1]
            tup = (elems * N)[:N]
            rep[int(r)] = surj[P.encode(tup)]
        s = np.asarray(surj)
        union = ran[:, None] | ran[None, :]
        cls = np.vectorize(lambda r: rep[int(r)])(union)
        k = B.size
        table = np.full((k, k), -1, dtype=np.int64)
        table[s[:, None], s[None, :]] = cls
        consistent = np.all(table[s[:, None], s[None, :]] == cls) and np.all(table >= 0)
        checks["meet_well_defined"] = bool(consistent)
        if consistent:
            meet = tuple(int(v) for v in table.reshape(-1))
            checks["meet_compatible_semilattice"] = is_compatible_semilattice(B, meet)
    else:
        notes.append(f"N < 4|A|; range-union meet not checked")
    return PowerQuotientExtension(B, emb, meet, delta, N, checks, gap, notes)


# -- coordinate embedding --------------------------------------------------------

@dataclass
class CoordinateEmbedding:
    alg: FiniteAlgebra
    gene: object
    F: list
    phi: list
    lam: dict
    U: list
    one: int

    @property
    def m(self):
        return len(self.F)

    def meet_table(self):
        n = self.alg.size
        return np.asarray(self.gene.meet).reshape(n, n)

    def reduct(self, symbol, inputs):
        """Apply g-bar to arrays of m-tuples; inputs[j] has shape (batch, m)."""
        lam = self.lam[symbol]
        mt = self.meet_table()
        out = np.empty_like(inputs[0])
        for i in range(self.m):
            acc = inputs[0][:, lam[i][0]]
            for j in range(1, len(inputs)):
                acc = mt[acc, inputs[j][:, lam[i][j]]]
            out[:, i] = acc
        return out

    def to_report(self):
        return {"m": self.m, "F": [list(f) for f in self.F], "phi": [list(p) for p in self.phi],
                "lambda": {s: [list(r) for r in t] for s, t in sorted(self.lam.items())},
                "U": self.U, "one": self.one}


def coordinate_embedding(alg, g=None):
    if not alg.is_idempotent():
        raise PreconditionError("coordinate embedding needs an idempotent algebra")
    _require_si_nonabelian(alg)
    g = g or monolith_gene(alg)
    _require_self_rectangulating(alg, g)
    n = alg.size
    e = np.asarray(g.e)
    one = g.one
    mt = np.asarray(g.meet).reshape(n, n)
    U = sorted(set(g.e))
    F = sorted({tuple(int(v) for v in e[f]) for f in unary_polynomials(alg).functions
                if one in set(e[f].tolist())})
    pos = {f: i for i, f in enumerate(F)}
    Fa = np.array(F, dtype=np.int64)
    phi = [tuple(int(v) for v in Fa[:, a]) for a in range(n)]
    if len(set(phi)) != n:
        raise InconsistencyError("phi is not injective")
    lam = {}
    for sym, k, arr in alg.kernel_ops():
        grid = np.indices((n,) * k).reshape(k, -1)
        rows = []
        for i, f in enumerate(F):
            Ei = Fa[i][arr[tuple(grid)]]
            hits = np.nonzero(Ei == one)[0]
            if len(hits) == 0:
                raise InconsistencyError(f"e_{i} o {sym} never reaches 1")
            abar = grid[:, hits[0]]
            row = []
            for j in range(k):
                args = [np.full(n, abar[t]) if t != j else np.arange(n) for t in range(k)]
                h = tuple(int(v) for v in Fa[i][arr[tuple(args)]])
                if h not in pos:
                    raise InconsistencyError(f"meetand of e_{i} o {sym} is not in F")
                row.append(pos[h])
            acc = Fa[row[0]][grid[0]]
            for j in range(1, k):
                acc = mt[acc, Fa[row[j]][grid[j]]]
            if np.any(acc != Ei):
                raise InconsistencyError(f"e_{i} o {sym} does not split into meetands")
            rows.append(tuple(row))
        lam[sym] = rows
    emb = CoordinateEmbedding(alg, g, F, phi, lam, U, one)
    P = np.array(phi, dtype=np.int64)
    for sym, k, arr in alg.kernel_ops():
        grid = np.indices((n,) * k).reshape(k, -1)
        got = emb.reduct(sym, [P[grid[j]] for j in range(k)])
        if np.any(got != P[arr[tuple(grid)]]):
            raise InconsistencyError(f"phi does not preserve {sym}")
    return emb


# -- top extension ---------------------------------------------------------------

@dataclass
class TopExtension:
    B: FiniteAlgebra
    elements: list
    top: int
    meet: tuple
    phi_image: tuple
    constraints: list
    checks: dict
    identity_sample: int
    notes: list = field(default_factory=list)

    @property
    def ok(self):
        return all(self.checks.values())

    def to_report(self):
        return {"size": self.B.size, "top": self.top, "elements": [list(t) for t in self.elements],
                "phi_image": list(self.phi_image), "constraints": len(self.constraints),
                "checks": dict(self.checks),
                "identities": f"verified on sample of {self.identity_sample}",
                "notes": list(self.notes)}


def _constraints(emb):
    """(L, r) with A |= meet_{l in L} e_l(x) = e_r(x); L as a tuple of indices."""
    m, n = emb.m, emb.alg.size
    mt = emb.meet_table()
    Fa = np.array(emb.F, dtype=np.int64)
    pos = {f: i for i, f in enumerate(emb.F)}
    vals = np.empty((1 << m, n), dtype=np.int64)
    vals[0] = emb.one
    out = []
    for mask in range(1, 1 << m):
        low = (mask & -mask).bit_length() - 1
        vals[mask] = mt[vals[mask & (mask - 1)], Fa[low]]
    for mask in range(1 << m):
        r = pos.get(tuple(int(v) for v in vals[mask]))
        if r is None:
            continue
        L = tuple(i for i in range(m) if (mask >> i) & 1)
        if L == (r,):
            continue
        out.append((L, r))
    return out


def random_term(signature, arity, depth, rng):
    ops = [(s, k) for s, k in signature if k > 0]
    if depth == 0 or not ops or rng.random() < 0.25:
        return Var(rng.randrange(arity))
    s, k = rng.choice(ops)
    return App(s, [random_term(signature, arity, depth - 1, rng) for _ in range(k)])


def identity_sample(alg, arities=(2, 3), per_arity=40, seed=0):
    """Pairs (t, t') of distinct terms that agree on alg, from random terms vs F(k) witnesses."""
    rng = random.Random(seed)
    sig = alg.signature()
    out = []
    for k in arities:
        Fk = cached(alg, f"F{k}", lambda k=k: free_algebra(alg, k))
        for _ in range(per_arity):
            t = TermExpr(random_term(sig, k, 3, rng), k)
            i = Fk.index_of(term_table(alg, t))
            w = Fk.term(i)
            if str(w) != str(t):
                out.append((t, w))
    return out


def top_extension(alg, emb=None, sample=True):
    emb = emb or coordinate_embedding(alg)
    m, U = emb.m, emb.U
    if m > config.CAPS.subset_limit:
        raise ScaleError(f"{m} coordinates exceed the subset limit", cap=config.CAPS.subset_limit)
    if len(U) ** m > config.CAPS.table_entries:
        raise ScaleError("U^m too large to filter", cap=config.CAPS.table_entries)
    mt = emb.meet_table()
    cons = _constraints(emb)
    Ua = np.asarray(U)
    cand = Ua[np.array(np.unravel_index(np.arange(len(U) ** m), (len(U),) * m)).T] if m else np.zeros((1, 0), dtype=np.int64)
    keep = np.ones(len(cand), dtype=bool)
    for L, r in cons:
        acc = np.full(len(cand), emb.one)
        for l in L:
            acc = mt[acc, cand[:, l]]
        keep &= acc == cand[:, r]
    elems = cand[keep]
    tuples = [tuple(int(v) for v in row) for row in elems]
    index = {t: i for i, t in enumerate(tuples)}
    k_b = len(tuples)
    checks = {}
    ops = []
    closed = True
    for sym, k, _ in emb.alg.kernel_ops():
        if k_b ** k > config.CAPS.table_entries:
            raise ScaleError(f"table of {sym} on B too large", cap=config.CAPS.table_entries)
        grid = np.indices((k_b,) * k).reshape(k, -1)
        res = emb.reduct(sym, [elems[grid[j]] for j in range(k)])
        flat = []
        for row in res:
            i = index.get(tuple(int(v) for v in row))
            if i is None:
                closed = False
                break
            flat.append(i)
        if not closed:
            break
        ops.append((sym, k, flat))
    checks["closed_under_reduct"] = closed
    if not closed:
        raise InconsistencyError("B is not closed under the reduct operations")
    B = FiniteAlgebra(k_b, ops, name=f"{alg.name}+top")
    top_t = tuple([emb.one] * m)
    checks["top_in_B"] = top_t in index
    top = index.get(top_t)
    grid = np.indices((k_b, k_b)).reshape(2, -1)
    mrows = mt[elems[grid[0]], elems[grid[1]]]
    meet = []
    for row in mrows:
        i = index.get(tuple(int(v) for v in row))
        if i is None:
            raise InconsistencyError("B is not closed under coordinatewise meet")
        meet.append(i)
    meet = tuple(meet)
    checks["meet_compatible_semilattice"] = is_compatible_semilattice(B, meet)
    checks["top_is_largest"] = top is not None and all(meet[x * k_b + top] == x for x in range(k_b))
    image = tuple(index.get(p, -1) for p in emb.phi)
    checks["phi_into_B"] = all(i >= 0 for i in image)
    checks["phi_homomorphism"] = checks["phi_into_B"] and all(
        int(B.array(sym)[tuple(image[x] for x in args)]) == image[int(arr[args])]
        for sym, k, arr in alg.kernel_ops()
        for args in np.ndindex(*(alg.size,) * k))
    n_id = 0
    notes = []
    if sample:
        ok = True
        for t, w in identity_sample(alg):
            if k_b ** t.arity > config.CAPS.table_entries:
                continue
            n_id += 1
            if not np.array_equal(term_table(B, t), term_table(B, w)):
                ok = False
                notes.append(f"identity {t} = {w} fails in B")
                break
        for sym, k, _ in alg.kernel_ops():
            n_id += 1
            diag = TermExpr(App(sym, [Var(0)] * k), 1)
            if not np.array_equal(term_table(B, diag), np.arange(k_b)):
                ok = False
                notes.append(f"{sym} is not idempotent on B")
        checks["identities_on_sample"] = ok
    return TopExtension(B, tuples, top, meet, image, cons, checks, n_id, notes)

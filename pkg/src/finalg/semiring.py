"""The semiring of an idempotent variety with a compatible semilattice term,
coefficient vectors, annihilator ideals and the canonical cogenerator.

Throughout, + is the compatible semilattice term read as a join, so the
order is the reverse of the meet order used elsewhere in the package.
"""
import itertools
from dataclasses import dataclass, field

import numpy as np

from . import config
from .algebra import (FiniteAlgebra, all_subuniverses, direct_power, find_embeddings,
                      free_algebra, subalgebra)
from .congruence import (Congruence, cached, congruence_generated, congruence_lattice,
                         is_subdirectly_irreducible, monolith, unary_polynomials)
from .errors import InconsistencyError, PreconditionError, ScaleError
from .semilattice import find_compatible_semilattice_term
from .tct import binary_polynomials

CONVENTION = "join reading of the compatible semilattice term"


def _plus(alg):
    if not alg.is_idempotent():
        raise PreconditionError("idempotence is needed for the semiring results; "
                                "they fail for non-idempotent varieties")
    found = cached(alg, "meet_term_expr", lambda: find_compatible_semilattice_term(alg))
    if found is None:
        raise PreconditionError("no compatible semilattice term operation")
    n = alg.size
    return found[0], np.asarray(found[1].table).reshape(n, n)


@dataclass(eq=False)
class SemiringOfVariety:
    source: FiniteAlgebra
    elements: list          # binary term tables (flat, length n^2)
    plus: np.ndarray        # |R| x |R|
    times: np.ndarray       # s o t
    zero: int
    one: int
    free_index: list        # position of each element in F(2)
    plus_term: object = None
    laws: dict = field(default_factory=dict)

    @property
    def size(self):
        return len(self.elements)

    def index(self, table):
        return self._pos[tuple(int(v) for v in np.asarray(table).reshape(-1))]

    def __post_init__(self):
        self._pos = {tuple(t): i for i, t in enumerate(self.elements)}

    def leq(self, a, b):
        return self.plus[a, b] == b

    def mul(self, s, t):
        return int(self.times[s, t])

    def as_algebra(self):
        k = self.size
        return FiniteAlgebra(k, [
            ("plus", 2, self.plus.reshape(-1).tolist()),
            ("comp", 2, self.times.reshape(-1).tolist()),
            ("one", 0, [self.one]),
            ("zero", 0, [self.zero]),
        ], name=f"R({self.source.name})")

    def is_commutative(self):
        return bool(np.array_equal(self.times, self.times.T))

    def to_report(self):
        return {"size": self.size, "zero": self.zero, "one": self.one,
                "plus": self.plus.tolist(), "comp": self.times.tolist(),
                "elements": [list(t) for t in self.elements],
                "commutative": self.is_commutative(), "laws": dict(self.laws),
                "convention": CONVENTION}


def semiring_laws(R):
    P, T = R.plus, R.times
    k = R.size
    i = np.arange(k)
    a, b, c = np.meshgrid(i, i, i, indexing="ij")
    return {
        "plus_associative": bool(np.all(P[P[a, b], c] == P[a, P[b, c]])),
        "plus_commutative": bool(np.array_equal(P, P.T)),
        "times_associative": bool(np.all(T[T[a, b], c] == T[a, T[b, c]])),
        "left_distributive": bool(np.all(T[a, P[b, c]] == P[T[a, b], T[a, c]])),
        "right_distributive": bool(np.all(T[P[a, b], c] == P[T[a, c], T[b, c]])),
        "zero_absorbs": bool(np.all(T[R.zero, i] == R.zero) and np.all(T[i, R.zero] == R.zero)),
        "one_unit": bool(np.all(T[R.one, i] == i) and np.all(T[i, R.one] == i)),
        "zero_plus": bool(np.all(P[R.zero, i] == i)),
        "one_plus_absorbs": bool(np.all(P[R.one, i] == R.one)),
    }


def build_semiring(A):
    pt, M = _plus(A)
    n = A.size
    F2 = cached(A, "F2", lambda: free_algebra(A, 2))
    tabs = F2.tables.reshape(len(F2), n, n)
    y = np.tile(np.arange(n), (n, 1))
    x = y.T
    keep = [j for j in range(len(F2)) if np.array_equal(M[tabs[j], y], tabs[j])]
    ytab = tuple(int(v) for v in y.reshape(-1))
    # zero (the projection y) first, then by table
    elems = sorted((tuple(int(v) for v in tabs[j].reshape(-1)) for j in keep),
                   key=lambda t: (t != ytab, t))
    pos = {t: i for i, t in enumerate(elems)}
    arr = np.array(elems, dtype=np.int64).reshape(-1, n, n)
    k = len(elems)

    def lookup(tab):
        key = tuple(int(v) for v in tab.reshape(-1))
        if key not in pos:
            raise InconsistencyError("semiring is not closed")
        return pos[key]

    plus = np.empty((k, k), dtype=np.int64)
    times = np.empty((k, k), dtype=np.int64)
    for s in range(k):
        for t in range(k):
            plus[s, t] = lookup(M[arr[s], arr[t]])
            times[s, t] = lookup(arr[s][arr[t], y])
    zero = lookup(y)
    one = lookup(M[x, y])
    R = SemiringOfVariety(A, elems, plus, times, zero, one,
                          [F2.index_of(np.array(t)) for t in elems], pt)
    R.laws = semiring_laws(R)
    if not all(R.laws.values()):
        bad = [k for k, v in R.laws.items() if not v]
        raise InconsistencyError(f"semiring laws fail: {bad}")
    return R


# -- coefficient vectors ---------------------------------------------------------------

@dataclass(frozen=True)
class CoefficientVector:
    coeffs: tuple

    def __len__(self):
        return len(self.coeffs)


def coefficient_representation(R, table, k):
    """Coefficients of a k-ary term operation given by its table on A^k."""
    A = R.source
    n = A.size
    _, M = _plus(A)
    t = np.asarray(table).reshape((n,) * k)
    y = np.tile(np.arange(n), (n, 1))
    x = y.T
    coeffs = []
    for i in range(k):
        args = tuple(x if j == i else y for j in range(k))
        coeffs.append(R.index(M[t[args], y]))
    cv = CoefficientVector(tuple(coeffs))
    # determining identity on A^(k+1): t(xs) + y = sum_i t_i(x_i, y)
    grid = np.indices((n,) * (k + 1)).reshape(k + 1, -1)
    yy = grid[k]
    lhs = M[t[tuple(grid[:k])] if k else np.full_like(yy, int(t)), yy]
    E = np.array(R.elements, dtype=np.int64).reshape(-1, n, n)
    rhs = None
    for i, c in enumerate(coeffs):
        v = E[c][grid[i], yy]
        rhs = v if rhs is None else M[rhs, v]
    if rhs is None:
        rhs = yy
    if np.any(lhs != rhs):
        raise InconsistencyError("coefficient vector does not determine the term")
    return cv


def compose_vectors(R, outer, inners):
    """Coefficients of t(s_1..s_k): entry j is sum_i t_i o s_ij."""
    m = len(inners[0])
    out = []
    for j in range(m):
        acc = R.zero
        for i, c in enumerate(outer.coeffs):
            acc = int(R.plus[acc, R.times[c, inners[i].coeffs[j]]])
        out.append(acc)
    return CoefficientVector(tuple(out))


def verify_clone_hom(R, arities=(1, 2, 3), samples=200, seed=0):
    A = R.source
    n = A.size
    report = {"injective": {}, "composition": {"checked": 0, "failures": 0}}
    vecs = {}
    for k in arities:
        Fk = cached(A, f"F{k}", lambda k=k: free_algebra(A, k))
        vs = [coefficient_representation(R, Fk.tables[i], k) for i in range(len(Fk))]
        vecs[k] = (Fk, vs)
        report["injective"][str(k)] = len(set(vs)) == len(vs)
    rng = np.random.default_rng(seed)
    for _ in range(samples):
        k = int(rng.choice(arities))
        m = int(rng.choice(arities))
        Fk, vk = vecs[k]
        Fm, vm = vecs[m]
        ti = int(rng.integers(len(Fk)))
        si = [int(rng.integers(len(Fm))) for _ in range(k)]
        # composite table on A^m
        outer = Fk.tables[ti].reshape((n,) * k)
        comp = outer[tuple(Fm.tables[s] for s in si)]
        got = coefficient_representation(R, comp, m)
        want = compose_vectors(R, vk[ti], [vm[s] for s in si])
        report["composition"]["checked"] += 1
        if got != want:
            report["composition"]["failures"] += 1
    report["ok"] = all(report["injective"].values()) and report["composition"]["failures"] == 0
    return report


# -- annihilator ideals and the cogenerator ---------------------------------------------------

def is_annihilator_ideal(R, subset):
    s = set(subset)
    if not s:
        return False
    for b in s:
        for a in range(R.size):
            if R.leq(a, b) and a not in s:
                return False
    return all(int(R.plus[a, b]) in s for a in s for b in s)


def annihilator_ideals(R):
    """Order ideals closed under +; in a finite R these are the principal downsets."""
    ideals = {frozenset(a for a in range(R.size) if R.leq(a, r)) for r in range(R.size)}
    for I in ideals:
        if not is_annihilator_ideal(R, I):
            raise InconsistencyError("principal downset is not closed under +")
    return sorted(ideals, key=lambda I: (len(I), sorted(I)))


def annihilator_ideals_exhaustive(R):
    if R.size > config.CAPS.subset_limit:
        raise ScaleError("semiring too large for subset enumeration", cap=config.CAPS.subset_limit)
    out = []
    for mask in range(1, 1 << R.size):
        s = frozenset(i for i in range(R.size) if mask >> i & 1)
        if is_annihilator_ideal(R, s):
            out.append(s)
    return sorted(out, key=lambda I: (len(I), sorted(I)))


def congruences_of_semiring(R):
    return congruence_lattice(R.as_algebra())


def zero_classes(R):
    return sorted({frozenset(theta.block_of(R.zero)) for theta in congruences_of_semiring(R)},
                  key=lambda I: (len(I), sorted(I)))


def residual(R, ideal, r):
    """(a) r^-1 = {s : s o r in a}."""
    return frozenset(s for s in range(R.size) if int(R.times[s, r]) in ideal)


@dataclass(eq=False)
class Cogenerator:
    algebra: FiniteAlgebra
    ideals: list
    coefficients: dict
    notes: list = field(default_factory=list)

    def to_report(self):
        return {"size": self.algebra.size, "ideals": [sorted(I) for I in self.ideals],
                "coefficients": {s: list(v) for s, v in sorted(self.coefficients.items())},
                "algebra": self.algebra.to_dict(), "notes": list(self.notes)}


def cogenerator(R):
    A = R.source
    ideals = annihilator_ideals(R)
    pos = {I: i for i, I in enumerate(ideals)}
    ops = []
    coeffs = {}
    for sym, k, arr in A.kernel_ops():
        cv = coefficient_representation(R, arr.reshape(-1), k)
        coeffs[sym] = cv.coeffs
        res = {}
        for I in ideals:
            for c in set(cv.coeffs):
                J = residual(R, I, c)
                if J not in pos:
                    raise InconsistencyError("residual of an ideal is not an ideal")
                res[(I, c)] = J
        table = []
        for args in itertools.product(ideals, repeat=k):
            acc = frozenset(range(R.size))
            for a, c in zip(args, cv.coeffs):
                acc = acc & res[(a, c)]
            if acc not in pos:
                raise InconsistencyError("intersection of ideals is not an ideal")
            table.append(pos[acc])
        ops.append((sym, k, table))
    notes = [] if R.is_commutative() else ["semiring is not commutative; left/right convention needs review"]
    return Cogenerator(FiniteAlgebra(len(ideals), ops, name=f"I({A.name})"), ideals, coeffs, notes)


def embed_si_into_cogenerator(B, I):
    alg = I.algebra if isinstance(I, Cogenerator) else I
    if B.size == 1:
        return (0,) if alg.size else None
    found = find_embeddings(B, alg, first=True)
    return found[0] if found else None


def sp_cover_check(A, I, k_cap=3):
    """Smallest k with A embeddable in I^k, and the embedding."""
    alg = I.algebra if isinstance(I, Cogenerator) else I
    for k in range(1, k_cap + 1):
        try:
            P = alg if k == 1 else direct_power(alg, k)
        except ScaleError:
            break
        found = find_embeddings(A, P, first=True)
        if found:
            return k, found[0]
    return None, None


# -- subdirectly irreducible structure -----------------------------------------------------

def si_structure_report(B):
    if B.size < 2 or not is_subdirectly_irreducible(B):
        raise PreconditionError("algebra is not subdirectly irreducible")
    _, P = _plus(B)
    n = B.size
    out = {"convention": CONVENTION, "clauses": {}}
    c = out["clauses"]
    zeros = [z for z in range(n) if all(P[z, x] == x for x in range(n))]
    c["1_least_element"] = len(zeros) == 1
    if not zeros:
        out["ok"] = False
        return out
    z = zeros[0]
    rest = [x for x in range(n) if x != z]
    atoms = [u for u in rest if all(P[u, x] == x for x in rest)]
    c["2_atom"] = len(atoms) == 1
    out["zero"] = z
    if not atoms:
        out["ok"] = False
        return out
    u = atoms[0]
    out["atom"] = u
    mu = monolith(B)
    c["3_monolith_block"] = mu == Congruence.from_blocks(n, [[z, u]])
    F2 = cached(B, "F2", lambda: free_algebra(B, 2))
    U1 = {tuple(int(v) for v in t.reshape(n, n)[:, z]) for t in F2.tables}
    pol = unary_polynomials(B)
    U2 = {f for f in pol if f[z] == z}
    U3 = {f for f in pol if z in f}
    c["4_three_descriptions_agree"] = U1 == U2 == U3
    dec = all(all(P[f[x], x] == x for x in range(n)) and
              all(f[int(P[x, y])] == P[f[x], f[y]] for x in range(n) for y in range(n))
              for f in U1)
    c["4_decreasing_endomorphisms"] = bool(dec)
    ops = [("plus", 2, P.reshape(-1).tolist())]
    ops += [(f"u{i}", 1, list(f)) for i, f in enumerate(sorted(U1))]
    C = FiniteAlgebra(n, ops, name=f"{B.name}(+,U)")
    p1 = set(unary_polynomials(B)) == set(unary_polynomials(C))
    b1 = {tuple(r) for r in binary_polynomials(B).tables.tolist()}
    b2 = {tuple(r) for r in binary_polynomials(C).tables.tolist()}
    c["5_polynomially_equivalent_arity_1"] = p1
    c["5_polynomially_equivalent_arity_2"] = b1 == b2
    out["U"] = [list(f) for f in sorted(U1)]
    out["ok"] = all(c.values())
    return out


# -- congruence extension ----------------------------------------------------------------

def check_cep(B, cap=8):
    out = {"subalgebras": 0, "congruences": 0, "failures": []}
    if not B.is_idempotent():
        out["skipped"] = "not idempotent; the extension property is only claimed for idempotent varieties"
        return out
    if find_compatible_semilattice_term(B) is None:
        out["skipped"] = "no compatible semilattice term operation"
        return out
    if B.size > cap:
        raise ScaleError(f"CEP check limited to size {cap}", cap=cap)
    for S in all_subuniverses(B):
        if not S:
            continue
        C, elems = subalgebra(B, S)
        out["subalgebras"] += 1
        for theta in congruence_lattice(C):
            out["congruences"] += 1
            pairs = [(elems[a], elems[b]) for a, b in theta.pairs() if a < b]
            ext = congruence_generated(B, pairs)
            back = [ext.labels[e] for e in elems]
            if Congruence(back) != theta:
                out["failures"].append({"subuniverse": sorted(S), "theta": list(theta.labels)})
    out["ok"] = not out["failures"]
    return out

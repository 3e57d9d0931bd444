"""Rectangulation modulo a gene, decided on a subalgebra of A^4.

A quadruple (p(a,c), p(a,d), p(b,c), p(b,d)) over all polynomials p and
a R b, c S d is exactly an element of the subalgebra of A^4 generated by
(x,x,y,y) for x R y, (u,v,u,v) for u S v and the constant quadruples.
"""
from dataclasses import dataclass

import numpy as np

from .algebra import evaluate_term
from .congruence import Congruence, congruence_lattice
from .errors import PreconditionError
from .tct import (TypeLabel, check_gene_axioms, classify_type, construct_gene,
                  matrix_closure)
from .terms import Const, TermExpr, Var, walk


def total_relation(n):
    return [(x, y) for x in range(n) for y in range(n)]


def equality_relation(n):
    return [(x, x) for x in range(n)]


@dataclass(frozen=True)
class QuadWitness:
    quad: tuple
    term: TermExpr
    a: tuple
    b: tuple
    c: tuple
    d: tuple
    depth: int

    def evaluate(self, alg):
        m = len(self.a)

        def p(xs, ys):
            return evaluate_term(alg, self.term, tuple(xs) + tuple(ys))
        del m
        return (p(self.a, self.c), p(self.a, self.d), p(self.b, self.c), p(self.b, self.d))

    def to_report(self):
        return {"quadruple": list(self.quad), "term": str(self.term),
                "a": list(self.a), "b": list(self.b), "c": list(self.c), "d": list(self.d)}


class QuadrupleClosure:
    def __init__(self, alg, R, S):
        self.alg = alg
        self.R = sorted(set(map(tuple, R)))
        self.S = sorted(set(map(tuple, S)))
        self._cl, self.tags = matrix_closure(alg, self.R, self.S, add_diagonal=True)
        self.quadruples = self._cl.elements.astype(np.int64)
        self.depth = np.asarray(self._cl.depth)

    def __len__(self):
        return len(self.quadruples)

    def as_set(self):
        return {tuple(int(v) for v in q) for q in self.quadruples}

    def __contains__(self, quad):
        return self._cl.find(quad) is not None

    def witness(self, quad):
        idx = self._cl.find(quad)
        if idx is None:
            raise KeyError(quad)
        raw = self._cl.term(idx, lambda g: Var(g), len(self.tags))
        used = sorted({n.index for n in walk(raw.root) if isinstance(n, Var)})
        rows = [g for g in used if self.tags[g][0] == "row"]
        cols = [g for g in used if self.tags[g][0] == "col"]
        slot = {g: i for i, g in enumerate(rows + cols)}

        def leaf(g):
            kind, val = self.tags[g]
            if kind == "diag":
                return Const(val)
            return Var(slot[g])
        term = self._cl.term(idx, leaf, len(rows) + len(cols))
        a = tuple(self.tags[g][1][0] for g in rows)
        b = tuple(self.tags[g][1][1] for g in rows)
        c = tuple(self.tags[g][1][0] for g in cols)
        d = tuple(self.tags[g][1][1] for g in cols)
        q = tuple(int(v) for v in self.quadruples[idx])
        return QuadWitness(q, term, a, b, c, d, int(self.depth[idx]))


def quadruple_closure(alg, R, S):
    return QuadrupleClosure(alg, R, S)


@dataclass(frozen=True)
class RectangulationVerdict:
    holds: bool
    witness: QuadWitness = None
    closure_size: int = 0
    note: str = ""

    def to_report(self):
        out = {"holds": self.holds, "closure_size": self.closure_size}
        if self.witness is not None:
            out["witness"] = self.witness.to_report()
        if self.note:
            out["note"] = self.note
        return out


def _lift(g, alg, R, S):
    """Run on the algebra the gene lives on, pushing relations through the quotient map."""
    if g.algebra is None or g.algebra is alg or g.surjection is None:
        return alg, R, S
    s = g.surjection
    return (g.algebra, sorted({(s[x], s[y]) for x, y in R}),
            sorted({(s[x], s[y]) for x, y in S}))


def failing_mask(quads, e, one):
    E = np.asarray(e)[quads]
    return (E[:, 0] == one) & (E[:, 3] == one) & ((E[:, 1] != one) | (E[:, 2] != one))


def rectangulates_modulo(alg, g, R, S, check=True):
    B, R, S = _lift(g, alg, R, S)
    if check:
        axioms = check_gene_axioms(B, g)
        if not all(axioms.values()):
            raise PreconditionError(f"not a gene: {axioms}")
    qc = QuadrupleClosure(B, R, S)
    quads = qc.quadruples
    e = np.asarray(g.e)
    # e is a polynomial, so the closure already contains e applied to every quadruple
    eq = e[quads]
    if not all(tuple(int(v) for v in row) in qc for row in np.unique(eq, axis=0)):
        raise AssertionError("closure is not closed under the idempotent e")
    bad = failing_mask(quads, e, g.one)
    if not bad.any():
        return RectangulationVerdict(True, None, len(qc))
    # shallowest derivation first, then lexicographically least quadruple
    idx = np.nonzero(bad)[0]
    best = min(idx, key=lambda i: (int(qc.depth[i]), tuple(int(v) for v in quads[i])))
    w = qc.witness(tuple(int(v) for v in quads[best]))
    return RectangulationVerdict(False, w, len(qc))


def self_rectangulating_wrt(alg, alpha, beta):
    g = construct_gene(alg, alpha, beta)
    T = total_relation(alg.size)
    return rectangulates_modulo(alg, g, T, T)


def is_self_rectangulating(alg):
    """Conjunction over nonabelian prime quotients, with a per-quotient report."""
    lat = congruence_lattice(alg)
    report = []
    ok = True
    for alpha, beta in lat.covers():
        label = classify_type(alg, alpha, beta)
        entry = {"alpha": list(alpha.labels), "beta": list(beta.labels), "type": label.value}
        if label == TypeLabel.ABELIAN_12:
            entry["rectangulation"] = None
        else:
            v = self_rectangulating_wrt(alg, alpha, beta)
            entry["rectangulation"] = v.to_report()
            ok = ok and v.holds
        report.append(entry)
    if not any(r["rectangulation"] is not None for r in report):
        return True, report, "no nonabelian quotients"
    return ok, report, ""


def monolith_quotient(alg):
    from .congruence import monolith
    mu = monolith(alg)
    if mu is None:
        raise PreconditionError("not subdirectly irreducible")
    return Congruence.equality(alg.size), mu

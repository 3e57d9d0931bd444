import itertools

import pytest
from hypothesis import assume, given, settings, strategies as st

from oracles import brute_quadruples, brute_rectangulates

from finalg import corpus
from finalg.algebra import FiniteAlgebra, quotient
from finalg.congruence import Congruence, congruence_lattice, monolith
from finalg.errors import PreconditionError
from finalg.rectangulation import (QuadrupleClosure, equality_relation, is_self_rectangulating,
                                   rectangulates_modulo, self_rectangulating_wrt,
                                   total_relation)
from finalg.tct import (TypeLabel, all_genes, binary_polynomials, classify_type,
                        construct_gene, is_abelian_quotient, monolith_gene)


@st.composite
def two_element(draw):
    ops = [("b", 2, draw(st.lists(st.integers(0, 1), min_size=4, max_size=4)))]
    if draw(st.booleans()):
        ops.append(("u", 1, draw(st.lists(st.integers(0, 1), min_size=2, max_size=2))))
    return FiniteAlgebra(2, ops)


@settings(max_examples=30, deadline=None)
@given(two_element())
def test_closure_equals_brute_force_two_element(A):
    # complete clones take the oracle tens of seconds; the acceptance suite covers one
    assume(len(binary_polynomials(A)) < 16)
    T = total_relation(2)
    assert QuadrupleClosure(A, T, T).as_set() == brute_quadruples(A)
    mu = monolith(A)
    if mu is not None and not is_abelian_quotient(A, Congruence.equality(2), mu):
        g = construct_gene(A, Congruence.equality(2), mu)
        ok, _ = brute_rectangulates(brute_quadruples(A), g.e, g.one)
        assert rectangulates_modulo(A, g, T, T).holds == ok


def test_witness_re_evaluates():
    for name in ("lattice2", "boolean2"):
        A = corpus.load(name)
        v = self_rectangulating_wrt(A, Congruence.equality(2), monolith(A))
        assert not v.holds
        w = v.witness
        assert w.evaluate(A) == w.quad == (1, 0, 1, 1)
        rep = v.to_report()
        assert rep["witness"]["term"] == str(w.term)


def test_semilattices_rectangulate_themselves():
    for name in ("semilattice2", "ex2_10_A", "ex4_4_1", "ex4_4_2"):
        ok, quotients, _ = is_self_rectangulating(corpus.load(name))
        assert ok, name


def test_type_34_quotients_always_fail():
    for name in corpus.CORPUS_NAMES + ["joinchain"]:
        A = corpus.join_chain(3) if name == "joinchain" else corpus.load(name)
        _, quotients, _ = is_self_rectangulating(A)
        for q in quotients:
            if q["type"] == TypeLabel.BOOLEAN_LATTICE_34.value:
                assert q["rectangulation"]["holds"] is False


def test_abelian_only_algebra_is_vacuously_self_rectangulating():
    ok, quotients, note = is_self_rectangulating(corpus.z2())
    assert ok and note
    assert all(q["rectangulation"] is None for q in quotients)


def test_quadruple_closure_contains_generators():
    A = corpus.semilattice3()
    R = [(0, 1), (1, 2)]
    S = equality_relation(3)
    qc = QuadrupleClosure(A, R, S)
    for x, y in R:
        assert (x, x, y, y) in qc
    for u in range(3):
        assert (u, u, u, u) in qc


def test_gene_choice_does_not_change_verdict():
    for name in ("ex4_4_2", "ex4_4_3", "lattice2", "semilattice2"):
        A = corpus.load(name)
        T = total_relation(A.size)
        verdicts = {rectangulates_modulo(A, g, T, T).holds
                    for g in all_genes(A, Congruence.equality(A.size), monolith(A))}
        assert len(verdicts) == 1, name


def test_quotient_preserves_self_rectangulation():
    # A self-rectangulating w.r.t. <alpha, beta>, delta <= alpha and delta <= rho
    checked = 0
    for name in ("semilattice3", "ex4_4_3", "lattice2"):
        A = corpus.load(name)
        lat = congruence_lattice(A)
        for alpha, beta in lat.covers():
            if is_abelian_quotient(A, alpha, beta):
                continue
            if not self_rectangulating_wrt(A, alpha, beta).holds:
                continue
            g = construct_gene(A, alpha, beta)
            for delta in lat:
                if delta.is_equality() or not delta.leq(alpha):
                    continue
                if g.algebra is A or g.algebra is None:
                    if not delta.leq(g.rho):
                        continue
                Q, surj = quotient(A, delta)
                qa = Congruence(tuple(alpha.labels[surj.index(i)] for i in range(Q.size)))
                qb = Congruence(tuple(beta.labels[surj.index(i)] for i in range(Q.size)))
                assert self_rectangulating_wrt(Q, qa, qb).holds
                checked += 1
    assert checked


def test_non_gene_rejected():
    A = corpus.semilattice2()
    g = monolith_gene(A)
    bad = type(g)(g.e, g.meet, g.one, g.one, g.rho)
    with pytest.raises(PreconditionError):
        rectangulates_modulo(A, bad, total_relation(2), total_relation(2))


def test_all_two_element_lattice_polymorphisms_fail():
    # every 2-element algebra with both lattice operations has type 3/4 and fails
    meet, join = [0, 0, 0, 1], [0, 1, 1, 1]
    for extra in itertools.product([0, 1], repeat=2):
        A = FiniteAlgebra(2, [("m", 2, meet), ("j", 2, join), ("u", 1, list(extra))])
        if classify_type(A, Congruence.equality(2), Congruence.full(2)) != TypeLabel.BOOLEAN_LATTICE_34:
            continue
        assert not is_self_rectangulating(A)[0]

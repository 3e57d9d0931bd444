import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import compatible_semilattices, is_compatible_operation

from finalg import corpus
from finalg.algebra import FiniteAlgebra, term_table
from finalg.errors import ScaleError
from finalg.semilattice import (EssentiallyUnaryWitness, compatible_meet,
                                compatible_semilattice_operations,
                                extract_semilattice_term,
                                find_compatible_semilattice_polynomial,
                                find_compatible_semilattice_term, idempotent_term_operations,
                                is_compatible_semilattice, is_semilattice_table,
                                verify_gene_semilattice)
from finalg.tct import binary_polynomials, monolith_gene


@st.composite
def algebras(draw):
    n = draw(st.integers(2, 3))
    ops = []
    for i in range(draw(st.integers(1, 2))):
        arity = draw(st.sampled_from([1, 2]))
        ops.append((f"o{i}", arity,
                    draw(st.lists(st.integers(0, n - 1), min_size=n ** arity, max_size=n ** arity))))
    return FiniteAlgebra(n, ops)


@st.composite
def semilattice_based(draw):
    """A chain meet plus random unary operations that preserve it."""
    n = draw(st.integers(2, 4))
    ops = [("meet", 2, [min(x, y) for x in range(n) for y in range(n)])]
    for i in range(draw(st.integers(0, 2))):
        # order-preserving maps of a chain are endomorphisms of its meet
        vals = sorted(draw(st.lists(st.integers(0, n - 1), min_size=n, max_size=n)))
        ops.append((f"u{i}", 1, vals))
    return FiniteAlgebra(n, ops)


@settings(max_examples=60, deadline=None)
@given(algebras())
def test_operation_search_matches_oracle(A):
    got = sorted(op.table for op in compatible_semilattice_operations(A))
    assert got == sorted(compatible_semilattices(A))


@settings(max_examples=60, deadline=None)
@given(algebras())
def test_polynomial_and_term_are_compatible_semilattices(A):
    poly = find_compatible_semilattice_polynomial(A)
    term = find_compatible_semilattice_term(A)
    oracle = set(compatible_semilattices(A))
    if poly is not None:
        assert poly.table in oracle
    if term is not None:
        assert term[1].table in oracle
        # a term operation is a polynomial, and the polynomial is unique
        assert poly is not None and poly.table == term[1].table
        assert tuple(int(v) for v in term_table(A, term[0])) == term[1].table


@settings(max_examples=40, deadline=None)
@given(semilattice_based())
def test_idempotent_commutative_polynomials_are_the_meet(A):
    poly = find_compatible_semilattice_polynomial(A)
    assert poly is not None
    n = A.size
    for t in binary_polynomials(A).tables:
        m = t.reshape(n, n)
        if np.all(np.diag(m) == np.arange(n)) and np.array_equal(m, m.T) and \
                is_semilattice_table(t, n):
            assert tuple(int(v) for v in t) == poly.table


def test_chain_min_on_example_algebra():
    A = corpus.ex2_10_A()
    ops = compatible_semilattice_operations(A)
    assert len(ops) == 1
    op = ops[0]
    assert op.hasse_edges() == [(0, 1), (1, 2)]
    assert op.top() == 2 and op.bottom() == 0
    # not a polynomial there
    assert find_compatible_semilattice_polynomial(A) is None


def test_known_terms():
    expected = {"semilattice2": True, "semilattice3": True, "ex4_4_1": True,
                "ex4_4_2": True, "lattice2": False, "boolean2": False, "z2": False}
    for name, has in expected.items():
        A = corpus.load(name)
        assert (find_compatible_semilattice_term(A) is not None) == has, name
        if has:
            a = compatible_meet(A)
            assert is_compatible_semilattice(A, a.table)
            assert is_compatible_operation(A, a.table)


def test_set_has_two_compatible_orders():
    A = corpus.set2()
    assert len(compatible_semilattice_operations(A)) == 2
    # neither is a polynomial of the bare set; only projections are
    assert find_compatible_semilattice_polynomial(A) is None


def test_operation_search_bound():
    with pytest.raises(ScaleError):
        compatible_semilattice_operations(corpus.chain_semilattice(7))


def test_semilattice_table_checks():
    assert is_semilattice_table([0, 0, 0, 1], 2)
    assert not is_semilattice_table([0, 1, 0, 1], 2)
    assert not is_semilattice_table([1, 0, 0, 1], 2)


def test_extraction_from_chain_semilattice_with_projection():
    A = FiniteAlgebra(3, [("meet", 2, [min(x, y) for x in range(3) for y in range(3)]),
                          ("p", 2, [x for x in range(3) for y in range(3)])])
    poly = find_compatible_semilattice_polynomial(A)
    res = extract_semilattice_term(A, poly)
    assert not isinstance(res, EssentiallyUnaryWitness)
    tab = tuple(int(v) for v in term_table(A, res))
    assert is_compatible_semilattice(A, tab)


def test_extraction_reports_essentially_unary_subalgebra():
    # projections only: meet of a 2-chain is compatible but no term realises it
    A = FiniteAlgebra(2, [("p", 2, [0, 0, 1, 1])])
    meet = compatible_semilattice_operations(A)[0]
    res = extract_semilattice_term(A, meet)
    assert isinstance(res, EssentiallyUnaryWitness)


def test_gene_semilattice_report():
    for name in ("ex2_10_A", "semilattice2", "ex4_4_2"):
        A = corpus.load(name)
        rep = verify_gene_semilattice(A, monolith_gene(A))
        assert rep["ok"], (name, rep)
        assert all(rep["clauses"].values())


def test_gene_semilattice_fails_for_lattice():
    A = corpus.lattice2()
    rep = verify_gene_semilattice(A, monolith_gene(A))
    assert rep["ok"] is False and rep["preconditions"]["self_rectangulating"] is False


def test_idempotent_term_operations():
    ops = idempotent_term_operations(corpus.semilattice2(), 2)
    assert len(ops) == 3

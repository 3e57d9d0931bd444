"""End-to-end acceptance checks, one test per criterion.

Each test prints a single PASS/FAIL line (also repeated in the pytest
terminal summary) and then asserts.
"""
import random
import time

import numpy as np

from conftest import record
from oracles import brute_quadruples, brute_rectangulates

from finalg import corpus
from finalg.algebra import is_isomorphic, term_table
from finalg.congruence import (Congruence, cg, congruence_lattice, is_simple,
                               is_subdirectly_irreducible, monolith, natural_quasiorder,
                               principal_congruence, unary_polynomials)
from finalg.dpc import (collapse_term_variables, evaluate_pcf, meet_term_of,
                        normalize_malcev_chain, signature_map, synthesize_dpc_formula,
                        term_representatives)
from finalg.extensions import power_quotient_extension, random_term, top_extension
from finalg.members import desk_scale_members, subdirectly_irreducible_members
from finalg.rectangulation import (QuadrupleClosure, is_self_rectangulating,
                                   rectangulates_modulo, self_rectangulating_wrt,
                                   total_relation)
from finalg.semilattice import (compatible_semilattice_operations,
                                find_compatible_semilattice_polynomial,
                                find_compatible_semilattice_term, verify_gene_semilattice)
from finalg.semiring import (annihilator_ideals, annihilator_ideals_exhaustive,
                             build_semiring, check_cep, cogenerator,
                             congruences_of_semiring, embed_si_into_cogenerator,
                             semiring_laws, zero_classes)
from finalg.tct import (TypeLabel, all_genes, binary_polynomials, check_gene_axioms,
                        classify_type, construct_gene, genes_equivalent, is_abelian_quotient,
                        monolith_gene)
from finalg.terms import TermExpr

TWO_ELEMENT = ["semilattice2", "lattice2", "boolean2", "z2", "set2"]
MEET_TERM_CORPUS = ["semilattice2", "semilattice3", "ex4_4_1", "ex4_4_2", "ex4_4_3"]


def _eq(n):
    return Congruence.equality(n)


def _power_size_for(alg):
    # squares of 4-element algebras have too many subuniverses for desk scale
    return 16 if alg.size <= 3 else alg.size


def test_criterion_01_three_element_simple_algebra():
    t0 = time.time()
    A = corpus.load("ex2_10_A")
    mu = monolith(A)
    simple = is_simple(A)
    label = classify_type(A, _eq(3), mu)
    rect, _, _ = is_self_rectangulating(A)
    ops = compatible_semilattice_operations(A)
    chain_min = tuple(min(x, y) for x in range(3) for y in range(3))
    semilattice_ok = [op.table for op in ops] == [chain_min]
    # the gene's semilattice on its minimal set is the same chain order
    gene_report = verify_gene_semilattice(A, monolith_gene(A))
    U = gene_report["U"]
    gene_ok = gene_report["ok"] and gene_report["meet_on_U"] == [
        [min(x, y) for y in U] for x in U]
    dt = time.time() - t0
    ok = simple and label == TypeLabel.SEMILATTICE_5 and rect and semilattice_ok and gene_ok and dt < 5
    record(1, ok, f"simple={simple} type={label.value} self_rect={rect} "
                  f"meet=chain-min:{semilattice_ok} gene={gene_ok} {dt:.2f}s")
    assert ok


def test_criterion_02_four_element_quotient():
    t0 = time.time()
    S, surj, pairs = corpus.ex2_10_S_with_labels()
    si = is_subdirectly_irreducible(S)
    mu = monolith(S)
    # class of 1-hat = (1,1) and of (1,2) under the quotient map
    one_hat = surj[pairs.index((1, 1))]
    one_two = surj[pairs.index((1, 2))]
    expected = Congruence.from_blocks(S.size, [[one_hat, one_two]])
    label = classify_type(S, _eq(S.size), mu)
    dt = time.time() - t0
    ok = si and mu == expected and label == TypeLabel.ABELIAN_12 and dt < 10
    record(2, ok, f"si={si} monolith={mu.nontrivial_blocks()} expected={[[one_hat, one_two]]} "
                  f"type={label.value} {dt:.2f}s")
    assert ok


def test_criterion_03_lattice_witness():
    t0 = time.time()
    details = []
    ok = True
    for name in ("lattice2", "boolean2"):
        A = corpus.load(name)
        v = self_rectangulating_wrt(A, _eq(2), monolith(A))
        w = v.witness
        good = (not v.holds) and w is not None and w.quad == (1, 0, 1, 1) and w.evaluate(A) == w.quad
        ok = ok and good
        details.append(f"{name}:{w.quad if w else None} term={w.term if w else None}")
    dt = time.time() - t0
    ok = ok and dt < 5
    record(3, ok, " ".join(details) + f" {dt:.2f}s")
    assert ok


def test_criterion_04_two_element_corpus():
    t0 = time.time()
    algs = corpus.two_element_binary_algebras(max_ops=2)
    compared = agree = extended = ext_ok = 0
    bad = []
    for A in algs:
        if not is_subdirectly_irreducible(A):
            continue
        mu = monolith(A)
        if is_abelian_quotient(A, _eq(2), mu):
            continue
        compared += 1
        mono = self_rectangulating_wrt(A, _eq(2), mu).holds
        full, _, _ = is_self_rectangulating(A)
        if mono == full:
            agree += 1
        else:
            bad.append(A.name)
        if full and A.is_idempotent():
            extended += 1
            te = top_extension(A)
            if te.ok:
                ext_ok += 1
            else:
                bad.append(A.name + ":top")
    dt = time.time() - t0
    ok = compared > 0 and agree == compared and ext_ok == extended and dt < 600
    record(4, ok, f"{len(algs)} algebras, {compared} s.i. nonabelian compared, agree {agree}/{compared}, "
                  f"top extension {ext_ok}/{extended} {dt:.1f}s {bad[:5]}")
    assert ok


def test_criterion_05_power_quotient():
    t0 = time.time()
    A = corpus.load("semilattice2")
    ext = power_quotient_extension(A, N=8)
    c = ext.checks
    classes = ext.delta.nblocks
    iso = is_isomorphic(ext.B, A)
    dt = time.time() - t0
    ok = (classes == 2 and iso and c["embedding_injective"] and c.get("meet_well_defined")
          and c.get("meet_compatible_semilattice") and ext.ok and dt < 120)
    record(5, ok, f"delta classes={classes} B~A={iso} checks={all(c.values())} {dt:.1f}s")
    assert ok


def test_criterion_06_rectangulation_oracle():
    t0 = time.time()
    agree = 0
    details = []
    for name in TWO_ELEMENT:
        A = corpus.load(name)
        T = total_relation(2)
        lib_quads = QuadrupleClosure(A, T, T).as_set()
        oracle_quads = brute_quadruples(A)
        lib_ok, _, _ = is_self_rectangulating(A)
        mu = monolith(A)
        if is_abelian_quotient(A, _eq(2), mu):
            oracle_ok = True
        else:
            g = construct_gene(A, _eq(2), mu)
            oracle_ok, _ = brute_rectangulates(oracle_quads, g.e, g.one)
        same = lib_ok == oracle_ok and lib_quads == oracle_quads
        agree += same
        details.append(f"{name}:{'=' if same else '!='}")
    dt = time.time() - t0
    ok = agree == len(TWO_ELEMENT) and dt < 300
    record(6, ok, f"agree {agree}/{len(TWO_ELEMENT)} {' '.join(details)} {dt:.1f}s")
    assert ok


def test_criterion_07_variable_collapse():
    rng = random.Random(7)
    samples = failures = 0
    worst = 0
    per = 60
    for name in MEET_TERM_CORPUS:
        A = corpus.load(name)
        n = A.size
        sig = A.signature()
        for _ in range(per):
            m = rng.randint(1, 6 if n <= 2 else 4)
            t = TermExpr(random_term(sig, m, rng.randint(1, 4), rng), m)
            try:
                col = collapse_term_variables(A, t)
            except Exception:
                failures += 1
                samples += 1
                continue
            # independent pointwise check
            grid = np.indices((n,) * m).reshape(m, -1)
            M = term_table(A, meet_term_of(A)).reshape(n, n)
            args = []
            for blk in col.blocks:
                acc = grid[blk[0]]
                for i in blk[1:]:
                    acc = M[acc, grid[i]]
                args.append(acc)
            inner = term_table(A, col.term).reshape((n,) * col.k)
            same = np.array_equal(inner[tuple(args)], term_table(A, t))
            bound = col.k <= n ** n
            worst = max(worst, col.k)
            failures += not (same and bound)
            samples += 1
    ok = samples >= 200 and failures == 0
    record(7, ok, f"{samples} terms, {failures} failures, max blocks {worst}")
    assert ok


def test_criterion_08_dpc_semilattice_members():
    t0 = time.time()
    A = corpus.load("semilattice2")
    phi = synthesize_dpc_formula(A)
    members = desk_scale_members(A, max_size=8)
    checked = mismatches = 0
    for B, _ in members:
        n = B.size
        for c in range(n):
            for d in range(n):
                theta = cg(B, c, d)
                for a in range(n):
                    for b in range(n):
                        checked += 1
                        if evaluate_pcf(B, phi, a, b, c, d) != theta.related(a, b):
                            mismatches += 1
    dt = time.time() - t0
    ok = mismatches == 0 and checked > 0 and dt < 600
    record(8, ok, f"{len(members)} members, {checked} tuples, {mismatches} mismatches, "
                  f"|P|={len(phi.reps)} {dt:.1f}s")
    assert ok


def test_criterion_09_signature_injectivity():
    found = failures = 0
    sizes = []
    for name in MEET_TERM_CORPUS:
        A = corpus.load(name)
        reps = term_representatives(A)
        mt = meet_term_of(A)
        for B, _ in subdirectly_irreducible_members(A, max_size=8,
                                                    max_power_size=_power_size_for(A)):
            sm = signature_map(B, reps, mt)
            found += 1
            sizes.append(B.size)
            failures += not (sm.injective and sm.bound_ok)
    ok = found > 0 and failures == 0
    record(9, ok, f"{found} s.i. algebras (sizes {sorted(set(sizes))}), {failures} failures")
    assert ok


def test_criterion_10_semiring_suite():
    t0 = time.time()
    A = corpus.load("semilattice2")
    R = build_semiring(A)
    boolean = (R.size == 2 and R.plus[R.one][R.one] == R.one and R.plus[R.zero][R.one] == R.one
               and R.times[R.zero][R.one] == R.zero and R.times[R.one][R.one] == R.one)
    laws = all(semiring_laws(R).values())
    ideals = annihilator_ideals(R)
    ideals_ok = sorted(map(sorted, ideals)) == [[R.zero], sorted([R.zero, R.one])]
    ideals_ok = ideals_ok and ideals == annihilator_ideals_exhaustive(R) == zero_classes(R)
    I = cogenerator(R)
    cog_ok = is_isomorphic(I.algebra, corpus.semilattice2())
    embeds = True
    sis = subdirectly_irreducible_members(A, max_size=8)
    for B, _ in sis:
        embeds = embeds and embed_si_into_cogenerator(B, I) is not None
    con = len(congruences_of_semiring(R))
    dt = time.time() - t0
    ok = boolean and laws and ideals_ok and cog_ok and embeds and con == 2 and dt < 60
    record(10, ok, f"boolean={boolean} laws={laws} ideals={ideals_ok} I(V)~2-semilattice={cog_ok} "
                   f"si-embed={embeds}({len(sis)}) |Con R|={con} {dt:.1f}s")
    assert ok


def test_criterion_11_cep():
    t0 = time.time()
    tested = failures = 0
    for name in corpus.CORPUS_NAMES:
        A = corpus.load(name)
        if A.size > 6 or not A.is_idempotent() or find_compatible_semilattice_term(A) is None:
            continue
        for B, _ in desk_scale_members(A, max_size=6, max_power_size=_power_size_for(A)):
            if B.size < 2:
                continue
            r = check_cep(B)
            if "skipped" in r:
                continue
            tested += 1
            failures += len(r["failures"])
    dt = time.time() - t0
    ok = tested > 0 and failures == 0 and dt < 300
    record(11, ok, f"{tested} algebras, {failures} extension failures {dt:.1f}s")
    assert ok


def _prime_quotients_at_zero(A):
    lat = congruence_lattice(A)
    return [(a, b) for a, b in lat.covers() if a.is_equality()]


def test_criterion_12_invariants():
    fails = []
    counts = dict(quasiorder=0, gene=0, gene_indep=0, poly_uniqueness=0, gene_semilattice=0, chains=0, semiring=0)
    for name in corpus.CORPUS_NAMES:
        A = corpus.load(name)
        n = A.size
        T = total_relation(n)
        pol = unary_polynomials(A)
        for alpha, beta in _prime_quotients_at_zero(A):
            if is_abelian_quotient(A, alpha, beta):
                continue
            genes = all_genes(A, alpha, beta)
            verdicts = set()
            for g in genes:
                q = natural_quasiorder(A, g.e, g.one)
                counts["quasiorder"] += 1
                if not (q.is_reflexive() and q.is_transitive() and q.is_compatible(pol.functions)):
                    fails.append(f"{name}: quasiorder")
                counts["gene"] += 1
                if not all(check_gene_axioms(A, g).values()):
                    fails.append(f"{name}: gene axioms")
                verdicts.add(rectangulates_modulo(A, g, T, T).holds)
            counts["gene_indep"] += 1
            if len(verdicts) > 1:
                fails.append(f"{name}: verdict depends on gene")
            for g in genes:
                for h in genes:
                    if genes_equivalent(A, g, h) and (rectangulates_modulo(A, g, T, T).holds
                                                      != rectangulates_modulo(A, h, T, T).holds):
                        fails.append(f"{name}: equivalent genes disagree")
        # uniqueness of the compatible semilattice polynomial
        poly = find_compatible_semilattice_polynomial(A)
        if poly is not None:
            for t in binary_polynomials(A).tables:
                m = t.reshape(n, n)
                if np.all(np.diag(m) == np.arange(n)) and np.array_equal(m, m.T):
                    counts["poly_uniqueness"] += 1
                    if tuple(int(v) for v in t) != poly.table:
                        fails.append(f"{name}: second idempotent commutative polynomial")
        # semilattice structure on the monolith gene
        if n > 1 and is_subdirectly_irreducible(A) and not is_abelian_quotient(A, _eq(n), monolith(A)):
            g = monolith_gene(A)
            if rectangulates_modulo(A, g, T, T).holds and g.rho.is_equality():
                counts["gene_semilattice"] += 1
                if not verify_gene_semilattice(A, g)["ok"]:
                    fails.append(f"{name}: gene semilattice clauses")
        term = find_compatible_semilattice_term(A)
        if term is not None:
            mt = term[0]
            M = term_table(A, mt).reshape(n, n)
            for c in range(n):
                for d in range(n):
                    theta, pc = principal_congruence(A, c, d)
                    for a in range(n):
                        for b in range(n):
                            if a == b or not theta.related(a, b):
                                continue
                            if not cg(A, a, b).leq(theta):
                                fails.append(f"{name}: Cg not monotone")
                            chain = pc.chain(a, b)
                            nc = normalize_malcev_chain(A, chain, mt)
                            counts["chains"] += 1
                            desc_ok = all(M[l.start, l.end] == l.end for l in nc.descending)
                            asc_ok = all(M[l.start, l.end] == l.start for l in nc.ascending)
                            short = len(nc.descending) <= len(chain.links) and \
                                len(nc.ascending) <= len(chain.links)
                            if not (nc.validate(M) and desc_ok and asc_ok and short):
                                fails.append(f"{name}: chain ({a},{b}) in Cg({c},{d})")
            if A.is_idempotent():
                counts["semiring"] += 1
                if not all(semiring_laws(build_semiring(A)).values()):
                    fails.append(f"{name}: semiring laws")
    ok = not fails and all(v > 0 for v in counts.values())
    record(12, ok, f"checked {counts}; failures {fails[:5]}")
    assert ok

"""Brute-force reference implementations used to cross-check the library.

Nothing here imports the closure kernel, congruence or rectangulation code;
everything is computed straight from the operation tables.
"""
import itertools

import numpy as np


# -- congruences by partition enumeration -------------------------------------------

def set_partitions(n):
    """All partitions of range(n) as label tuples (restricted growth strings)."""
    def go(prefix, top):
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for v in range(top + 2):
            yield from go(prefix + [v], max(top, v))
    if n == 0:
        yield ()
        return
    yield from go([0], 0)


def _op_arrays(alg):
    n = alg.size
    return [(o.arity, np.array(o.table).reshape((n,) * o.arity)) for o in alg.operations]


def is_compatible_partition(alg, labels):
    n = alg.size
    lab = np.asarray(labels)
    for arity, arr in _op_arrays(alg):
        if arity == 0:
            continue
        # change one argument at a time; all others range freely
        for pos in range(arity):
            moved = np.moveaxis(arr, pos, 0).reshape(n, -1)
            for x in range(n):
                for y in range(x + 1, n):
                    if lab[x] == lab[y] and np.any(lab[moved[x]] != lab[moved[y]]):
                        return False
    return True


def brute_congruences(alg):
    return [p for p in set_partitions(alg.size) if is_compatible_partition(alg, p)]


def _finer(p, q):
    return all(q[a] == q[b] for a in range(len(p)) for b in range(len(p)) if p[a] == p[b])


def brute_cg(alg, a, b, cons=None):
    cons = cons if cons is not None else brute_congruences(alg)
    best = None
    for p in cons:
        if p[a] == p[b] and (best is None or _finer(p, best)):
            best = p
    return best


def brute_is_si(alg, cons=None):
    cons = cons if cons is not None else brute_congruences(alg)
    nontrivial = [p for p in cons if len(set(p)) < alg.size]
    if not nontrivial:
        return False
    minimal = [p for p in nontrivial if not any(q != p and _finer(q, p) for q in nontrivial)]
    return len(minimal) == 1


# -- semilattice operations -------------------------------------------------------------

def all_semilattice_tables(n):
    """Every meet-semilattice operation on range(n), from the partial orders."""
    out = []
    pairs = [(a, b) for a in range(n) for b in range(n) if a != b]
    for bits in itertools.product((0, 1), repeat=len(pairs)):
        le = np.eye(n, dtype=bool)
        for (a, b), v in zip(pairs, bits):
            le[a, b] = bool(v)
        if np.any(le & le.T & ~np.eye(n, dtype=bool)):
            continue
        if np.any((le.astype(int) @ le.astype(int) > 0) & ~le):
            continue
        table = []
        ok = True
        for x in range(n):
            for y in range(n):
                lower = [z for z in range(n) if le[z, x] and le[z, y]]
                glb = [z for z in lower if all(le[w, z] for w in lower)]
                if len(glb) != 1:
                    ok = False
                    break
                table.append(glb[0])
            if not ok:
                break
        if ok:
            out.append(tuple(table))
    return out


def is_compatible_operation(alg, table):
    """table: A^2 -> A is a homomorphism, i.e. commutes with every operation."""
    n = alg.size
    t = np.asarray(table).reshape(n, n)
    for arity, arr in _op_arrays(alg):
        for xs in itertools.product(range(n), repeat=arity):
            for ys in itertools.product(range(n), repeat=arity):
                lhs = t[arr[xs] if arity else arr[()], arr[ys] if arity else arr[()]]
                rhs = arr[tuple(t[x, y] for x, y in zip(xs, ys))] if arity else arr[()]
                if lhs != rhs:
                    return False
    return True


def compatible_semilattices(alg):
    return [t for t in all_semilattice_tables(alg.size) if is_compatible_operation(alg, t)]


# -- 4-ary polynomial clone of a 2-element algebra, as 16-bit masks --------------------

def _apply_bits(arity, table, args):
    """Pointwise application of a 2-element operation to bitmask arrays."""
    full = np.uint32(0xFFFF)
    if arity == 0:
        return np.array([full if table[0] else 0], dtype=np.uint32)
    acc = np.zeros(np.broadcast(*args).shape, dtype=np.uint32)
    for idx, val in enumerate(table):
        if not val:
            continue
        bits = [(idx >> (arity - 1 - i)) & 1 for i in range(arity)]
        term = np.full(acc.shape, full, dtype=np.uint32)
        for b, a in zip(bits, args):
            term &= a if b else (~a & full)
        acc |= term
    return acc


def polynomial_clone_bits(alg):
    """All 4-ary polynomial operations of a 2-element algebra.

    An operation is a 16-bit mask; bit j is its value at the input whose
    binary digits (x1 most significant) spell j.
    """
    assert alg.size == 2
    proj = []
    for i in range(4):
        proj.append(sum(1 << j for j in range(16) if (j >> (3 - i)) & 1))
    gens = proj + [0, 0xFFFF]
    seen = np.zeros(1 << 16, dtype=bool)
    seen[gens] = True
    ops = [(o.arity, o.table) for o in alg.operations]
    for arity, table in ops:
        if arity == 0:
            seen[int(_apply_bits(0, table, [])[0])] = True
        assert arity <= 2, "oracle only handles arity <= 2"
    frontier = np.nonzero(seen)[0].astype(np.uint32)
    while len(frontier) and not seen.all():
        allv = np.nonzero(seen)[0].astype(np.uint32)
        fresh = np.zeros_like(seen)
        step = max(1, (1 << 22) // len(allv))

        def mark(vals):
            fresh[vals.ravel()] = True
        for arity, table in ops:
            if arity == 1:
                mark(_apply_bits(1, table, [frontier]))
            elif arity == 2:
                for s in range(0, len(frontier), step):
                    f = frontier[s:s + step, None]
                    mark(_apply_bits(2, table, [f, allv[None, :]]))
                    if table[1] != table[2]:
                        mark(_apply_bits(2, table, [allv[None, :], f]))
                    if (fresh | seen).all():
                        break
        fresh &= ~seen
        seen |= fresh
        frontier = np.nonzero(fresh)[0].astype(np.uint32)
    return np.nonzero(seen)[0].astype(np.uint32)


def brute_quadruples(alg):
    """{(p(a,c), p(a,d), p(b,c), p(b,d))} over 4-ary polynomials p with all
    relations total, for a 2-element algebra.

    Each variable carries a row pattern (x,x,y,y) or a column pattern
    (u,v,u,v); variables with the same pattern can be merged, so four
    variables already realise every polynomial of any arity.
    """
    patterns = sorted({(x, x, y, y) for x in (0, 1) for y in (0, 1)}
                      | {(u, v, u, v) for u in (0, 1) for v in (0, 1)})
    combos = list(itertools.product(patterns, repeat=4))
    # input index at each of the four positions
    idx = np.array([[sum(c[i][pos] << (3 - i) for i in range(4)) for pos in range(4)]
                    for c in combos], dtype=np.uint32)
    clone = polynomial_clone_bits(alg)
    quads = set()
    for s in range(0, len(clone), 4096):
        f = clone[s:s + 4096, None, None]
        vals = (f >> idx[None, :, :]) & 1
        codes = (vals[..., 0] << 3) | (vals[..., 1] << 2) | (vals[..., 2] << 1) | vals[..., 3]
        for c in np.unique(codes):
            c = int(c)
            quads.add(((c >> 3) & 1, (c >> 2) & 1, (c >> 1) & 1, c & 1))
    return quads


def brute_rectangulates(quads, e, one):
    for q in quads:
        E = [e[v] for v in q]
        if E[0] == one and E[3] == one and (E[1] != one or E[2] != one):
            return False, q
    return True, None


# -- term evaluation independent of the library evaluator -----------------------------

def eval_tree(alg, node, args):
    """Evaluate a library term tree by direct table lookup."""
    from finalg.terms import App, Const, Var
    if isinstance(node, Var):
        return args[node.index]
    if isinstance(node, Const):
        return node.value
    assert isinstance(node, App)
    op = alg.op(node.symbol)
    vals = [eval_tree(alg, c, args) for c in node.args]
    pos = 0
    for v in vals:
        pos = pos * alg.size + v
    return op.table[pos]

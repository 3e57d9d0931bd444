"""Coordinatewise closure in a finite power A^d.

This is the one kernel behind subuniverses, free algebras, polynomial clones
and the quadruple closure.  Elements are rows of a uint8/uint16 matrix; the
closure runs semi-naively (each round only combines tuples that involve at
least one element from the previous round), so the round in which an element
first appears is its derivation depth.
"""
import itertools
import numpy as np

from .errors import ScaleError
from .terms import App, TermExpr

CHUNK = 4_000_000  # candidate cells per vectorised batch


class _Keyer:
    """Maps rows to hashable keys; mixed-radix ints when they fit, else bytes."""

    def __init__(self, n, d):
        self.n = n
        self.d = d
        self.as_int = d * max(1, (n - 1).bit_length()) <= 62
        if self.as_int:
            self.weights = (np.int64(n) ** np.arange(d - 1, -1, -1, dtype=np.int64)).astype(np.int64)

    def keys(self, rows):
        if self.as_int:
            return rows.astype(np.int64) @ self.weights
        rows = np.ascontiguousarray(rows)
        return [r.tobytes() for r in rows]

    def key(self, row):
        row = np.asarray(row)
        if self.as_int:
            return int(row.astype(np.int64) @ self.weights)
        return np.ascontiguousarray(row).tobytes()


class Closure:
    """Subuniverse of A^d generated by `generators` under `ops`.

    ops: sequence of (symbol, arity, ndarray of shape (n,)*arity).
    origin[i] is ("gen", g) or (op_position, arg indices); depth[i] is the round.
    Nullary operations contribute their constant tuple (c,...,c) up front.
    """

    def __init__(self, n, d, ops, generators, cap, what="subuniverse"):
        self.n = n
        self.d = d
        self.ops = list(ops)
        self.cap = cap
        self.what = what
        self._dtype = np.uint8 if n <= 256 else np.uint16
        self._keyer = _Keyer(n, d)
        self.index = {}
        self.rows = []
        self.origin = []
        self.depth = []
        self._elements = None
        gens = [np.asarray(g, dtype=self._dtype).reshape(d) for g in generators]
        for g_i, g in enumerate(gens):
            self._add(g, ("gen", g_i), 0)
        for pos, (sym, arity, table) in enumerate(self.ops):
            if arity == 0:
                c = int(np.asarray(table).reshape(-1)[0])
                self._add(np.full(d, c, dtype=self._dtype), (pos, ()), 0)
        self._run()

    def _add(self, row, origin, depth):
        k = self._keyer.key(row)
        if k in self.index:
            return self.index[k]
        if len(self.rows) >= self.cap:
            raise ScaleError(f"{self.what} closure exceeded cap {self.cap}",
                             cap=self.cap, partial=len(self.rows))
        idx = len(self.rows)
        self.index[k] = idx
        self.rows.append(np.array(row, dtype=self._dtype))
        self.origin.append(origin)
        self.depth.append(depth)
        return idx

    def _run(self):
        lo, hi = 0, len(self.rows)
        rnd = 0
        while lo < hi:
            rnd += 1
            allrows = np.array(self.rows[:hi], dtype=self._dtype).reshape(hi, self.d)
            for pos, (sym, arity, table) in enumerate(self.ops):
                if arity == 0:
                    continue
                table = np.asarray(table)
                if arity == 1:
                    self._absorb(table[allrows[lo:hi]], pos, [np.arange(lo, hi)], rnd)
                elif arity == 2:
                    self._binary(table, allrows, lo, hi, pos, rnd)
                else:
                    self._general(table, arity, allrows, lo, hi, pos, rnd)
            lo, hi = hi, len(self.rows)
        self._elements = np.array(self.rows, dtype=self._dtype).reshape(len(self.rows), self.d)

    def _binary(self, table, allrows, lo, hi, pos, rnd):
        # pairs (i, j) with i or j new: new x all, then old x new
        span = max(1, CHUNK // max(1, hi * self.d))
        for start in range(lo, hi, span):
            stop = min(hi, start + span)
            left = allrows[start:stop]
            vals = table[left[:, None, :], allrows[None, :hi, :]]
            ii, jj = np.meshgrid(np.arange(start, stop), np.arange(hi), indexing="ij")
            self._absorb(vals.reshape(-1, self.d), pos, [ii.reshape(-1), jj.reshape(-1)], rnd)
        if lo > 0:
            span = max(1, CHUNK // max(1, lo * self.d))
            for start in range(lo, hi, span):
                stop = min(hi, start + span)
                right = allrows[start:stop]
                vals = table[allrows[None, :lo, :], right[:, None, :]]
                jj, ii = np.meshgrid(np.arange(start, stop), np.arange(lo), indexing="ij")
                self._absorb(vals.reshape(-1, self.d), pos, [ii.reshape(-1), jj.reshape(-1)], rnd)

    def _general(self, table, arity, allrows, lo, hi, pos, rnd):
        total = hi ** arity - lo ** arity
        if total * self.d > 50 * CHUNK * 10:
            raise ScaleError(f"{self.what} closure: {arity}-ary step too large",
                             cap=self.cap, partial=len(self.rows))
        batch = []
        for combo in itertools.product(range(hi), repeat=arity):
            if max(combo) < lo:
                continue
            batch.append(combo)
            if len(batch) * self.d >= CHUNK:
                self._flush_general(table, allrows, batch, pos, rnd)
                batch = []
        if batch:
            self._flush_general(table, allrows, batch, pos, rnd)

    def _flush_general(self, table, allrows, batch, pos, rnd):
        idx = np.array(batch, dtype=np.int64)
        vals = table[tuple(allrows[idx[:, k]] for k in range(idx.shape[1]))]
        self._absorb(vals, pos, [idx[:, k] for k in range(idx.shape[1])], rnd)

    def _absorb(self, vals, pos, argidx, rnd):
        if len(vals) == 0:
            return
        vals = vals.astype(self._dtype, copy=False)
        keys = self._keyer.keys(vals)
        if self._keyer.as_int:
            uniq, first = np.unique(keys, return_index=True)
            for k, f in zip(uniq.tolist(), first.tolist()):
                if k not in self.index:
                    self._add(vals[f], (pos, tuple(int(a[f]) for a in argidx)), rnd)
        else:
            seen = set()
            for f, k in enumerate(keys):
                if k in self.index or k in seen:
                    continue
                seen.add(k)
                self._add(vals[f], (pos, tuple(int(a[f]) for a in argidx)), rnd)

    # -- queries ---------------------------------------------------------
    @property
    def elements(self):
        return self._elements

    def __len__(self):
        return len(self.rows)

    def find(self, row):
        return self.index.get(self._keyer.key(np.asarray(row, dtype=self._dtype)))

    def term(self, idx, leaf, arity):
        """Witness term for element idx; leaf(g) gives the Node of generator g."""
        memo = {}
        order = []
        stack = [idx]
        while stack:
            i = stack.pop()
            if i in memo:
                continue
            org = self.origin[i]
            if org[0] == "gen":
                memo[i] = leaf(org[1])
                continue
            pending = [a for a in org[1] if a not in memo]
            if pending:
                stack.append(i)
                stack.extend(pending)
                continue
            sym = self.ops[org[0]][0]
            memo[i] = App(sym, [memo[a] for a in org[1]])
            order.append(i)
        return TermExpr(memo[idx], arity)

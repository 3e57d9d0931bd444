"""Finite algebras given by operation tables.

The universe is always {0, ..., n-1}.  Tables are flat and first-argument
major, so a binary table entry for (i, j) sits at i*n + j; constants are
nullary operations with a length-1 table.
"""
import itertools
import json
from dataclasses import dataclass

import numpy as np

from . import config
from .closure import Closure
from .errors import (InvalidCongruenceError, MalformedInput, ScaleError,
                     SignatureError)
from .terms import App, Const, TermExpr, Var


@dataclass(frozen=True, eq=False)
class Operation:
    symbol: str
    arity: int
    table: tuple

    def array(self, n):
        return np.array(self.table, dtype=np.int64).reshape((n,) * self.arity)


class FiniteAlgebra:
    def __init__(self, size, operations, name=""):
        if size < 1:
            raise MalformedInput("size must be positive")
        self.name = name
        self.size = int(size)
        ops = []
        seen = set()
        for op in operations:
            if not isinstance(op, Operation):
                sym, arity, table = op
                op = Operation(str(sym), int(arity), tuple(int(v) for v in table))
            if op.symbol in seen:
                raise MalformedInput(f"duplicate operation symbol {op.symbol!r}")
            seen.add(op.symbol)
            if op.arity < 0:
                raise MalformedInput("negative arity")
            if len(op.table) != self.size ** op.arity:
                raise MalformedInput(
                    f"{op.symbol}: table length {len(op.table)} != {self.size}^{op.arity}")
            if any(v < 0 or v >= self.size for v in op.table):
                raise MalformedInput(f"{op.symbol}: table entry out of range")
            ops.append(op)
        self.operations = tuple(ops)
        self._by_symbol = {op.symbol: op for op in ops}
        self._arrays = {}

    # -- basic access ------------------------------------------------------
    def __repr__(self):
        sig = ", ".join(f"{o.symbol}/{o.arity}" for o in self.operations)
        return f"FiniteAlgebra({self.name!r}, n={self.size}, [{sig}])"

    @property
    def universe(self):
        return range(self.size)

    def op(self, symbol):
        try:
            return self._by_symbol[symbol]
        except KeyError:
            raise SignatureError(f"unknown operation symbol {symbol!r}") from None

    def array(self, symbol):
        arr = self._arrays.get(symbol)
        if arr is None:
            arr = self.op(symbol).array(self.size)
            arr.setflags(write=False)
            self._arrays[symbol] = arr
        return arr

    def kernel_ops(self):
        """(symbol, arity, ndarray) triples for the closure kernel."""
        return [(o.symbol, o.arity, self.array(o.symbol)) for o in self.operations]

    def apply(self, symbol, *args):
        op = self.op(symbol)
        if len(args) != op.arity:
            raise SignatureError(f"{symbol} expects {op.arity} arguments")
        idx = 0
        for a in args:
            idx = idx * self.size + a
        return op.table[idx]

    def signature(self):
        return tuple(sorted((o.symbol, o.arity) for o in self.operations))

    def is_idempotent(self):
        n = self.size
        for o in self.operations:
            arr = self.array(o.symbol)
            if o.arity == 0:
                if n > 1:
                    return False
                continue
            for a in range(n):
                if arr[(a,) * o.arity] != a:
                    return False
        return True

    def same_as(self, other):
        return (self.size == other.size
                and [(o.symbol, o.arity, o.table) for o in self.operations]
                == [(o.symbol, o.arity, o.table) for o in other.operations])

    # -- serialisation -----------------------------------------------------
    def to_dict(self):
        return {
            "name": self.name,
            "size": self.size,
            "operations": [
                {"symbol": o.symbol, "arity": o.arity, "table": list(o.table)}
                for o in self.operations
            ],
        }

    @classmethod
    def from_dict(cls, data):
        try:
            ops = [(o["symbol"], o["arity"], o["table"]) for o in data["operations"]]
            return cls(int(data["size"]), ops, name=data.get("name", ""))
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedInput(f"bad algebra description: {exc}") from exc

    def dumps(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    def save(self, path):
        d = self.to_dict()
        ops = ",\n".join("    " + json.dumps(o, sort_keys=True) for o in d["operations"])
        body = (f'{{\n  "name": {json.dumps(d["name"])},\n  "size": {d["size"]},\n'
                f'  "operations": [\n{ops}\n  ]\n}}\n') if ops else (
                f'{{\n  "name": {json.dumps(d["name"])},\n  "size": {d["size"]},\n'
                f'  "operations": []\n}}\n')
        with open(path, "w") as fh:
            fh.write(body)


def load_algebra(path):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise MalformedInput(f"{path}: not JSON ({exc})") from exc
    return FiniteAlgebra.from_dict(data)


def from_function(name, n, ops):
    """Build an algebra from python callables: ops = [(symbol, arity, fn)]."""
    out = []
    for sym, arity, fn in ops:
        table = [fn(*args) for args in itertools.product(range(n), repeat=arity)]
        out.append((sym, arity, table))
    return FiniteAlgebra(n, out, name=name)


# -- terms -------------------------------------------------------------------

def evaluate_term(alg, t, args):
    if len(args) != t.arity:
        raise SignatureError(f"term of arity {t.arity} given {len(args)} arguments")
    memo = {}

    def go(node):
        key = id(node)
        if key in memo:
            return memo[key]
        if isinstance(node, Var):
            if node.index >= t.arity:
                raise SignatureError("variable index out of range")
            val = args[node.index]
        elif isinstance(node, Const):
            val = node.value
        else:
            vals = [go(a) for a in node.args]
            val = alg.apply(node.symbol, *vals)
        memo[key] = val
        return val

    return go(t.root)


def term_table(alg, t):
    """Values of t on all of A^arity, as an int array indexed first-argument major."""
    n, k = alg.size, t.arity
    if n ** k > config.CAPS.table_entries:
        raise ScaleError(f"term table of size {n}^{k} over cap", cap=config.CAPS.table_entries)
    grids = np.indices((n,) * k).reshape(k, -1) if k else np.zeros((0, 1), dtype=np.int64)
    cells = grids.shape[1]
    memo = {}

    def go(node):
        key = id(node)
        if key in memo:
            return memo[key]
        if isinstance(node, Var):
            if node.index >= k:
                raise SignatureError("variable index out of range")
            val = grids[node.index]
        elif isinstance(node, Const):
            val = np.full(cells, node.value, dtype=np.int64)
        else:
            op = alg.op(node.symbol)
            if len(node.args) != op.arity:
                raise SignatureError(f"{node.symbol} applied to {len(node.args)} arguments")
            arr = alg.array(node.symbol)
            if op.arity == 0:
                val = np.full(cells, arr.reshape(-1)[0], dtype=np.int64)
            else:
                val = arr[tuple(go(a) for a in node.args)]
        memo[key] = val
        return val

    return np.asarray(go(t.root), dtype=np.int64).reshape(-1)


# -- subuniverses ------------------------------------------------------------

class Subuniverse:
    """A closed subset with a witness term for every element.

    Witness terms have one variable per generator, in the order given.
    """

    def __init__(self, alg, closure, generators):
        self.alg = alg
        self._closure = closure
        self.generators = tuple(generators)
        self.elements = frozenset(int(r[0]) for r in closure.elements)

    def __contains__(self, a):
        return a in self.elements

    def __len__(self):
        return len(self.elements)

    def sorted(self):
        return sorted(self.elements)

    def witness(self, a):
        idx = self._closure.find([a])
        if idx is None:
            raise KeyError(a)
        return self._closure.term(idx, lambda g: Var(g), len(self.generators))


def generate_subuniverse(alg, generators, cap=None):
    cap = cap or config.CAPS.subuniverse
    gens = sorted(set(int(g) for g in generators))
    for g in gens:
        if not 0 <= g < alg.size:
            raise ValueError(f"generator {g} outside universe")
    cl = Closure(alg.size, 1, alg.kernel_ops(), [[g] for g in gens], cap)
    return Subuniverse(alg, cl, gens)


def subalgebra(alg, subset, name=None):
    """Induced subalgebra on a closed subset, relabelled 0..k-1 in sorted order.

    Returns (algebra, list mapping new index -> old element).
    """
    elems = sorted(set(subset))
    pos = {a: i for i, a in enumerate(elems)}
    ops = []
    for o in alg.operations:
        arr = alg.array(o.symbol)
        table = []
        for args in itertools.product(elems, repeat=o.arity):
            v = int(arr[args]) if o.arity else int(arr.reshape(-1)[0])
            if v not in pos:
                raise ValueError("subset is not closed under " + o.symbol)
            table.append(pos[v])
        ops.append((o.symbol, o.arity, table))
    return FiniteAlgebra(len(elems), ops, name=name or f"{alg.name}|sub"), elems


def all_subuniverses(alg, include_empty=False):
    """Every subuniverse, found by closing each subset of generators."""
    n = alg.size
    found = set()
    frontier = [frozenset(generate_subuniverse(alg, []).elements)]
    if frontier[0]:
        found.add(frontier[0])
    else:
        frontier = [frozenset()]
    while frontier:
        nxt = []
        for s in frontier:
            for a in range(n):
                if a in s:
                    continue
                t = frozenset(generate_subuniverse(alg, set(s) | {a}).elements)
                if t not in found:
                    found.add(t)
                    nxt.append(t)
        frontier = nxt
    out = sorted(found, key=lambda s: (len(s), sorted(s)))
    if include_empty and not any(len(s) == 0 for s in out):
        if not any(o.arity == 0 for o in alg.operations):
            out.insert(0, frozenset())
    return out


# -- direct powers -------------------------------------------------------------

class PowerAlgebra(FiniteAlgebra):
    """A^N with tuples encoded mixed-radix, first coordinate most significant."""

    def __init__(self, base, N, ops, name):
        super().__init__(base.size ** N, ops, name=name)
        self.base = base
        self.exponent = N

    def encode(self, tup):
        idx = 0
        for a in tup:
            idx = idx * self.base.size + int(a)
        return idx

    def decode(self, idx):
        n, out = self.base.size, []
        for _ in range(self.exponent):
            out.append(idx % n)
            idx //= n
        return tuple(reversed(out))

    def diagonal(self, a):
        return self.encode((a,) * self.exponent)

    def digits(self):
        n, N = self.base.size, self.exponent
        return np.array(np.unravel_index(np.arange(n ** N), (n,) * N)).T if N else np.zeros((1, 0), dtype=np.int64)


def direct_power(alg, N, cap=None):
    cap = cap or config.CAPS.power
    n = alg.size
    if N < 1:
        raise ValueError("exponent must be positive")
    size = n ** N
    if size > cap:
        raise ScaleError(f"power {n}^{N} exceeds cap {cap}", cap=cap, partial=0)
    for o in alg.operations:
        if size ** o.arity > config.CAPS.table_entries:
            raise ScaleError(f"table of {o.symbol} on {n}^{N} too large",
                             cap=config.CAPS.table_entries)
    digits = np.array(np.unravel_index(np.arange(size), (n,) * N)).T
    weights = n ** np.arange(N - 1, -1, -1, dtype=np.int64)
    ops = []
    for o in alg.operations:
        arr = alg.array(o.symbol)
        if o.arity == 0:
            c = int(arr.reshape(-1)[0])
            ops.append((o.symbol, 0, [int(np.full(N, c) @ weights)]))
            continue
        grids = np.indices((size,) * o.arity).reshape(o.arity, -1)
        coords = arr[tuple(digits[g] for g in grids)]
        ops.append((o.symbol, o.arity, (coords @ weights).tolist()))
    return PowerAlgebra(alg, N, ops, name=f"{alg.name}^{N}")


def product(algs, name=None):
    """Direct product of algebras with a common signature (mixed radix)."""
    sig = algs[0].signature()
    for a in algs[1:]:
        if a.signature() != sig:
            raise SignatureError("product factors differ in signature")
    sizes = [a.size for a in algs]
    total = int(np.prod(sizes))
    if total > config.CAPS.power:
        raise ScaleError("product too large", cap=config.CAPS.power)
    digits = np.array(np.unravel_index(np.arange(total), sizes)).T
    weights = np.array([int(np.prod(sizes[i + 1:])) for i in range(len(sizes))], dtype=np.int64)
    ops = []
    for o in algs[0].operations:
        if total ** o.arity > config.CAPS.table_entries:
            raise ScaleError("product table too large", cap=config.CAPS.table_entries)
        if o.arity == 0:
            vals = [int(a.array(o.symbol).reshape(-1)[0]) for a in algs]
            ops.append((o.symbol, 0, [int(np.array(vals) @ weights)]))
            continue
        grids = np.indices((total,) * o.arity).reshape(o.arity, -1)
        cols = []
        for f, a in enumerate(algs):
            arr = a.array(o.symbol)
            cols.append(arr[tuple(digits[g, f] for g in grids)])
        coords = np.stack(cols, axis=1)
        ops.append((o.symbol, o.arity, (coords @ weights).tolist()))
    return FiniteAlgebra(total, ops, name=name or "x".join(a.name for a in algs))


# -- quotients -----------------------------------------------------------------

def quotient(alg, theta, name=None):
    """A/theta with blocks numbered by least member; returns (algebra, surjection)."""
    labels = list(theta.labels)
    if len(labels) != alg.size:
        raise InvalidCongruenceError("partition size does not match algebra")
    blocks = sorted({l for l in labels}, key=lambda b: labels.index(b))
    renum = {b: i for i, b in enumerate(blocks)}
    surj = [renum[l] for l in labels]
    k = len(blocks)
    ops = []
    for o in alg.operations:
        arr = alg.array(o.symbol)
        if o.arity == 0:
            ops.append((o.symbol, 0, [surj[int(arr.reshape(-1)[0])]]))
            continue
        table = {}
        for args in itertools.product(range(alg.size), repeat=o.arity):
            key = tuple(surj[a] for a in args)
            v = surj[int(arr[args])]
            prev = table.setdefault(key, v)
            if prev != v:
                raise InvalidCongruenceError(
                    f"partition not compatible with {o.symbol}")
        flat = [table[args] for args in itertools.product(range(k), repeat=o.arity)]
        ops.append((o.symbol, o.arity, flat))
    return FiniteAlgebra(k, ops, name=name or f"{alg.name}/theta"), surj


# -- free algebras -------------------------------------------------------------

class FreeAlgebraSlice:
    """F(k) realised as k-ary term functions on the generating algebra.

    tables[i] is the value vector of element i over A^k (first-argument major).
    """

    def __init__(self, alg, k, closure):
        self.alg = alg
        self.k = k
        self._closure = closure
        self.tables = closure.elements.astype(np.int64)
        self._terms = {}

    def __len__(self):
        return len(self.tables)

    def term(self, i):
        t = self._terms.get(i)
        if t is None:
            t = self._closure.term(i, lambda g: Var(g), self.k)
            self._terms[i] = t
        return t

    def index_of(self, table):
        return self._closure.find(np.asarray(table))

    def projection(self, j):
        return j

    def as_algebra(self, name=None):
        """The free algebra itself, elements numbered as in `tables`."""
        m = len(self)
        ops = []
        for sym, arity, arr in self.alg.kernel_ops():
            if m ** arity > config.CAPS.table_entries:
                raise ScaleError("free algebra table too large")
            flat = []
            for args in itertools.product(range(m), repeat=arity):
                if arity == 0:
                    row = np.full(self.tables.shape[1], arr.reshape(-1)[0])
                else:
                    row = arr[tuple(self.tables[a] for a in args)]
                flat.append(self.index_of(row))
            ops.append((sym, arity, flat))
        return FiniteAlgebra(m, ops, name=name or f"F({self.k})")


def free_algebra(alg, k, cap=None):
    cap = cap or config.CAPS.free_algebra
    n = alg.size
    cells = n ** k
    if cells > config.CAPS.table_entries:
        raise ScaleError(f"free algebra index space {n}^{k} too large",
                         cap=config.CAPS.table_entries, partial=0)
    grids = np.indices((n,) * k).reshape(k, -1)
    ops = [op for op in alg.kernel_ops()]
    cl = Closure(n, cells, ops, [grids[j] for j in range(k)], cap, what="free algebra")
    return FreeAlgebraSlice(alg, k, cl)


# -- embeddings ----------------------------------------------------------------

def find_embeddings(src, dst, first=False):
    """All injective homomorphisms src -> dst (as tuples), by backtracking."""
    if src.signature() != dst.signature():
        raise SignatureError("signatures differ")
    n, m = src.size, dst.size
    if n > m:
        return []
    ops = [(src.array(o.symbol), dst.array(o.symbol), o.arity) for o in src.operations]
    forced = {}
    for sa, da, ar in ops:
        if ar == 0:
            a, b = int(sa.reshape(-1)[0]), int(da.reshape(-1)[0])
            if forced.get(a, b) != b:
                return []
            forced[a] = b
    results = []
    img = [-1] * n
    used = [False] * m

    def consistent(newest):
        assigned = [a for a in range(n) if img[a] >= 0]
        for sa, da, ar in ops:
            if ar == 0:
                continue
            for args in itertools.product(assigned, repeat=ar):
                if newest not in args:
                    continue
                r = int(sa[args])
                want = int(da[tuple(img[a] for a in args)])
                if img[r] >= 0:
                    if img[r] != want:
                        return False
                elif used[want]:
                    return False
        return True

    def go(a):
        if a == n:
            results.append(tuple(img))
            return first
        choices = [forced[a]] if a in forced else range(m)
        for b in choices:
            if used[b]:
                continue
            img[a] = b
            used[b] = True
            if consistent(a) and go(a + 1):
                return True
            img[a] = -1
            used[b] = False
        return False

    go(0)
    return results


def is_isomorphic(a, b):
    return a.size == b.size and a.signature() == b.signature() and bool(find_embeddings(a, b, first=True))


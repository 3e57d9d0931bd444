"""The bundled algebras and the generators used to build them."""
import itertools
import os
from importlib import resources

from .algebra import (FiniteAlgebra, direct_power, from_function, load_algebra,
                      quotient, subalgebra)
from .congruence import Congruence

CORPUS_NAMES = [
    "ex2_10_A", "ex2_10_S", "ex4_4_1", "ex4_4_2", "ex4_4_3",
    "semilattice2", "semilattice3", "lattice2", "boolean2", "z2", "set2",
]


def ex2_10_A():
    return FiniteAlgebra(3, [
        ("dot", 2, [0, 0, 0, 0, 1, 2, 0, 1, 2]),
        ("e", 1, [0, 2, 2]),
        ("f", 1, [0, 0, 1]),
        ("zero", 0, [0]),
    ], name="ex2_10_A")


def ex2_10_C():
    """Subalgebra of A^2 on everything except (2, 1); returns (C, pair labels)."""
    A = ex2_10_A()
    A2 = direct_power(A, 2)
    keep = [A2.encode(p) for p in itertools.product(range(3), repeat=2) if p != (2, 1)]
    C, old = subalgebra(A2, keep, name="ex2_10_C")
    return C, [A2.decode(i) for i in old]


def ex2_10_S_with_labels():
    """S = C / gamma where gamma glues every pair that has a 0 coordinate.

    Returns (S, surjection from C, pair labels of C).
    """
    C, pairs = ex2_10_C()
    zero_pairs = [i for i, p in enumerate(pairs) if 0 in p]
    gamma = Congruence.from_blocks(C.size, [zero_pairs])
    S, surj = quotient(C, gamma, name="ex2_10_S")
    return S, surj, pairs


def ex2_10_S():
    return ex2_10_S_with_labels()[0]


def ex4_4(m):
    """Finite truncation ({0..m}; meet, dot) of the infinite example."""
    return from_function(f"ex4_4_{m}", m + 1, [
        ("meet", 2, lambda x, y: x if x == y else 0),
        ("dot", 2, lambda x, y: x if y == x + 1 else 0),
    ])


def chain_semilattice(k, name=None):
    return from_function(name or f"chain{k}", k, [("meet", 2, min)])


def semilattice2():
    return chain_semilattice(2, "semilattice2")


def semilattice3():
    return chain_semilattice(3, "semilattice3")


def join_chain(k):
    return from_function(f"joinchain{k}", k, [("join", 2, max)])


def lattice2():
    return from_function("lattice2", 2, [("meet", 2, min), ("join", 2, max)])


def boolean2():
    return from_function("boolean2", 2, [
        ("meet", 2, min), ("join", 2, max), ("neg", 1, lambda x: 1 - x),
        ("bot", 0, lambda: 0), ("top", 0, lambda: 1),
    ])


def z2():
    return from_function("z2", 2, [
        ("plus", 2, lambda x, y: (x + y) % 2), ("neg", 1, lambda x: x), ("zero", 0, lambda: 0),
    ])


def set2():
    return FiniteAlgebra(2, [], name="set2")


BUILDERS = {
    "ex2_10_A": ex2_10_A,
    "ex2_10_S": ex2_10_S,
    "ex4_4_1": lambda: ex4_4(1),
    "ex4_4_2": lambda: ex4_4(2),
    "ex4_4_3": lambda: ex4_4(3),
    "semilattice2": semilattice2,
    "semilattice3": semilattice3,
    "lattice2": lattice2,
    "boolean2": boolean2,
    "z2": z2,
    "set2": set2,
}


def corpus_dir():
    return str(resources.files("finalg") / "corpus")


def load(name):
    return load_algebra(os.path.join(corpus_dir(), name + ".json"))


def load_all():
    return {name: load(name) for name in CORPUS_NAMES}


def write_corpus(directory=None):
    directory = directory or corpus_dir()
    os.makedirs(directory, exist_ok=True)
    for name in CORPUS_NAMES:
        BUILDERS[name]().save(os.path.join(directory, name + ".json"))


# -- exhaustive small corpora ----------------------------------------------------

def two_element_binary_algebras(max_ops=2):
    """All 2-element algebras with up to `max_ops` binary operations, up to isomorphism.

    Operations are unordered (distinct tables); the only non-trivial
    isomorphism swaps 0 and 1.
    """
    tables = list(itertools.product(range(2), repeat=4))

    def swap(t):
        return tuple(1 - t[(1 - i) * 2 + (1 - j)] for i in range(2) for j in range(2))

    seen = set()
    out = []
    for k in range(max_ops + 1):
        for combo in itertools.combinations(range(16), k):
            ts = [tables[c] for c in combo]
            key = tuple(sorted(ts))
            alt = tuple(sorted(swap(t) for t in ts))
            canon = min(key, alt)
            if canon in seen:
                continue
            seen.add(canon)
            name = "b2_" + "_".join("".join(map(str, t)) for t in canon) if canon else "b2_empty"
            ops = [(f"f{i}", 2, list(t)) for i, t in enumerate(canon)]
            out.append(FiniteAlgebra(2, ops, name=name))
    return out

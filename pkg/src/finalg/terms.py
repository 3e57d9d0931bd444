"""Terms and polynomials over a finite signature.

Nodes are shared freely, so a term built by a closure is a DAG rather than
a tree; evaluation memoises on node identity to stay linear in DAG size.
"""
from dataclasses import dataclass


class Node:
    __slots__ = ()


class Var(Node):
    __slots__ = ("index",)

    def __init__(self, index):
        self.index = index

    def __repr__(self):
        return f"x{self.index + 1}"


class Const(Node):
    """A constant leaf; turns a term into a polynomial."""
    __slots__ = ("value",)

    def __init__(self, value):
        self.value = value

    def __repr__(self):
        return f"#{self.value}"


class App(Node):
    __slots__ = ("symbol", "args")

    def __init__(self, symbol, args=()):
        self.symbol = symbol
        self.args = tuple(args)

    def __repr__(self):
        return render(self)


@dataclass(frozen=True, eq=False)
class TermExpr:
    root: Node
    arity: int

    def __str__(self):
        return render(self.root)

    def size(self):
        return node_count(self.root)

    def constants(self):
        return sorted({n.value for n in walk(self.root) if isinstance(n, Const)})

    def is_polynomial(self):
        return any(isinstance(n, Const) for n in walk(self.root))


def var(i, arity):
    return TermExpr(Var(i), arity)


def walk(root):
    seen = set()
    stack = [root]
    while stack:
        node = stack.pop()
        if id(node) in seen:
            continue
        seen.add(id(node))
        yield node
        if isinstance(node, App):
            stack.extend(node.args)


def node_count(root):
    return sum(1 for _ in walk(root))


def render(root, limit=20000):
    """Prefix notation, e.g. dot(x1, e(#2))."""
    out = []
    budget = [limit]

    def go(node):
        if budget[0] <= 0:
            out.append("...")
            return
        budget[0] -= 1
        if isinstance(node, App):
            out.append(node.symbol)
            if node.args:
                out.append("(")
                for k, a in enumerate(node.args):
                    if k:
                        out.append(", ")
                    go(a)
                out.append(")")
        else:
            out.append(repr(node))

    go(root)
    return "".join(out)


def substitute(root, mapping):
    """Replace Var leaves: mapping(index) -> Node."""
    memo = {}

    def go(node):
        key = id(node)
        if key in memo:
            return memo[key]
        if isinstance(node, Var):
            res = mapping(node.index)
        elif isinstance(node, App):
            res = App(node.symbol, [go(a) for a in node.args])
        else:
            res = node
        memo[key] = res
        return res

    return go(root)


def compose(outer, inner):
    """outer(inner_1, ..., inner_k) with all inner terms of the same arity."""
    if len(inner) != outer.arity:
        raise ValueError("composition arity mismatch")
    arity = inner[0].arity if inner else 0
    roots = [t.root for t in inner]
    return TermExpr(substitute(outer.root, lambda i: roots[i]), arity)


def bind_constants(term, values):
    """Turn variables 1..len(values) (0-based from position 1) into constants.

    Convenience for term + constant-tuple polynomial witnesses: t(x, y1..yk)
    with y bound to `values` becomes a unary polynomial.
    """
    def m(i):
        if i == 0:
            return Var(0)
        return Const(values[i - 1])
    return TermExpr(substitute(term.root, m), 1)

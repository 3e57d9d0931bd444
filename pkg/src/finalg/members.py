"""Small members of V(A): quotients of subalgebras of low powers, up to isomorphism."""
from collections import Counter

from . import config
from .algebra import direct_power, is_isomorphic, quotient, subalgebra, all_subuniverses
from .congruence import congruence_lattice, is_subdirectly_irreducible
from .errors import ScaleError


def _invariant(alg):
    """Isomorphism-invariant profile: per element, how each operation treats it."""
    n = alg.size
    prof = [[] for _ in range(n)]
    for o in alg.operations:
        arr = alg.array(o.symbol)
        hits = Counter(o.table)
        for a in range(n):
            prof[a].append(hits[a])
            if o.arity == 1:
                prof[a].append(int(arr[a]) == a)
            elif o.arity == 2:
                prof[a].append(int(arr[a, a]) == a)
                prof[a].append(int((arr[a, :] == a).sum()))
                prof[a].append(int((arr[:, a] == a).sum()))
    return (n, tuple(sorted(tuple(p) for p in prof)))


def desk_scale_members(alg, max_size=8, max_power=3, max_power_size=16):
    """HSP-style members of size <= max_size, deduplicated by isomorphism.

    Powers with more than max_power_size elements are skipped, since
    enumerating every subuniverse of a big power is the expensive step.
    Each entry is (algebra, provenance string).
    """
    found = {}
    out = []

    def add(B, how):
        key = _invariant(B)
        for other, _ in found.get(key, []):
            if is_isomorphic(B, other):
                return
        found.setdefault(key, []).append((B, how))
        out.append((B, how))

    for j in range(1, max_power + 1):
        if alg.size ** j > max_power_size:
            break
        try:
            P = alg if j == 1 else direct_power(alg, j)
        except ScaleError:
            break
        if P.size > config.CAPS.power:
            break
        for S in all_subuniverses(P):
            C, _ = subalgebra(P, S, name=f"{alg.name}^{j}|{len(S)}")
            for theta in congruence_lattice(C):
                if theta.nblocks > max_size:
                    continue
                Q, _ = quotient(C, theta, name=f"{C.name}/{theta.nblocks}")
                add(Q, f"power {j}, subalgebra of size {len(S)}, quotient with {theta.nblocks} blocks")
    out.sort(key=lambda p: (p[0].size, p[1]))
    return out


def subdirectly_irreducible_members(alg, max_size=8, max_power=3, max_power_size=16):
    return [(B, how) for B, how in desk_scale_members(alg, max_size, max_power, max_power_size)
            if B.size > 1 and is_subdirectly_irreducible(B)]

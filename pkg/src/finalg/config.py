"""Size caps for the closure kernels.

Every closure checks its cap and raises ScaleError instead of truncating.
The CLI can override these from a JSON config file and from flags.
"""
import json
from dataclasses import dataclass, fields, replace


@dataclass
class Caps:
    subuniverse: int = 2 ** 20
    free_algebra: int = 2 ** 20
    power: int = 2 ** 16
    table_entries: int = 2 ** 24
    congruences: int = 10 ** 5
    binary_clone: int = 2 ** 18
    unary_enumeration: int = 6 ** 6
    quadruples: int = 2 ** 20
    subset_limit: int = 20
    pcf_budget: int = 10 ** 7
    dpc_arity: int = 5


CAPS = Caps()


def update_caps(**overrides):
    known = {f.name for f in fields(Caps)}
    for key, value in overrides.items():
        if value is None:
            continue
        if key not in known:
            raise KeyError(f"unknown cap {key!r}")
        setattr(CAPS, key, int(value))
    return CAPS


def load_config(path):
    with open(path) as fh:
        data = json.load(fh)
    caps = data.get("caps", data)
    return update_caps(**caps)


def snapshot():
    return replace(CAPS)


def restore(saved):
    for f in fields(Caps):
        setattr(CAPS, f.name, getattr(saved, f.name))

"""Command line front end.

Exit codes: 0 success, 1 a --assert property is false, 2 malformed input,
3 a scale cap was exceeded.
"""
import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import config
from .algebra import load_algebra
from .congruence import (Congruence, cg, congruence_lattice, is_simple,
                         is_subdirectly_irreducible, monolith)
from .errors import AlgebraError, MalformedInput, PreconditionError, ScaleError
from .tct import is_abelian_quotient

EXIT_OK, EXIT_ASSERT, EXIT_MALFORMED, EXIT_SCALE = 0, 1, 2, 3


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = [_jsonable(v) for v in obj]
        return sorted(items, key=repr) if isinstance(obj, (set, frozenset)) else items
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if hasattr(obj, "value") and hasattr(obj, "name") and not isinstance(obj, (str, int)):
        return obj.value
    return obj


_SCALE_HITS = []


def _section(fn):
    """Run an optional report section; preconditions and caps become notes.

    A cap hit is still remembered so the process exits 3 after reporting.
    """
    try:
        return fn()
    except PreconditionError as exc:
        return {"skipped": str(exc)}
    except ScaleError as exc:
        _SCALE_HITS.append(str(exc))
        return {"skipped": f"scale cap: {exc}"}


def _blocks(theta):
    return [list(b) for b in theta.nontrivial_blocks()]


# -- analyses --------------------------------------------------------------------

def run_rectangulation(alg):
    from .rectangulation import is_self_rectangulating
    ok, quotients, note = is_self_rectangulating(alg)
    report = {"self_rectangulating": ok, "quotients": quotients}
    if note:
        report["note"] = note
    return report, {"self-rectangulating": ok}


def run_semilattice(alg):
    from .semilattice import (compatible_semilattice_operations, extract_semilattice_term,
                              find_compatible_semilattice_polynomial,
                              find_compatible_semilattice_term, verify_gene_semilattice)
    from .tct import monolith_gene
    poly = find_compatible_semilattice_polynomial(alg)
    term = find_compatible_semilattice_term(alg)
    report = {"polynomial": poly.to_report() if poly else None,
              "term": term[1].to_report() if term else None}
    try:
        report["operations"] = [op.to_report() for op in compatible_semilattice_operations(alg)]
    except ScaleError as exc:
        # a fixed search bound, not a user cap
        report["operations"] = {"skipped": str(exc)}

    def extraction():
        if poly is None:
            return {"skipped": "no compatible semilattice polynomial"}
        if poly.top() is None:
            return {"skipped": "compatible semilattice has no largest element"}
        res = extract_semilattice_term(alg, poly)
        if hasattr(res, "to_report"):
            return {"essentially_unary_subalgebra": res.to_report()}
        return {"term": str(res)}
    report["extraction"] = _section(extraction)

    def gene_check():
        if not is_subdirectly_irreducible(alg):
            raise PreconditionError("not subdirectly irreducible")
        if is_abelian_quotient(alg, Congruence.equality(alg.size), monolith(alg)):
            raise PreconditionError("monolith is abelian")
        return verify_gene_semilattice(alg, monolith_gene(alg))
    report["gene_semilattice"] = _section(gene_check)
    props = {"compatible-semilattice-polynomial": poly is not None,
             "compatible-semilattice-term": term is not None}
    if isinstance(report["operations"], list):
        props["compatible-semilattice-operation"] = bool(report["operations"])
    return report, props


def run_extend(alg, method="coordinate", N=8, output=None):
    from .extensions import coordinate_embedding, power_quotient_extension, top_extension
    if method == "power":
        ext = power_quotient_extension(alg, N=N)
        report = {"method": "power", **ext.to_report()}
        B, emb = ext.B, list(ext.embedding)
        ok = ext.ok
    else:
        ce = coordinate_embedding(alg)
        te = top_extension(alg, ce)
        report = {"method": "coordinate", "embedding": ce.to_report(), "top_extension": te.to_report()}
        B, emb = te.B, list(te.phi_image)
        ok = te.ok
    if output:
        B.save(output)
        with open(os.path.splitext(output)[0] + ".map.json", "w") as fh:
            json.dump({"source": alg.name, "embedding": emb}, fh, sort_keys=True)
            fh.write("\n")
        report["exported"] = output
    return report, {"extension-ok": ok}


def run_dpc(alg, arity_cap=None):
    from .dpc import evaluate_pcf, synthesize_dpc_formula
    phi = synthesize_dpc_formula(alg, arity_cap)
    n = alg.size
    checked = failures = 0
    for a in range(n):
        for b in range(n):
            for c in range(n):
                for d in range(n):
                    checked += 1
                    if evaluate_pcf(alg, phi, a, b, c, d) != cg(alg, c, d).related(a, b):
                        failures += 1
    report = {"formula": phi.to_report(), "verification": {"checked": checked, "failures": failures}}
    return report, {"dpc-verified": failures == 0}


def run_semiring(alg, output=None):
    from .semiring import (annihilator_ideals, build_semiring, congruences_of_semiring,
                           verify_clone_hom, zero_classes)
    R = build_semiring(alg)
    ideals = annihilator_ideals(R)
    report = {"semiring": R.to_report(), "annihilator_ideals": [sorted(I) for I in ideals],
              "congruences": len(congruences_of_semiring(R)),
              "ideals_are_zero_classes": ideals == zero_classes(R),
              "clone_homomorphism": verify_clone_hom(R)}
    if output:
        R.as_algebra().save(output)
        report["exported"] = output
    ok = all(R.laws.values()) and report["ideals_are_zero_classes"] and report["clone_homomorphism"]["ok"]
    return report, {"semiring-laws": all(R.laws.values()), "semiring-ok": ok}


def run_cogenerator(alg, output=None):
    from .semiring import build_semiring, cogenerator, embed_si_into_cogenerator, sp_cover_check
    R = build_semiring(alg)
    I = cogenerator(R)
    report = {"cogenerator": I.to_report()}
    if alg.size > 1 and is_subdirectly_irreducible(alg):
        emb = embed_si_into_cogenerator(alg, I)
        report["embedding"] = None if emb is None else list(emb)
    k, emb = sp_cover_check(alg, I)
    report["power_embedding"] = {"k": k, "embedding": None if emb is None else list(emb)}
    if output:
        I.algebra.save(output)
        report["exported"] = output
    return report, {"cogenerator-covers": k is not None}


def run_analyze(alg):
    n = alg.size
    lat = congruence_lattice(alg)
    si = n > 1 and is_subdirectly_irreducible(alg)
    report = {
        "name": alg.name, "size": n,
        "operations": [{"symbol": o.symbol, "arity": o.arity} for o in alg.operations],
        "idempotent": alg.is_idempotent(),
        "congruence_lattice": {"size": len(lat), "atoms": len(lat.atoms()),
                               "congruences": [_blocks(t) for t in lat] if len(lat) <= 64 else None},
        "subdirectly_irreducible": si,
        "simple": is_simple(alg),
        "monolith": _blocks(monolith(alg)) if si else None,
    }
    props = {"idempotent": report["idempotent"], "subdirectly-irreducible": si,
             "simple": report["simple"]}
    rect, p = run_rectangulation(alg)
    report["rectangulation"] = rect
    props.update(p)
    sem, p = run_semilattice(alg)
    report["semilattice"] = sem
    props.update(p)
    nonabelian = si and not is_abelian_quotient(alg, Congruence.equality(n), monolith(alg))

    def extensions():
        if not nonabelian:
            raise PreconditionError("needs a subdirectly irreducible algebra with nonabelian monolith")
        out = {}
        if alg.is_idempotent():
            out["coordinate"] = _section(lambda: run_extend(alg, "coordinate")[0])
        N = 4 * n
        if n ** (2 * N) <= config.CAPS.table_entries and n ** N <= config.CAPS.power:
            out["power"] = _section(lambda: run_extend(alg, "power", N)[0])
        else:
            out["power"] = {"skipped": f"power quotient with N={N} exceeds caps"}
        return out
    report["extensions"] = _section(extensions)
    report["dpc"] = _section(lambda: _dpc_summary(alg))
    report["semiring"] = _section(lambda: _semiring_summary(alg))
    return report, props


def _dpc_summary(alg):
    from .dpc import synthesize_dpc_formula
    phi = synthesize_dpc_formula(alg)
    return {"representatives": len(phi.reps), "arity": phi.reps.arity,
            "full_arity": phi.reps.full_arity, "conditional_on_cap": phi.conditional,
            "max_chain_length": phi.max_descending + phi.max_ascending}


def _semiring_summary(alg):
    from .semiring import annihilator_ideals, build_semiring
    R = build_semiring(alg)
    return {"size": R.size, "commutative": R.is_commutative(), "laws": R.laws,
            "annihilator_ideals": len(annihilator_ideals(R))}


def _batch_one(path):
    try:
        alg = load_algebra(path)
        rep, props = run_analyze(alg)
        return path, {"name": alg.name, "size": alg.size, "properties": props}, props, None
    except MalformedInput as exc:
        return path, {"error": f"malformed: {exc}"}, {}, EXIT_MALFORMED
    except ScaleError as exc:
        return path, {"error": f"scale cap: {exc}"}, {}, EXIT_SCALE


def run_batch(directory, jobs=1):
    files = sorted(os.path.join(directory, f) for f in os.listdir(directory) if f.endswith(".json"))
    if jobs > 1 and len(files) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_batch_one, files))
    else:
        results = [_batch_one(f) for f in files]
    summary = {os.path.basename(p): rep for p, rep, _, _ in results}
    codes = [c for _, _, _, c in results if c]
    props = {}
    for _, _, pr, _ in results:
        for k, v in pr.items():
            props[k] = props.get(k, True) and v
    return {"files": len(files), "results": summary}, props, (max(codes) if codes else EXIT_OK)


# -- output ---------------------------------------------------------------------------

def render_text(obj, indent=0):
    pad = "  " * indent
    lines = []
    if isinstance(obj, dict):
        for k in sorted(obj):
            v = obj[k]
            if isinstance(v, (dict, list)) and v and not _flat_list(v):
                lines.append(f"{pad}{k}:")
                lines.extend(render_text(v, indent + 1))
            else:
                lines.append(f"{pad}{k}: {json.dumps(v, sort_keys=True)}")
    elif isinstance(obj, list):
        for v in obj:
            if isinstance(v, (dict, list)) and not _flat_list(v):
                lines.append(f"{pad}-")
                lines.extend(render_text(v, indent + 1))
            else:
                lines.append(f"{pad}- {json.dumps(v, sort_keys=True)}")
    else:
        lines.append(f"{pad}{obj}")
    return lines


def _flat_list(v):
    return isinstance(v, list) and all(not isinstance(x, dict) for x in v) and len(json.dumps(v)) < 100


def build_parser():
    p = argparse.ArgumentParser(prog="finalg", description="Analyse finite algebras given by operation tables.")
    p.add_argument("--report", choices=["json", "text"], default="text")
    p.add_argument("--assert", dest="asserts", action="append", default=[], metavar="PROPERTY",
                   help="exit 1 unless PROPERTY holds (repeatable)")
    p.add_argument("--config", help="JSON file with cap overrides")
    p.add_argument("--cap", action="append", default=[], metavar="NAME=VALUE",
                   help="override a size cap, e.g. --cap subuniverse=100000")
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("analyze", "rectangulation", "semilattice"):
        s = sub.add_parser(name)
        s.add_argument("file")
    s = sub.add_parser("extend")
    s.add_argument("file")
    s.add_argument("--method", choices=["coordinate", "power"], default="coordinate")
    s.add_argument("--N", type=int, default=8)
    s.add_argument("--output")
    s = sub.add_parser("dpc")
    s.add_argument("file")
    s.add_argument("--arity-cap", type=int)
    for name in ("semiring", "cogenerator"):
        s = sub.add_parser(name)
        s.add_argument("file")
        s.add_argument("--output")
    s = sub.add_parser("batch")
    s.add_argument("dir")
    s.add_argument("--jobs", type=int, default=min(4, os.cpu_count() or 1))
    s = sub.add_parser("corpus", help="list or export the bundled algebras")
    s.add_argument("--export", metavar="DIR")
    return p


def _apply_caps(args):
    if args.config:
        config.load_config(args.config)
    for item in args.cap:
        key, _, value = item.partition("=")
        config.update_caps(**{key.strip(): int(value)})


def dispatch(args):
    code = EXIT_OK
    if args.command == "batch":
        report, props, code = run_batch(args.dir, args.jobs)
        return report, props, code
    if args.command == "corpus":
        from . import corpus
        if args.export:
            corpus.write_corpus(args.export)
        return {"corpus": corpus.CORPUS_NAMES, "exported": args.export}, {}, code
    alg = load_algebra(args.file)
    if args.command == "analyze":
        report, props = run_analyze(alg)
    elif args.command == "rectangulation":
        report, props = run_rectangulation(alg)
    elif args.command == "semilattice":
        report, props = run_semilattice(alg)
    elif args.command == "extend":
        report, props = run_extend(alg, args.method, args.N, args.output)
    elif args.command == "dpc":
        report, props = run_dpc(alg, args.arity_cap)
    elif args.command == "semiring":
        report, props = run_semiring(alg, args.output)
    else:
        report, props = run_cogenerator(alg, args.output)
    return report, props, code


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    saved = config.snapshot()
    del _SCALE_HITS[:]
    try:
        _apply_caps(args)
        report, props, code = dispatch(args)
    except (MalformedInput, FileNotFoundError, KeyError, ValueError) as exc:
        print(f"error: malformed input: {exc}", file=sys.stderr)
        return EXIT_MALFORMED
    except ScaleError as exc:
        print(f"error: scale cap exceeded: {exc}", file=sys.stderr)
        return EXIT_SCALE
    except AlgebraError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_MALFORMED
    finally:
        config.restore(saved)
    report = _jsonable(report)
    if args.asserts:
        report["assertions"] = {}
        for prop in args.asserts:
            if prop not in props:
                print(f"error: unknown property {prop!r}; known: {', '.join(sorted(props))}",
                      file=sys.stderr)
                return EXIT_MALFORMED
            report["assertions"][prop] = bool(props[prop])
    if args.report == "json":
        print(json.dumps(report, sort_keys=True, indent=2))
    else:
        print("\n".join(render_text(report)))
    if args.asserts and not all(report["assertions"].values()):
        return EXIT_ASSERT
    if code == EXIT_OK and _SCALE_HITS:
        return EXIT_SCALE
    return code


if __name__ == "__main__":
    sys.exit(main())

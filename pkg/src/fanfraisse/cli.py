"""Command-line driver: enumeration, verification sweeps, searches, and
certificate emission.

Results go to stdout as JSON lines (sorted keys, no timestamps, so equal
seeds and flags give byte-identical output); certificates go to --out as
JSON files.  Exit codes: 0 success, 1 verified-negative result, 2 budget
bracket, 64 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys

from .amalgam import (
    InverseSequence,
    amalgamate_chained,
    chained_catalog,
    check_dominating,
    coinitial_cover,
    expansion_epi,
    expansion_witness,
    generic_extend,
)
from .certs import Certificate, verify_certificate
from .chains import (
    ChainedFan,
    ChainEpi,
    all_maximal_chains,
    chain_count,
    chain_image,
    enumerate_chain_epimorphisms,
)
from .duality import verify_duality
from .fans import (
    DEFAULT_MODE,
    Fan,
    FanEpi,
    all_fans,
    enumerate_epimorphisms,
    fan_build,
    is_epimorphism,
)
from .fink import BlockSeq, FinVec, generated_semigroup, tetris_apply
from .fanramsey import (
    RamseyInstance,
    build_large,
    cc_fan,
    hom_set,
    ramsey_witness,
    verify_ramsey_instance,
)
from .metrics import NakrPreconditionError, nakr_merge
from .ramsey import (
    BudgetExceeded,
    Coloring,
    enumerate_fink_star,
    gr_search,
    lelek_number_search,
    lelek_witness,
    size_determined_find,
    star_tuples,
)

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_BRACKET = 2
EXIT_USAGE = 64

DEFAULT_BUDGET = int(os.environ.get("FAN_FRAISSE_BUDGET", 20_000_000))


def _emit(obj) -> None:
    print(json.dumps(obj, sort_keys=True))


def _branches(text: str) -> list[int]:
    if not text or text == "-":
        return []
    return [int(x) for x in text.split(",")]


def _ints(text: str) -> list[int]:
    return [int(x) for x in text.split(",")] if text else []


def _load_json(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)


def _load_chain(path: str) -> ChainedFan:
    return ChainedFan.from_json(_load_json(path))


def _load_epi(path: str, mode_override: str | None = None) -> FanEpi:
    obj = _load_json(path)
    src = Fan.from_json(obj["source"])
    tgt = Fan.from_json(obj["target"])
    mode = mode_override or obj.get("mode", DEFAULT_MODE)
    return FanEpi(src, tgt, tuple(obj["map"]), mode)


def _load_chain_epi(path: str, mode_override: str | None = None) -> ChainEpi:
    obj = _load_json(path)
    src = ChainedFan.from_json(obj["source"])
    tgt = ChainedFan.from_json(obj["target"])
    mode = mode_override or obj.get("mode", DEFAULT_MODE)
    epi = FanEpi(src.fan, tgt.fan, tuple(obj["map"]), mode)
    return ChainEpi(epi, src, tgt)


def _write_cert(cert: Certificate, out: str | None) -> None:
    if out:
        cert.dump(out)


# -- subcommand handlers ----------------------------------------------------


def cmd_fans_enumerate(args) -> int:
    for fan in all_fans(args.max_vertices):
        _emit({"branches": list(fan.branch_lengths),
               "vertices": fan.vertex_count,
               "height": fan.height, "width": fan.width})
    return EXIT_OK


def cmd_fans_epis(args) -> int:
    source = fan_build(_branches(args.source))
    target = fan_build(_branches(args.target))
    epis = enumerate_epimorphisms(source, target, args.mode or DEFAULT_MODE)
    for e in epis:
        _emit(e.to_json())
    _emit({"count": len(epis)})
    return EXIT_OK if epis else EXIT_NEGATIVE


def cmd_chains_count(args) -> int:
    fan = fan_build(_branches(args.branches))
    count = chain_count(fan)
    _emit({"count": count})
    cert = Certificate("chain-count", {"branches": list(fan.branch_lengths)},
                       {"count": count}, True, seed=args.seed)
    _write_cert(cert, args.out)
    return EXIT_OK


def cmd_chains_image(args) -> int:
    chain = _load_chain(args.chain)
    epi = _load_epi(args.map, args.mode)
    img = chain_image(epi, chain)
    _emit({"sets": [sorted(s) for s in img.sets], "valid": img.valid,
           "order": list(img.chained.order) if img.chained else None})
    return EXIT_OK if img.valid else EXIT_NEGATIVE


def cmd_duality_verify(args) -> int:
    source = fan_build(_branches(args.source))
    target = fan_build(_branches(args.target))
    mapping = tuple(_ints(args.map))
    source_chain = ChainedFan(source, tuple(_ints(args.source_order))) \
        if args.source_order else None
    target_chain = ChainedFan(target, tuple(_ints(args.target_order))) \
        if args.target_order else None
    report = verify_duality(mapping, source, target, source_chain, target_chain)
    out = report.to_json()
    out["applicable"] = report.applicable
    _emit(out)
    return EXIT_OK if report.passed else EXIT_NEGATIVE


def cmd_amalgamate(args) -> int:
    f = _load_chain_epi(args.f, args.mode)
    g = _load_chain_epi(args.g, args.mode)
    out = amalgamate_chained(f, g)
    result = {
        "amalgam": out.amalgam.to_json(),
        "k_map": list(out.left.mapping),
        "l_map": list(out.right.mapping),
        "commutes": out.verify_square(f, g),
    }
    _emit(result)
    cert = Certificate(
        "amalgam",
        {"widths": [f.source.width, g.source.width]},
        {
            "f_source": f.source_chain.to_json(),
            "g_source": g.source_chain.to_json(),
            "target": f.target_chain.to_json(),
            "amalgam": out.amalgam.to_json(),
            "f_map": list(f.mapping), "g_map": list(g.mapping),
            "k_map": list(out.left.mapping), "l_map": list(out.right.mapping),
            "mode": f.epi.mode,
        },
        result["commutes"],
        seed=args.seed,
    )
    _write_cert(cert, args.out)
    return EXIT_OK if result["commutes"] else EXIT_NEGATIVE


def cmd_coinitial(args) -> int:
    chain = _load_chain(args.chain) if args.chain else ChainedFan(
        fan_build(_branches(args.branches)), tuple(_ints(args.order)))
    cover, epi = coinitial_cover(chain)
    _emit({"cover": cover.to_json(), "map": list(epi.mapping)})
    return EXIT_OK


def cmd_expansion(args) -> int:
    chain = _load_chain(args.chain) if args.chain else ChainedFan(
        fan_build(_branches(args.branches)), tuple(_ints(args.order)))
    witness = expansion_witness(chain)
    out = {"witness": witness.to_json()}
    if args.expanded_order:
        cover, _ = coinitial_cover(chain)
        expanded = ChainedFan(witness, tuple(_ints(args.expanded_order)))
        psi = expansion_epi(expanded, cover)
        out["cover"] = cover.to_json()
        out["map"] = list(psi.mapping)
    _emit(out)
    return EXIT_OK


def cmd_generic_build(args) -> int:
    catalog = chained_catalog(args.catalog_max_vertices)
    seq = InverseSequence()
    pending = None
    for _ in range(args.steps):
        step = generic_extend(seq, catalog, budget=args.budget)
        if step.pending is not None:
            pending = step.pending
            break
        if step.discharged is None:
            break
        seq = step.sequence
    _emit({"depth": seq.depth,
           "levels": [list(c.fan.branch_lengths) for c in seq.levels],
           "tasks": len(seq.task_log),
           "pending": pending})
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(seq.to_json(), fh, indent=2, sort_keys=True)
            fh.write("\n")
    return EXIT_BRACKET if pending else EXIT_OK


def cmd_generic_check(args) -> int:
    catalog = chained_catalog(args.catalog_max_vertices)
    seq = InverseSequence()
    for _ in range(args.steps):
        step = generic_extend(seq, catalog, budget=args.budget)
        if step.discharged is None or step.pending is not None:
            break
        seq = step.sequence
    report = check_dominating(seq, catalog, args.up_to_level)
    _emit(report.to_json())
    return EXIT_OK if report.all_satisfied else EXIT_NEGATIVE


def cmd_fin_tetris(args) -> int:
    vec = FinVec(tuple(_ints(args.vector)))
    word = _ints(args.word) if args.word else [args.i]
    out = tetris_apply(word, vec)
    _emit({"values": list(out.values)})
    return EXIT_OK


def cmd_fin_semigroup(args) -> int:
    base = BlockSeq(tuple(FinVec(tuple(_ints(v))) for v in args.base.split(";")),
                    args.level)
    members = generated_semigroup(base, args.k, args.d, cap=args.budget)
    for seq in members:
        _emit({"entries": [list(v.values) for v in seq.entries]})
    _emit({"count": len(members)})
    return EXIT_OK


def cmd_ramsey_gr(args) -> int:
    outcome = gr_search(args.k, args.l, args.r, args.n_max,
                        node_budget=args.budget)
    _emit(outcome.to_json())
    cert = Certificate("gr", outcome.params,
                       {"exact": outcome.exact,
                        "lower_bound": outcome.lower_bound,
                        "counterexamples": {str(n): c for n, c in
                                            outcome.counterexamples.items()}},
                       True,
                       {"node_budget": args.budget,
                        "note": outcome.budget_note},
                       seed=args.seed)
    _write_cert(cert, args.out)
    if outcome.exact is not None:
        return EXIT_OK
    return EXIT_BRACKET


def cmd_ramsey_fin(args) -> int:
    outcome = lelek_number_search(args.d, args.m, args.k, args.l, args.r,
                                  args.n_max, node_budget=args.budget)
    _emit(outcome.to_json())
    cert = Certificate("lelek-search", outcome.params,
                       {"exact": outcome.exact,
                        "lower_bound": outcome.lower_bound,
                        "counterexamples": {str(n): c for n, c in
                                            outcome.counterexamples.items()}},
                       True,
                       {"node_budget": args.budget,
                        "note": outcome.budget_note},
                       seed=args.seed)
    _write_cert(cert, args.out)
    return EXIT_OK if outcome.exact is not None else EXIT_BRACKET


def cmd_ramsey_sized(args) -> int:
    caps = _ints(args.caps)
    sizes = _ints(args.sizes)
    domain = tuple(star_tuples(args.ground, caps, args.d))
    if args.coloring:
        colors = tuple(_load_json(args.coloring)["colors"])
    else:
        rng = random.Random(args.seed)
        colors = tuple(rng.randint(1, args.r) for _ in domain)
    coloring = Coloring(domain, colors, args.r)
    result = size_determined_find(coloring, args.ground, sizes)
    _emit(result.to_json())
    if result.found:
        cert = Certificate("sized",
                           {"ground": args.ground, "size_caps": caps,
                            "d": args.d, "r": args.r},
                           {"coloring": list(colors),
                            "base_sets": [sorted(b) for b in result.base_sets]},
                           True, seed=args.seed)
        _write_cert(cert, args.out)
        return EXIT_OK
    return EXIT_NEGATIVE


def cmd_ramsey_fan(args) -> int:
    small = cc_fan(args.small_width, args.small_height)
    medium = cc_fan(args.medium_width, args.medium_height)
    if args.paper_exact:
        record = build_large(small, medium, args.r, paper_exact=True,
                             n_max=args.n_max)
    else:
        if args.n is None or args.N is None:
            print("ramsey fan: need --n and --N or --paper-exact",
                  file=sys.stderr)
            return EXIT_USAGE
        record = build_large(small, medium, args.r, args.n, args.N)
    instance = RamseyInstance(small, medium, record.chained, args.r)
    homs = hom_set(instance.large, instance.small)
    dims = instance.dims

    if args.exhaustive:
        verdict = verify_ramsey_instance(instance, budget=args.budget,
                                         sample=args.sample, seed=args.seed)
        _emit({"build": record.to_json(), "homs": len(homs),
               "verdict": verdict.to_json()})
        if verdict.refutation is not None:
            cert = Certificate("fan-ramsey", dims,
                               {"hom_maps": [list(f.mapping) for f in homs],
                                "coloring": list(verdict.refutation),
                                "g": None},
                               True, {"budget": args.budget}, args.seed)
            _write_cert(cert, args.out)
            return EXIT_NEGATIVE
        return EXIT_OK if verdict.verdict == "proven" else EXIT_BRACKET

    if args.coloring:
        colors = tuple(_load_json(args.coloring)["colors"])
    else:
        rng = random.Random(args.seed)
        colors = tuple(rng.randint(1, args.r) for _ in homs)
    coloring = Coloring(tuple(f.mapping for f in homs), colors, args.r)
    result = ramsey_witness(instance, coloring, homs)
    _emit({"build": record.to_json(), "homs": len(homs),
           "result": result.to_json()})
    if result.ok:
        cert = Certificate("fan-ramsey", dims,
                           {"hom_maps": [list(f.mapping) for f in homs],
                            "coloring": list(colors),
                            "g": list(result.epi.mapping)},
                           True, {"budget": args.budget}, args.seed)
        _write_cert(cert, args.out)
        return EXIT_OK
    return EXIT_NEGATIVE


def cmd_nakr(args) -> int:
    phi = _load_epi(args.phi, args.mode)
    chain_c = _load_chain(args.chain_c)
    chain_d = _load_chain(args.chain_d)
    try:
        result = nakr_merge(phi, chain_c, chain_d)
    except NakrPreconditionError as exc:
        _emit({"error": str(exc)})
        return EXIT_NEGATIVE
    _emit(result.to_json())
    cert = Certificate("nakr", {"target": phi.target.to_json()},
                       {"target": phi.target.to_json(),
                        "phi": list(phi.mapping),
                        "psi": list(result.psi.mapping),
                        "chain_c": chain_c.to_json(),
                        "chain_d": chain_d.to_json(),
                        "mode": phi.mode},
                       True, seed=args.seed)
    _write_cert(cert, args.out)
    return EXIT_OK


def cmd_cert_verify(args) -> int:
    cert = Certificate.load(args.file)
    ok = verify_certificate(cert)
    _emit({"kind": cert.kind, "verified": ok})
    return EXIT_OK if ok else EXIT_NEGATIVE


def cmd_report(args) -> int:
    from .report import render_report

    paths = render_report(args.kind, args.outdir, branches=_branches(args.branches),
                          order=_ints(args.order) if args.order else None,
                          max_vertices=args.max_vertices)
    for p in paths:
        _emit({"artifact": p})
    return EXIT_OK


# -- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fanfraisse",
        description="finite-fan combinatorics: enumeration, amalgamation, "
                    "duality, partition Ramsey searches, chain merging",
    )
    parser.set_defaults(handler=None)
    sub = parser.add_subparsers(dest="command")

    def common(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
        p.add_argument("--mode", choices=["directed", "symmetrized"],
                       default=None)
        p.add_argument("--out", default=None, help="certificate output path")

    fans = sub.add_parser("fans", help="fan enumeration and epimorphisms")
    fans_sub = fans.add_subparsers(dest="sub")
    p = fans_sub.add_parser("enumerate")
    p.add_argument("--max-vertices", type=int, required=True)
    common(p)
    p.set_defaults(handler=cmd_fans_enumerate)
    p = fans_sub.add_parser("epis")
    p.add_argument("--source", required=True)
    p.add_argument("--target", required=True)
    common(p)
    p.set_defaults(handler=cmd_fans_epis)

    chains = sub.add_parser("chains", help="maximal chains")
    chains_sub = chains.add_subparsers(dest="sub")
    p = chains_sub.add_parser("count")
    p.add_argument("--branches", required=True)
    common(p)
    p.set_defaults(handler=cmd_chains_count)
    p = chains_sub.add_parser("image")
    p.add_argument("--chain", required=True, help="chained-fan JSON file")
    p.add_argument("--map", required=True, help="epimorphism JSON file")
    common(p)
    p.set_defaults(handler=cmd_chains_image)

    duality = sub.add_parser("duality", help="finite Stone duality checks")
    duality_sub = duality.add_subparsers(dest="sub")
    p = duality_sub.add_parser("verify")
    p.add_argument("--source", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--map", required=True, help="comma-separated vertex map")
    p.add_argument("--source-order", default=None)
    p.add_argument("--target-order", default=None)
    common(p)
    p.set_defaults(handler=cmd_duality_verify)

    p = sub.add_parser("amalgamate", help="amalgamate two chain-epimorphisms")
    p.add_argument("--f", required=True, help="chain-epi JSON file")
    p.add_argument("--g", required=True, help="chain-epi JSON file")
    common(p)
    p.set_defaults(handler=cmd_amalgamate)

    p = sub.add_parser("coinitial", help="canonical equal-height cover")
    p.add_argument("--chain", default=None, help="chained-fan JSON file")
    p.add_argument("--branches", default=None)
    p.add_argument("--order", default=None)
    common(p)
    p.set_defaults(handler=cmd_coinitial)

    p = sub.add_parser("expansion", help="expansion witness and window map")
    p.add_argument("--chain", default=None, help="chained-fan JSON file")
    p.add_argument("--branches", default=None)
    p.add_argument("--order", default=None)
    p.add_argument("--expanded-order", default=None)
    common(p)
    p.set_defaults(handler=cmd_expansion)

    generic = sub.add_parser("generic", help="finitary generic sequences")
    generic_sub = generic.add_subparsers(dest="sub")
    p = generic_sub.add_parser("build")
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--catalog-max-vertices", type=int, required=True)
    common(p)
    p.set_defaults(handler=cmd_generic_build)
    p = generic_sub.add_parser("check")
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--catalog-max-vertices", type=int, required=True)
    p.add_argument("--up-to-level", type=int, default=None)
    common(p)
    p.set_defaults(handler=cmd_generic_check)

    fin = sub.add_parser("fin", help="bounded-value vectors and semigroups")
    fin_sub = fin.add_subparsers(dest="sub")
    p = fin_sub.add_parser("tetris")
    p.add_argument("--vector", required=True)
    p.add_argument("--word", default=None, help="comma-separated thresholds")
    p.add_argument("--i", type=int, default=1)
    common(p)
    p.set_defaults(handler=cmd_fin_tetris)
    p = fin_sub.add_parser("semigroup")
    p.add_argument("--base", required=True,
                   help="semicolon-separated comma vectors")
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--d", type=int, default=1)
    common(p)
    p.set_defaults(handler=cmd_fin_semigroup)

    ramsey = sub.add_parser("ramsey", help="partition and fan Ramsey searches")
    ramsey_sub = ramsey.add_subparsers(dest="sub")
    p = ramsey_sub.add_parser("gr")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--l", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--n-max", type=int, required=True)
    common(p)
    p.set_defaults(handler=cmd_ramsey_gr)
    p = ramsey_sub.add_parser("fin")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--l", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--n-max", type=int, default=6)
    p.add_argument("--exhaustive", action="store_true")
    common(p)
    p.set_defaults(handler=cmd_ramsey_fin)
    p = ramsey_sub.add_parser("sized")
    p.add_argument("--ground", type=int, required=True)
    p.add_argument("--caps", required=True)
    p.add_argument("--sizes", required=True)
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--r", type=int, default=2)
    p.add_argument("--coloring", default=None)
    common(p)
    p.set_defaults(handler=cmd_ramsey_sized)
    p = ramsey_sub.add_parser("fan")
    p.add_argument("--small-width", type=int, required=True)
    p.add_argument("--small-height", type=int, required=True)
    p.add_argument("--medium-width", type=int, required=True)
    p.add_argument("--medium-height", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--N", type=int, default=None)
    p.add_argument("--paper-exact", action="store_true")
    p.add_argument("--n-max", type=int, default=6)
    p.add_argument("--coloring", default=None)
    p.add_argument("--exhaustive", action="store_true")
    p.add_argument("--sample", type=int, default=10_000)
    common(p)
    p.set_defaults(handler=cmd_ramsey_fan)

    p = sub.add_parser("nakr", help="chain-merging epimorphism")
    p.add_argument("--phi", required=True, help="epimorphism JSON file")
    p.add_argument("--chain-c", required=True)
    p.add_argument("--chain-d", required=True)
    common(p)
    p.set_defaults(handler=cmd_nakr)

    cert = sub.add_parser("cert", help="certificate verification")
    cert_sub = cert.add_subparsers(dest="sub")
    p = cert_sub.add_parser("verify")
    p.add_argument("file")
    common(p)
    p.set_defaults(handler=cmd_cert_verify)

    p = sub.add_parser("report", help="render figures and tables")
    p.add_argument("--kind", choices=["fan", "duality"], required=True)
    p.add_argument("--outdir", required=True)
    p.add_argument("--branches", default="")
    p.add_argument("--order", default=None)
    p.add_argument("--max-vertices", type=int, default=4)
    common(p)
    p.set_defaults(handler=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.handler is None:
        parser.print_help()
        return EXIT_USAGE
    try:
        return args.handler(args)
    except BudgetExceeded as exc:
        _emit({"error": str(exc), "bracket": True})
        return EXIT_BRACKET
    except (ValueError, FileNotFoundError, KeyError) as exc:
        print(f"fanfraisse: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

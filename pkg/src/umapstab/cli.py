"""Command line front end: ``umapstab cluster | verify | verify-stability``."""

from __future__ import annotations

import argparse
import random
import sys
from pathlib import Path

from umapstab._numeric import serialize
from umapstab.epmetric import global_components
from umapstab.errors import PreconditionError, ResourceError, UmapStabError
from umapstab.generators import random_system
from umapstab.io import (
    read_distance_csv,
    read_inclusion_csv,
    read_neighborhood_json,
    read_points_csv,
    write_json_atomic,
)
from umapstab.neighborhood import SCHEMES, full_system, knn, umap_metric, weights
from umapstab.rips import betti_gf2, excision_check, merge_tree, wedge_complex
from umapstab.stability import umap_stability_certificates

REMARK5_MAX_POINTS = 6

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_PRECONDITION = 0, 1, 2, 3


def _add_config(p: argparse.ArgumentParser, prefix=""):
    p.add_argument("--format", dest=f"{prefix}format", default="points-csv",
                   choices=("points-csv", "distance-csv", "neighborhood-json"))
    p.add_argument("--metric", dest=f"{prefix}metric", default="euclidean", choices=("euclidean", "manhattan"))
    p.add_argument("--k", dest=f"{prefix}k", type=int, default=3)
    p.add_argument("--scheme", dest=f"{prefix}scheme", default="ambient", choices=SCHEMES)
    p.add_argument("--ambient", dest=f"{prefix}ambient", default=None,
                   help="distance CSV supplying weights for an unweighted neighbourhood file")


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--floor", type=float, default=1e-6)
    p.add_argument("--arith", default="float", choices=("float", "rational"))
    p.add_argument("--cap", type=int, default=2)
    p.add_argument("--out", default="out")


def _check_config(args):
    if args.floor <= 0:
        raise UmapStabError("--floor must be positive")
    if args.cap < 1:
        raise UmapStabError("--cap must be at least 1")


def load_system(path, fmt, metric, k, scheme, ambient, floor, exact):
    """Read an input file and produce a weighted neighbourhood system."""
    if fmt == "neighborhood-json":
        ns = read_neighborhood_json(path, exact)
        if ns.has_weights:
            return ns
        if ambient is None:
            raise UmapStabError(f"{path} has no weights; pass --ambient with a distance CSV")
        return weights(ns, read_distance_csv(ambient, exact), scheme, floor)
    if fmt == "distance-csv":
        amb = read_distance_csv(path, exact)
    else:
        amb = read_points_csv(path, metric, exact)
    if k < 0:
        raise UmapStabError("--k must be nonnegative")
    k_eff = min(k, len(amb) - 1)
    if k_eff != k:
        print(f"note: k={k} reduced to {k_eff} for {len(amb)} points", file=sys.stderr)
    return weights(knn(amb, k_eff), amb, scheme, floor)


def cmd_cluster(args) -> int:
    _check_config(args)
    exact = args.arith == "rational"
    ns = load_system(args.input, args.format, args.metric, args.k, args.scheme, args.ambient, args.floor, exact)
    D = umap_metric(ns)
    tree = merge_tree(D)
    out = Path(args.out)
    write_json_atomic(
        out / "dendrogram.json",
        {
            "merges": [{"s": serialize(e.s, exact), "absorbed": e.absorbed, "into": e.into} for e in tree.merges],
            "roots": list(tree.roots),
        },
    )
    write_json_atomic(
        out / "partitions.json",
        {
            "partitions": [
                {"s": serialize(s, exact), "blocks": [list(b) for b in part]}
                for s, part in zip(tree.critical_values, tree.partitions)
            ]
        },
    )
    n_comp = len(global_components(D).blocks)
    print(f"components at s=inf: {n_comp}")
    return EXIT_OK


def _remark5(n_points):
    if n_points > REMARK5_MAX_POINTS:
        raise ResourceError(f"remark5 check is limited to {REMARK5_MAX_POINTS} points, got {n_points}")
    if n_points < 2:
        raise UmapStabError("remark5 check needs at least 2 points")
    ns = full_system([f"p{i}" for i in range(n_points)])
    rep = betti_gf2(wedge_complex(ns, float("inf"), n_points - 1))
    m = n_points - 1
    expected = [1, m * m] + [0] * (n_points - 2)
    ok = rep.euler_characteristic == 1 - m * m and list(rep.betti) == expected
    return {
        "points": n_points,
        "chi": rep.euler_characteristic,
        "betti": list(rep.betti),
        "expected_chi": 1 - m * m,
        "expected_betti": expected,
        "verdict": "PASS" if ok else "FAIL",
    }


def _excision(args, exact):
    if args.input:
        systems = [load_system(args.input, args.format, args.metric, args.k, args.scheme, args.ambient,
                               args.floor, exact)]
    else:
        rng = random.Random(args.seed)
        systems = [random_system(rng, exact=exact, floor=args.floor) for _ in range(args.instances)]
    failures = []
    for n, ns in enumerate(systems):
        rep = excision_check(ns)
        if not rep:
            failures.append({"instance": n, "scales": [serialize(s, exact) for s, _, _ in rep.diffs]})
    return {
        "instances": len(systems),
        "failures": failures,
        "verdict": "PASS" if not failures else "FAIL",
    }


def cmd_verify(args) -> int:
    _check_config(args)
    exact = args.arith == "rational"
    report = {}
    if args.which in ("excision", "all"):
        report["excision"] = _excision(args, exact)
    if args.which in ("remark5", "all"):
        n = args.points
        if n is None:
            n = len(load_system(args.input, args.format, args.metric, args.k, args.scheme, args.ambient,
                                args.floor, exact)) if args.input else 3
        report["remark5"] = _remark5(n)
    write_json_atomic(Path(args.out) / "verify.json", report)
    ok = all(r["verdict"] == "PASS" for r in report.values())
    for name, r in sorted(report.items()):
        print(f"{name}: {r['verdict']}")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_verify_stability(args) -> int:
    _check_config(args)
    exact = args.arith == "rational"
    nsX = load_system(args.x_input, args.format, args.metric, args.k, args.scheme, args.ambient, args.floor, exact)
    k_y = args.k if args.k_y is None else args.k_y
    nsY = load_system(args.y_input, args.format, args.metric, k_y, args.scheme, args.ambient, args.floor, exact)
    mapping = read_inclusion_csv(args.inclusion)
    certs = umap_stability_certificates(nsX, nsY, mapping)
    out = Path(args.out)
    ok = True
    for rep, cert in certs.items():
        write_json_atomic(out / f"certificate-{rep}.json", cert.to_dict())
        ok = ok and cert.verdict
        print(f"component {rep}: m={serialize(cert.m, exact)} r={serialize(cert.r, exact)} "
              f"{'PASS' if cert.verdict else 'FAIL'}")
    return EXIT_OK if ok else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="umapstab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cluster", help="merge tree and partitions of the glued neighbourhood metric")
    p.add_argument("input")
    _add_config(p)
    _add_common(p)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("verify", help="run the excision and/or wedge-of-circles checks")
    p.add_argument("input", nargs="?")
    p.add_argument("--which", default="all", choices=("excision", "remark5", "all"))
    p.add_argument("--points", type=int, default=None, help="point count for the remark5 family")
    p.add_argument("--instances", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    _add_config(p)
    _add_common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("verify-stability", help="interleaving certificates for an inclusion X -> Y")
    p.add_argument("x_input")
    p.add_argument("y_input")
    p.add_argument("inclusion", help="two-column CSV: x identifier, y identifier")
    p.add_argument("--k-y", type=int, default=None, help="k for the Y system (defaults to --k)")
    _add_config(p)
    _add_common(p)
    p.set_defaults(func=cmd_verify_stability)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except PreconditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        for v in exc.violations:
            print(f"  violation: {v}", file=sys.stderr)
        return EXIT_PRECONDITION
    except UmapStabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

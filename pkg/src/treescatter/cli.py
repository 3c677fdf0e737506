"""Command-line pipeline: tree generation, forward synthesis, fitting,
inversion, round-trip checks and Jost-zero scans.

All JSON output is canonically serialised (sorted keys, 17-significant-digit
floats) so identical inputs produce byte-identical files.  Failure stages map
to distinct exit codes:

    0 success                4 no tree within p-max
    2 bad parameters         5 period not detected
    3 not a shape fraction   6 fit failed
                             7 zero-scan failure
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from typing import Optional

from . import characteristic, reconstruct, sfit, tree_core
from .polyalg import RatFunc

EXIT_BAD_PARAMS = 2
EXIT_NOT_SHAPE_FRACTION = 3
EXIT_NO_TREE = 4
EXIT_NO_PERIOD = 5
EXIT_FIT_FAILED = 6
EXIT_ZERO_SCAN = 7


def _canon(obj) -> str:
    def default(o):
        raise TypeError(f"not serialisable: {o!r}")

    def fmt(o):
        if isinstance(o, float):
            return float(f"{o:.17g}")
        if isinstance(o, dict):
            return {k: fmt(v) for k, v in o.items()}
        if isinstance(o, (list, tuple)):
            return [fmt(v) for v in o]
        return o

    return json.dumps(fmt(obj), sort_keys=True, default=default) + "\n"


def _write(path: Optional[str], text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path) as fh:
        return fh.read()


def _load_tree(path: str) -> tree_core.RootedTree:
    return tree_core.RootedTree.from_json(json.loads(_read(path)))


def _cmd_gen(args) -> int:
    if args.kind == "snowflake":
        if not args.degrees:
            print("snowflake needs --degrees d1,d2,...", file=sys.stderr)
            return EXIT_BAD_PARAMS
        degs = [int(v) for v in args.degrees.split(",")]
        tree = tree_core.snowflake(len(degs), degs)
    elif args.kind == "path":
        tree = tree_core.path_tree(args.p)
    elif args.kind == "random":
        tree = tree_core.random_tree(args.p, args.seed)
    else:
        print(f"unknown kind {args.kind}", file=sys.stderr)
        return EXIT_BAD_PARAMS
    _write(args.out, _canon(tree.to_json()))
    if args.dot:
        _write(args.dot, tree.to_dot() + "\n")
    return 0


def _cmd_forward(args) -> int:
    tree = _load_tree(args.tree)
    d = characteristic.jost_data_of_tree(tree, Fraction(args.l))
    frac = characteristic.shape_fraction(tree)
    payload = d.to_json()
    payload["fraction"] = frac.to_json()
    payload["degrees"] = list(tree.degrees())
    _write(args.out, _canon(payload))
    return 0


def _cmd_sfunc(args) -> int:
    d = characteristic.JostData.from_json(json.loads(_read(args.jost)))
    try:
        lo, hi, count = args.grid.split(":")
        lo, hi, count = float(lo), float(hi), int(count)
    except ValueError:
        print("grid must be start:stop:count", file=sys.stderr)
        return EXIT_BAD_PARAMS
    samples = sfit.synthesize_samples(d, lo, hi, count, noise=args.noise, seed=args.seed)
    _write(args.out, samples.to_csv())
    return 0


def _cmd_fit(args) -> int:
    samples = sfit.SSampleSet.from_csv(_read(args.samples), noise_level=args.noise)
    try:
        report = sfit.pipeline_invert(samples, p_max=args.p_max)
    except sfit.PeriodNotDetectedError as exc:
        print(f"period not detected: {exc}", file=sys.stderr)
        return EXIT_NO_PERIOD
    except sfit.FitFailedError as exc:
        print(f"fit failed: {exc}", file=sys.stderr)
        return EXIT_FIT_FAILED
    _write(args.out, _canon(report.to_json()))
    if not report.result.matches:
        return EXIT_NO_TREE
    return 0


def _cmd_invert(args) -> int:
    frac = RatFunc.from_json(json.loads(_read(args.fraction)))
    result = reconstruct.invert(frac, p_max=args.p_max)
    _write(args.out, _canon(result.to_json()))
    if args.dot and result.matches:
        _write(args.dot, result.matches[0].to_dot() + "\n")
    if not result.matches:
        diag = result.diagnostic or ""
        print(f"no tree recovered: {diag}", file=sys.stderr)
        if "shape fraction" in diag or "leading-coefficient" in diag or "degree" in diag:
            return EXIT_NOT_SHAPE_FRACTION
        return EXIT_NO_TREE
    return 0


def _roundtrip_one(args_tuple) -> tuple[str, bool]:
    parent, p_max = args_tuple
    tree = tree_core.RootedTree(parent)
    frac = characteristic.shape_fraction(tree)
    result = reconstruct.invert(frac, p_max=p_max)
    code = tree_core.canonical_code(tree)
    return code, code in result.codes()


def _cmd_roundtrip(args) -> int:
    jobs = max(1, args.jobs)
    work = []
    for p in range(2, args.p_max + 1):
        for tree in tree_core.enumerate_rooted_trees(p):
            work.append((tree.parent, args.p_max + 1))
    if jobs == 1:
        results = [_roundtrip_one(w) for w in work]
    else:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_roundtrip_one, work, chunksize=16))
    results.sort()
    failed = [code for code, ok in results if not ok]
    payload = {
        "checked": len(results),
        "failed": failed,
        "p_max": args.p_max,
    }
    _write(args.out, _canon(payload))
    print(f"round-trip: {len(results) - len(failed)}/{len(results)} passed")
    return 0 if not failed else 1


def _cmd_enumerate(args) -> int:
    trees = list(tree_core.enumerate_rooted_trees(args.p))
    payload = {"p": args.p, "count": len(trees), "trees": [t.to_json() for t in trees]}
    _write(args.out, _canon(payload))
    return 0


def _cmd_zeros(args) -> int:
    from .scattering_numeric import zero_scan

    d = characteristic.JostData.from_json(json.loads(_read(args.jost)))
    try:
        re0, re1, im0, im1 = (float(v) for v in args.rect.split(":"))
    except ValueError:
        print("rect must be re_lo:re_hi:im_lo:im_hi", file=sys.stderr)
        return EXIT_BAD_PARAMS
    try:
        scan = zero_scan(d, (re0, re1, im0, im1))
    except RuntimeError as exc:
        print(f"zero scan failed: {exc}", file=sys.stderr)
        return EXIT_ZERO_SCAN
    payload = {"zeros": scan.to_json(), "perturbed": scan.perturbed}
    _write(args.out, _canon(payload))
    return 0


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="treescatter",
        description="equilateral quantum-tree scattering: synthesis and shape recovery",
    )
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a tree (snowflake / path / random)")
    p.add_argument("kind", choices=["snowflake", "path", "random"])
    p.add_argument("--degrees", help="snowflake interior degrees d1,d2,...")
    p.add_argument("--p", type=int, default=5, help="vertex count for path/random")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dot", help="also write a DOT file")
    p.add_argument("--out", default="-")
    p.set_defaults(fn=_cmd_gen)

    p = sub.add_parser("forward", help="tree -> psi, psi_hat, shape fraction")
    p.add_argument("--tree", required=True)
    p.add_argument("--l", default="1", help="edge length as a rational, e.g. 1/2")
    p.add_argument("--out", default="-")
    p.set_defaults(fn=_cmd_forward)

    p = sub.add_parser("sfunc", help="synthesise S-function samples on a k grid")
    p.add_argument("--jost", required=True, help="JostData JSON file")
    p.add_argument("--grid", required=True, help="start:stop:count in sqrt-lambda")
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="-")
    p.set_defaults(fn=_cmd_sfunc)

    p = sub.add_parser("fit", help="S samples -> edge length, fraction, shapes")
    p.add_argument("--samples", required=True, help="CSV of sqrt_lambda,re_S,im_S")
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--p-max", type=int, default=12)
    p.add_argument("--out", default="-")
    p.set_defaults(fn=_cmd_fit)

    p = sub.add_parser("invert", help="shape fraction JSON -> trees")
    p.add_argument("--fraction", required=True)
    p.add_argument("--p-max", type=int, default=12)
    p.add_argument("--dot", help="write DOT of the first match")
    p.add_argument("--out", default="-")
    p.set_defaults(fn=_cmd_invert)

    p = sub.add_parser("roundtrip", help="fraction round-trip over all trees up to p-max")
    p.add_argument("--p-max", type=int, default=7)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", default="-")
    p.set_defaults(fn=_cmd_roundtrip)

    p = sub.add_parser("enumerate", help="all rooted-isomorphism classes on p vertices")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--out", default="-")
    p.set_defaults(fn=_cmd_enumerate)

    p = sub.add_parser("zeros", help="Jost-function zero scan in a k rectangle")
    p.add_argument("--jost", required=True)
    p.add_argument("--rect", required=True, help="re_lo:re_hi:im_lo:im_hi")
    p.add_argument("--out", default="-")
    p.set_defaults(fn=_cmd_zeros)

    return top


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_PARAMS


if __name__ == "__main__":
    sys.exit(main())

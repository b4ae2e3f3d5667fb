"""Command-line front end.

``algext run SCENARIO --out DIR`` executes a scenario file. The other
subcommands build a one-task scenario from flags and run it the same way.
Exit codes: 0 on success, 1 when a task fails, 2 when input does not parse.
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import ParseError, TaskFailure
from .scenario import load_scenario, parse_scenario, run_scenario


def _split(text):
    return [s.strip() for s in text.split(",") if s.strip()]


def _space_args(p):
    p.add_argument("--scenario", help="take space, elements and polynomials from this file")
    p.add_argument("--space", choices=["interval", "circle", "plane-grid"], default="interval")
    p.add_argument("--n", type=int, default=64, help="resolution (grid side for plane-grid)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="artifact directory (default: print to stdout)")


def _poly_args(p):
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--poly", help="comma-separated coefficients a_0..a_{n-1}, or a polynomial name")
    g.add_argument("--roots", help="comma-separated root expressions")
    p.add_argument("--t", type=float, help="norm parameter")


def build_parser():
    parser = argparse.ArgumentParser(prog="algext", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a scenario file")
    p.add_argument("scenario")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)

    p = sub.add_parser("extend", help="build an Arens-Hoffman, Cole or log extension")
    p.add_argument("kind", choices=["ah", "cole", "log"])
    _space_args(p)
    p.add_argument("--poly", action="append", help="coefficients (repeat for cole)")
    p.add_argument("--roots", action="append", help="roots (repeat for cole)")
    p.add_argument("--element", help="element to take the logarithm of (log)")
    p.add_argument("--t", type=float)
    p.add_argument("--f", help="element whose distance to the basis span is reported (cole)")
    p.add_argument("--basis", action="append", help="basis element (repeatable, default 1)")

    p = sub.add_parser("fibration", help="enumerate the fibration and its loop components")
    _space_args(p)
    _poly_args(p)

    p = sub.add_parser("t-operator", help="averaging operator: formula against fibre average")
    _space_args(p)
    _poly_args(p)
    p.add_argument("--coeffs", required=True, help="comma-separated b_0..b_{n-1}")

    p = sub.add_parser("approx-invert", help="perturb b_0 to an invertible element")
    _space_args(p)
    _poly_args(p)
    p.add_argument("--coeffs", required=True)
    p.add_argument("--epsilon", type=float, default=1e-3)
    p.add_argument("--strategy", choices=["direct", "chain"], default="direct")
    p.add_argument("--retries", type=int, default=32)

    p = sub.add_parser("log-descent", help="descend a logarithm from an extension")
    _space_args(p)
    _poly_args(p)
    p.add_argument("--f", required=True, help="the invertible base element")
    p.add_argument("--h", required=True, help="comma-separated coefficients of the extension log")

    p = sub.add_parser("winding", help="winding number of an element around each loop")
    _space_args(p)
    p.add_argument("--element", required=True)

    p = sub.add_parser("tower", help="finite log tower with coverage report")
    _space_args(p)
    p.add_argument("--rounds", type=int, default=1)
    p.add_argument("--samples", type=int, default=8)
    p.add_argument("--test", action="append", help="test-set element (repeatable)")

    p = sub.add_parser("region-5323", help="projection of a disk in the log fibration of id on the circle")
    p.add_argument("--t", type=float, default=6.283185307179586)
    p.add_argument("--arc", type=float, nargs=2, default=[-1.5707963267948966, 1.5707963267948966])
    p.add_argument("--center", type=float, nargs=2, default=[0.0, 6.283185307179586])
    p.add_argument("--radius", type=float, default=0.7853981633974483)
    p.add_argument("--out")

    p = sub.add_parser("report", help="norms and spectra of elements")
    _space_args(p)
    p.add_argument("--element", action="append", default=[])
    return parser


def _base_scenario(args):
    if getattr(args, "scenario", None):
        with open(args.scenario) as fh:
            data = json.load(fh)
        data.pop("tasks", None)
    else:
        n = getattr(args, "n", 64)
        kind = getattr(args, "space", "circle")
        space = {"kind": kind, "n": n} if kind != "plane-grid" else {"kind": kind, "nx": n, "ny": n}
        data = {"space": space}
    data["seed"] = getattr(args, "seed", None) or data.get("seed", 0)
    return data


def _poly_ref(data, args):
    if args.roots:
        return {"roots": _split(args.roots)}
    if args.poly in (data.get("polys") or {}):
        return args.poly
    return {"coeffs": _split(args.poly)}


def _task(args, data):
    cmd = args.command
    if cmd == "extend":
        task = {"op": "extend", "kind": args.kind}
        if args.kind == "log":
            task["element"] = args.element
        else:
            polys = [{"coeffs": _split(p)} for p in args.poly or []]
            polys += [{"roots": _split(r)} for r in args.roots or []]
            if args.kind == "ah":
                task["poly"] = polys[0]
            else:
                task["polys"] = polys
                if args.f is not None:
                    task["f"] = args.f
                    if args.basis:
                        task["basis"] = args.basis
        if args.t is not None:
            task["t"] = args.t
        return task
    if cmd == "winding":
        return {"op": "winding", "element": args.element}
    if cmd == "tower":
        task = {"op": "tower", "rounds": args.rounds, "samples": args.samples, "seed": data["seed"]}
        if args.test:
            task["test"] = args.test
        return task
    if cmd == "region-5323":
        return {"op": "region-5323", "t": args.t, "arc": args.arc, "center": args.center,
                "radius": args.radius}
    if cmd == "report":
        task = {"op": "report"}
        if args.element:
            task["elements"] = args.element
        return task
    task = {"op": cmd, "poly": _poly_ref(data, args)}
    if args.t is not None:
        task["t"] = args.t
    if cmd == "fibration":
        task.pop("t", None)
    elif cmd == "t-operator":
        task["coeffs"] = _split(args.coeffs)
    elif cmd == "approx-invert":
        task.update(coeffs=_split(args.coeffs), epsilon=args.epsilon, strategy=args.strategy,
                    retries=args.retries)
    elif cmd == "log-descent":
        task.update(f=args.f, h=_split(args.h))
    return task


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            sc = load_scenario(args.scenario)
            if args.seed is not None:
                sc.seed = args.seed
            out = args.out
        else:
            data = _base_scenario(args) if args.command != "region-5323" else {
                "space": {"kind": "interval", "n": 2}}
            data["tasks"] = [_task(args, data)]
            sc = parse_scenario(data)
            out = args.out
        manifest, files = run_scenario(sc, out)
        if out is None:
            for text in files.values():
                sys.stdout.write(text)
        else:
            for entry in manifest["tasks"]:
                print(f"{entry['artifact']}: {json.dumps(entry['summary'], sort_keys=True)}")
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 2
    except TaskFailure as exc:
        print(f"task failed: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Command line entry point: ``cayleylab analyze | verify | zoo``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .action import ActionError
from .analysis import SUITES, analyze, canonical_json, prepare, run_suite, write_analysis, _clean
from .config import Constants
from .groups import GroupSpec, GroupSpecError
from .partitions import InfeasibleError
from .zoo import emit, zoo_names, zoo_spec

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _specs(target: str) -> list[GroupSpec]:
    """A spec file, a directory of *.json specs, or ``zoo:NAME``."""
    if target.startswith("zoo:"):
        name = target[4:]
        if name not in zoo_names():
            raise UsageError(f"unknown zoo entry {name!r}")
        return [GroupSpec.from_dict(zoo_spec(name))]
    path = Path(target)
    if path.is_dir():
        files = sorted(path.glob("*.json"))
        if not files:
            raise UsageError(f"no *.json specs in {path}")
        return [GroupSpec.load(f) for f in files]
    if not path.exists():
        raise UsageError(f"no such file: {path}")
    return [GroupSpec.load(path)]


def _stem(spec: GroupSpec, index: int) -> str:
    return spec.name or f"group{index}"


def cmd_analyze(args) -> int:
    constants = Constants.load(args.constants)
    specs = _specs(args.spec)
    results = []
    # compute everything first so a failure leaves no partial output
    for spec in specs:
        results.append((spec, analyze(spec, k=args.k, delta=args.delta, samples=args.samples,
                                      seed=args.seed, constants=constants)))
    ok = True
    for i, (spec, res) in enumerate(results):
        stem = _stem(spec, i)
        if args.out:
            path = write_analysis(res, args.out, stem)
            print(f"{stem}: {'PASS' if res.passed else 'FAIL'} -> {path}")
        else:
            sys.stdout.write(canonical_json(res.report))
        ok &= res.passed
    return EXIT_OK if ok else EXIT_FAIL


def cmd_verify(args) -> int:
    constants = Constants.load(args.constants)
    suites = list(SUITES) if args.suite == "all" else [args.suite]
    summary = {}
    ok = True
    for i, spec in enumerate(_specs(args.spec)):
        ctx = prepare(spec, constants)
        entry = {}
        for name in suites:
            entry[name] = run_suite(name, ctx, args.seed, args.samples)
        failed = [c.to_dict() for c in ctx.checks if not c.passed]
        entry["checks"] = len(ctx.checks)
        entry["failed"] = failed
        entry["passed"] = not failed
        ok &= not failed
        summary[_stem(spec, i)] = entry
    summary = _clean({"suites": suites, "seed": args.seed, "groups": summary, "all_passed": ok})
    sys.stdout.write(canonical_json(summary))
    return EXIT_OK if ok else EXIT_FAIL


def cmd_zoo(args) -> int:
    if args.action == "list":
        for name in zoo_names():
            spec = zoo_spec(name)
            print(f"{name}\t{spec['kind']}\t{json.dumps(spec['params']) if spec['kind'] != 'explicit_table' else 'inline table'}")
        return EXIT_OK
    if not args.dir:
        raise UsageError("zoo emit needs a target directory")
    for path in emit(args.dir):
        print(path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cayleylab", description=__doc__)
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("spec", help="spec JSON, directory of specs, or zoo:NAME")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--samples", type=int, default=400, help="Monte Carlo partitions for padding")
        sp.add_argument("--constants", help="JSON file overriding theorem constants")

    a = sub.add_parser("analyze", help="full report for one or more groups")
    common(a)
    a.add_argument("--k", type=int, default=2, help="eigenvalue index for the test-function bound")
    a.add_argument("--delta", type=float, default=0.25, help="starting delta for the multiplicity certificate")
    a.add_argument("--out", help="output directory (default: report JSON on stdout)")
    a.set_defaults(func=cmd_analyze)

    v = sub.add_parser("verify", help="run invariant suites and print a JSON summary")
    v.add_argument("suite", choices=[*SUITES, "all"])
    common(v)
    v.set_defaults(func=cmd_verify)

    z = sub.add_parser("zoo", help="list or emit the canonical group zoo")
    z.add_argument("action", choices=["list", "emit"])
    z.add_argument("dir", nargs="?")
    z.set_defaults(func=cmd_zoo)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, GroupSpecError, InfeasibleError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (AssertionError, ActionError) as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())

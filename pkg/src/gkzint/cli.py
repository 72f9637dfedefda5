"""Command line interface: ``gkzint {pfaffian,intersect,check,selftest}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

from .errors import CheckFailure, GkzError, ResourceLimitError, ValidationError
from .problem import (FIXTURES, TASKS, ProblemSpec, compare_golden, load_golden, parse_order, require, run,
                      verify)

def _limit_memory(gb: float):
    if gb <= 0:
        return
    try:
        import resource

        limit = int(gb * (1 << 30))
        resource.setrlimit(resource.RLIMIT_AS, (limit, limit))
    except (ImportError, ValueError, OSError):
        logging.getLogger(__name__).warning("could not apply a memory cap of %s GB", gb)


def _load_json_arg(text: str | None) -> dict:
    if not text:
        return {}
    p = Path(text)
    try:
        raw = p.read_text(encoding="utf-8") if p.exists() else text
        out = json.loads(raw)
    except (OSError, json.JSONDecodeError) as e:
        raise ValidationError(f"--caps is neither a JSON file nor JSON text: {e}", stage="input") from None
    if not isinstance(out, dict):
        raise ValidationError("--caps must be a JSON object", stage="input")
    return out


def _problem(args) -> ProblemSpec:
    p = ProblemSpec.load(args.problem)
    if getattr(args, "order", None):
        p.order = parse_order(args.order)
    if getattr(args, "caps", None):
        p.caps.update(_load_json_arg(args.caps))
    if getattr(args, "tasks", None):
        tasks = tuple(t.strip() for t in args.tasks.split(",") if t.strip())
        bad = [t for t in tasks if t not in TASKS]
        if bad:
            raise ValidationError(f"unknown task(s) {bad}", stage="input")
        p.tasks = tasks
    return p


def _emit(text: str, output: str | None):
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _deadline(args):
    return time.monotonic() + args.timeout if args.timeout and args.timeout > 0 else None


def cmd_pfaffian(args) -> int:
    p = _problem(args)
    b = run(p, tasks=("pfaffian",), deadline=_deadline(args))
    _emit(b.dumps(with_timings=not args.no_timings), args.output)
    return 0


def cmd_intersect(args) -> int:
    p = _problem(args)
    tasks = p.tasks if args.tasks else ("pfaffian", "intersect", "check")
    b = run(p, tasks=tasks, deadline=_deadline(args))
    _emit(b.dumps(with_timings=not args.no_timings), args.output)
    if "checks" in b.data:
        require(b.data["checks"])
    return 0


def cmd_check(args) -> int:
    p = _problem(args)
    try:
        bundle = json.loads(Path(args.bundle).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise ValidationError(f"cannot read bundle {args.bundle}: {e}", stage="input") from None
    checks = verify(p, bundle, numeric=args.numeric)
    _emit(json.dumps({"checks": checks}, indent=2) + "\n", args.output)
    require(checks)
    return 0


def cmd_selftest(args) -> int:
    names = args.names or ["gauss_2f1"]
    ok = True
    for name in names:
        t0 = time.monotonic()
        p = ProblemSpec.load(FIXTURES / f"{name}.json")
        try:
            b = run(p, tasks=("pfaffian", "intersect", "check"), deadline=_deadline(args))
        except GkzError as e:
            print(f"FAIL {name}: {type(e).__name__}: {e}")
            ok = False
            continue
        failures = compare_golden(p, b.data, load_golden(name))
        failed_checks = [c["check"] for c in b.data.get("checks", []) if not c.get("passed")]
        status = "PASS" if not failures and not failed_checks else "FAIL"
        ok &= status == "PASS"
        print(f"{status} {name} ({time.monotonic() - t0:.1f}s)")
        for f in failures + [f"check {c} failed" for c in failed_checks]:
            print(f"  {f}")
    if not ok:
        raise CheckFailure("selftest failed", stage="selftest")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gkzint", description="Intersection matrices of GKZ systems")
    ap.add_argument("-v", "--verbose", action="store_true", help="log stage progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, problem=True):
        if problem:
            sp.add_argument("problem", help="problem file (JSON)")
        sp.add_argument("--order", help="term order: grevlex, grlex, lex, weighted:w1,...")
        sp.add_argument("--caps", help="ansatz / Gröbner caps as JSON text or a JSON file")
        sp.add_argument("--tasks", help=f"comma separated subset of {','.join(TASKS)}")
        sp.add_argument("--output", "-o", help="write JSON here instead of stdout")
        sp.add_argument("--threads", type=int, default=1, help="worker threads (stages run serially)")
        sp.add_argument("--timeout", type=float, default=1800.0, help="seconds before giving up (0: none)")
        sp.add_argument("--memory", type=float, default=8.0, help="address-space cap in GB (0: none)")
        sp.add_argument("--no-timings", action="store_true", help="omit the timings field")

    sp = sub.add_parser("pfaffian", help="connection matrices of the problem and its dual")
    common(sp)
    sp.set_defaults(func=cmd_pfaffian)
    sp = sub.add_parser("intersect", help="full pipeline: Pfaffian, rational solution, normalization")
    common(sp)
    sp.set_defaults(func=cmd_intersect)
    sp = sub.add_parser("check", help="verify a result bundle against a problem")
    common(sp)
    sp.add_argument("bundle", help="result bundle or intersection matrix (JSON)")
    sp.add_argument("--numeric", action="store_true", help="also run the series quadratic-relation check")
    sp.set_defaults(func=cmd_check)
    sp = sub.add_parser("selftest", help="run bundled fixtures against their golden files")
    common(sp, problem=False)
    sp.add_argument("names", nargs="*", help=f"fixtures (default gauss_2f1; also k3)")
    sp.set_defaults(func=cmd_selftest)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    _limit_memory(args.memory)
    try:
        return args.func(args)
    except GkzError as e:
        print(json.dumps(e.report(), default=str), file=sys.stderr)
        return e.exit_code
    except MemoryError:
        print(json.dumps({"error": "MemoryError", "message": f"memory cap of {args.memory} GB exceeded",
                          "stage": None, "counters": {}}), file=sys.stderr)
        return ResourceLimitError.exit_code
    except KeyboardInterrupt:
        return 130


if __name__ == "__main__":
    sys.exit(main())

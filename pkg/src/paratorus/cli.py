"""Command line front end.

Three subcommands: `run` executes one scenario file, `verify` runs a
suite of scenarios and checks declared assertions against the results,
`schema` prints the accepted scenario fields as JSON. Exit codes follow
the failure site: 0 on success, 2 for validation problems (bad TOML,
unknown or malformed fields, unreadable paths), 3 for computation
failures, and 1 when a verify assertion does not hold.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np
import tomli

from .errors import ParatorusError, ScenarioError
from .runner import RESULT_FILE, run_scenario
from .scenario import SCENARIO_KINDS, load_scenario, schema_description

_COMPUTE_ERRORS = (ParatorusError, ValueError, ArithmeticError,
                   np.linalg.LinAlgError)


def _parser():
    parser = argparse.ArgumentParser(
        prog="paratorus",
        description="Run and verify lattice and torus dynamics scenarios.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute one scenario file")
    run.add_argument("scenario", help="path to a scenario TOML file")
    _common_flags(run)
    run.set_defaults(func=cmd_run)

    verify = sub.add_parser(
        "verify", help="run a suite and check its assertions"
    )
    verify.add_argument("suite", help="path to a suite TOML file")
    _common_flags(verify)
    verify.set_defaults(func=cmd_verify)

    schema = sub.add_parser("schema", help="print the scenario schema")
    schema.add_argument(
        "kind", nargs="?", default=None,
        help="restrict to one scenario kind",
    )
    schema.set_defaults(func=cmd_schema)
    return parser


def _common_flags(parser):
    parser.add_argument(
        "--out", default=None,
        help="output directory (default: runs/<name>)",
    )
    parser.add_argument(
        "--threads", type=int, default=1,
        help="worker threads for the kinds that batch (default 1)",
    )
    parser.add_argument(
        "--seed", type=int, default=None,
        help="override the sampling seed of seeded kinds",
    )
    parser.add_argument(
        "--strict", action=argparse.BooleanOptionalAction, default=True,
        help="treat unknown scenario fields as errors (default on)",
    )


def _load(path, strict):
    try:
        return load_scenario(path, strict=strict)
    except OSError as exc:
        raise ScenarioError(str(path), f"cannot read scenario: {exc}")


def cmd_run(args):
    if args.threads < 1:
        print("error: --threads must be at least 1", file=sys.stderr)
        return 2
    try:
        scenario = _load(args.scenario, args.strict)
    except ScenarioError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 2
    out = Path(args.out) if args.out else Path("runs") / scenario.name
    try:
        record = run_scenario(
            scenario, out, threads=args.threads, seed=args.seed
        )
    except _COMPUTE_ERRORS as exc:
        print(f"computation failed: {exc}", file=sys.stderr)
        return 3
    print(f"{scenario.name} ({scenario.kind}) -> {out}")
    print(f"  wrote {', '.join(record.outputs)} and manifest.json")
    for note in record.warnings:
        print(f"  warning: {note}")
    return 0


# ---------------------------------------------------------------------------
# Suite verification.


def _fail(path, message):
    raise ScenarioError(path, message)


def _parse_expect(table, path):
    if not isinstance(table, dict):
        _fail(path, "expected a table")
    allowed = {"path", "equals", "value", "tolerance", "min", "max"}
    for key in table:
        if key not in allowed:
            _fail(f"{path}.{key}", "unknown assertion field")
    if "path" not in table or not isinstance(table["path"], str):
        _fail(f"{path}.path", "required string field")
    modes = [k for k in ("equals", "value", "min", "max") if k in table]
    if "equals" in modes and len(modes) > 1:
        _fail(path, "equals cannot be combined with numeric bounds")
    if "value" in modes and ("min" in modes or "max" in modes):
        _fail(path, "value cannot be combined with min or max")
    if not modes:
        _fail(path, "needs equals, value, min, or max")
    if "tolerance" in table and "value" not in table:
        _fail(f"{path}.tolerance", "only meaningful together with value")
    return table


def _load_suite(path):
    try:
        with open(path, "rb") as fh:
            raw = tomli.load(fh)
    except OSError as exc:
        _fail(str(path), f"cannot read suite: {exc}")
    except tomli.TOMLDecodeError as exc:
        _fail(str(path), f"not valid TOML: {exc}")
    for key in raw:
        if key not in ("name", "checks"):
            _fail(key, "unknown suite field")
    checks = raw.get("checks")
    if not isinstance(checks, list) or not checks:
        _fail("checks", "suite needs a nonempty array of check tables")
    for i, check in enumerate(checks):
        if not isinstance(check, dict):
            _fail(f"checks[{i}]", "expected a table")
        for key in check:
            if key not in ("scenario", "expect"):
                _fail(f"checks[{i}].{key}", "unknown check field")
        if "scenario" not in check or not isinstance(check["scenario"], str):
            _fail(f"checks[{i}].scenario", "required string field")
        expects = check.get("expect", [])
        if not isinstance(expects, list):
            _fail(f"checks[{i}].expect", "expected an array of tables")
        for j, table in enumerate(expects):
            _parse_expect(table, f"checks[{i}].expect[{j}]")
    return raw.get("name"), checks


def _resolve(result, path):
    """Walk a dotted path with [i] indices through the result dict."""
    tokens = []
    for piece in path.replace("[", ".[").split("."):
        if piece:
            tokens.append(piece)
    cur = result
    for token in tokens:
        if token.startswith("[") and token.endswith("]"):
            if not isinstance(cur, list):
                raise KeyError(path)
            idx = int(token[1:-1])
            if idx >= len(cur):
                raise KeyError(path)
            cur = cur[idx]
        elif isinstance(cur, dict) and token in cur:
            cur = cur[token]
        else:
            raise KeyError(path)
    return cur


def _numeric(value, path):
    if isinstance(value, bool):
        raise KeyError(path)
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        try:
            return float(Fraction(value))
        except (ValueError, ZeroDivisionError):
            raise KeyError(path)
    raise KeyError(path)


def _evaluate(expect, measured):
    """Returns (ok, expectation text for the failure message)."""
    if "equals" in expect:
        return measured == expect["equals"], f"expected {expect['equals']!r}"
    value = _numeric(measured, expect["path"])
    if "value" in expect:
        target = float(expect["value"])
        tol = float(expect.get("tolerance", 0.0))
        return abs(value - target) <= tol, f"expected {target} within {tol}"
    ok = True
    bounds = []
    if "min" in expect:
        ok = ok and value >= float(expect["min"])
        bounds.append(f">= {expect['min']}")
    if "max" in expect:
        ok = ok and value <= float(expect["max"])
        bounds.append(f"<= {expect['max']}")
    return ok, f"expected {' and '.join(bounds)}"


def cmd_verify(args):
    if args.threads < 1:
        print("error: --threads must be at least 1", file=sys.stderr)
        return 2
    suite_path = Path(args.suite)
    try:
        suite_name, checks = _load_suite(suite_path)
        scenarios = [
            _load(suite_path.parent / check["scenario"], args.strict)
            for check in checks
        ]
    except ScenarioError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 2
    out_root = (
        Path(args.out) if args.out
        else Path("runs") / (suite_name or suite_path.stem)
    )
    passed = failed = 0
    for check, scenario in zip(checks, scenarios):
        try:
            run_scenario(
                scenario, out_root / scenario.name,
                threads=args.threads, seed=args.seed,
            )
        except _COMPUTE_ERRORS as exc:
            print(f"FAIL {scenario.name}: computation failed: {exc}")
            return 3
        result = json.loads(
            (out_root / scenario.name / RESULT_FILE).read_text()
        )
        for expect in check.get("expect", []):
            path = expect["path"]
            try:
                measured = _resolve(result, path)
                ok, expectation = _evaluate(expect, measured)
            except KeyError:
                print(f"FAIL {scenario.name}: {path} not found in result")
                failed += 1
                continue
            if ok:
                print(f"PASS {scenario.name}: {path} = {measured!r}")
                passed += 1
            else:
                print(
                    f"FAIL {scenario.name}: {path} = {measured!r} "
                    f"({expectation})"
                )
                failed += 1
    print(f"{passed} passed, {failed} failed")
    return 0 if failed == 0 else 1


def cmd_schema(args):
    description = schema_description()
    if args.kind is not None:
        if args.kind not in SCENARIO_KINDS:
            print(
                f"error: unknown kind {args.kind!r} "
                f"(one of: {', '.join(SCENARIO_KINDS)})",
                file=sys.stderr,
            )
            return 2
        description = {args.kind: description[args.kind]}
    print(json.dumps(description, indent=2, sort_keys=True))
    return 0


def main(argv=None):
    args = _parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

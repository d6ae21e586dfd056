"""Command-line front end.

Exit codes: 0 success, 1 malformed scenario or arguments, 2 precondition
violation, 3 Unknown verdict where a decision was required, 4 a verify
suite reported failures.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from fractions import Fraction

from .base_seq import BaseSeq, build_base
from .metric import (
    DEFAULT_DEPTH,
    PreconditionError,
    UndecidedError,
    h_membership,
    phi_of_jumps,
    rho,
)
from .mixed_radix import MRReal, SignedMRReal, jump_of, parse_number
from .natset import IndexSet, NatSet
from .separation import separation_certificate
from .submeasure import PhiX, exh_membership, ideal_inclusion, is_adapted
from .suites import SUITES, verify_suite

EXIT_OK, EXIT_MALFORMED, EXIT_PRECONDITION, EXIT_UNKNOWN, EXIT_SUITE = 0, 1, 2, 3, 4

COMMANDS = ("digits", "jump", "phi", "member", "rho", "inclusion", "separate", "verify")

NAMED_SETS = {
    "odds": IndexSet.odds,
    "evens": IndexSet.evens,
    "all": IndexSet.everything,
    "none": IndexSet.empty,
}


class ScenarioError(ValueError):
    """Malformed input; the message names the offending location."""


# -- scenario parsing -----------------------------------------------------------


def _fail(path: str, message: str):
    raise ScenarioError(f"{path}: {message}")


def parse_index_set(obj, path: str) -> IndexSet:
    try:
        if isinstance(obj, str):
            if obj in NAMED_SETS:
                return NAMED_SETS[obj]()
            if "/" in obj:
                prefix, period = obj.split("/", 1)
                return IndexSet.from_bits(prefix, period)
            _fail(path, f"unknown index set name {obj!r}")
        if isinstance(obj, list):
            return IndexSet.finite(int(k) for k in obj)
        if isinstance(obj, dict):
            return IndexSet.from_json(obj)
    except (KeyError, ValueError, TypeError) as exc:
        if isinstance(exc, ScenarioError):
            raise
        _fail(path, str(exc))
    _fail(path, "expected a name, a bit pattern 'prefix/period', a member list or an object")


def parse_base(obj, path: str) -> BaseSeq:
    try:
        if isinstance(obj, int):
            return BaseSeq.constant(obj)
        if isinstance(obj, str):
            obj = json.loads(obj) if obj.lstrip().startswith("{") else int(obj)
            return parse_base(obj, path)
        if isinstance(obj, dict):
            return build_base(obj)
    except (KeyError, ValueError, TypeError) as exc:
        _fail(path, str(exc) or "invalid base")
    _fail(path, "expected an integer or a base descriptor object")


def parse_literal(obj, base: BaseSeq, path: str) -> Fraction:
    try:
        return parse_number(obj, base)
    except (KeyError, ValueError, TypeError, ZeroDivisionError) as exc:
        _fail(path, str(exc) or "invalid number literal")


def parse_set(obj, path: str) -> NatSet:
    try:
        if isinstance(obj, list):
            return NatSet.finite(int(n) for n in obj)
        if isinstance(obj, dict):
            return NatSet.from_json(obj)
    except (KeyError, ValueError, TypeError) as exc:
        _fail(path, str(exc))
    _fail(path, "expected a member list or a structured set object")


class Scenario:
    """Resolved inputs for one command."""

    def __init__(self, raw: dict, source: str):
        if not isinstance(raw, dict):
            _fail(source, "top level must be a JSON object")
        self.raw = raw
        self.source = source
        known = {"base", "x", "y", "numbers", "c", "depth", "seed", "set"}
        for key in raw:
            if key not in known:
                _fail(f"{source}:$.{key}", "unknown field")
        self.base = parse_base(raw.get("base", 10), f"{source}:$.base")
        self.x = parse_index_set(raw["x"], f"{source}:$.x") if "x" in raw else None
        self.y = parse_index_set(raw["y"], f"{source}:$.y") if "y" in raw else None
        numbers = raw.get("numbers", {})
        if not isinstance(numbers, dict):
            _fail(f"{source}:$.numbers", "expected an object of named literals")
        self.numbers = {
            name: parse_literal(lit, self.base, f"{source}:$.numbers.{name}")
            for name, lit in numbers.items()
        }
        self.c = parse_literal(raw.get("c", "1"), self.base, f"{source}:$.c")
        self.depth = raw.get("depth")
        if self.depth is not None and (not isinstance(self.depth, int) or self.depth < 1):
            _fail(f"{source}:$.depth", "expected a positive integer")
        self.seed = raw.get("seed", 0)
        if not isinstance(self.seed, int):
            _fail(f"{source}:$.seed", "expected an integer")
        self.set = parse_set(raw["set"], f"{source}:$.set") if "set" in raw else None

    def number(self, index: int) -> Fraction:
        """The ``index``-th declared number (declaration order)."""
        values = list(self.numbers.values())
        if len(values) <= index:
            _fail(f"{self.source}:$.numbers", f"command needs at least {index + 1} number(s)")
        return values[index]

    def require(self, field: str):
        value = getattr(self, field)
        if value is None:
            _fail(f"{self.source}:$.{field}", "required by this command")
        return value


def load_scenario(args) -> Scenario:
    raw: dict = {}
    source = "<flags>"
    if args.scenario:
        source = args.scenario
        try:
            with open(args.scenario, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ScenarioError(f"{source}: {exc.strerror}") from None
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if not isinstance(raw, dict):
        raise ScenarioError(f"{source}: top level must be a JSON object")
    raw = dict(raw)
    if args.base is not None:
        raw["base"] = args.base
    for key in ("x", "y"):
        value = getattr(args, key)
        if value is not None:
            raw[key] = _flag_json(value, f"--{key}")
    if args.number:
        raw["numbers"] = {f"arg{i}": value for i, value in enumerate(args.number)}
    if args.c is not None:
        raw["c"] = args.c
    if args.set is not None:
        value = _flag_json(args.set, "--set")
        if isinstance(value, str):
            try:
                value = [int(v) for v in value.split(",")]
            except ValueError:
                raise ScenarioError(f"--set: expected comma-separated integers, got {value!r}") from None
        raw["set"] = value
    return Scenario(raw, source)


def _flag_json(text: str, flag: str):
    """Decode a flag value that looks like JSON; other text passes through."""
    if text.lstrip()[:1] not in ("[", "{"):
        return text
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{flag}:{exc.colno}: {exc.msg}") from None


def resolve_depth(args, scenario: Scenario) -> int:
    if args.depth is not None:
        return args.depth
    if scenario.depth is not None:
        return scenario.depth
    env = os.environ.get("CANTOR_DEPTH")
    if env:
        try:
            value = int(env)
        except ValueError:
            raise ScenarioError(f"CANTOR_DEPTH: expected a positive integer, got {env!r}") from None
        if value < 1:
            raise ScenarioError(f"CANTOR_DEPTH: expected a positive integer, got {env!r}")
        return value
    return DEFAULT_DEPTH


def check_adapted(scenario: Scenario) -> None:
    """Every declared ideal must contain the jump set of the base."""
    for name in ("x", "y"):
        x = getattr(scenario, name)
        if x is None:
            continue
        verdict = is_adapted(scenario.base, PhiX(x))
        if not verdict.is_in:
            raise AdaptedError(name, verdict)


class AdaptedError(PreconditionError):
    def __init__(self, name, verdict):
        super().__init__(f"base is not adapted to I_{name}")
        self.verdict = verdict


# -- commands ---------------------------------------------------------------------


def _phi(scenario: Scenario, which: str = "x") -> PhiX:
    return PhiX(scenario.require(which))


def cmd_digits(scenario: Scenario, args, depth: int):
    r = MRReal(abs(scenario.number(0)), scenario.base)
    n = args.n if args.n is not None else 16
    digits = r.digits(n)
    doc = {"number": str(scenario.number(0)), "integer": r.integer_part, "digits": digits}
    rows = [("position", "digit")] + [(i, d) for i, d in enumerate(digits, start=1)]
    return doc, rows, EXIT_OK


def cmd_jump(scenario: Scenario, args, depth: int):
    r = MRReal(abs(scenario.number(0)), scenario.base)
    info = jump_of(r, depth)
    doc = {
        "number": str(scenario.number(0)),
        "prefix": sorted(info.prefix),
        "tail": info.tail,
        "depth": depth,
    }
    if info.natset is not None:
        doc["set"] = info.natset.to_json()
    rows = [("position", "jump")] + [(n, int(n in info.prefix)) for n in range(1, depth + 1)]
    return doc, rows, EXIT_OK


def cmd_phi(scenario: Scenario, args, depth: int):
    phi = _phi(scenario)
    if scenario.set is not None:
        a = scenario.set
        from .metric import exact_mass

        value = exact_mass(phi, a)
        if value is not None:
            doc = {"set": a.to_json(), "phi": {"kind": "exact", "value": str(value)}}
        else:
            verdict = exh_membership(phi, a, depth)
            kind = "infinite" if verdict.is_out else "finite_unsummed"
            doc = {"set": a.to_json(), "phi": {"kind": kind}, "verdict": verdict.to_json()}
    else:
        r = MRReal(abs(scenario.number(0)), scenario.base)
        kind, value = phi_of_jumps(phi, r, depth)
        doc = {"number": str(scenario.number(0)), "phi": {"kind": kind}, "depth": depth}
        if value is not None:
            doc["phi"]["value"] = str(value)
    rows = [("kind", "value"), (doc["phi"]["kind"], doc["phi"].get("value", ""))]
    return doc, rows, EXIT_OK


def cmd_member(scenario: Scenario, args, depth: int):
    phi = _phi(scenario)
    if scenario.set is not None:
        verdict = exh_membership(phi, scenario.set, depth)
        doc = {"set": scenario.set.to_json(), "verdict": verdict.to_json()}
    else:
        verdict = h_membership(phi, SignedMRReal(scenario.number(0), scenario.base), depth)
        doc = {"number": str(scenario.number(0)), "verdict": verdict.to_json()}
    rows = [("status",), (verdict.status,)]
    return doc, rows, EXIT_UNKNOWN if verdict.is_unknown else EXIT_OK


def cmd_rho(scenario: Scenario, args, depth: int):
    phi = _phi(scenario)
    b = scenario.base
    value = rho(phi, SignedMRReal(scenario.number(0), b), SignedMRReal(scenario.number(1), b), depth)
    doc = value.to_json()
    rows = [("distance", "phi_kind", "phi_value"), (doc["distance"], value.kind, doc["phi"].get("value", ""))]
    return doc, rows, EXIT_OK


def cmd_inclusion(scenario: Scenario, args, depth: int):
    x, y = scenario.require("x"), scenario.require("y")
    result = ideal_inclusion(x, y)
    doc = result.to_json(x, y, count=args.count or 5)
    rows = [("k", "phi_x", "phi_y")] + [
        (row["k"], str(row["phi_x"]), str(row["phi_y"]))
        for row in result.block_values(x, y, args.count or 5)
    ]
    return doc, rows, EXIT_OK


def cmd_separate(scenario: Scenario, args, depth: int):
    x, y = scenario.require("x"), scenario.require("y")
    cert = separation_certificate(x, y, scenario.c, args.count or 3, scenario.base)
    rows = list(csv.reader(io.StringIO(cert.to_csv())))
    return cert.to_json(), rows, EXIT_OK


HANDLERS = {
    "digits": cmd_digits,
    "jump": cmd_jump,
    "phi": cmd_phi,
    "member": cmd_member,
    "rho": cmd_rho,
    "inclusion": cmd_inclusion,
    "separate": cmd_separate,
}


# -- plumbing -------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", metavar="FILE", help="JSON scenario file")
    fmt = common.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="fmt", action="store_const", const="json", help="JSON output (default)")
    fmt.add_argument("--csv", dest="fmt", action="store_const", const="csv", help="CSV output")
    common.add_argument("--depth", type=int, metavar="N", help="prefix depth (env CANTOR_DEPTH, default 128)")
    common.add_argument("--seed", type=int, metavar="S", help="seed for randomized suites")
    common.add_argument("--count", type=int, metavar="K", help="number of witnesses / blocks")
    common.add_argument("--n", type=int, metavar="N", help="number of digits to print")
    common.add_argument("--base", help="base: an integer or a JSON descriptor")
    common.add_argument("--x", help="index set x: odds, evens, all, none, 'prefix/period' bits")
    common.add_argument("--y", help="index set y (same forms as --x)")
    common.add_argument("--number", action="append", help="number literal, e.g. 1/4 (repeatable)")
    common.add_argument("--c", help="rational scalar")
    common.add_argument("--set", help="finite set '1,2,3' or a JSON set descriptor")
    common.add_argument("--trials", type=int, help="trial count override for verify")
    common.add_argument("--timing", action="store_true", help="include elapsed times in verify JSON")

    parser = argparse.ArgumentParser(prog="cantor", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name == "verify":
            p.add_argument("suite", help=f"one of: {', '.join(SUITES)}")
    return parser


def emit(doc, rows, fmt: str, out) -> None:
    if fmt == "csv":
        writer = csv.writer(out, lineterminator="\n")
        for row in rows:
            writer.writerow(row)
    else:
        out.write(json.dumps(doc, indent=2) + "\n")


def run_verify(args, out, err) -> int:
    if args.suite not in SUITES:
        err.write(f"cantor: unknown suite {args.suite!r}; expected one of {', '.join(SUITES)}\n")
        return EXIT_MALFORMED
    report = verify_suite(args.suite, seed=args.seed or 0, trials=args.trials, count=args.count)
    rows = [("tag", "trials", "failures")] + [(r.tag, r.trials, r.failures) for r in report.rows]
    emit(report.to_json(timing=args.timing), rows, args.fmt or "json", out)
    for row in report.rows:
        err.write(f"{row.tag}: {row.trials} trials, {row.failures} failures, {row.elapsed:.2f}s\n")
    return EXIT_OK if report.ok else EXIT_SUITE


def main(argv=None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_MALFORMED
    if args.command == "verify":
        return run_verify(args, out, err)
    try:
        scenario = load_scenario(args)
        depth = resolve_depth(args, scenario)
        check_adapted(scenario)
        doc, rows, code = HANDLERS[args.command](scenario, args, depth)
    except ScenarioError as exc:
        err.write(f"cantor: malformed scenario: {exc}\n")
        return EXIT_MALFORMED
    except AdaptedError as exc:
        emit({"error": str(exc), "verdict": exc.verdict.to_json()}, [("error",), (str(exc),)], args.fmt or "json", out)
        err.write(f"cantor: precondition violated: {exc}\n")
        return EXIT_PRECONDITION
    except UndecidedError as exc:
        err.write(f"cantor: undecided: {exc}\n")
        return EXIT_UNKNOWN
    except (PreconditionError, ValueError) as exc:
        err.write(f"cantor: precondition violated: {exc}\n")
        return EXIT_PRECONDITION
    emit(doc, rows, args.fmt or "json", out)
    return code


if __name__ == "__main__":
    sys.exit(main())

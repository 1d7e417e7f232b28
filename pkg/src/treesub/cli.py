"""Batch front end: parse instances, run checks and minimizations, report.

Instance files are UTF-8 JSON:

    {
      "format_version": "1",
      "trees": [{"parent": [-1, 0, 1, 2, 3]}, {"parent": [-1, 0, 1, 2, 3]}],
      "function": {"type": "table", "denominator": 1, "values": [10, 8, ...]},
      "metadata": {"seed": 7, "properties": ["strong"], "start": [4, 0]}
    }

Every cost value is either a plain integer, read in units of
1/denominator, or an exact rational {"num": p, "den": q}.  Labelings are
ranked in mixed radix with variable 0 most significant: over two chains
with 5 nodes each, the labeling (x0, x1) = (2, 3) has rank 2*5 + 3 = 13
and "values"[13] is its cost.  Canonical serialization carries one
reduced denominator, plain integer values, sorted keys and two-space
indentation, so parse -> print -> parse is the identity and reports are
byte-identical for identical inputs and flags (wall-clock timings only
appear under --timing).

Exit codes: 0 holds / success, 1 violation or bound failure, 2 input or
structure error, 3 budget, generation or solver failure.  The
environment variable TREESUB_BUDGET overrides enumeration budgets
package-wide.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from importlib import resources
from pathlib import Path

from . import checks, descent, weak
from .errors import (
    BudgetExceededError,
    DomainError,
    FormatError,
    GenerationError,
    InternalError,
    IterationBoundError,
    NotInImageError,
    SolverFailureError,
    TreesubError,
    UnsupportedStructureError,
)
from .functions import (
    GENERATE_KINDS,
    CostFunction,
    DenseTable,
    InstanceFixture,
    ProductDomain,
    SumOfTerms,
    Term,
    chain_tree,
    complete_binary_tree,
    fixture_catalog_names,
    fork_tree,
    generate,
    star3_tree,
)
from .trees import RootedTree

FORMAT_VERSION = "1"

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_INPUT = 2
EXIT_FAILURE = 3

_INPUT_ERRORS = (FormatError, DomainError, UnsupportedStructureError, NotInImageError, InternalError)
_FAILURE_ERRORS = (BudgetExceededError, GenerationError, SolverFailureError, IterationBoundError)


# ---------------------------------------------------------------------------
# Instance documents


def _fail(path: str, message: str) -> FormatError:
    return FormatError(f"{path}: {message}")


def _parse_value(raw, where: str, denominator: int) -> Fraction:
    if isinstance(raw, bool):
        raise _fail(where, "expected an integer or {num, den} object")
    if isinstance(raw, int):
        return Fraction(raw, denominator)
    if isinstance(raw, dict):
        extra = set(raw) - {"num", "den"}
        if extra:
            raise _fail(where, f"unexpected keys {sorted(extra)}")
        num, den = raw.get("num"), raw.get("den")
        if not isinstance(num, int) or isinstance(num, bool):
            raise _fail(where + ".num", "expected an integer")
        if not isinstance(den, int) or isinstance(den, bool) or den < 1:
            raise _fail(where + ".den", "expected a positive integer")
        return Fraction(num, den)
    raise _fail(where, "expected an integer or {num, den} object")


def _normalize(fractions: list[Fraction]) -> tuple[list[int], int]:
    """Common reduced denominator and the matching integer numerators."""
    den = 1
    for f in fractions:
        den = den * f.denominator // math.gcd(den, f.denominator)
    nums = [int(f * den) for f in fractions]
    shrink = den
    for v in nums:
        shrink = math.gcd(shrink, v)
        if shrink == 1:
            break
    if shrink > 1:
        nums = [v // shrink for v in nums]
        den //= shrink
    return nums, den


def parse_document(doc: dict, origin: str = "instance") -> tuple[ProductDomain, CostFunction, dict]:
    """Build (domain, function, metadata) from a parsed JSON object."""
    if not isinstance(doc, dict):
        raise _fail(origin, "top level must be an object")
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise _fail("format_version", f"expected {FORMAT_VERSION!r}, got {version!r}")
    unknown = set(doc) - {"format_version", "trees", "function", "metadata"}
    if unknown:
        raise _fail(origin, f"unexpected keys {sorted(unknown)}")

    raw_trees = doc.get("trees")
    if not isinstance(raw_trees, list) or not raw_trees:
        raise _fail("trees", "expected a non-empty array")
    trees = []
    for i, entry in enumerate(raw_trees):
        if not isinstance(entry, dict) or set(entry) != {"parent"}:
            raise _fail(f"trees[{i}]", 'expected an object {"parent": [...]}')
        parent = entry["parent"]
        if not isinstance(parent, list) or not all(
            isinstance(p, int) and not isinstance(p, bool) for p in parent
        ):
            raise _fail(f"trees[{i}].parent", "expected an array of integers")
        try:
            trees.append(RootedTree(parent))
        except DomainError as exc:
            raise _fail(f"trees[{i}].parent", str(exc)) from exc
    domain = ProductDomain(trees)

    fn = doc.get("function")
    if not isinstance(fn, dict):
        raise _fail("function", "expected an object")
    ftype = fn.get("type")
    declared_den = fn.get("denominator", 1)
    if not isinstance(declared_den, int) or isinstance(declared_den, bool) or declared_den < 1:
        raise _fail("function.denominator", "expected a positive integer")

    if ftype == "table":
        unknown = set(fn) - {"type", "denominator", "values"}
        if unknown:
            raise _fail("function", f"unexpected keys {sorted(unknown)}")
        raw_values = fn.get("values")
        if not isinstance(raw_values, list):
            raise _fail("function.values", "expected an array")
        if len(raw_values) != domain.size():
            raise _fail(
                "function.values",
                f"expected {domain.size()} entries for this domain, got {len(raw_values)}",
            )
        fractions = [
            _parse_value(v, f"function.values[{i}]", declared_den)
            for i, v in enumerate(raw_values)
        ]
        nums, den = _normalize(fractions)
        function: CostFunction = DenseTable(domain, nums, den)
    elif ftype == "sum":
        unknown = set(fn) - {"type", "denominator", "terms"}
        if unknown:
            raise _fail("function", f"unexpected keys {sorted(unknown)}")
        raw_terms = fn.get("terms")
        if not isinstance(raw_terms, list):
            raise _fail("function.terms", "expected an array")
        fractions = []
        shapes = []
        for ti, entry in enumerate(raw_terms):
            where = f"function.terms[{ti}]"
            if not isinstance(entry, dict) or set(entry) != {"scope", "values"}:
                raise _fail(where, 'expected an object {"scope": [...], "values": [...]}')
            scope = entry["scope"]
            if (
                not isinstance(scope, list)
                or not scope
                or not all(isinstance(s, int) and not isinstance(s, bool) for s in scope)
            ):
                raise _fail(where + ".scope", "expected a non-empty array of integers")
            values = entry["values"]
            if not isinstance(values, list):
                raise _fail(where + ".values", "expected an array")
            fracs = [
                _parse_value(v, f"{where}.values[{vi}]", declared_den)
                for vi, v in enumerate(values)
            ]
            shapes.append((tuple(scope), len(fracs)))
            fractions.extend(fracs)
        nums, den = _normalize(fractions)
        terms = []
        cursor = 0
        for ti, (scope, count) in enumerate(shapes):
            chunk = nums[cursor:cursor + count]
            cursor += count
            try:
                terms.append(Term(scope=scope, values=tuple(chunk)))
            except DomainError as exc:
                raise _fail(f"function.terms[{ti}]", str(exc)) from exc
        try:
            function = SumOfTerms(domain, terms, den)
        except DomainError as exc:
            raise _fail("function.terms", str(exc)) from exc
    else:
        raise _fail("function.type", f"expected 'table' or 'sum', got {ftype!r}")

    metadata = doc.get("metadata", {})
    if not isinstance(metadata, dict):
        raise _fail("metadata", "expected an object")
    return domain, function, metadata


def parse_instance(path: str | Path) -> tuple[ProductDomain, CostFunction, dict]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise FormatError(f"{path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON: {exc}") from exc
    return parse_document(doc, origin=str(path))


def build_document(domain: ProductDomain, function: CostFunction, metadata: dict | None = None) -> dict:
    """Canonical JSON object for a domain plus cost function."""
    doc: dict = {
        "format_version": FORMAT_VERSION,
        "trees": [{"parent": list(t.parent)} for t in domain.trees],
    }
    if isinstance(function, DenseTable):
        doc["function"] = {
            "type": "table",
            "denominator": function.denominator,
            "values": list(function.values),
        }
    elif isinstance(function, SumOfTerms):
        doc["function"] = {
            "type": "sum",
            "denominator": function.denominator,
            "terms": [
                {"scope": list(t.scope), "values": list(t.values)} for t in function.terms
            ],
        }
    else:
        raise DomainError(f"cannot serialize cost function of type {type(function).__name__}")
    if metadata:
        doc["metadata"] = metadata
    return doc


def canonical_dumps(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def fixture_document(fixture: InstanceFixture, seed: int | None, kind: str) -> dict:
    metadata: dict = {
        "kind": kind,
        "properties": sorted(fixture.verified_properties),
        "provenance": fixture.provenance,
    }
    if seed is not None:
        metadata["seed"] = seed
    if fixture.start is not None:
        metadata["start"] = list(fixture.start)
    return build_document(fixture.domain, fixture.function, metadata)


# ---------------------------------------------------------------------------
# Report plumbing


def _fraction_record(numerator: int, denominator: int) -> dict:
    f = Fraction(numerator, denominator)
    return {"num": f.numerator, "den": f.denominator}


def _witness_record(witness: checks.ViolationWitness | None, denominator: int):
    if witness is None:
        return None
    return {
        "property": witness.property_name,
        "x": list(witness.x),
        "y": list(witness.y),
        "d": witness.d,
        "lhs": _fraction_record(witness.lhs, denominator),
        "rhs": _fraction_record(witness.rhs, denominator),
    }


def _emit(report: dict, out: str | None) -> None:
    text = canonical_dumps(report)
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _error(message: str) -> None:
    print(f"error: {message}", file=sys.stderr)


# ---------------------------------------------------------------------------
# Commands


def _cmd_check(args) -> int:
    domain, function, _ = parse_instance(args.instance)
    mode = args.mode
    kwargs = dict(mode=mode, samples=args.samples, seed=args.seed)
    if args.property == "strong":
        report = checks.check_strong(function, domain, **kwargs)
    elif args.property == "weak":
        report = checks.check_weak(function, domain, **kwargs)
    elif args.property == "translation":
        report = checks.check_translation(function, domain, **kwargs)
    elif args.property == "multimorphism":
        builders = {
            "meet-join": checks.meet_join_tables,
            "wedge-vee": checks.wedge_vee_tables,
            "min-max": checks.min_max_tables,
            "projections": checks.projection_tables,
        }
        op_pair = builders[args.ops](domain)
        report = checks.check_multimorphism(
            function, domain, op_pair, name=f"multimorphism:{args.ops}", **kwargs
        )
    else:  # pragma: no cover - argparse restricts choices
        raise DomainError(f"unknown property {args.property!r}")
    record = {
        "command": "check",
        "instance": args.instance,
        "property": report.property_name,
        "mode": report.mode,
        "ok": report.ok,
        "pairs_checked": report.pairs_checked,
        "note": report.note,
        "witness": _witness_record(report.witness, function.denominator),
    }
    _emit(record, args.out)
    return EXIT_OK if report.ok else EXIT_VIOLATION


def _parse_start(raw: str | None, metadata: dict, domain: ProductDomain):
    if raw is not None:
        try:
            labels = tuple(int(part) for part in raw.split(","))
        except ValueError as exc:
            raise DomainError(f"--start {raw!r} is not a comma-separated label list") from exc
        return domain.validate(labels)
    start = metadata.get("start")
    if start is not None:
        if not isinstance(start, list) or not all(
            isinstance(v, int) and not isinstance(v, bool) for v in start
        ):
            raise FormatError("metadata.start: expected an array of integers")
        return domain.validate(tuple(start))
    return None


def _cmd_minimize(args) -> int:
    domain, function, metadata = parse_instance(args.instance)
    start = _parse_start(args.start, metadata, domain)
    record: dict = {
        "command": "minimize",
        "instance": args.instance,
        "solver": args.solver,
        "engine": args.engine,
        "s1_steps": None,
        "s2_steps": None,
        "certificate": None,
    }
    if args.solver == "brute":
        x, value = descent.minimize_exhaustive(function, domain)
    elif args.solver == "weak":
        x, value = weak.minimize_weak(function, domain)
    else:
        inward = "brute" if args.engine == "brute" else "wolfe"
        outward = "brute" if args.engine == "brute" else "minnorm"
        x, value, trace = descent.minimize(
            function,
            domain,
            start,
            inward_engine=inward,
            outward_engine=outward,
            diagnostics=args.diagnostics,
        )
        record["s1_steps"] = trace.s1_steps
        record["s2_steps"] = trace.s2_steps
        record["certificate"] = {
            "inward_opt": trace.certificate.inward_opt,
            "outward_opt": trace.certificate.outward_opt,
        }
        if args.trace:
            record["values"] = [
                _fraction_record(v, function.denominator) for v in trace.values
            ]
        if args.diagnostics and trace.diagnostics is not None:
            record["diagnostics"] = [
                {
                    "stage": d.stage,
                    "value": _fraction_record(d.value, function.denominator),
                    "rho_minus": d.rho_minus,
                    "rho_plus": d.rho_plus,
                    "inward_still_optimal": d.inward_still_optimal,
                }
                for d in trace.diagnostics
            ]
    record["minimizer"] = list(x)
    record["value"] = _fraction_record(value, function.denominator)
    _emit(record, args.out)
    return EXIT_OK


_TREE_SPECS = {
    "star3": star3_tree,
    "bintree7": lambda: complete_binary_tree(3),
}


def _parse_tree_spec(spec: str, n: int | None) -> ProductDomain:
    tokens = [tok.strip() for tok in spec.split(",") if tok.strip()]
    if not tokens:
        raise DomainError("--tree-spec is empty")
    if n is not None and len(tokens) == 1:
        tokens = tokens * n
    trees = []
    for tok in tokens:
        if tok in _TREE_SPECS:
            trees.append(_TREE_SPECS[tok]())
        elif tok.startswith("chain"):
            trees.append(chain_tree(_spec_number(tok, "chain")))
        elif tok.startswith("fork"):
            trees.append(fork_tree(_spec_number(tok, "fork")))
        else:
            raise DomainError(
                f"unknown tree spec {tok!r}; use chainN, forkK, star3 or bintree7"
            )
    return ProductDomain(trees)


def _spec_number(token: str, prefix: str) -> int:
    try:
        return int(token[len(prefix):])
    except ValueError as exc:
        raise DomainError(f"tree spec {token!r} needs an integer suffix") from exc


def _cmd_generate(args) -> int:
    if args.kind == "fixture-catalog":
        fixture = generate("fixture-catalog", name=args.name)
        seed = None
    else:
        if not args.tree_spec:
            raise DomainError(f"kind {args.kind!r} needs --tree-spec")
        domain = _parse_tree_spec(args.tree_spec, args.n)
        fixture = generate(
            args.kind,
            domain,
            args.seed,
            max_value=args.max_value,
            attempt_budget=args.attempts,
        )
        seed = args.seed
    doc = fixture_document(fixture, seed, args.kind)
    text = canonical_dumps(doc)
    Path(args.out).write_text(text, encoding="utf-8")
    record = {
        "command": "generate",
        "kind": args.kind,
        "out": args.out,
        "seed": seed,
        "properties": sorted(fixture.verified_properties),
    }
    sys.stdout.write(canonical_dumps(record))
    return EXIT_OK


def _corpus_dir() -> Path:
    return Path(str(resources.files("treesub") / "corpus"))


def _bench_row(path: Path, diagnostics: bool, timing: bool) -> dict:
    domain, function, metadata = parse_instance(path)
    properties = metadata.get("properties", [])
    start = _parse_start(None, metadata, domain)
    row: dict = {"instance": path.name, "K": max(t.node_count for t in domain.trees)}
    began = time.perf_counter()
    if "strong" in properties or not properties:
        x, value, trace = descent.minimize(
            function, domain, start, diagnostics=diagnostics
        )
        row.update(
            solver="descent",
            s1_steps=trace.s1_steps,
            s2_steps=trace.s2_steps,
            value=_fraction_record(value, function.denominator),
            steps_within_bound=trace.s1_steps <= trace.K and trace.s2_steps <= trace.K,
            certificate=trace.certificate.holds(),
        )
        if diagnostics and trace.diagnostics is not None:
            row["rho_minus"] = [d.rho_minus for d in trace.diagnostics]
            row["rho_plus"] = [d.rho_plus for d in trace.diagnostics]
    else:
        x, value = weak.minimize_weak(function, domain)
        row.update(
            solver="weak",
            s1_steps=None,
            s2_steps=None,
            value=_fraction_record(value, function.denominator),
            steps_within_bound=True,
            certificate=None,
        )
    row["minimizer"] = list(x)
    if timing:
        row["wall_ms"] = round((time.perf_counter() - began) * 1000.0, 3)
    return row


def _cmd_bench(args) -> int:
    suite = Path(args.suite) if args.suite else _corpus_dir()
    paths = sorted(suite.glob("*.json"))
    if args.jobs and args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(lambda p: _bench_row(p, args.diagnostics, args.timing), paths))
    else:
        rows = [_bench_row(p, args.diagnostics, args.timing) for p in paths]
    ok = all(row["steps_within_bound"] for row in rows)
    record = {"command": "bench", "suite": str(suite), "rows": rows, "ok": ok}
    _emit(record, args.out)
    return EXIT_OK if ok else EXIT_VIOLATION


def _cmd_encode_weak(args) -> int:
    domain, _, _ = parse_instance(args.instance)
    forks = weak.recognize_domain(domain)
    record = {
        "command": "encode-weak",
        "instance": args.instance,
        "trees": [
            {
                "K": fork.K,
                "fork": fork.has_fork,
                "mapping": [
                    {"label": label, "encoded": list(enc)}
                    for label, enc in weak.encoding_table(fork)
                ],
            }
            for fork in forks
        ],
    }
    _emit(record, args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Argument parsing


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="treesub",
        description="Check and minimize tree-submodular cost functions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_check = sub.add_parser("check", help="verify a submodularity property")
    p_check.add_argument("instance")
    p_check.add_argument(
        "--property",
        choices=("strong", "weak", "translation", "multimorphism"),
        default="strong",
    )
    p_check.add_argument("--mode", choices=("exhaustive", "sampled"), default="exhaustive")
    p_check.add_argument("--samples", type=int, default=1000)
    p_check.add_argument("--seed", type=int, default=0)
    p_check.add_argument(
        "--ops",
        choices=("meet-join", "wedge-vee", "min-max", "projections"),
        default="meet-join",
        help="operation pair for --property multimorphism",
    )
    p_check.add_argument("--out")
    p_check.set_defaults(func=_cmd_check)

    p_min = sub.add_parser("minimize", help="minimize an instance")
    p_min.add_argument("instance")
    p_min.add_argument("--solver", choices=("descent", "brute", "weak"), default="descent")
    p_min.add_argument("--engine", choices=("brute", "minnorm"), default="brute",
                       help="inner engines for descent: brute, or min-norm-point")
    p_min.add_argument("--start", help="comma-separated start labeling")
    p_min.add_argument("--trace", action="store_true", help="include the value sequence")
    p_min.add_argument("--diagnostics", action="store_true",
                       help="include ideal/filter distance traces (exponential)")
    p_min.add_argument("--out")
    p_min.set_defaults(func=_cmd_minimize)

    p_gen = sub.add_parser("generate", help="emit a verified instance file")
    p_gen.add_argument("--kind", choices=GENERATE_KINDS, required=True)
    p_gen.add_argument("--name", choices=fixture_catalog_names(),
                       help="fixture name for --kind fixture-catalog")
    p_gen.add_argument("--n", type=int, help="replicate a single-token --tree-spec n times")
    p_gen.add_argument("--tree-spec", help="comma-separated: chainN, forkK, star3, bintree7")
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--max-value", type=int, default=20)
    p_gen.add_argument("--attempts", type=int, default=1000)
    p_gen.add_argument("--out", required=True)
    p_gen.set_defaults(func=_cmd_generate)

    p_bench = sub.add_parser("bench", help="run a suite and assert step bounds")
    p_bench.add_argument("--suite", help="directory of instance files (default: shipped corpus)")
    p_bench.add_argument("--jobs", type=int, default=1)
    p_bench.add_argument("--timing", action="store_true", help="include wall-clock columns")
    p_bench.add_argument("--diagnostics", action="store_true")
    p_bench.add_argument("--out")
    p_bench.set_defaults(func=_cmd_bench)

    p_enc = sub.add_parser("encode-weak", help="dump the fork-tree encoding tables")
    p_enc.add_argument("instance")
    p_enc.add_argument("--out")
    p_enc.set_defaults(func=_cmd_encode_weak)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _INPUT_ERRORS as exc:
        _error(str(exc))
        return EXIT_INPUT
    except _FAILURE_ERRORS as exc:
        _error(str(exc))
        return EXIT_FAILURE
    except TreesubError as exc:  # safety net for future error types
        _error(str(exc))
        return EXIT_FAILURE


def entry() -> None:
    sys.exit(main())

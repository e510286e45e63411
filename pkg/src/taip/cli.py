"""Command line entry point: ``taip <subcommand> ...``."""

from __future__ import annotations

import argparse
import csv
import glob
import json
import logging
import os
import sys
from typing import Optional, Sequence

from taip.bench import run_benchmark
from taip.generate import GeneratorConfig, generate, generate_instance, generate_ontology
from taip.hardness import Aggregation, HardnessConfig, hardness_curve
from taip.model import Instance, errors_only, validate_instance
from taip.ontology import CompetenceOntology
from taip.oracle import (
    DEFAULT_ENUMERATION_CAP,
    EnumerationCapExceeded,
    ObjectiveMode,
    brute_force_optimum,
    count_feasible,
    export_lp,
)
from taip.proximity import ProximityCache
from taip.solver import SolverConfig, assignment_document, solve

log = logging.getLogger("taip")


def _dump(doc, path: Optional[str]) -> None:
    text = json.dumps(doc, indent=1)
    if path in (None, "-"):
        print(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")


def _load_instance(path: str) -> Instance:
    inst = Instance.load(path)
    errors = errors_only(validate_instance(inst))
    if errors:
        raise SystemExit(f"{path}: invalid instance\n" + "\n".join(f"  {e}" for e in errors))
    return inst


def _solver_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--patience", type=int, default=1000)
    p.add_argument("--epsilon", type=float, default=1e-6, help="stop once 1 - overall cp <= epsilon")
    p.add_argument("--local-search-period", type=int, default=50)
    p.add_argument("--swap-attempts", type=int, default=10)
    p.add_argument("--hausdorff-threshold", type=float, default=0.5)
    p.add_argument("--hardness-guard", type=float, default=None)
    p.add_argument("--max-iterations", type=int, default=None)
    p.add_argument("--time-budget", type=float, default=None, metavar="SECONDS")
    p.add_argument("--program-hardness", choices=[a.value for a in Aggregation], default="as-written")
    p.add_argument("--hardness-epsilon", type=float, default=1e-6)
    p.add_argument("--no-rotations", action="store_true", help="disable three-way moves in local search")
    p.add_argument("--no-plateau", action="store_true", help="disable equal-value swaps in local search")


def _solver_config(args, seed: int = 0) -> SolverConfig:
    return SolverConfig(
        seed=seed,
        convergence_epsilon=args.epsilon,
        patience=args.patience,
        local_search_period=args.local_search_period,
        swap_attempts=args.swap_attempts,
        hausdorff_threshold=args.hausdorff_threshold,
        hardness_guard=args.hardness_guard,
        max_iterations=args.max_iterations,
        time_budget=args.time_budget,
        rotations=not args.no_rotations,
        plateau_moves=not args.no_plateau,
        hardness=HardnessConfig(args.hardness_epsilon, Aggregation(args.program_hardness)),
    )


def cmd_solve(args) -> int:
    inst = _load_instance(args.instance)
    result = solve(inst, _solver_config(args, args.seed))
    _dump(result.to_dict(inst), args.out)
    if args.trace:
        result.trace.save(args.trace)
    log.info("overall cp %.9g after %d iterations (%s)", result.overall_cp, result.stats.iterations, result.stats.stop_reason)
    return 0


def cmd_exact(args) -> int:
    inst = _load_instance(args.instance)
    cache = ProximityCache(inst)
    try:
        g, value, _ = brute_force_optimum(inst, cap=args.cap, cache=cache)
    except EnumerationCapExceeded as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return 2
    _dump(assignment_document(inst, g, cache), args.out)
    return 0


def cmd_count(args) -> int:
    inst = _load_instance(args.instance)
    b = count_feasible(inst)
    doc = {
        "case": b.case.value,
        "buckets": [{"team_size": m, "programs": k} for m, k in b.buckets],
        "total": str(b.total),
    }
    if b.covers:
        doc["covers"] = [{"programs": list(sub), "count": str(n)} for sub, n in b.covers]
    _dump(doc, None)
    return 0


def cmd_export_lp(args) -> int:
    inst = _load_instance(args.instance)
    try:
        summary = export_lp(inst, args.out, ObjectiveMode(args.objective), cap=args.cap)
    except EnumerationCapExceeded as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return 2
    print(
        f"variables={summary.variables} program_constraints={summary.program_constraints} "
        f"student_constraints={summary.student_constraints}"
    )
    return 0


def _gen_config(args) -> GeneratorConfig:
    return GeneratorConfig(
        seed=args.seed,
        num_programs=getattr(args, "programs", 1),
        extra_students=getattr(args, "extra_students", 0),
        ontology_branching=args.branching,
        ontology_depth=args.depth,
    )


def cmd_generate_ontology(args) -> int:
    ont = generate_ontology(_gen_config(args))
    _dump(ont.to_dict(), args.out)
    return 0


def cmd_generate(args) -> int:
    cfg = _gen_config(args)
    if args.ontology:
        inst = generate_instance(CompetenceOntology.load(args.ontology), cfg)
    else:
        inst = generate(cfg)
    _dump(inst.to_dict(), args.out)
    return 0


def cmd_bench(args) -> int:
    paths = sorted(glob.glob(args.instances))
    if not paths:
        print(f"no instance matches {args.instances!r}", file=sys.stderr)
        return 2
    seeds = [int(s) for s in args.seeds.split(",") if s]
    instances = [(os.path.splitext(os.path.basename(p))[0], _load_instance(p)) for p in paths]
    report = run_benchmark(instances, _solver_config(args), oracle_cap=args.oracle_cap, seeds=seeds)
    report.write(args.report)
    for name, msg in report.failures.items():
        log.warning("%s: %s", name, msg)
    finals = [r.final_quality for r in report.runs if r.reference is not None]
    if finals:
        print(f"runs={len(report.runs)} mean_final_quality={sum(finals) / len(finals):.6f}")
    return 0


def cmd_hardness_curve(args) -> int:
    out = open(args.out, "w", newline="", encoding="utf-8") if args.out else sys.stdout
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["x", "hardness"])
        for x, h in hardness_curve(args.samples):
            w.writerow([repr(x), repr(h)])
    finally:
        if args.out:
            out.close()
    return 0


def cmd_validate(args) -> int:
    inst = Instance.load(args.instance)
    report = validate_instance(inst)
    for v in report:
        print(v)
    return 1 if errors_only(report) else 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)
    parser = argparse.ArgumentParser(prog="taip", description=__doc__, parents=[common])
    sub = parser.add_subparsers(dest="command", required=True)
    add = sub.add_parser

    def sub_parser(name: str, **kw) -> argparse.ArgumentParser:
        return add(name, parents=[common], **kw)

    p = sub_parser("solve", help="run the anytime heuristic")
    p.add_argument("--instance", required=True)
    p.add_argument("--seed", type=int, default=0)
    _solver_args(p)
    p.add_argument("--out", default="-")
    p.add_argument("--trace")
    p.set_defaults(func=cmd_solve)

    p = sub_parser("exact", help="optimal assignment by enumeration")
    p.add_argument("--instance", required=True)
    p.add_argument("--out", default="-")
    p.add_argument("--cap", type=int, default=DEFAULT_ENUMERATION_CAP)
    p.set_defaults(func=cmd_exact)

    p = sub_parser("count", help="closed-form count of feasible assignments")
    p.add_argument("--instance", required=True)
    p.set_defaults(func=cmd_count)

    p = sub_parser("export-lp", help="write the 0/1 program in LP format")
    p.add_argument("--instance", required=True)
    p.add_argument("--objective", choices=[m.value for m in ObjectiveMode], default="log1p")
    p.add_argument("--out", required=True)
    p.add_argument("--cap", type=int, default=10**6)
    p.set_defaults(func=cmd_export_lp)

    p = sub_parser("generate-ontology", help="random competence tree")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--branching", type=int, default=4)
    p.add_argument("--depth", type=int, default=4)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_generate_ontology)

    p = sub_parser("generate", help="random instance")
    p.add_argument("--programs", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--extra-students", type=int, default=0)
    p.add_argument("--ontology", help="use this ontology file instead of drawing one")
    p.add_argument("--branching", type=int, default=4)
    p.add_argument("--depth", type=int, default=4)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_generate)

    p = sub_parser("bench", help="quality-vs-time benchmark against the oracle")
    p.add_argument("--instances", required=True, help="glob of instance files")
    p.add_argument("--seeds", default="0")
    p.add_argument("--report", required=True, help="output directory")
    p.add_argument("--oracle-cap", type=int, default=DEFAULT_ENUMERATION_CAP)
    _solver_args(p)
    p.set_defaults(func=cmd_bench)

    p = sub_parser("hardness-curve", help="competence hardness as a function of coverage")
    p.add_argument("--samples", type=int, default=101)
    p.add_argument("--out")
    p.set_defaults(func=cmd_hardness_curve)

    p = sub_parser("validate", help="report instance problems")
    p.add_argument("--instance", required=True)
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING, format="%(levelname)s %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

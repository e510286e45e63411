"""Quality-versus-time benchmarking against the exact optimum."""

from __future__ import annotations

import csv
import math
import os
import statistics
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

from taip.model import Instance
from taip.oracle import DEFAULT_ENUMERATION_CAP, EnumerationCapExceeded, brute_force_optimum
from taip.proximity import ProximityCache
from taip.solver import SolverConfig, solve

PER_INSTANCE_COLUMNS = ("instance", "seed", "elapsed_ms", "iteration", "event", "overall_cp", "quality_ratio")


def quality_ratio(value: float, reference: float) -> float:
    if reference <= 0.0:
        return 1.0 if value <= 0.0 else math.inf
    return value / reference


@dataclass
class RunRecord:
    instance: str
    seed: int
    reference: Optional[float]
    reference_kind: str  # "optimal", "best-known" or "none"
    rows: List[Tuple[float, int, str, float]] = field(default_factory=list)
    final_cp: float = math.nan
    error: Optional[str] = None

    def quality(self, value: float) -> float:
        return quality_ratio(value, self.reference) if self.reference is not None else math.nan

    @property
    def initial_quality(self) -> float:
        return self.quality(self.rows[0][3]) if self.rows else math.nan

    @property
    def final_quality(self) -> float:
        return self.quality(self.final_cp)

    @property
    def elapsed_ms(self) -> float:
        return self.rows[-1][0] if self.rows else math.nan


@dataclass
class BenchmarkReport:
    runs: List[RunRecord]
    oracle_values: Dict[str, Optional[float]]
    failures: Dict[str, str]

    def mean_curve(self, grid: Optional[Sequence[float]] = None) -> List[Tuple[float, float]]:
        """Mean best-so-far quality over runs, on a time grid in ms.

        Each run contributes its quality at the latest trace row not after the
        grid point (0 before the first row), so every per-run curve is a
        non-decreasing step function and so is their mean.
        """
        runs = [r for r in self.runs if r.rows and r.reference is not None]
        if not runs:
            return []
        if grid is None:
            grid = sorted({row[0] for r in runs for row in r.rows})
        out = []
        for t in grid:
            qs = []
            for r in runs:
                best = 0.0
                for row in r.rows:
                    if row[0] > t:
                        break
                    best = max(best, r.quality(row[3]))
                qs.append(best)
            out.append((t, statistics.fmean(qs)))
        return out

    def summary_rows(self) -> List[Dict[str, object]]:
        out = []
        for r in self.runs:
            out.append(
                {
                    "instance": r.instance,
                    "seed": r.seed,
                    "reference_kind": r.reference_kind,
                    "reference_cp": r.reference,
                    "initial_cp": r.rows[0][3] if r.rows else None,
                    "final_cp": r.final_cp,
                    "initial_quality": r.initial_quality,
                    "final_quality": r.final_quality,
                    "elapsed_ms": r.elapsed_ms,
                    "error": r.error or "",
                }
            )
        return out

    def write(self, directory: "str | os.PathLike[str]") -> None:
        os.makedirs(directory, exist_ok=True)
        with open(os.path.join(directory, "per_instance.csv"), "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(PER_INSTANCE_COLUMNS)
            for r in self.runs:
                for elapsed, it, event, cp in r.rows:
                    w.writerow([r.instance, r.seed, f"{elapsed:.3f}", it, event, repr(cp), repr(r.quality(cp))])
        rows = self.summary_rows()
        with open(os.path.join(directory, "summary.csv"), "w", newline="", encoding="utf-8") as fh:
            fields = list(rows[0]) if rows else ["instance"]
            w = csv.DictWriter(fh, fieldnames=fields)
            w.writeheader()
            w.writerows(rows)
        with open(os.path.join(directory, "curve.csv"), "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["elapsed_ms", "mean_quality_ratio"])
            for t, q in self.mean_curve():
                w.writerow([f"{t:.3f}", repr(q)])


def run_benchmark(
    instances: Sequence[Tuple[str, Instance]],
    solver_cfg: SolverConfig = SolverConfig(),
    oracle_cap: int = DEFAULT_ENUMERATION_CAP,
    seeds: Sequence[int] = (0,),
) -> BenchmarkReport:
    """Solve every (instance, seed) pair and score traces against the optimum.

    Instances beyond ``oracle_cap`` are scored against the best final value
    over their seeds and flagged ``best-known``.
    """
    oracle_values: Dict[str, Optional[float]] = {}
    failures: Dict[str, str] = {}
    runs: List[RunRecord] = []
    for name, inst in sorted(instances, key=lambda item: item[0]):
        try:
            _, oracle_values[name], _ = brute_force_optimum(inst, cap=oracle_cap, cache=ProximityCache(inst))
        except EnumerationCapExceeded as exc:
            oracle_values[name] = None
            failures[name] = f"oracle refused: {exc}"
        batch = []
        for seed in seeds:
            rec = RunRecord(name, seed, oracle_values[name], "optimal" if oracle_values[name] is not None else "none")
            try:
                result = solve(inst, replace(solver_cfg, seed=seed))
                rec.rows = [tuple(row) for row in result.trace.rows]
                rec.final_cp = result.overall_cp
            except Exception as exc:  # recorded, not fatal
                rec.error = f"{type(exc).__name__}: {exc}"
            batch.append(rec)
        if oracle_values[name] is None:
            finals = [r.final_cp for r in batch if not r.error]
            best = max(finals) if finals else None
            for r in batch:
                r.reference, r.reference_kind = best, "best-known" if best is not None else "none"
        runs.extend(batch)
    return BenchmarkReport(runs, oracle_values, failures)

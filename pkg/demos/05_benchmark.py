"""Quality against time on a handful of small instances."""

import tempfile

import numpy as np

from taip import GeneratorConfig, SolverConfig, generate
from taip.bench import run_benchmark

instances = [(f"g{s}", generate(GeneratorConfig(seed=s, num_programs=3))) for s in range(8)]
report = run_benchmark(instances, SolverConfig(patience=300), seeds=(0, 1))

finals = np.array([r.final_quality for r in report.runs])
starts = np.array([r.initial_quality for r in report.runs])
print(f"{len(report.runs)} runs, initial quality {starts.mean():.3f}, final {finals.mean():.3f}")
print("runs at the optimum:", int(np.isclose(finals, 1.0).sum()))

grid = np.linspace(0, max(r.elapsed_ms for r in report.runs), 6)
for t, q in report.mean_curve(grid):
    print(f"  t={t:8.2f} ms  mean quality {q:.3f}")

out = tempfile.mkdtemp()
report.write(out)
print("csv reports in", out)

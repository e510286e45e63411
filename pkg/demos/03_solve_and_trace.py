"""Generate an instance, run the anytime solver and read its trace."""

from taip import GeneratorConfig, ProximityCache, SolverConfig, brute_force_optimum, generate, solve

inst = generate(GeneratorConfig(seed=7, num_programs=3, extra_students=1))
print(f"{inst.M} programs, {inst.N} students, {len(inst.ontology)} competencies in the tree")
for p in inst.programs:
    print(f"  {p.id}: team of {p.team_size}, needs {', '.join(p.competencies)}")

result = solve(inst, SolverConfig(seed=0))
print()
print("trace (elapsed ms, iteration, event, overall cp):")
for row in result.trace:
    print(f"  {row.elapsed_ms:9.2f} {row.iteration:6d}  {row.event:<13} {row.overall_cp:.6f}")
print("stopped on", result.stats.stop_reason, "after", result.stats.iterations, "iterations")
print("teams:", dict(result.assignment))

# small enough to enumerate, so compare with the exact optimum
_, best, _ = brute_force_optimum(inst, cache=ProximityCache(inst))
print(f"solver {result.overall_cp:.6f}  optimum {best:.6f}  ratio {result.overall_cp / best:.4f}")

# same seed, same answer
again = solve(inst, SolverConfig(seed=0))
assert again.assignment == result.assignment

"""How a team's proximity to a program is scored.

Every required competence is handed to team members so that nobody is
overloaded and nobody is left idle; the best such hand-out sets the score.
"""

from taip import CompetenceOntology, Instance, Program, Student
from taip.proximity import best_fair_assignment, enumerate_fair_assignments, fairness_bounds, team_cp

onto = CompetenceOntology.from_edges(
    "skills",
    [
        ("skills", "programming"),
        ("skills", "statistics"),
        ("programming", "python"),
        ("programming", "c"),
        ("python", "numpy"),
        ("statistics", "regression"),
    ],
)

program = Program.make("data-lab", {"numpy": 0.9, "regression": 0.6, "c": 0.3}, team_size=2)
ana = Student.make("ana", ["python", "c"])
ben = Student.make("ben", ["regression"])
inst = Instance(onto, [ana, ben], [program])
team = ["ana", "ben"]

load, coverers = fairness_bounds(program.team_size, len(program.competencies))
print(f"each member takes at most {load} competencies; each competence can have up to {coverers} coverer(s)")

scored = []
for eta in enumerate_fair_assignments(program, team):
    split = {s: sorted(cs) for s, cs in eta.items()}
    scored.append((team_cp(inst, program, team, eta), split))
scored.sort(key=lambda item: -item[0])
print(f"{len(scored)} fair hand-outs, best first:")
for value, split in scored[:5]:
    print(f"  {value:.4f}  {split}")

eta, value = best_fair_assignment(inst, program, team)
print("branch and bound picks", {s: sorted(cs) for s, cs in eta.items()}, f"-> {value:.4f}")
assert value == scored[0][0]

"""Ground truth by exhaustive enumeration, closed-form search-space counts and
export of the 0/1 linear program encoding.

Three regimes, by total demand ``D = sum(m_p)`` against ``N`` students:

* exact fit (D == N): every student is placed;
* surplus (D < N): the leftover students form one unlabeled extra block;
* shortage (D > N): only maximal staffable program subsets are considered,
  i.e. subsets that fit and leave too few students for any other program.
"""

from __future__ import annotations

import enum
import itertools
import math
import os
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from taip.model import Instance, Program, TeamAssignment
from taip.proximity import FairAssignment, ProximityCache

DEFAULT_ENUMERATION_CAP = 10**7
DEFAULT_LP_VARIABLE_CAP = 10**6
LOG_FLOOR = 1e-12


class EnumerationCapExceeded(RuntimeError):
    def __init__(self, count: int, cap: int, what: str = "feasible assignments"):
        super().__init__(f"{count} {what} exceed the cap of {cap}")
        self.count = count
        self.cap = cap


class CountCase(enum.Enum):
    EXACT_FIT = "ExactFit"
    SURPLUS_STUDENTS = "SurplusStudents"
    SHORTAGE_STUDENTS = "ShortageStudents"


@dataclass
class CountBreakdown:
    case: CountCase
    buckets: List[Tuple[int, int]]
    total: int
    covers: List[Tuple[Tuple[str, ...], int]] = field(default_factory=list)


def count_case(inst: Instance) -> CountCase:
    demand = inst.total_demand
    if demand == inst.N:
        return CountCase.EXACT_FIT
    if demand < inst.N:
        return CountCase.SURPLUS_STUDENTS
    return CountCase.SHORTAGE_STUDENTS


def size_buckets(programs: Sequence[Program]) -> List[Tuple[int, int]]:
    """(team size, number of programs) pairs, sizes in first-seen order."""
    return list(Counter(p.team_size for p in programs).items())


def _placements(n: int, buckets: Sequence[Tuple[int, int]]) -> int:
    """Ways to seat ``n`` students into labeled programs; leftovers unlabeled."""
    demand = sum(m * k for m, k in buckets)
    denom = math.factorial(n - demand)
    for m, k in buckets:
        denom *= math.factorial(m) ** k
    return math.factorial(n) // denom


def cover(inst: Instance) -> List[Tuple[str, ...]]:
    """Maximal program subsets that fit into the student pool.

    Depth-first over programs in input order; a subset is kept when its demand
    fits and no left-out program would still fit in the remainder.
    """
    progs = inst.programs
    n = inst.N
    out: List[Tuple[str, ...]] = []

    def rec(i: int, chosen: List[Program], used: int) -> None:
        if i == len(progs):
            left = n - used
            ids = {p.id for p in chosen}
            if not any(p.team_size <= left for p in progs if p.id not in ids):
                out.append(tuple(p.id for p in chosen))
            return
        p = progs[i]
        if used + p.team_size <= n:
            chosen.append(p)
            rec(i + 1, chosen, used + p.team_size)
            chosen.pop()
        rec(i + 1, chosen, used)

    rec(0, [], 0)
    return out


def count_feasible(inst: Instance) -> CountBreakdown:
    case = count_case(inst)
    buckets = size_buckets(inst.programs)
    if case is not CountCase.SHORTAGE_STUDENTS:
        return CountBreakdown(case, buckets, _placements(inst.N, buckets))
    covers = []
    for subset in cover(inst):
        progs = [inst.program_by_id[pid] for pid in subset]
        covers.append((subset, _placements(inst.N, size_buckets(progs))))
    return CountBreakdown(case, buckets, sum(c for _, c in covers), covers)


def _assign(inst: Instance, programs: Sequence[Program]) -> Iterator[TeamAssignment]:
    students = [s.id for s in inst.students]
    teams: Dict[str, Tuple[str, ...]] = {}

    def rec(i: int, pool: List[str]) -> Iterator[TeamAssignment]:
        if i == len(programs):
            yield TeamAssignment(dict(teams))
            return
        p = programs[i]
        for team in itertools.combinations(pool, p.team_size):
            taken = set(team)
            teams[p.id] = team
            yield from rec(i + 1, [s for s in pool if s not in taken])
            del teams[p.id]

    yield from rec(0, students)


def enumerate_feasible(inst: Instance) -> Iterator[TeamAssignment]:
    """Every maximal feasible assignment, once each, in a fixed order."""
    if count_case(inst) is not CountCase.SHORTAGE_STUDENTS:
        yield from _assign(inst, inst.programs)
        return
    for subset in cover(inst):
        yield from _assign(inst, [inst.program_by_id[pid] for pid in subset])


def brute_force_optimum(
    inst: Instance, cap: int = DEFAULT_ENUMERATION_CAP, cache: Optional[ProximityCache] = None
) -> Tuple[TeamAssignment, float, Dict[str, FairAssignment]]:
    """Optimal assignment by enumeration.

    Ranks by number of staffed programs first, then by the product of team
    proximities; the first maximal assignment in enumeration order wins.
    """
    total = count_feasible(inst).total
    if total > cap:
        raise EnumerationCapExceeded(total, cap)
    cache = cache or ProximityCache(inst)
    best_key: Optional[Tuple[int, float]] = None
    best_g: Optional[TeamAssignment] = None
    for g in enumerate_feasible(inst):
        value = 1.0
        for p in inst.programs:
            if p.id in g:
                value *= cache.value(p.id, g[p.id])
        key = (len(g), value)
        if best_key is None or key > best_key:
            best_key, best_g = key, g
    etas = {pid: cache.best(pid, team)[0] for pid, team in best_g.items()}
    return best_g, best_key[1], etas


# -- LP export ---------------------------------------------------------------


class ObjectiveMode(enum.Enum):
    LOG1P = "log1p"
    LOG = "log"


@dataclass(frozen=True)
class LPSummary:
    variables: int
    program_constraints: int
    student_constraints: int

    @property
    def constraints(self) -> int:
        return self.program_constraints + self.student_constraints


def staffing_bonus(n_programs: int) -> float:
    """Per-variable constant added in log mode.

    Every log coefficient lies in [log(1e-12), 0], so a bonus exceeding the
    largest possible total spread makes the LP staff as many programs as it
    can before comparing products; without it the empty solution (objective
    0) would beat every staffed one.
    """
    return 1.0 + n_programs * -math.log(LOG_FLOOR)


def lp_coefficient(cp: float, mode: ObjectiveMode, bonus: float = 0.0) -> float:
    if mode is ObjectiveMode.LOG1P:
        return math.log1p(cp)
    return bonus + math.log(max(cp, LOG_FLOOR))


def _fmt(x: float) -> str:
    return format(x, ".12g")


def export_lp(
    inst: Instance,
    path: "str | os.PathLike[str]",
    objective_mode: ObjectiveMode = ObjectiveMode.LOG1P,
    cap: int = DEFAULT_LP_VARIABLE_CAP,
    cache: Optional[ProximityCache] = None,
) -> LPSummary:
    """Write the 0/1 program in LP text format.

    One binary ``x_<i>_<k>`` per program ``i`` (input order) and size-compliant
    team ``k`` (combination order over the students). Each variable is
    documented in a comment line ``\\ var <name> <program id> <student ids>``.

    ``LOG1P`` weighs each variable by ``log(1 + cp)``. ``LOG`` uses ``log(cp)``
    (floored at 1e-12) plus :func:`staffing_bonus`, which makes its optimum
    coincide with the exact optimum.
    """
    objective_mode = ObjectiveMode(objective_mode)
    n_vars = sum(math.comb(inst.N, p.team_size) for p in inst.programs)
    if n_vars > cap:
        raise EnumerationCapExceeded(n_vars, cap, what="LP variables")
    cache = cache or ProximityCache(inst)
    students = [s.id for s in inst.students]
    bonus = staffing_bonus(inst.M) if objective_mode is ObjectiveMode.LOG else 0.0

    variables: List[Tuple[str, str, Tuple[str, ...], float]] = []
    for i, p in enumerate(inst.programs):
        for k, team in enumerate(itertools.combinations(students, p.team_size)):
            coef = lp_coefficient(cache.value(p.id, team), objective_mode, bonus)
            variables.append((f"x_{i}_{k}", p.id, team, coef))

    by_program: Dict[str, List[str]] = {p.id: [] for p in inst.programs}
    by_student: Dict[str, List[str]] = {s: [] for s in students}
    for name, pid, team, _ in variables:
        by_program[pid].append(name)
        for s in team:
            by_student[s].append(name)

    def wrap(head: str, parts: Sequence[str], tail: str = "") -> None:
        # CPLEX rejects lines longer than 510 characters
        chunks = [" ".join(parts[k : k + 8]) for k in range(0, len(parts), 8)] or [""]
        lines.append(f" {head}: {chunks[0]}".rstrip())
        lines.extend(f"   {chunk}" for chunk in chunks[1:])
        if tail:
            lines[-1] += f" {tail}"

    def terms(names: Sequence[str]) -> List[str]:
        return [names[0]] + [f"+ {n}" for n in names[1:]]

    lines: List[str] = [f"\\ objective: {objective_mode.value}"]
    if bonus:
        lines.append(f"\\ staffing_bonus: {_fmt(bonus)}")
    for name, pid, team, _ in variables:
        lines.append(f"\\ var {name} {pid} {' '.join(team)}")
    lines.append("Maximize")
    wrap("obj", [f"{'+' if c >= 0 else '-'} {_fmt(abs(c))} {name}" for name, _, _, c in variables])
    lines.append("Subject To")
    n_prog = n_stud = 0
    for i, p in enumerate(inst.programs):
        if by_program[p.id]:
            wrap(f"prog_{i}", terms(by_program[p.id]), "<= 1")
            n_prog += 1
    for j, s in enumerate(students):
        if by_student[s]:
            wrap(f"stud_{j}", terms(by_student[s]), "<= 1")
            n_stud += 1
    lines.append("Binary")
    for name, _, _, _ in variables:
        lines.append(f" {name}")
    lines.append("End")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    return LPSummary(len(variables), n_prog, n_stud)

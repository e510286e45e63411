"""Fair competence assignments and competence proximity of students and teams.

A fair assignment distributes a program's required competencies over the team
so that every member carries at least one and at most ``ceil(|C|/|K|)``
competencies, and every competence has between one and
``floor(|K|/|C|) + 1`` members in charge of it.
"""

from __future__ import annotations

import itertools
import math
import threading
from fractions import Fraction
from typing import Dict, FrozenSet, Iterator, List, Mapping, Optional, Sequence, Tuple

from taip.model import Instance, Program

FairAssignment = Dict[str, FrozenSet[str]]


class InfeasibleFairAssignment(ValueError):
    pass


def fairness_bounds(team_size: int, n_competencies: int) -> Tuple[int, int]:
    """(max competencies per student, max students per competence)."""
    return -(-n_competencies // team_size), team_size // n_competencies + 1


def _coverer_options(team: Sequence[str], cap: int) -> List[Tuple[str, ...]]:
    return [combo for r in range(1, min(cap, len(team)) + 1) for combo in itertools.combinations(team, r)]


def enumerate_fair_assignments(p: Program, team: Sequence[str]) -> Iterator[FairAssignment]:
    """Yield every fair competence assignment of ``p`` over ``team`` once.

    Competencies are decided in program order, each choosing a nonempty set of
    members (smaller sets first, then lexicographic in ``team`` order).
    """
    team = tuple(team)
    if not team:
        raise InfeasibleFairAssignment("empty team")
    comps = p.competencies
    load_cap, cover_cap = fairness_bounds(len(team), len(comps))
    options = _coverer_options(team, cover_cap)
    load = dict.fromkeys(team, 0)
    picks: List[Tuple[str, ...]] = []

    def rec(i: int) -> Iterator[FairAssignment]:
        idle = sum(1 for v in load.values() if v == 0)
        if idle > (len(comps) - i) * cover_cap:
            return
        if i == len(comps):
            eta: Dict[str, set] = {s: set() for s in team}
            for c, members in zip(comps, picks):
                for s in members:
                    eta[s].add(c)
            yield {s: frozenset(v) for s, v in eta.items()}
            return
        for members in options:
            if any(load[s] >= load_cap for s in members):
                continue
            for s in members:
                load[s] += 1
            picks.append(members)
            yield from rec(i + 1)
            picks.pop()
            for s in members:
                load[s] -= 1

    yield from rec(0)


def is_fair(p: Program, eta: Mapping[str, FrozenSet[str]]) -> bool:
    team = list(eta)
    load_cap, cover_cap = fairness_bounds(len(team), len(p.competencies))
    if set().union(*eta.values()) != set(p.competencies):
        return False
    if any(not (1 <= len(v) <= load_cap) for v in eta.values()):
        return False
    for c in p.competencies:
        n = sum(1 for v in eta.values() if c in v)
        if not 1 <= n <= cover_cap:
            return False
    return True


def exact_prod(values) -> float:
    """Correctly rounded product of floats, independent of factor order."""
    acc = Fraction(1)
    for v in values:
        if v == 0.0:
            return 0.0
        acc *= Fraction(v)
    return float(acc)


def _factor(inst: Instance, p: Program, sid: str, c: str) -> float:
    return max(1.0 - p.weight[c], inst.cvg(c, sid))


def student_cp(inst: Instance, p: Program, sid: str, eta: Mapping[str, FrozenSet[str]]) -> float:
    """Competence proximity of one student for the competencies assigned to them."""
    if sid not in eta:
        raise KeyError(f"student {sid!r} has no entry in the competence assignment")
    return exact_prod(_factor(inst, p, sid, c) for c in eta[sid])


def team_cp(inst: Instance, p: Program, team: Sequence[str], eta: Mapping[str, FrozenSet[str]]) -> float:
    """Nash product of the members' proximities."""
    for sid in team:
        if sid not in eta:
            raise KeyError(f"student {sid!r} has no entry in the competence assignment")
    return exact_prod(_factor(inst, p, sid, c) for sid in team for c in eta[sid])


def best_fair_assignment(inst: Instance, p: Program, team: Sequence[str]) -> Tuple[FairAssignment, float]:
    """The fair assignment maximizing team proximity, with its value.

    Branch and bound over the same order as :func:`enumerate_fair_assignments`.
    Every factor lies in [0, 1], so a partial product bounds all of its
    completions. Leaves are scored with an exact product so that tied
    assignments compare equal whatever their factor order; the first maximal
    one in enumeration order wins.
    """
    team = tuple(team)
    if len(team) != p.team_size:
        raise ValueError(f"team of {len(team)} for program {p.id!r} requiring {p.team_size}")
    comps = p.competencies
    load_cap, cover_cap = fairness_bounds(len(team), len(comps))
    options = _coverer_options(team, cover_cap)
    factors = {(s, c): _factor(inst, p, s, c) for s in team for c in comps}
    option_value = [[math.prod(factors[(s, c)] for s in members) for members in options] for c in comps]
    load = dict.fromkeys(team, 0)
    picks: List[Tuple[str, ...]] = []
    best_value = -1.0
    best_picks: Optional[List[Tuple[str, ...]]] = None

    def rec(i: int, partial: float) -> None:
        nonlocal best_value, best_picks
        # float partials carry ~1e-15 relative error; cut only clear losers
        if partial < best_value * (1.0 - 1e-9):
            return
        idle = sum(1 for v in load.values() if v == 0)
        if idle > (len(comps) - i) * cover_cap:
            return
        if i == len(comps):
            value = exact_prod(factors[(s, c)] for c, members in zip(comps, picks) for s in members)
            if value > best_value:
                best_value, best_picks = value, list(picks)
            return
        for j, members in enumerate(options):
            if any(load[s] >= load_cap for s in members):
                continue
            for s in members:
                load[s] += 1
            picks.append(members)
            rec(i + 1, partial * option_value[i][j])
            picks.pop()
            for s in members:
                load[s] -= 1

    rec(0, 1.0)
    if best_picks is None:
        raise InfeasibleFairAssignment(
            f"no fair competence assignment for |K|={len(team)}, |C_p|={len(comps)}"
        )
    eta: Dict[str, set] = {s: set() for s in team}
    for c, members in zip(comps, best_picks):
        for s in members:
            eta[s].add(c)
    return {s: frozenset(v) for s, v in eta.items()}, best_value


class ProximityCache:
    """Per-run memo of the best fair assignment for (program, team) pairs.

    Keys use the members in canonical instance order, so the order in which a
    team is passed never matters.
    """

    def __init__(self, inst: Instance):
        self.inst = inst
        self._memo: Dict[Tuple[str, Tuple[str, ...]], Tuple[FairAssignment, float]] = {}
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    def best(self, pid: str, team: Sequence[str]) -> Tuple[FairAssignment, float]:
        key = (pid, self.inst.sort_students(team))
        hit = self._memo.get(key)
        if hit is not None:
            self.hits += 1
            return hit
        self.misses += 1
        result = best_fair_assignment(self.inst, self.inst.program_by_id[pid], key[1])
        with self._lock:
            self._memo.setdefault(key, result)
        return result

    def value(self, pid: str, team: Sequence[str]) -> float:
        return self.best(pid, team)[1]

    def __len__(self) -> int:
        return len(self._memo)

"""Anytime team allocation heuristic.

Two stages:

1. :func:`initial_allocation` staffs programs greedily, hardest program first,
   picking students round-robin over the program's competencies (hardest
   competence first) by best coverage.
2. :func:`improve` repeatedly draws two assigned programs and tries either an
   exhaustive re-split of their pooled members (when the pair looks promising)
   or random substitutions with unassigned students. Every
   ``local_search_period`` iterations a deterministic single-move sweep over
   all programs runs as well, falling back to three-way rotations and then to
   equal-value swaps that unlock an improving move.

The incumbent only ever changes on strict improvement, so the value reported
in the trace never decreases.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
import time
from dataclasses import asdict, dataclass, field
from typing import Dict, Iterator, List, NamedTuple, Optional, Sequence, Set, Tuple

import numpy as np

from taip.hardness import HardnessConfig, aggregate_program_hardness, competence_hardness
from taip.model import Instance, Program, TeamAssignment, errors_only, validate_assignment
from taip.proximity import ProximityCache

# relative margin a move must clear to count as an improvement
IMPROVEMENT_RTOL = 1e-12


class InvalidAssignmentError(ValueError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    seed: int = 0
    convergence_epsilon: float = 1e-6
    patience: int = 1000
    local_search_period: int = 50
    swap_attempts: int = 10
    hausdorff_threshold: float = 0.5
    hardness_guard: Optional[float] = None
    max_iterations: Optional[int] = None
    time_budget: Optional[float] = None
    rotations: bool = True
    plateau_moves: bool = True
    hardness: HardnessConfig = field(default_factory=HardnessConfig)

    def __post_init__(self) -> None:
        if not self.convergence_epsilon > 0:
            raise ValueError("convergence_epsilon must be positive")
        for name in ("patience", "local_search_period", "swap_attempts"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.max_iterations is not None and self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not 0.0 <= self.hausdorff_threshold <= 1.0:
            raise ValueError("hausdorff_threshold must lie in [0, 1]")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def as_header(self) -> Dict[str, object]:
        out = asdict(self)
        out["hardness"] = f"{self.hardness.aggregation.value}:{self.hardness.epsilon:g}"
        return out


class TraceRow(NamedTuple):
    elapsed_ms: float
    iteration: int
    event: str
    overall_cp: float


class SolveTrace:
    EVENTS = ("initial", "crossover", "swap", "local-search")

    def __init__(self, header: Optional[Dict[str, object]] = None):
        self.header = dict(header or {})
        self.rows: List[TraceRow] = []

    def add(self, elapsed_ms: float, iteration: int, event: str, overall_cp: float) -> None:
        if event not in self.EVENTS:
            raise ValueError(f"unknown trace event {event!r}")
        self.rows.append(TraceRow(elapsed_ms, iteration, event, overall_cp))

    def events(self) -> List[Tuple[int, str, float]]:
        """Rows without timestamps, for determinism checks."""
        return [(r.iteration, r.event, r.overall_cp) for r in self.rows]

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self) -> Iterator[TraceRow]:
        return iter(self.rows)

    def to_csv(self) -> str:
        buf = io.StringIO()
        for key, value in self.header.items():
            buf.write(f"# {key}={value}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(TraceRow._fields)
        for r in self.rows:
            writer.writerow([f"{r.elapsed_ms:.3f}", r.iteration, r.event, repr(r.overall_cp)])
        return buf.getvalue()

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(self.to_csv())

    @classmethod
    def from_csv(cls, text: str) -> "SolveTrace":
        header = {}
        lines = []
        for line in text.splitlines():
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition("=")
                header[key] = value
            elif line:
                lines.append(line)
        trace = cls(header)
        for row in csv.DictReader(lines):
            trace.add(float(row["elapsed_ms"]), int(row["iteration"]), row["event"], float(row["overall_cp"]))
        return trace


def _improves(new: float, old: float) -> bool:
    return new > old * (1.0 + IMPROVEMENT_RTOL)


# -- objective ---------------------------------------------------------------


def overall_cp(inst: Instance, g, cache: Optional[ProximityCache] = None) -> float:
    """Product of the best team proximity of every assigned program.

    When the instance has enough students for every program, an unassigned
    program contributes a factor 0. Otherwise unassigned programs are skipped.
    """
    errors = errors_only(validate_assignment(inst, g))
    if errors:
        raise InvalidAssignmentError("; ".join(str(e) for e in errors))
    cache = cache or ProximityCache(inst)
    return _product(inst, g, cache)


def _product(inst: Instance, g, cache: ProximityCache) -> float:
    if inst.total_demand <= inst.N and len(g) < inst.M:
        return 0.0
    value = 1.0
    for p in inst.programs:
        if p.id in g:
            value *= cache.value(p.id, g[p.id])
    return value


# -- stage one ---------------------------------------------------------------


def bench_select(inst: Instance, p: Program, pool: Sequence[str], hc: Dict[str, float]) -> Tuple[str, ...]:
    """Pick ``p.team_size`` students from ``pool``.

    Cycles through the program's competencies from hardest to easiest; each
    turn takes the remaining student with the best coverage of the current
    competence (earliest in ``pool`` on ties).
    """
    cycle = sorted(p.competencies, key=lambda c: -hc[c])
    chosen: List[str] = []
    for turn in range(p.team_size):
        c = cycle[turn % len(cycle)]
        best, best_cvg = None, -1.0
        for sid in pool:
            if sid in chosen:
                continue
            v = inst.cvg(c, sid)
            if v > best_cvg:
                best, best_cvg = sid, v
        chosen.append(best)
    return inst.sort_students(chosen)


def initial_allocation(
    inst: Instance,
    cfg: SolverConfig = SolverConfig(),
    order: Optional[Sequence[str]] = None,
    cache: Optional[ProximityCache] = None,
) -> Tuple[TeamAssignment, SolveTrace]:
    """Greedy allocation, hardest program first (or in the caller's ``order``).

    Programs that no longer fit in the remaining pool are skipped. After each
    team is formed, competence hardness is recomputed over the shrunken pool.
    """
    t0 = time.perf_counter()
    cache = cache or ProximityCache(inst)
    pool = [s.id for s in inst.students]
    comps = list(dict.fromkeys(c for p in inst.programs for c in p.competencies))
    pool_students = list(inst.students)
    hc = {c: competence_hardness(c, pool_students, inst) for c in comps} if pool_students else {}
    hp = {p.id: aggregate_program_hardness(p, hc, cfg.hardness) for p in inst.programs} if hc else {}

    if order is not None:
        ranked = [inst.program_by_id[pid] for pid in order]
    else:
        ranked = sorted(inst.programs, key=lambda p: -hp.get(p.id, 0.0))

    teams: Dict[str, Tuple[str, ...]] = {}
    for i, p in enumerate(ranked):
        if len(pool) < p.team_size:
            continue
        if cfg.hardness_guard is not None and not hp[p.id] < cfg.hardness_guard:
            continue
        team = bench_select(inst, p, pool, hc)
        teams[p.id] = team
        taken = set(team)
        pool = [s for s in pool if s not in taken]
        if not pool:
            break
        remaining = [inst.student_by_id[s] for s in pool]
        for q in ranked[i + 1 :]:
            for c in q.competencies:
                hc[c] = competence_hardness(c, remaining, inst)

    g = TeamAssignment({p.id: teams[p.id] for p in inst.programs if p.id in teams})
    trace = SolveTrace(cfg.as_header())
    trace.add((time.perf_counter() - t0) * 1e3, 0, "initial", _product(inst, g, cache))
    return g, trace


# -- stage two building blocks -----------------------------------------------


def hausdorff_similarity(inst: Instance, C1: Sequence[str], C2: Sequence[str]) -> float:
    """Max-of-mins coverage between two competence sets (higher = closer)."""
    if not C1 or not C2:
        raise ValueError("hausdorff_similarity needs two nonempty competence sets")
    a = min(inst.sim.coverage(c, C2) for c in C1)
    b = min(inst.sim.coverage(c, C1) for c in C2)
    return max(a, b)


def _improves_coverage(inst: Instance, donors: Sequence[str], p: Program, team: Sequence[str]) -> bool:
    for c in p.competencies:
        have = max(inst.cvg(c, s) for s in team)
        if any(inst.cvg(c, s) > have for s in donors):
            return True
    return False


def potentiality(inst: Instance, p1: str, p2: str, g, threshold: float = 0.5) -> bool:
    """Whether an exhaustive re-split of the two teams looks worthwhile.

    Requires similar competence requirements and at least one member of one
    team covering some competence of the other program strictly better than
    that program's own team does.
    """
    for pid in (p1, p2):
        if pid not in g:
            raise KeyError(f"program {pid!r} is not assigned")
    P1, P2 = inst.program_by_id[p1], inst.program_by_id[p2]
    if hausdorff_similarity(inst, P1.competencies, P2.competencies) < threshold:
        return False
    return _improves_coverage(inst, g[p2], P1, g[p1]) or _improves_coverage(inst, g[p1], P2, g[p2])


def crossover_splits(inst: Instance, p1: str, p2: str, g) -> Iterator[Tuple[Tuple[str, ...], Tuple[str, ...]]]:
    members = inst.sort_students(list(g[p1]) + list(g[p2]))
    m1 = inst.program_by_id[p1].team_size
    for K1 in itertools.combinations(members, m1):
        chosen = set(K1)
        yield K1, tuple(s for s in members if s not in chosen)


def exhaustive_crossover(
    inst: Instance, p1: str, p2: str, g, cache: Optional[ProximityCache] = None
) -> Tuple[float, Tuple[str, ...], Tuple[str, ...]]:
    """Best split of the two teams' pooled members into teams for p1 and p2."""
    cache = cache or ProximityCache(inst)
    best = None
    for K1, K2 in crossover_splits(inst, p1, p2, g):
        v = cache.value(p1, K1) * cache.value(p2, K2)
        if best is None or v > best[0]:
            best = (v, K1, K2)
    return best


def local_swaps(
    inst: Instance,
    p1: str,
    p2: str,
    g,
    available: Sequence[str],
    cfg: SolverConfig = SolverConfig(),
    rng: Optional[np.random.Generator] = None,
    cache: Optional[ProximityCache] = None,
) -> Tuple[float, Tuple[str, ...], Tuple[str, ...]]:
    """Random substitutions of a team member by an available student.

    Returns the first strictly improving pair found within
    ``cfg.swap_attempts`` tries, else the incumbent.
    """
    cache = cache or ProximityCache(inst)
    rng = rng if rng is not None else np.random.default_rng(cfg.seed)
    K1, K2 = tuple(g[p1]), tuple(g[p2])
    incumbent = cache.value(p1, K1) * cache.value(p2, K2)
    if not available:
        return incumbent, K1, K2
    slots = [(0, i) for i in range(len(K1))] + [(1, i) for i in range(len(K2))]
    for _ in range(cfg.swap_attempts):
        side, i = slots[int(rng.integers(len(slots)))]
        newcomer = available[int(rng.integers(len(available)))]
        teams = [list(K1), list(K2)]
        teams[side][i] = newcomer
        N1, N2 = inst.sort_students(teams[0]), inst.sort_students(teams[1])
        v = cache.value(p1, N1) * cache.value(p2, N2)
        if _improves(v, incumbent):
            return v, N1, N2
    return incumbent, K1, K2


def _seat_move(
    inst: Instance, teams: Dict[str, List[str]], owner: Dict[str, str], pid: str, seat: int, cache: ProximityCache
) -> Optional[Dict[str, List[str]]]:
    """First strictly improving replacement of one seat, as team updates."""
    s = teams[pid][seat]
    base_p = cache.value(pid, teams[pid])
    for t in inst.students:
        t = t.id
        q = owner.get(t)
        if q == pid:
            continue
        new_p = list(teams[pid])
        new_p[seat] = t
        if q is None:
            if _improves(cache.value(pid, new_p), base_p):
                return {pid: new_p}
        else:
            new_q = [s if x == t else x for x in teams[q]]
            old = base_p * cache.value(q, teams[q])
            if _improves(cache.value(pid, new_p) * cache.value(q, new_q), old):
                return {pid: new_p, q: new_q}
    return None


def _apply(teams: Dict[str, List[str]], owner: Dict[str, str], updates: Dict[str, List[str]]) -> None:
    for pid in updates:
        for s in teams[pid]:
            if owner.get(s) == pid:
                del owner[s]
    for pid, team in updates.items():
        teams[pid] = team
        for s in team:
            owner[s] = pid


def _single_moves(inst: Instance, teams: Dict[str, List[str]], cache: ProximityCache) -> bool:
    owner = {s: pid for pid, team in teams.items() for s in team}
    improved = False
    for p in inst.programs:
        if p.id not in teams:
            continue
        for seat in range(p.team_size):
            updates = _seat_move(inst, teams, owner, p.id, seat, cache)
            if updates is not None:
                _apply(teams, owner, updates)
                improved = True
    return improved


def _plateau_step(inst: Instance, teams: Dict[str, List[str]], cache: ProximityCache) -> bool:
    """Apply a value-neutral swap between two teams if it unlocks an improving move.

    Only moves that touch one of the two swapped teams can have changed, so
    checking their seats is enough to decide whether the swap helps.
    """
    pids = [p.id for p in inst.programs if p.id in teams]
    owner = {s: pid for pid, team in teams.items() for s in team}
    for a, b in itertools.combinations(pids, 2):
        old = cache.value(a, teams[a]) * cache.value(b, teams[b])
        for i, x in enumerate(teams[a]):
            for j, y in enumerate(teams[b]):
                new_a, new_b = list(teams[a]), list(teams[b])
                new_a[i], new_b[j] = y, x
                if cache.value(a, new_a) * cache.value(b, new_b) != old:
                    continue
                trial, trial_owner = dict(teams), dict(owner)
                _apply(trial, trial_owner, {a: new_a, b: new_b})
                for pid in (a, b):
                    for seat in range(len(trial[pid])):
                        updates = _seat_move(inst, trial, trial_owner, pid, seat, cache)
                        if updates is not None:
                            _apply(trial, trial_owner, updates)
                            teams.update(trial)
                            return True
    return False


def _rotation(inst: Instance, teams: Dict[str, List[str]], available: Sequence[str], cache: ProximityCache) -> bool:
    """Apply the first improving three-way cyclic move, if any.

    A rotation moves one student from program a to b, one from b to c and
    one from c back to a; c may also be the pool of unassigned students, which
    makes the move an ejection chain through the pool.
    """
    pids = [p.id for p in inst.programs if p.id in teams]
    value = {pid: cache.value(pid, teams[pid]) for pid in pids}
    pool = list(available)
    for a, b in itertools.permutations(pids, 2):
        for c in [pid for pid in pids if pid not in (a, b)] + [None]:
            c_members = teams[c] if c is not None else pool
            old = value[a] * value[b] * (value[c] if c is not None else 1.0)
            for i, x in enumerate(teams[a]):
                for j, y in enumerate(teams[b]):
                    # x: a -> b, y: b -> c, z: c -> a
                    new_b = list(teams[b])
                    new_b[j] = x
                    vb = cache.value(b, new_b)
                    for k, z in enumerate(c_members):
                        new_a = list(teams[a])
                        new_a[i] = z
                        new = cache.value(a, new_a) * vb
                        if c is not None:
                            new_c = list(teams[c])
                            new_c[k] = y
                            new *= cache.value(c, new_c)
                        if _improves(new, old):
                            teams[a], teams[b] = new_a, new_b
                            if c is not None:
                                teams[c] = new_c
                            return True
    return False


def local_search(
    inst: Instance,
    g,
    available: Sequence[str],
    cache: Optional[ProximityCache] = None,
    rotations: bool = True,
    plateau: bool = True,
) -> Tuple[TeamAssignment, List[str], float]:
    """One first-improvement sweep of single-student moves.

    For every assigned program and every seat, tries every other student:
    unassigned students are substituted in, students of another team are
    swapped. The first strictly improving move for a seat is applied before
    moving to the next seat. When the sweep finds nothing and ``rotations`` is
    set, one improving three-way rotation is applied instead, if one exists.
    Failing that, and with ``plateau`` set, one equal-value swap between two
    teams is tried together with an improving move it makes possible.
    """
    cache = cache or ProximityCache(inst)
    teams = {pid: list(team) for pid, team in g.items()}
    moved = _single_moves(inst, teams, cache)
    if not moved and rotations:
        moved = _rotation(inst, teams, available, cache)
    if not moved and plateau:
        _plateau_step(inst, teams, cache)
    out = TeamAssignment({pid: inst.sort_students(team) for pid, team in teams.items()})
    return out, out.available(inst), _product(inst, out, cache)


# -- stage two ---------------------------------------------------------------


@dataclass
class SolveStats:
    iterations: int = 0
    crossovers: int = 0
    swaps: int = 0
    local_searches: int = 0
    commits: int = 0
    max_drift: float = 0.0
    stop_reason: str = ""


def improve(
    inst: Instance,
    g0,
    cfg: SolverConfig = SolverConfig(),
    cache: Optional[ProximityCache] = None,
    trace: Optional[SolveTrace] = None,
    rng: Optional[np.random.Generator] = None,
    stats: Optional[SolveStats] = None,
    t0: Optional[float] = None,
) -> Tuple[TeamAssignment, SolveTrace]:
    """Anytime improvement of a valid assignment; see the module docstring."""
    errors = errors_only(validate_assignment(inst, g0))
    if errors:
        raise InvalidAssignmentError("; ".join(str(e) for e in errors))
    cache = cache or ProximityCache(inst)
    rng = rng if rng is not None else np.random.default_rng(cfg.seed)
    stats = stats if stats is not None else SolveStats()
    t0 = time.perf_counter() if t0 is None else t0
    if trace is None:
        trace = SolveTrace(cfg.as_header())
        trace.add((time.perf_counter() - t0) * 1e3, 0, "initial", _product(inst, g0, cache))

    def elapsed_ms() -> float:
        return (time.perf_counter() - t0) * 1e3

    g = TeamAssignment({pid: inst.sort_students(team) for pid, team in g0.items()})
    available = g.available(inst)
    assigned = [p.id for p in inst.programs if p.id in g]
    best_seen = trace.rows[-1].overall_cp if trace.rows else _product(inst, g, cache)

    def record(iteration: int, event: str, value: float) -> None:
        nonlocal best_seen
        if value > best_seen:
            best_seen = value
            trace.add(elapsed_ms(), iteration, event, value)

    if len(assigned) < 2:
        g, available, value = local_search(inst, g, available, cache, cfg.rotations, cfg.plateau_moves)
        stats.local_searches += 1
        stats.stop_reason = "fewer than two assigned programs"
        record(0, "local-search", value)
        return g, trace

    current_cp = _product(inst, g, cache)
    no_improve = 0
    iteration = 0
    while True:
        if no_improve >= cfg.patience:
            stats.stop_reason = "patience"
            break
        if 1.0 - current_cp <= cfg.convergence_epsilon:
            stats.stop_reason = "converged"
            break
        if cfg.max_iterations is not None and iteration >= cfg.max_iterations:
            stats.stop_reason = "max_iterations"
            break
        if cfg.time_budget is not None and time.perf_counter() - t0 >= cfg.time_budget:
            stats.stop_reason = "time_budget"
            break
        iteration += 1
        stats.iterations = iteration
        i, j = rng.choice(len(assigned), size=2, replace=False)
        pk, pl = assigned[int(i)], assigned[int(j)]
        pair_cp = cache.value(pk, g[pk]) * cache.value(pl, g[pl])
        if potentiality(inst, pk, pl, g, cfg.hausdorff_threshold):
            new_cp, Kk, Kl = exhaustive_crossover(inst, pk, pl, g, cache)
            event = "crossover"
            stats.crossovers += 1
        else:
            new_cp, Kk, Kl = local_swaps(inst, pk, pl, g, available, cfg, rng, cache)
            event = "swap"
            stats.swaps += 1
        improved = False
        if _improves(new_cp, pair_cp):
            g = g.replace({pk: Kk, pl: Kl})
            available = g.available(inst)
            if pair_cp > 0:
                current_cp = current_cp * (new_cp / pair_cp)
            else:
                current_cp = _product(inst, g, cache)
            scratch = _product(inst, g, cache)
            if scratch > 0:
                stats.max_drift = max(stats.max_drift, abs(current_cp - scratch) / scratch)
            stats.commits += 1
            record(iteration, event, scratch)
            improved = True

        if iteration % cfg.local_search_period == 0:
            before = _product(inst, g, cache)
            g, available, current_cp = local_search(inst, g, available, cache, cfg.rotations, cfg.plateau_moves)
            stats.local_searches += 1
            if _improves(current_cp, before):
                record(iteration, "local-search", current_cp)
                improved = True

        no_improve = 0 if improved else no_improve + 1
    return g, trace


@dataclass
class SolveResult:
    assignment: TeamAssignment
    overall_cp: float
    trace: SolveTrace
    stats: SolveStats
    cache: ProximityCache = field(repr=False)

    def to_dict(self, inst: Instance) -> Dict:
        return assignment_document(inst, self.assignment, self.cache)


def solve(inst: Instance, cfg: SolverConfig = SolverConfig(), order: Optional[Sequence[str]] = None) -> SolveResult:
    """Run both stages with a single seeded generator."""
    t0 = time.perf_counter()
    cache = ProximityCache(inst)
    rng = np.random.default_rng(cfg.seed)
    stats = SolveStats()
    g0, trace = initial_allocation(inst, cfg, order, cache)
    g, trace = improve(inst, g0, cfg, cache, trace, rng, stats, t0)
    return SolveResult(g, _product(inst, g, cache), trace, stats, cache)


def assignment_document(inst: Instance, g, cache: Optional[ProximityCache] = None) -> Dict:
    cache = cache or ProximityCache(inst)
    per_program = {}
    for p in inst.programs:
        if p.id not in g:
            continue
        eta, value = cache.best(p.id, g[p.id])
        per_program[p.id] = {
            "cp": value,
            "eta": {sid: [c for c in p.competencies if c in eta[sid]] for sid in inst.sort_students(eta)},
        }
    return {
        "assignment": {pid: list(inst.sort_students(team)) for pid, team in g.items()},
        "overall_cp": overall_cp(inst, g, cache),
        "per_program": per_program,
    }

"""Programs, students, instances and team assignments."""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

from taip.ontology import CompetenceOntology, SimilarityParams, SimilarityTable


@dataclass(frozen=True)
class Program:
    """An internship program: required competencies with level and weight,
    and the size of the team it needs."""

    id: str
    competencies: Tuple[str, ...]
    level: Mapping[str, float]
    weight: Mapping[str, float]
    team_size: int

    @classmethod
    def make(
        cls, id: str, weights: Mapping[str, float], team_size: int, levels: Optional[Mapping[str, float]] = None
    ) -> "Program":
        comps = tuple(weights)
        levels = dict(levels) if levels is not None else {c: 1.0 for c in comps}
        return cls(id, comps, levels, dict(weights), team_size)


@dataclass(frozen=True)
class Student:
    id: str
    competencies: Tuple[str, ...]
    level: Mapping[str, float]

    @classmethod
    def make(cls, id: str, competencies: Iterable[str], levels: Optional[Mapping[str, float]] = None) -> "Student":
        comps = tuple(dict.fromkeys(competencies))
        levels = dict(levels) if levels is not None else {c: 1.0 for c in comps}
        return cls(id, comps, levels)


@dataclass(frozen=True)
class Violation:
    kind: str
    message: str
    severity: str = "error"

    def __str__(self) -> str:
        return f"[{self.severity}] {self.kind}: {self.message}"


class Instance:
    """A problem instance. Treat as immutable once built.

    Students and programs keep their input order; that order is the canonical
    order used for every tie-break in the package.
    """

    def __init__(
        self,
        ontology: CompetenceOntology,
        students: Sequence[Student],
        programs: Sequence[Program],
        sim_params: SimilarityParams = SimilarityParams(),
        metadata: Optional[Mapping] = None,
    ):
        self.ontology = ontology
        self.students: Tuple[Student, ...] = tuple(students)
        self.programs: Tuple[Program, ...] = tuple(programs)
        self.sim_params = sim_params
        self.metadata: Dict = dict(metadata or {})
        self.sim = SimilarityTable(ontology, sim_params)
        self.student_by_id: Dict[str, Student] = {s.id: s for s in self.students}
        self.program_by_id: Dict[str, Program] = {p.id: p for p in self.programs}
        self.student_rank: Dict[str, int] = {s.id: i for i, s in enumerate(self.students)}
        self._cvg: Dict[Tuple[str, str], float] = {}

    @property
    def N(self) -> int:
        return len(self.students)

    @property
    def M(self) -> int:
        return len(self.programs)

    @property
    def total_demand(self) -> int:
        return sum(p.team_size for p in self.programs)

    def cvg(self, c: str, student_id: str) -> float:
        """Coverage of competence ``c`` by a student's acquired competencies."""
        key = (c, student_id)
        try:
            return self._cvg[key]
        except KeyError:
            value = self.sim.coverage(c, self.student_by_id[student_id].competencies)
            self._cvg[key] = value
            return value

    def sort_students(self, ids: Iterable[str]) -> Tuple[str, ...]:
        return tuple(sorted(ids, key=self.student_rank.__getitem__))

    def __repr__(self) -> str:
        return f"Instance(N={self.N}, M={self.M}, ontology={self.ontology!r})"

    # -- serialization ----------------------------------------------------

    def to_dict(self, ontology_ref: Optional[str] = None) -> Dict:
        return {
            "ontology": ontology_ref if ontology_ref is not None else self.ontology.to_dict(),
            "sim_params": self.sim_params.to_dict(),
            "students": [
                {"id": s.id, "competencies": {c: s.level[c] for c in s.competencies}} for s in self.students
            ],
            "programs": [
                {
                    "id": p.id,
                    "team_size": p.team_size,
                    "competencies": {c: {"level": p.level[c], "weight": p.weight[c]} for c in p.competencies},
                }
                for p in self.programs
            ],
            **({"metadata": self.metadata} if self.metadata else {}),
        }

    @classmethod
    def from_dict(cls, data: Mapping, base_dir: "str | os.PathLike[str] | None" = None) -> "Instance":
        """Parse an instance document.

        ``ontology`` is either an inline ontology object or a path to an
        ontology file, resolved relative to ``base_dir``.
        """
        onto = data["ontology"]
        if isinstance(onto, str):
            path = onto if base_dir is None else os.path.join(base_dir, onto)
            ontology = CompetenceOntology.load(path)
        else:
            ontology = CompetenceOntology.from_dict(onto)
        students = [
            Student(str(s["id"]), tuple(s["competencies"]), {c: float(v) for c, v in s["competencies"].items()})
            for s in data.get("students", [])
        ]
        programs = []
        for p in data.get("programs", []):
            comps = p["competencies"]
            programs.append(
                Program(
                    str(p["id"]),
                    tuple(comps),
                    {c: float(v.get("level", 1.0)) for c, v in comps.items()},
                    {c: float(v["weight"]) for c, v in comps.items()},
                    int(p["team_size"]),
                )
            )
        params = SimilarityParams.from_dict(data.get("sim_params", {}))
        return cls(ontology, students, programs, params, data.get("metadata"))

    @classmethod
    def load(cls, path: "str | os.PathLike[str]") -> "Instance":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh), base_dir=os.path.dirname(os.path.abspath(path)))

    def save(self, path: "str | os.PathLike[str]") -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=1)
            fh.write("\n")


class TeamAssignment(Mapping[str, Tuple[str, ...]]):
    """Partial map from program id to a team of student ids.

    Teams are stored as tuples; callers that need a canonical form should
    build them through :meth:`Instance.sort_students`.
    """

    def __init__(self, teams: Optional[Mapping[str, Iterable[str]]] = None):
        self._teams: Dict[str, Tuple[str, ...]] = {p: tuple(k) for p, k in (teams or {}).items()}

    def __getitem__(self, pid: str) -> Tuple[str, ...]:
        return self._teams[pid]

    def __iter__(self) -> Iterator[str]:
        return iter(self._teams)

    def __len__(self) -> int:
        return len(self._teams)

    def __repr__(self) -> str:
        return f"TeamAssignment({self._teams!r})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Mapping):
            return NotImplemented
        return self.canonical() == {p: frozenset(k) for p, k in other.items()}

    def __hash__(self) -> int:
        return hash(frozenset(self.canonical().items()))

    def canonical(self) -> Dict[str, frozenset]:
        return {p: frozenset(k) for p, k in self._teams.items()}

    def replace(self, updates: Mapping[str, Iterable[str]]) -> "TeamAssignment":
        teams = dict(self._teams)
        teams.update({p: tuple(k) for p, k in updates.items()})
        return TeamAssignment(teams)

    def assigned_students(self) -> set:
        return {s for team in self._teams.values() for s in team}

    def available(self, inst: Instance) -> List[str]:
        """Unassigned students of ``inst`` in canonical order."""
        used = self.assigned_students()
        return [s.id for s in inst.students if s.id not in used]

    def to_dict(self) -> Dict[str, List[str]]:
        return {p: list(k) for p, k in self._teams.items()}


def validate_instance(inst: Instance) -> List[Violation]:
    """Return every well-formedness problem of ``inst``; empty when valid."""
    out: List[Violation] = []
    onto = inst.ontology

    def dupes(ids: Sequence[str]) -> List[str]:
        seen, dup = set(), []
        for i in ids:
            if i in seen and i not in dup:
                dup.append(i)
            seen.add(i)
        return dup

    for d in dupes([s.id for s in inst.students]):
        out.append(Violation("duplicate-id", f"student id {d!r} is used more than once"))
    for d in dupes([p.id for p in inst.programs]):
        out.append(Violation("duplicate-id", f"program id {d!r} is used more than once"))

    for s in inst.students:
        if not s.competencies:
            out.append(Violation("empty-competencies", f"student {s.id!r} has no competencies"))
        for c in s.competencies:
            if c not in onto:
                out.append(Violation("unknown-competence", f"student {s.id!r} references {c!r}"))
        if set(s.level) != set(s.competencies):
            out.append(Violation("level-domain", f"student {s.id!r} levels do not match its competencies"))
        for c, v in s.level.items():
            if not (v >= 0 and math.isfinite(v)):
                out.append(Violation("level-range", f"student {s.id!r} level for {c!r} is {v}, expected >= 0"))

    for p in inst.programs:
        if not p.competencies:
            out.append(Violation("empty-competencies", f"program {p.id!r} has no competencies"))
        if len(set(p.competencies)) != len(p.competencies):
            out.append(Violation("duplicate-id", f"program {p.id!r} lists a competence twice"))
        for c in p.competencies:
            if c not in onto:
                out.append(Violation("unknown-competence", f"program {p.id!r} references {c!r}"))
        if set(p.weight) != set(p.competencies) or set(p.level) != set(p.competencies):
            out.append(Violation("level-domain", f"program {p.id!r} weights/levels do not match its competencies"))
        for c, w in p.weight.items():
            if not (0.0 < w <= 1.0):
                out.append(Violation("weight-range", f"program {p.id!r} weight for {c!r} is {w}, outside (0,1]"))
        for c, v in p.level.items():
            if not (v >= 0 and math.isfinite(v)):
                out.append(Violation("level-range", f"program {p.id!r} level for {c!r} is {v}, expected >= 0"))
        if not (isinstance(p.team_size, int) and p.team_size >= 1):
            out.append(Violation("team-size", f"program {p.id!r} team size {p.team_size!r} is not a positive integer"))
    return out


def student_program_coverage(inst: Instance, s: Student, p: Program) -> float:
    """Product over the program's required competencies of the student's
    best similarity for each."""
    value = 1.0
    for c in p.competencies:
        value *= inst.sim.coverage(c, s.competencies)
    return value


def validate_assignment(inst: Instance, g: Mapping[str, Iterable[str]]) -> List[Violation]:
    """Check disjointness and size-compliance of a (partial) assignment.

    Unassigned programs are reported as warnings. Runs in time linear in the
    total number of assigned seats.
    """
    out: List[Violation] = []
    owner: Dict[str, str] = {}
    for pid, team in g.items():
        prog = inst.program_by_id.get(pid)
        if prog is None:
            out.append(Violation("unknown-program", f"program {pid!r} is not part of the instance"))
            continue
        team = list(team)
        if len(team) != prog.team_size:
            out.append(
                Violation("team-size", f"program {pid!r} has {len(team)} members, requires {prog.team_size}")
            )
        if len(set(team)) != len(team):
            out.append(Violation("duplicate-member", f"program {pid!r} lists a student twice"))
        for sid in team:
            if sid not in inst.student_by_id:
                out.append(Violation("unknown-student", f"student {sid!r} in program {pid!r} does not exist"))
            elif sid in owner and owner[sid] != pid:
                out.append(
                    Violation("disjointness", f"student {sid!r} is in both {owner[sid]!r} and {pid!r}")
                )
            else:
                owner[sid] = pid
    for p in inst.programs:
        if p.id not in g:
            out.append(Violation("unassigned", f"program {p.id!r} has no team", severity="warning"))
    return out


def errors_only(report: Iterable[Violation]) -> List[Violation]:
    return [v for v in report if v.severity == "error"]

"""Fuzzy-entropy hardness of competencies and programs.

Coverage values are read as fuzzy membership degrees. Plain fuzzy entropy
cannot tell "everyone covers c" from "nobody covers c" (both give 0), so the
entropy term is reflected below 0.5: coverages under 0.5 push hardness above
the entropy of the 0.5 midpoint instead of back down to 0.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Dict, Iterable, Sequence

from taip.model import Instance, Program, Student

LN_HALF = math.log(0.5)
MAX_COMPETENCE_HARDNESS = -2.0 * LN_HALF


class Aggregation(enum.Enum):
    AS_WRITTEN = "as-written"
    WEIGHTED_MEAN = "weighted-mean"


@dataclass(frozen=True)
class HardnessConfig:
    """``AS_WRITTEN`` averages ``1 / (h(c) + epsilon)`` over the program's
    competencies, weighted by importance. ``WEIGHTED_MEAN`` averages ``h(c)``
    itself, so programs with hard, important competencies score high."""

    epsilon: float = 1e-6
    aggregation: Aggregation = Aggregation.AS_WRITTEN

    def __post_init__(self) -> None:
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if not isinstance(self.aggregation, Aggregation):
            object.__setattr__(self, "aggregation", Aggregation(self.aggregation))


def _xlogx(x: float) -> float:
    return 0.0 if x == 0.0 else x * math.log(x)


def entropy_term(x: float) -> float:
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"entropy_term is defined on [0, 1], got {x}")
    if x >= 0.5:
        return _xlogx(x) + _xlogx(1.0 - x)
    return 4.0 * _xlogx(0.5) - _xlogx(x) - _xlogx(1.0 - x)


def competence_hardness_from_coverages(coverages: Sequence[float]) -> float:
    if len(coverages) == 0:
        raise ValueError("competence hardness needs at least one student")
    return -math.fsum(entropy_term(x) for x in coverages) / len(coverages)


def competence_hardness(c: str, students: Iterable[Student], inst: Instance) -> float:
    """Mean reflected fuzzy entropy of the students' coverage of ``c``.

    0 when every student covers ``c`` perfectly, ``-2 ln 0.5`` when nobody
    covers it at all.
    """
    return competence_hardness_from_coverages([inst.cvg(c, s.id) for s in students])


def aggregate_program_hardness(
    p: Program, comp_hardness: Dict[str, float], cfg: HardnessConfig = HardnessConfig()
) -> float:
    total_w = math.fsum(p.weight[c] for c in p.competencies)
    if cfg.aggregation is Aggregation.AS_WRITTEN:
        terms = (p.weight[c] / (comp_hardness[c] + cfg.epsilon) for c in p.competencies)
    else:
        terms = (p.weight[c] * comp_hardness[c] for c in p.competencies)
    return math.fsum(terms) / total_w


def program_hardness(
    p: Program, students: Sequence[Student], inst: Instance, cfg: HardnessConfig = HardnessConfig()
) -> float:
    students = list(students)
    if not students:
        raise ValueError("program hardness needs at least one student")
    hc = {c: competence_hardness(c, students, inst) for c in p.competencies}
    return aggregate_program_hardness(p, hc, cfg)


def hardness_curve(samples: int = 101) -> list:
    """``(x, hardness)`` pairs for a population whose coverage is uniformly x."""
    if samples < 2:
        raise ValueError("need at least two samples")
    xs = [i / (samples - 1) for i in range(samples)]
    return [(x, 0.0 - entropy_term(x)) for x in xs]

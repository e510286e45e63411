"""Seeded synthetic ontologies and instances."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Dict, List, Tuple

import numpy as np

from taip.model import Instance, Program, Student
from taip.ontology import CompetenceOntology, SimilarityParams

ENDOWMENT_POLICY = "one-match-per-required-competence"


class GenerationError(ValueError):
    pass


@dataclass(frozen=True)
class GeneratorConfig:
    seed: int = 0
    num_programs: int = 10
    team_size_range: Tuple[int, int] = (1, 3)
    competencies_per_program_range: Tuple[int, int] = (2, 5)
    weight_mu_range: Tuple[float, float] = (0.0, 1.0)
    weight_sigma_range: Tuple[float, float] = (0.01, 0.1)
    extra_students: int = 0
    ontology_branching: int = 4
    ontology_depth: int = 4

    def __post_init__(self) -> None:
        for name in ("team_size_range", "competencies_per_program_range", "weight_mu_range", "weight_sigma_range"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ValueError(f"{name} is empty: {(lo, hi)}")
        if self.team_size_range[0] < 1 or self.competencies_per_program_range[0] < 1:
            raise ValueError("team sizes and competence counts must be >= 1")
        if self.num_programs < 1:
            raise ValueError("num_programs must be >= 1")
        if self.extra_students < 0:
            raise ValueError("extra_students must be >= 0")
        if self.ontology_branching < 1 or self.ontology_depth < 1:
            raise ValueError("ontology branching and depth must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


def generate_ontology(cfg: GeneratorConfig, attempt: int = 0) -> CompetenceOntology:
    """Random tree: every node above ``ontology_depth`` gets 1..branching children.

    ``attempt`` selects an independent draw for the same seed.
    """
    rng = np.random.default_rng([cfg.seed, 0, attempt])
    edges: List[Tuple[str, str]] = []
    frontier = ["c0"]
    counter = 1
    for _ in range(cfg.ontology_depth):
        nxt = []
        for node in frontier:
            for _ in range(int(rng.integers(1, cfg.ontology_branching + 1))):
                child = f"c{counter}"
                counter += 1
                edges.append((node, child))
                nxt.append(child)
        frontier = nxt
    return CompetenceOntology.from_edges("c0", edges)


def _weight(rng: np.random.Generator, cfg: GeneratorConfig) -> float:
    mu = rng.uniform(*cfg.weight_mu_range)
    sigma = rng.uniform(*cfg.weight_sigma_range)
    while True:
        w = float(rng.normal(mu, sigma))
        if 0.0 < w <= 1.0:
            return w


def _student(rng: np.random.Generator, ont: CompetenceOntology, sid: str, p: Program) -> Student:
    comps = []
    for c in p.competencies:
        options = (c,) + ont.children(c)
        comps.append(options[int(rng.integers(len(options)))])
    return Student.make(sid, comps)


def generate_instance(
    ont: CompetenceOntology, cfg: GeneratorConfig, sim_params: SimilarityParams = SimilarityParams()
) -> Instance:
    """Programs and students drawn from ``ont``.

    Each program gets a uniform team size and competence count, distinct
    competencies (root excluded), unit levels and truncated-normal weights.
    Each program then spawns ``team_size`` students holding, for every required
    competence, either that competence or one of its children.
    """
    rng = np.random.default_rng([cfg.seed, 1])
    pickable = list(ont.nodes[1:])
    if len(pickable) < cfg.competencies_per_program_range[1]:
        raise GenerationError(
            f"ontology has {len(pickable)} non-root nodes, fewer than "
            f"{cfg.competencies_per_program_range[1]} competencies per program"
        )
    programs: List[Program] = []
    for i in range(cfg.num_programs):
        m = int(rng.integers(cfg.team_size_range[0], cfg.team_size_range[1] + 1))
        k = int(rng.integers(cfg.competencies_per_program_range[0], cfg.competencies_per_program_range[1] + 1))
        picks = rng.choice(len(pickable), size=k, replace=False)
        comps = [pickable[int(j)] for j in picks]
        weights: Dict[str, float] = {c: _weight(rng, cfg) for c in comps}
        programs.append(Program.make(f"p{i}", weights, m))

    seeds = [p for p in programs for _ in range(p.team_size)]
    seeds += [programs[int(rng.integers(len(programs)))] for _ in range(cfg.extra_students)]
    # shuffled so that canonical student order does not reveal the seed program
    order = rng.permutation(len(seeds))
    students = [_student(rng, ont, f"s{i}", seeds[int(j)]) for i, j in enumerate(order)]

    meta = {"generator": {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(cfg).items()}}
    meta["endowment"] = ENDOWMENT_POLICY
    return Instance(ont, students, programs, sim_params, meta)


def generate(cfg: GeneratorConfig, sim_params: SimilarityParams = SimilarityParams()) -> Instance:
    """Ontology plus instance; redraws the ontology (up to 100 times) while it
    is too small to supply a program's competencies."""
    need = cfg.competencies_per_program_range[1] + 1
    for attempt in range(100):
        ont = generate_ontology(cfg, attempt)
        if len(ont) >= need:
            return generate_instance(ont, cfg, sim_params)
    raise GenerationError(f"could not draw an ontology with {need} nodes; raise branching or depth")

"""Anytime allocation of student teams to internship programs."""

from taip.generate import GeneratorConfig, generate, generate_instance, generate_ontology
from taip.hardness import Aggregation, HardnessConfig, competence_hardness, entropy_term, program_hardness
from taip.model import (
    Instance,
    Program,
    Student,
    TeamAssignment,
    Violation,
    student_program_coverage,
    validate_assignment,
    validate_instance,
)
from taip.ontology import (
    CompetenceOntology,
    OntologyError,
    SimilarityParams,
    UnknownCompetenceError,
    coverage,
    semantic_similarity,
    shortest_path_len,
    subsumer_depth,
)
from taip.oracle import (
    CountBreakdown,
    CountCase,
    ObjectiveMode,
    brute_force_optimum,
    count_feasible,
    enumerate_feasible,
    export_lp,
)
from taip.proximity import (
    ProximityCache,
    best_fair_assignment,
    enumerate_fair_assignments,
    student_cp,
    team_cp,
)
from taip.solver import (
    SolveResult,
    SolverConfig,
    SolveTrace,
    improve,
    initial_allocation,
    overall_cp,
    solve,
)

__version__ = "0.1.0"

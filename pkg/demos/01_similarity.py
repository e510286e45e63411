"""Walk through competence similarity and hardness on a small tree."""

import numpy as np

from taip import CompetenceOntology, SimilarityParams, semantic_similarity
from taip.hardness import hardness_curve

# a toy skills tree
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

names = list(onto.nodes)
table = np.array([[semantic_similarity(onto, a, b) for b in names] for a in names])

np.set_printoptions(precision=3, suppress=True)
print("similarity table, rows and columns in this order:")
print(names)
print(table)

# siblings under a deeper subsumer are closer
print("python ~ c      ", semantic_similarity(onto, "python", "c"))
print("numpy ~ c       ", semantic_similarity(onto, "numpy", "c"))
print("numpy ~ regress.", semantic_similarity(onto, "numpy", "regression"))

# sharper decay with path length
steep = SimilarityParams(lam=2.0, kappa=1.0)
print("numpy ~ c, lam=2", semantic_similarity(onto, "numpy", "c", steep))

# hardness of a competence whose coverage is the same for every student
curve = np.array(hardness_curve(11))
print()
print("coverage  hardness")
for x, h in curve:
    print(f"{x:8.1f}  {h:8.4f}")

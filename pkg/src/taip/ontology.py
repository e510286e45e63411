"""Competence ontology: a rooted tree of competence ids plus the semantic
similarity and coverage metrics computed over it.

Similarity between two nodes combines their tree distance ``l`` and the depth
``h`` of their lowest common ancestor::

    sim(c1, c2) = 1                              if l == 0
                  exp(-lambda * l) * tanh(kappa * h)  otherwise
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple


class UnknownCompetenceError(KeyError):
    """Raised when a competence id is not a node of the ontology."""


class OntologyError(ValueError):
    """Raised when an ontology description is not a valid rooted tree."""


@dataclass(frozen=True)
class SimilarityParams:
    kappa: float = 1.0
    lam: float = 1.0

    def __post_init__(self) -> None:
        for name, value in (("kappa", self.kappa), ("lambda", self.lam)):
            if not 1.0 <= value <= 2.0:
                raise ValueError(f"{name} must lie in [1, 2], got {value}")

    def to_dict(self) -> Dict[str, float]:
        return {"kappa": self.kappa, "lambda": self.lam}

    @classmethod
    def from_dict(cls, data: Mapping[str, float]) -> "SimilarityParams":
        return cls(kappa=float(data.get("kappa", 1.0)), lam=float(data.get("lambda", 1.0)))


class CompetenceOntology:
    """Immutable rooted tree of competence ids.

    Nodes keep insertion order (root first, then breadth-first as given by the
    edge list) so that every iteration over the ontology is deterministic.
    """

    def __init__(self, root: str, parent: Mapping[str, str]):
        if not root:
            raise OntologyError("root id must be a nonempty string")
        self.root = root
        self._parent: Dict[str, str] = dict(parent)

        children: Dict[str, List[str]] = {root: []}
        for child, par in self._parent.items():
            if not child:
                raise OntologyError("competence ids must be nonempty strings")
            children.setdefault(child, [])
            children.setdefault(par, []).append(child)
        for node in children:
            if node != root and node not in self._parent:
                raise OntologyError(f"multiple roots: {node!r} has no parent")
        if root in self._parent:
            raise OntologyError(f"cycle: root {root!r} has a parent")

        depth: Dict[str, int] = {root: 0}
        order: List[str] = [root]
        frontier = [root]
        while frontier:
            nxt = []
            for node in frontier:
                for child in children[node]:
                    depth[child] = depth[node] + 1
                    order.append(child)
                    nxt.append(child)
            frontier = nxt
        if len(order) != len(children):
            # Every non-root node has exactly one parent here, so anything the
            # root cannot reach sits on (or hangs below) a cycle.
            stray = [n for n in children if n not in depth]
            raise OntologyError(f"cycle: nodes {stray[:5]!r} are not reachable from the root")

        self._children = {n: tuple(c) for n, c in children.items()}
        self._depth = depth
        self._nodes: Tuple[str, ...] = tuple(order)

    # -- construction -----------------------------------------------------

    @classmethod
    def from_edges(
        cls, root: str, edges: Iterable[Sequence[str]], nodes: Optional[Iterable[str]] = None
    ) -> "CompetenceOntology":
        """Build an ontology from ``(parent, child)`` pairs.

        ``nodes`` optionally lists extra declared ids; any of them left
        unconnected is reported as an orphan.
        """
        parent: Dict[str, str] = {}
        seen = {root}
        for edge in edges:
            if len(edge) != 2:
                raise OntologyError(f"edge must be a [parent, child] pair, got {edge!r}")
            par, child = str(edge[0]), str(edge[1])
            if child in parent:
                raise OntologyError(f"duplicate id: {child!r} appears as a child more than once")
            if par == child:
                raise OntologyError(f"cycle: self-loop on {child!r}")
            parent[child] = par
            seen.update((par, child))
        if nodes is not None:
            declared = list(nodes)
            if len(set(declared)) != len(declared):
                dup = sorted({n for n in declared if declared.count(n) > 1})
                raise OntologyError(f"duplicate id: {dup!r} declared more than once")
            orphans = [n for n in declared if n not in seen]
            if orphans:
                raise OntologyError(f"orphan nodes: {orphans!r} are not connected to the tree")
        return cls(root, parent)

    @classmethod
    def from_dict(cls, data: Mapping) -> "CompetenceOntology":
        if "root" not in data:
            raise OntologyError("ontology document lacks a 'root' entry")
        return cls.from_edges(data["root"], data.get("edges", []), data.get("nodes"))

    def to_dict(self) -> Dict:
        return {"root": self.root, "edges": [[self._parent[n], n] for n in self._nodes[1:]]}

    @classmethod
    def load(cls, path: "str | os.PathLike[str]") -> "CompetenceOntology":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def save(self, path: "str | os.PathLike[str]") -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=1)
            fh.write("\n")

    # -- structure --------------------------------------------------------

    @property
    def nodes(self) -> Tuple[str, ...]:
        return self._nodes

    def __len__(self) -> int:
        return len(self._nodes)

    def __contains__(self, c: object) -> bool:
        return c in self._depth

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CompetenceOntology):
            return NotImplemented
        return self.root == other.root and self._parent == other._parent

    def __hash__(self) -> int:
        return hash((self.root, len(self._nodes)))

    def __repr__(self) -> str:
        return f"CompetenceOntology(root={self.root!r}, nodes={len(self._nodes)})"

    def _check(self, c: str) -> None:
        if c not in self._depth:
            raise UnknownCompetenceError(c)

    def parent(self, c: str) -> Optional[str]:
        self._check(c)
        return self._parent.get(c)

    def children(self, c: str) -> Tuple[str, ...]:
        self._check(c)
        return self._children[c]

    def depth(self, c: str) -> int:
        self._check(c)
        return self._depth[c]

    def lca(self, c1: str, c2: str) -> str:
        """Lowest common ancestor by ancestor walk with depth equalization."""
        self._check(c1)
        self._check(c2)
        d1, d2 = self._depth[c1], self._depth[c2]
        while d1 > d2:
            c1 = self._parent[c1]
            d1 -= 1
        while d2 > d1:
            c2 = self._parent[c2]
            d2 -= 1
        while c1 != c2:
            c1 = self._parent[c1]
            c2 = self._parent[c2]
        return c1


def shortest_path_len(o: CompetenceOntology, c1: str, c2: str) -> int:
    anc = o.lca(c1, c2)
    return o.depth(c1) + o.depth(c2) - 2 * o.depth(anc)


def subsumer_depth(o: CompetenceOntology, c1: str, c2: str) -> int:
    """Depth of the deepest node subsuming both ``c1`` and ``c2`` (root = 0)."""
    return o.depth(o.lca(c1, c2))


def semantic_similarity(
    o: CompetenceOntology, c1: str, c2: str, params: SimilarityParams = SimilarityParams()
) -> float:
    anc = o.lca(c1, c2)
    h = o.depth(anc)
    l = o.depth(c1) + o.depth(c2) - 2 * h
    if l == 0:
        return 1.0
    return math.exp(-params.lam * l) * math.tanh(params.kappa * h)


def coverage(
    o: CompetenceOntology, c: str, A: Iterable[str], params: SimilarityParams = SimilarityParams()
) -> float:
    """Best similarity between ``c`` and any member of ``A``; 0 for empty ``A``."""
    o._check(c)
    return max((semantic_similarity(o, c, a, params) for a in A), default=0.0)


class SimilarityTable:
    """Memoized pairwise similarity for one (ontology, params) pair.

    Entries are keyed on the unordered pair, so lookups are symmetric by
    construction. Concurrent readers may race to fill the same slot; they
    store identical values, so the race is harmless.
    """

    def __init__(self, ontology: CompetenceOntology, params: SimilarityParams = SimilarityParams()):
        self.ontology = ontology
        self.params = params
        self._cache: Dict[Tuple[str, str], float] = {}

    def __call__(self, c1: str, c2: str) -> float:
        key = (c1, c2) if c1 <= c2 else (c2, c1)
        try:
            return self._cache[key]
        except KeyError:
            value = semantic_similarity(self.ontology, key[0], key[1], self.params)
            self._cache[key] = value
            return value

    def coverage(self, c: str, A: Iterable[str]) -> float:
        self.ontology._check(c)
        return max((self(c, a) for a in A), default=0.0)

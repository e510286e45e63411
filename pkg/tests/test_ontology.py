import collections
import itertools
import json
import math

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from taip.ontology import (
    CompetenceOntology,
    OntologyError,
    SimilarityParams,
    SimilarityTable,
    UnknownCompetenceError,
    coverage,
    semantic_similarity,
    shortest_path_len,
    subsumer_depth,
)

from conftest import E2_TANH1, EDGES

# -- independent oracles -------------------------------------------------------


def bfs_distance(edges, a, b):
    adj = collections.defaultdict(list)
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    dist = {a: 0}
    queue = collections.deque([a])
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist[b]


def ancestors(edges, c):
    """Path from ``c`` up to the root, inclusive."""
    parent = {child: par for par, child in edges}
    out = [c]
    while out[-1] in parent:
        out.append(parent[out[-1]])
    return out


def walk_subsumer_depth(edges, a, b):
    up_a = ancestors(edges, a)
    common = next(n for n in up_a if n in set(ancestors(edges, b)))
    return len(ancestors(edges, common)) - 1


@st.composite
def random_trees(draw, max_nodes=30):
    n = draw(st.integers(1, max_nodes))
    parents = [draw(st.integers(0, i - 1)) for i in range(1, n)]
    edges = [(f"n{p}", f"n{i}") for i, p in enumerate(parents, start=1)]
    return edges, [f"n{i}" for i in range(n)]


params_st = st.builds(SimilarityParams, st.floats(1.0, 2.0), st.floats(1.0, 2.0))


# -- examples ----------------------------------------------------------------


def test_path_length_examples(tree):
    assert shortest_path_len(tree, "a1", "a1") == 0
    assert shortest_path_len(tree, "r", "a") == 1
    assert shortest_path_len(tree, "a1", "a2") == bfs_distance(EDGES, "a1", "a2") == 2


def test_subsumer_depth_examples(tree):
    for c in tree.nodes:
        assert subsumer_depth(tree, "r", c) == 0
    assert subsumer_depth(tree, "a11", "a11") == 3
    assert subsumer_depth(tree, "b1", "b2") == walk_subsumer_depth(EDGES, "b1", "b2") == 1


def test_similarity_examples(tree):
    p = SimilarityParams()
    assert semantic_similarity(tree, "a11", "a11", p) == 1.0
    assert semantic_similarity(tree, "r", "r", p) == 1.0
    for kappa, lam in [(1, 1), (2, 2), (1.5, 1.2)]:
        assert semantic_similarity(tree, "r", "b", SimilarityParams(kappa, lam)) == 0.0
    mpmath.mp.dps = 40
    expected = mpmath.exp(-2) * mpmath.tanh(1)
    got = semantic_similarity(tree, "a1", "a2", p)
    assert abs(got - float(expected)) < 1e-15
    assert got == pytest.approx(0.10307, abs=5e-6)
    assert got == E2_TANH1


def test_similarity_uses_both_parameters(tree):
    got = semantic_similarity(tree, "a11", "a2", SimilarityParams(kappa=2.0, lam=1.5))
    assert got == pytest.approx(math.exp(-1.5 * 3) * math.tanh(2.0 * 1))


def test_coverage_examples(tree):
    assert coverage(tree, "a1", ["a1"]) == 1.0
    assert coverage(tree, "a1", []) == 0.0
    sib = semantic_similarity(tree, "a1", "a2")
    child = semantic_similarity(tree, "a1", "a11")
    assert coverage(tree, "a1", ["a2", "a11"]) == max(sib, child)
    assert child == pytest.approx(math.exp(-1) * math.tanh(2))


def test_unknown_ids_raise(tree):
    for fn in (shortest_path_len, subsumer_depth, semantic_similarity):
        with pytest.raises(UnknownCompetenceError):
            fn(tree, "a1", "nope")
    with pytest.raises(UnknownCompetenceError):
        coverage(tree, "nope", ["a1"])
    with pytest.raises(UnknownCompetenceError):
        coverage(tree, "a1", ["nope"])
    with pytest.raises(KeyError):
        tree.depth("nope")


@pytest.mark.parametrize("kappa,lam", [(0.5, 1), (1, 2.5), (float("nan"), 1)])
def test_params_outside_domain(kappa, lam):
    with pytest.raises(ValueError):
        SimilarityParams(kappa, lam)


def test_params_round_trip():
    p = SimilarityParams(1.25, 1.75)
    assert p.to_dict() == {"kappa": 1.25, "lambda": 1.75}
    assert SimilarityParams.from_dict(p.to_dict()) == p


# -- structure and file format -----------------------------------------------


def test_structure(tree):
    assert tree.root == "r"
    assert tree.nodes[0] == "r"
    assert len(tree) == 9
    assert tree.parent("r") is None
    assert tree.parent("a11") == "a1"
    assert tree.children("a") == ("a1", "a2")
    assert [tree.depth(c) for c in ("r", "b", "b2", "a11")] == [0, 1, 2, 3]
    assert tree.lca("a11", "a2") == "a"
    assert "a11" in tree and "zz" not in tree


def test_file_round_trip(tree, tmp_path):
    path = tmp_path / "onto.json"
    tree.save(path)
    doc = json.loads(path.read_text())
    assert set(doc) == {"root", "edges"}
    assert sorted(map(tuple, doc["edges"])) == sorted(EDGES)
    assert CompetenceOntology.load(path) == tree


@pytest.mark.parametrize(
    "doc,fragment",
    [
        ({"root": "r", "edges": [["r", "a"], ["r", "b"], ["b", "a"]]}, "duplicate id"),
        ({"root": "r", "edges": [["r", "a"], ["q", "b"]]}, "multiple roots"),
        ({"root": "r", "edges": [["r", "a"], ["b", "c"], ["c", "b"]]}, "cycle"),
        ({"root": "r", "edges": [["r", "a"], ["b", "b"]]}, "cycle"),
        ({"root": "r", "edges": [["r", "a"], ["a", "r"]]}, "cycle"),
        ({"root": "r", "edges": [["r", "a"]], "nodes": ["r", "a", "lonely"]}, "orphan"),
        ({"root": "r", "edges": [["r", "a"]], "nodes": ["r", "a", "a"]}, "duplicate id"),
        ({"edges": []}, "root"),
    ],
)
def test_loader_rejections(doc, fragment):
    with pytest.raises(OntologyError, match=fragment):
        CompetenceOntology.from_dict(doc)


def test_loader_messages_are_distinct():
    docs = [
        {"root": "r", "edges": [["r", "a"], ["r", "b"], ["b", "a"]]},
        {"root": "r", "edges": [["r", "a"], ["q", "b"]]},
        {"root": "r", "edges": [["r", "a"], ["b", "c"], ["c", "b"]]},
        {"root": "r", "edges": [["r", "a"]], "nodes": ["r", "a", "lonely"]},
    ]
    kinds = set()
    for doc in docs:
        with pytest.raises(OntologyError) as info:
            CompetenceOntology.from_dict(doc)
        kinds.add(str(info.value).split(":")[0])
    assert len(kinds) == 4


def test_single_node_ontology():
    o = CompetenceOntology.from_edges("only", [])
    assert o.nodes == ("only",)
    assert semantic_similarity(o, "only", "only") == 1.0


# -- properties --------------------------------------------------------------


@settings(max_examples=60, deadline=None)
@given(random_trees(), st.data())
def test_distances_match_independent_oracles(tree_nodes, data):
    edges, nodes = tree_nodes
    o = CompetenceOntology.from_edges("n0", edges)
    a = data.draw(st.sampled_from(nodes))
    b = data.draw(st.sampled_from(nodes))
    assert shortest_path_len(o, a, b) == bfs_distance(edges, a, b)
    assert subsumer_depth(o, a, b) == walk_subsumer_depth(edges, a, b)


@settings(max_examples=80, deadline=None)
@given(random_trees(), params_st, st.data())
def test_similarity_axioms(tree_nodes, params, data):
    edges, nodes = tree_nodes
    o = CompetenceOntology.from_edges("n0", edges)
    a = data.draw(st.sampled_from(nodes))
    b = data.draw(st.sampled_from(nodes))
    s = semantic_similarity(o, a, b, params)
    assert s == semantic_similarity(o, b, a, params)
    assert 0.0 <= s <= 1.0
    assert semantic_similarity(o, a, a, params) == 1.0


@settings(max_examples=60, deadline=None)
@given(random_trees(), st.data())
def test_triangle_inequality(tree_nodes, data):
    edges, nodes = tree_nodes
    o = CompetenceOntology.from_edges("n0", edges)
    a, b, c = (data.draw(st.sampled_from(nodes)) for _ in range(3))
    assert shortest_path_len(o, a, c) <= shortest_path_len(o, a, b) + shortest_path_len(o, b, c)


@settings(max_examples=60, deadline=None)
@given(random_trees(), params_st, st.data())
def test_coverage_monotone_in_set(tree_nodes, params, data):
    edges, nodes = tree_nodes
    o = CompetenceOntology.from_edges("n0", edges)
    c = data.draw(st.sampled_from(nodes))
    B = data.draw(st.lists(st.sampled_from(nodes), max_size=6))
    A = data.draw(st.lists(st.sampled_from(B), max_size=len(B))) if B else []
    assert coverage(o, c, A, params) <= coverage(o, c, B, params)
    assert coverage(o, c, B, params) == max([semantic_similarity(o, c, b, params) for b in B], default=0.0)


@settings(max_examples=40, deadline=None)
@given(random_trees(max_nodes=15))
def test_memo_table_is_invisible(tree_nodes):
    edges, nodes = tree_nodes
    o = CompetenceOntology.from_edges("n0", edges)
    table = SimilarityTable(o)
    for a, b in itertools.product(nodes, repeat=2):
        assert table(a, b) == semantic_similarity(o, a, b)
    for a, b in itertools.product(nodes, repeat=2):
        assert table(b, a) == semantic_similarity(o, a, b)
    assert table.coverage(nodes[0], nodes[1:3]) == coverage(o, nodes[0], nodes[1:3])

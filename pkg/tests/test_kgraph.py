import copy

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphkms import (
    CommutationError,
    ComposabilityError,
    EmptyColorSetError,
    HexagonError,
    MatricesOnlyError,
    RangeError,
    SchemaError,
    SquareBijectionError,
    parse_graph,
)
from conftest import EX1_MATRICES, TRIV1, TRIV2, ex2_doc


class TestParse:
    def test_ex1_valid(self, ex1):
        assert ex1.k == 2
        assert ex1.vertices == ("u", "v", "w")
        assert ex1.matrices_only
        # the two products agree entrywise, e.g. (1,2) entry is 8 both ways
        assert (ex1.matrices[0] @ ex1.matrices[1])[0, 1] == 8

    def test_triv1_valid(self, triv1):
        assert not triv1.matrices_only
        assert len(triv1.swap) == 2

    def test_commutation_error(self):
        doc = copy.deepcopy(EX1_MATRICES)
        doc["matrices"][1][1][1] = 4  # changes A_1 A_2 at (u, v) to 10 vs 8
        with pytest.raises(CommutationError) as err:
            parse_graph(doc)
        assert err.value.entry == (1, 2, "u", "v")

    def test_vertex_order_normalized(self):
        doc = copy.deepcopy(EX1_MATRICES)
        perm = [2, 0, 1]  # w, u, v
        doc["vertices"] = [EX1_MATRICES["vertices"][i] for i in perm]
        doc["matrices"] = [
            [[m[i][j] for j in perm] for i in perm] for m in EX1_MATRICES["matrices"]
        ]
        graph = parse_graph(doc)
        assert graph.vertices == ("u", "v", "w")
        assert np.array_equal(graph.matrices[0], np.array(EX1_MATRICES["matrices"][0]))

    def test_json_text_accepted(self):
        import json

        graph = parse_graph(json.dumps(TRIV2))
        assert graph.k == 1 and not graph.matrices_only

    @pytest.mark.parametrize(
        "mutate",
        [
            lambda d: d.pop("k"),
            lambda d: d.update(k=0),
            lambda d: d.update(vertices=[]),
            lambda d: d.update(vertices=["x", "x"]),
            lambda d: d.update(matrices=[[[1]]]),  # wrong count for k=2
            lambda d: d.update(matrices=[[[1, 0]], [[0, 1]]]),  # not square
            lambda d: d.update(matrices=[[[-1]], [[1]]]),
        ],
    )
    def test_schema_errors_matrices(self, mutate):
        doc = {"k": 2, "vertices": ["x"], "matrices": [[[1]], [[1]]]}
        mutate(doc)
        with pytest.raises(SchemaError):
            parse_graph(doc)

    def test_edges_and_matrices_exclusive(self):
        doc = copy.deepcopy(TRIV2)
        doc["matrices"] = [[[2]]]
        with pytest.raises(SchemaError):
            parse_graph(doc)

    def test_squares_required_for_k2_edges(self):
        doc = copy.deepcopy(TRIV1)
        doc.pop("squares")
        with pytest.raises(SchemaError):
            parse_graph(doc)

    def test_missing_square(self):
        doc = copy.deepcopy(TRIV1)
        doc["squares"] = []
        with pytest.raises(SquareBijectionError, match="missing square"):
            parse_graph(doc)

    def test_duplicate_square(self):
        doc = ex2_doc(2, 1, 1)
        doc["squares"].append(doc["squares"][0][:])
        doc["squares"][-1][1] = doc["squares"][1][1]
        with pytest.raises(SquareBijectionError, match="duplicate"):
            parse_graph(doc)

    def test_square_color_mismatch(self):
        doc = copy.deepcopy(TRIV2)
        doc["k"] = 2
        doc["edges"].append({"id": "f", "color": 2, "range": "x", "source": "x"})
        doc["squares"] = [[["a", "b"], ["b", "a"]]]  # both color 1
        with pytest.raises(SquareBijectionError, match="colors"):
            parse_graph(doc)

    def test_square_unknown_edge(self):
        doc = copy.deepcopy(TRIV1)
        doc["squares"] = [[["e", "nope"], ["f", "e"]]]
        with pytest.raises(SchemaError):
            parse_graph(doc)

    def test_hexagon_consistent(self):
        doc = _three_color_doc(twisted=False)
        graph = parse_graph(doc)
        assert graph.k == 3

    def test_hexagon_violation(self):
        with pytest.raises(HexagonError):
            parse_graph(_three_color_doc(twisted=True))


def _three_color_doc(twisted):
    """One vertex, two loops per color; 'twisted' pairings break associativity."""
    edges = []
    for c, name in ((1, "e"), (2, "f"), (3, "g")):
        for i in range(2):
            edges.append({"id": f"{name}{i}", "color": c, "range": "x", "source": "x"})
    squares = []

    def pair(first, second, twist):
        for i in range(2):
            for j in range(2):
                if twist:
                    squares.append([[f"{first}{i}", f"{second}{j}"], [f"{second}{i}", f"{first}{j}"]])
                else:
                    squares.append([[f"{first}{i}", f"{second}{j}"], [f"{second}{j}", f"{first}{i}"]])

    pair("e", "f", twisted)
    pair("e", "g", False)
    pair("f", "g", twisted)
    return {"k": 3, "vertices": ["x"], "edges": edges, "squares": squares}


class TestVertexMatrix:
    def test_triv1_any_degree(self, triv1):
        assert triv1.vertex_matrix((3, 2)) == np.array([[1]])

    def test_ex1_unit_degree(self, ex1):
        assert np.array_equal(ex1.vertex_matrix((1, 0)), np.array(EX1_MATRICES["matrices"][0]))

    def test_ex2_squared_color(self):
        graph = parse_graph(ex2_doc(2, 1, 4, squares=False))
        assert np.array_equal(graph.vertex_matrix((0, 2)), np.array([[4, 0], [0, 4]]))

    def test_zero_degree_identity(self, ex1):
        assert np.array_equal(ex1.vertex_matrix((0, 0)), np.eye(3, dtype=np.int64))


class TestPaths:
    def test_compose_normal_form(self, triv1):
        e = triv1.path_from_edges(["e"])
        f = triv1.path_from_edges(["f"])
        ef = triv1.compose(e, f)
        assert ef.word == ("e", "f") and ef.degree == (1, 1)
        assert triv1.compose(f, e) == ef

    def test_compose_requires_match(self):
        graph = parse_graph(ex2_doc(1, 1, 1))
        lv = graph.path_from_edges(["lv0"])
        lw = graph.path_from_edges(["lw0"])
        with pytest.raises(ComposabilityError):
            graph.compose(lv, lw)

    def test_compose_matrices_only(self, ex1):
        with pytest.raises(MatricesOnlyError):
            ex1.compose(ex1.vertex_path("u"), ex1.vertex_path("u"))

    def test_segment_identity(self, triv1):
        p = triv1.path_from_edges(["e", "f"])
        assert triv1.segment(p, (0, 0), p.degree) == p

    def test_segment_vertex(self, triv1):
        p = triv1.path_from_edges(["e", "f"])
        mid = triv1.segment(p, (1, 0), (1, 0))
        assert mid.is_vertex() and mid.range == "x"

    def test_segment_reorders(self, triv1):
        p = triv1.path_from_edges(["e", "f"])
        assert triv1.segment(p, (0, 0), (0, 1)).word == ("f",)

    def test_segment_range_check(self, triv1):
        p = triv1.path_from_edges(["e"])
        with pytest.raises(RangeError):
            triv1.segment(p, (0, 0), (2, 0))

    def test_counts_match_matrix(self, ex1):
        assert ex1.count_paths("u", (1, 0)) == 7
        assert ex1.count_paths("v", (0, 1)) == 3

    def test_enumerate_matrices_only(self, ex1):
        with pytest.raises(MatricesOnlyError):
            ex1.enumerate_paths("u", (1, 0))

    def test_enumerate_unique_path(self, triv1):
        paths = triv1.enumerate_paths("x", (2, 2))
        assert len(paths) == 1
        assert paths[0].word == ("e", "e", "f", "f")

    @pytest.mark.parametrize("degree", [(0, 0), (1, 0), (2, 1), (1, 2), (2, 2)])
    def test_enumerate_counting_consistency(self, ex1_squares, degree):
        for v in ex1_squares.vertices:
            paths = ex1_squares.enumerate_paths(v, degree)
            assert len(paths) == len(set(paths)) == ex1_squares.count_paths(v, degree)

    def test_lambda_min_equal_paths(self, triv1):
        p = triv1.path_from_edges(["e"])
        assert triv1.lambda_min(p, p) == ((triv1.vertex_path("x"), triv1.vertex_path("x")),)

    def test_lambda_min_square(self, triv1):
        e = triv1.path_from_edges(["e"])
        f = triv1.path_from_edges(["f"])
        pairs = triv1.lambda_min(e, f)
        assert len(pairs) == 1
        kappa, eta = pairs[0]
        assert kappa.word == ("f",) and eta.word == ("e",)

    def test_lambda_min_disjoint(self):
        graph = parse_graph(ex2_doc(2, 1, 1))
        a = graph.path_from_edges(["lv0"])
        b = graph.path_from_edges(["lv1"])
        assert graph.lambda_min(a, b) == ()

    def test_lambda_min_symmetry(self):
        graph = parse_graph(ex2_doc(2, 2, 1))
        paths = [p for d in [(1, 0), (0, 1), (1, 1)] for p in graph.enumerate_paths("v", d)]
        for p in paths:
            for q in paths:
                forward = {(k.word, e.word) for k, e in graph.lambda_min(p, q)}
                backward = {(e.word, k.word) for k, e in graph.lambda_min(q, p)}
                assert forward == backward


@settings(max_examples=60, deadline=None)
@given(data=st.data())
def test_factorization_uniqueness(data):
    graph = parse_graph(ex2_doc(2, 1, 4))
    degree = (
        data.draw(st.integers(min_value=0, max_value=3), label="d1"),
        data.draw(st.integers(min_value=0, max_value=3), label="d2"),
    )
    vertex = data.draw(st.sampled_from(graph.vertices), label="v")
    paths = graph.enumerate_paths(vertex, degree)
    if not paths:
        return
    p = paths[data.draw(st.integers(min_value=0, max_value=len(paths) - 1), label="i")]
    m = tuple(
        data.draw(st.integers(min_value=0, max_value=d), label=f"m{t}")
        for t, d in enumerate(degree)
    )
    head = graph.segment(p, (0, 0), m)
    tail = graph.segment(p, m, p.degree)
    assert graph.compose(head, tail) == p


class TestReachability:
    def test_ex1_components_all_colors(self, ex1):
        part = ex1.components((1, 2))
        assert part.classes == (("u",), ("v",), ("w",))

    def test_ex1_components_empty(self, ex1):
        assert ex1.components(()).classes == (("u",), ("v",), ("w",))

    def test_ex2_color2_connected(self):
        graph = parse_graph(ex2_doc(2, 1, 4, squares=False))
        assert graph.components((2,)).classes == (("v", "w"),)

    def test_refinement(self, ex1):
        full = ex1.components((1, 2)).classes
        for colors in [(), (1,), (2,)]:
            for cls in ex1.components(colors).classes:
                assert any(set(cls) <= set(big) for big in full)

    def test_closures(self, ex1):
        assert ex1.closure({"v"}, (1, 2)) == {"u", "v"}
        assert ex1.closure({"u"}, (1, 2)) == {"u"}
        assert ex1.closure({"w"}, (1, 2)) == {"u", "w"}

    def test_closure_monotone_idempotent(self, ex1):
        for vs in [{"u"}, {"v"}, {"w"}, {"v", "w"}]:
            closed = ex1.closure(vs, (1, 2))
            assert vs <= closed
            assert ex1.closure(closed, (1, 2)) == closed

    def test_hereditary_closure(self, ex1):
        assert ex1.closure({"v"}, (1, 2), hereditary=True) == {"v"}
        assert ex1.closure({"u"}, (1, 2), hereditary=True) == {"u", "v", "w"}

    def test_nonsource_triv1(self, triv1):
        assert triv1.nonsource_vertices((1,)) == {"x"}

    def test_nonsource_ex1(self, ex1):
        assert ex1.nonsource_vertices((1, 2)) == {"u", "v", "w"}

    def test_nonsource_no_edges(self):
        graph = parse_graph({"k": 1, "vertices": ["x"], "edges": []})
        assert graph.nonsource_vertices((1,)) == frozenset()

    def test_nonsource_needs_colors(self, ex1):
        with pytest.raises(EmptyColorSetError):
            ex1.nonsource_vertices(())

import math

import pytest

from graphkms import Query, parse_graph

# Three-vertex two-color graph with components {u}, {v}, {w}: u absorbs
# everything, v and w sit above it with their own loop blocks.
EX1_MATRICES = {
    "k": 2,
    "vertices": ["u", "v", "w"],
    "matrices": [
        [[2, 2, 3], [0, 4, 0], [0, 0, 5]],
        [[2, 1, 2], [0, 3, 0], [0, 0, 4]],
    ],
}


def ex1_squares_doc():
    """The same skeleton with explicit edges and a zip-by-id choice of squares."""
    a = {1: EX1_MATRICES["matrices"][0], 2: EX1_MATRICES["matrices"][1]}
    vs = EX1_MATRICES["vertices"]
    edges = []
    for color in (1, 2):
        for i, rv in enumerate(vs):
            for j, sv in enumerate(vs):
                for t in range(a[color][i][j]):
                    edges.append(
                        {"id": f"c{color}{rv}{sv}{t}", "color": color, "range": rv, "source": sv}
                    )
    by = {}
    for e in edges:
        by.setdefault((e["color"], e["range"]), []).append(e)
    words = {1: {}, 2: {}}
    for e in edges:
        other = 2 if e["color"] == 1 else 1
        for f in by.get((other, e["source"]), []):
            words[e["color"]].setdefault((e["range"], f["source"]), []).append(
                (e["id"], f["id"])
            )
    squares = []
    for key in sorted(words[1]):
        first = sorted(words[1][key])
        second = sorted(words[2].get(key, []))
        assert len(first) == len(second)
        for w1, w2 in zip(first, second):
            squares.append([list(w1), list(w2)])
    return {"k": 2, "vertices": vs, "edges": edges, "squares": squares}


def ex2_doc(l, p, q, squares=True):
    """Two vertices, l loops of color 1 at each, p dashed edges w->v and q dashed v->w."""
    if not squares:
        return {
            "k": 2,
            "vertices": ["v", "w"],
            "matrices": [[[l, 0], [0, l]], [[0, p], [q, 0]]],
        }
    edges = []
    for v in ("v", "w"):
        for i in range(l):
            edges.append({"id": f"l{v}{i}", "color": 1, "range": v, "source": v})
    for t in range(p):
        edges.append({"id": f"p{t}", "color": 2, "range": "v", "source": "w"})
    for t in range(q):
        edges.append({"id": f"q{t}", "color": 2, "range": "w", "source": "v"})
    squares_list = []
    for e in edges:
        if e["color"] != 2:
            continue
        for i in range(l):
            squares_list.append(
                [[f"l{e['range']}{i}", e["id"]], [e["id"], f"l{e['source']}{i}"]]
            )
    return {"k": 2, "vertices": ["v", "w"], "edges": edges, "squares": squares_list}


def ex2_query(l, p, q):
    return Query(1.0, (math.log(l), math.log(2 * math.sqrt(p * q))))


TRIV1 = {
    "k": 2,
    "vertices": ["x"],
    "edges": [
        {"id": "e", "color": 1, "range": "x", "source": "x"},
        {"id": "f", "color": 2, "range": "x", "source": "x"},
    ],
    "squares": [[["e", "f"], ["f", "e"]]],
}

TRIV2 = {
    "k": 1,
    "vertices": ["x"],
    "edges": [
        {"id": "a", "color": 1, "range": "x", "source": "x"},
        {"id": "b", "color": 1, "range": "x", "source": "x"},
    ],
}


@pytest.fixture(scope="session")
def ex1():
    return parse_graph(EX1_MATRICES)


@pytest.fixture(scope="session")
def ex1_squares():
    return parse_graph(ex1_squares_doc())


@pytest.fixture(scope="session")
def triv1():
    return parse_graph(TRIV1)


@pytest.fixture(scope="session")
def triv2():
    return parse_graph(TRIV2)


@pytest.fixture(scope="session")
def ex1_query():
    return Query(1.0, (math.log(5), math.log(4)))

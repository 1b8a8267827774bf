"""Finite higher-rank graphs: parsing, validation, paths and reachability.

A rank-k graph is stored as its colored skeleton (edges with a color in
1..k plus the factorization squares that commute adjacent colors) or, in
matrices-only mode, as the k commuting vertex matrices alone.  Vertex
matrices follow the convention ``A_i[range, source] = number of color-i
edges``, so a path "flows" from its source vertex to its range vertex.

Paths are kept in a canonical normal form: the edge word is listed in
composition order (``word[0]`` touches the range) with colors ascending
along the word.  Two paths are equal iff their normal forms are equal.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

import numpy as np

from .errors import (
    CommutationError,
    ComposabilityError,
    EmptyColorSetError,
    HexagonError,
    MatricesOnlyError,
    NotAClassError,
    RangeError,
    SchemaError,
    SquareBijectionError,
)


@dataclass(frozen=True)
class Edge:
    id: str
    color: int
    range: str
    source: str


@dataclass(frozen=True)
class Path:
    """A path in normal form. ``degree[i-1]`` counts the color-i edges."""

    range: str
    source: str
    degree: tuple[int, ...]
    word: tuple[str, ...]

    def is_vertex(self):
        return not self.word

    def __repr__(self):
        if not self.word:
            return f"Path({self.range})"
        return f"Path({self.range}<-[{','.join(self.word)}]-{self.source})"


@dataclass(frozen=True)
class ComponentPartition:
    """Equivalence classes of mutual color-I reachability, plus the order itself."""

    colors: frozenset[int]
    classes: tuple[tuple[str, ...], ...]
    # reach[a, b] is True iff there is a color-I path with range a and source b
    reach: np.ndarray

    def class_of(self, vertex):
        for cls in self.classes:
            if vertex in cls:
                return cls
        raise KeyError(vertex)


def _zeros(k):
    return (0,) * k


def degree_add(m, n):
    return tuple(a + b for a, b in zip(m, n))


def degree_sub(m, n):
    return tuple(a - b for a, b in zip(m, n))


def degree_join(m, n):
    return tuple(max(a, b) for a, b in zip(m, n))


def degree_leq(m, n):
    return all(a <= b for a, b in zip(m, n))


def unit_degree(k, color):
    return tuple(1 if c == color else 0 for c in range(1, k + 1))


class KGraph:
    """Immutable finite k-graph over a lexicographically ordered vertex set.

    All vectors and matrices produced anywhere in this package are indexed
    by ``self.vertices``, which is always sorted.  Instances are only built
    through :func:`parse_graph` and are safe to share across threads.
    """

    def __init__(self, k, vertices, matrices, edges=None, squares=None):
        self.k = k
        self.vertices = tuple(vertices)
        self.n = len(self.vertices)
        self.vindex = {v: i for i, v in enumerate(self.vertices)}
        mats = []
        for m in matrices:
            a = np.array(m, dtype=np.int64)
            a.flags.writeable = False
            mats.append(a)
        self.matrices = tuple(mats)
        self.edges = tuple(edges) if edges is not None else None
        self.matrices_only = edges is None
        self.edge_by_id = {}
        self._out = {}  # (range vertex, color) -> tuple of edge ids
        if edges is not None:
            for e in edges:
                self.edge_by_id[e.id] = e
            out = {}
            for e in edges:
                out.setdefault((e.range, e.color), []).append(e.id)
            self._out = {key: tuple(sorted(ids)) for key, ids in out.items()}
        # swap maps a composable mixed-color 2-word to the factorization
        # with the two colors exchanged; it holds both orientations.
        self.swap = dict(squares) if squares else {}

    # -- basic queries -------------------------------------------------

    def color_of(self, edge_id):
        return self.edge_by_id[edge_id].color

    def edges_from(self, vertex, color):
        """Edge ids with range ``vertex`` and the given color (continuations toward the source)."""
        return self._out.get((vertex, color), ())

    def _require_paths(self, op):
        if self.matrices_only:
            raise MatricesOnlyError(f"{op} needs edge and square data, not matrices-only input")

    def vertex_matrix(self, n):
        """The product matrix counting degree-n paths, identity at n = 0."""
        if len(n) != self.k or any(x < 0 for x in n):
            raise RangeError(f"degree {n} is not in N^{self.k}")
        out = np.eye(self.n, dtype=np.int64)
        for i, power in enumerate(n):
            if power:
                out = out @ np.linalg.matrix_power(self.matrices[i], power)
        return out

    def count_paths(self, vertex, n):
        """Number of degree-n paths with range ``vertex`` (available in matrices-only mode)."""
        return int(self.vertex_matrix(n)[self.vindex[vertex], :].sum())

    # -- path construction and normal form -----------------------------

    def vertex_path(self, vertex):
        if vertex not in self.vindex:
            raise SchemaError(f"unknown vertex {vertex!r}")
        return Path(vertex, vertex, _zeros(self.k), ())

    def path_from_edges(self, edge_ids):
        """Build the normal-form path for a word given in composition order (source last)."""
        self._require_paths("path construction")
        if not edge_ids:
            raise ComposabilityError("empty edge word; use vertex_path for degree-0 paths")
        word = []
        for eid in edge_ids:
            if eid not in self.edge_by_id:
                raise SchemaError(f"unknown edge id {eid!r}")
            word.append(eid)
        for a, b in zip(word, word[1:]):
            if self.edge_by_id[a].source != self.edge_by_id[b].range:
                raise ComposabilityError(f"edges {a!r} and {b!r} do not compose")
        return self._path_of_word(self._normalize(word))

    def _path_of_word(self, word):
        degree = [0] * self.k
        for eid in word:
            degree[self.edge_by_id[eid].color - 1] += 1
        return Path(
            self.edge_by_id[word[0]].range,
            self.edge_by_id[word[-1]].source,
            tuple(degree),
            tuple(word),
        )

    def _normalize(self, word):
        """Sort the word by color with square swaps; confluent, so scan order is free."""
        word = list(word)
        changed = True
        while changed:
            changed = False
            for j in range(len(word) - 1):
                a, b = word[j], word[j + 1]
                if self.color_of(a) > self.color_of(b):
                    word[j], word[j + 1] = self.swap[(a, b)]
                    changed = True
        return word

    def _pull_color_front(self, word, color):
        """Swap the first color-``color`` edge to position 0; word must contain one."""
        word = list(word)
        t = next(i for i, eid in enumerate(word) if self.color_of(eid) == color)
        for s in range(t, 0, -1):
            word[s - 1], word[s] = self.swap[(word[s - 1], word[s])]
        return word

    def _split(self, path, m):
        """Factor ``path = mu rho`` with d(mu) = m; returns (mu word, rho word).

        The head is extracted edge by edge, always pulling the lowest still
        needed color to the front, so the head word comes out in normal form.
        """
        remaining = list(m)
        word = list(path.word)
        head = []
        while any(remaining):
            color = next(c for c in range(1, self.k + 1) if remaining[c - 1] > 0)
            word = self._pull_color_front(word, color)
            head.append(word.pop(0))
            remaining[color - 1] -= 1
        return head, word

    def compose(self, p, q):
        """Normal form of the composition p q (q is traversed first)."""
        self._require_paths("compose")
        if p.source != q.range:
            raise ComposabilityError(f"source of {p!r} is not the range of {q!r}")
        word = list(p.word) + list(q.word)
        if not word:
            return self.vertex_path(p.range)
        return self._path_of_word(self._normalize(word))

    def segment(self, p, m, n):
        """The factor p(m, n): the middle piece of p = mu nu kappa with d(mu)=m, d(nu)=n-m."""
        self._require_paths("segment")
        m, n = tuple(m), tuple(n)
        if not (degree_leq(_zeros(self.k), m) and degree_leq(m, n) and degree_leq(n, p.degree)):
            raise RangeError(f"need 0 <= {m} <= {n} <= {p.degree}")
        head, _ = self._split(p, n)
        head_path = self._path_of_word(head) if head else self.vertex_path(p.range)
        if m == n:
            # degree-0 middle factor sits at the source of the degree-m head
            return self.vertex_path(head_path.source)
        _, seg = self._split(head_path, m)
        return self._path_of_word(self._normalize(seg))

    def enumerate_paths(self, vertex, n):
        """All normal-form paths with range ``vertex`` and degree ``n``, sorted by word."""
        self._require_paths("enumerate_paths")
        if vertex not in self.vindex:
            raise SchemaError(f"unknown vertex {vertex!r}")
        n = tuple(n)
        if len(n) != self.k or any(x < 0 for x in n):
            raise RangeError(f"degree {n} is not in N^{self.k}")
        if not any(n):
            return (self.vertex_path(vertex),)
        colors = [c for c in range(1, self.k + 1) for _ in range(n[c - 1])]
        results = []

        def extend(word, at):
            if len(word) == len(colors):
                results.append(tuple(word))
                return
            for eid in self.edges_from(at, colors[len(word)]):
                word.append(eid)
                extend(word, self.edge_by_id[eid].source)
                word.pop()

        extend([], vertex)
        return tuple(self._path_of_word(list(w)) for w in sorted(results))

    def lambda_min(self, p, q):
        """Minimal common extensions: pairs (kappa, eta) with p kappa = q eta of degree d(p) v d(q)."""
        self._require_paths("lambda_min")
        if p.range != q.range:
            return ()
        join = degree_join(p.degree, q.degree)
        pairs = []
        for lam in self.enumerate_paths(p.range, join):
            head_p, tail_p = self._split(lam, p.degree)
            if (tuple(head_p) if head_p else ()) != p.word:
                continue
            head_q, tail_q = self._split(lam, q.degree)
            if (tuple(head_q) if head_q else ()) != q.word:
                continue
            kappa = (
                self._path_of_word(self._normalize(tail_p))
                if tail_p
                else self.vertex_path(p.source)
            )
            eta = (
                self._path_of_word(self._normalize(tail_q))
                if tail_q
                else self.vertex_path(q.source)
            )
            pairs.append((kappa, eta))
        return tuple(pairs)

    # -- reachability, components, closures -----------------------------

    def color_set(self, colors):
        I = frozenset(colors)
        if not I.issubset(range(1, self.k + 1)):
            raise SchemaError(f"colors {sorted(I)} not within 1..{self.k}")
        return I

    def _adjacency(self, colors):
        adj = np.zeros((self.n, self.n), dtype=bool)
        for c in colors:
            adj |= self.matrices[c - 1] > 0
        return adj

    def reachability(self, colors):
        """Boolean matrix R with R[a, b] true iff a color-I path runs from source b to range a."""
        I = self.color_set(colors)
        reach = self._adjacency(I) | np.eye(self.n, dtype=bool)
        # Warshall closure; n is small
        for mid in range(self.n):
            reach |= np.outer(reach[:, mid], reach[mid, :])
        return reach

    def components(self, colors):
        """Partition of the vertex set into classes of mutual color-I reachability."""
        I = self.color_set(colors)
        reach = self.reachability(I)
        mutual = reach & reach.T
        seen = set()
        classes = []
        for i in range(self.n):
            if i in seen:
                continue
            members = tuple(self.vertices[j] for j in range(self.n) if mutual[i, j])
            seen.update(self.vindex[v] for v in members)
            classes.append(members)
        return ComponentPartition(I, tuple(classes), reach)

    def closure(self, vertex_set, colors, hereditary=False):
        """Vertices w with a color-I path from some v in the set to w (range side).

        With ``hereditary=True`` the direction is reversed: vertices reachable
        when following edges backwards from the set.
        """
        reach = self.reachability(colors)
        cols = [self.vindex[v] for v in vertex_set]
        if hereditary:
            hit = reach[cols, :].any(axis=0)
        else:
            hit = reach[:, cols].any(axis=1)
        return frozenset(self.vertices[i] for i in range(self.n) if hit[i])

    def nonsource_vertices(self, colors):
        """Largest vertex set whose members start arbitrarily long paths in every color of I."""
        I = self.color_set(colors)
        if not I:
            raise EmptyColorSetError("nonsource_vertices needs a nonempty color set")
        keep = np.ones(self.n, dtype=bool)
        changed = True
        while changed:
            changed = False
            for i in range(self.n):
                if not keep[i]:
                    continue
                for c in I:
                    if not (self.matrices[c - 1][i, :] * keep).any():
                        keep[i] = False
                        changed = True
                        break
        return frozenset(self.vertices[i] for i in range(self.n) if keep[i])

    def require_class(self, vertex_set, colors):
        """Return the ~_I partition after checking the given set is one of its classes."""
        part = self.components(colors)
        c = tuple(sorted(vertex_set))
        for cls in part.classes:
            if tuple(sorted(cls)) == c:
                return part
        raise NotAClassError(f"{sorted(vertex_set)} is not a class of ~_{sorted(colors)}")


# -- parsing ------------------------------------------------------------


def _check_commutation(matrices, vertices):
    k = len(matrices)
    for i in range(k):
        for j in range(i + 1, k):
            left = matrices[i] @ matrices[j]
            right = matrices[j] @ matrices[i]
            if not np.array_equal(left, right):
                bad = np.argwhere(left != right)[0]
                v, w = vertices[bad[0]], vertices[bad[1]]
                raise CommutationError(
                    f"A_{i + 1}A_{j + 1} != A_{j + 1}A_{i + 1} at entry ({v}, {w}): "
                    f"{left[bad[0], bad[1]]} vs {right[bad[0], bad[1]]}",
                    i=i + 1,
                    j=j + 1,
                    v=v,
                    w=w,
                )


def _build_swap(edges_by_id, squares_doc):
    swap = {}
    for entry in squares_doc:
        try:
            (e, f), (f2, e2) = entry
        except (TypeError, ValueError):
            raise SchemaError(f"malformed square entry {entry!r}")
        for eid in (e, f, f2, e2):
            if eid not in edges_by_id:
                raise SchemaError(f"square references unknown edge {eid!r}")
        ee, ff, ff2, ee2 = (edges_by_id[x] for x in (e, f, f2, e2))
        if ee.color == ff.color or ee.color != ee2.color or ff.color != ff2.color:
            raise SquareBijectionError(f"square {entry!r} has inconsistent colors")
        if ee.source != ff.range or ff2.source != ee2.range:
            raise SquareBijectionError(f"square {entry!r} is not composable")
        if ee.range != ff2.range or ff.source != ee2.source:
            raise SquareBijectionError(f"square {entry!r} does not preserve range/source")
        for key, value in (((e, f), (f2, e2)), ((f2, e2), (e, f))):
            if key in swap and swap[key] != value:
                raise SquareBijectionError(f"duplicate square for word {key}")
            swap[key] = value
    return swap


def _check_square_bijection(edges, swap):
    by_range = {}
    for e in edges:
        by_range.setdefault(e.range, []).append(e)
    for a in edges:
        for b in by_range.get(a.source, ()):
            if a.color != b.color and (a.id, b.id) not in swap:
                raise SquareBijectionError(
                    f"missing square for the word ({a.id}, {b.id}) "
                    f"with colors ({a.color}, {b.color})"
                )


def _check_hexagon(edges_by_id, swap, edges):
    """Both swap routes reversing a 3-distinct-color word must agree."""
    by_range = {}
    for e in edges:
        by_range.setdefault(e.range, []).append(e)

    def apply(word, pos):
        a, b = swap[(word[pos], word[pos + 1])]
        out = list(word)
        out[pos], out[pos + 1] = a, b
        return tuple(out)

    for a in edges:
        for b in by_range.get(a.source, ()):
            if b.color == a.color:
                continue
            for c in by_range.get(b.source, ()):
                if c.color in (a.color, b.color):
                    continue
                word = (a.id, b.id, c.id)
                route1 = apply(apply(apply(word, 0), 1), 0)
                route2 = apply(apply(apply(word, 1), 0), 1)
                if route1 != route2:
                    raise HexagonError(
                        f"factorization is not associative on the word {word}: "
                        f"{route1} vs {route2}"
                    )


def parse_graph(document):
    """Validate a graph document (dict or JSON text) and return a KGraph.

    Two input layouts are accepted: ``{"k", "vertices", "edges", "squares"}``
    with explicit factorization squares (``squares`` may be omitted when
    k = 1), or ``{"k", "vertices", "matrices"}`` for matrices-only mode.
    Vertices are re-sorted lexicographically; matrices given in a different
    vertex order are permuted to match.
    """
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"invalid JSON: {exc}")
    if not isinstance(document, dict):
        raise SchemaError("graph document must be a JSON object")

    k = document.get("k")
    if not isinstance(k, int) or k < 1:
        raise SchemaError("field 'k' must be a positive integer")
    raw_vertices = document.get("vertices")
    if (
        not isinstance(raw_vertices, list)
        or not raw_vertices
        or not all(isinstance(v, str) for v in raw_vertices)
    ):
        raise SchemaError("field 'vertices' must be a nonempty list of strings")
    if len(set(raw_vertices)) != len(raw_vertices):
        raise SchemaError("vertex ids must be unique")
    vertices = tuple(sorted(raw_vertices))

    has_edges = "edges" in document
    has_matrices = "matrices" in document
    if has_edges == has_matrices:
        raise SchemaError("exactly one of 'edges' or 'matrices' is required")

    if has_matrices:
        mats_doc = document["matrices"]
        n = len(raw_vertices)
        if not isinstance(mats_doc, list) or len(mats_doc) != k:
            raise SchemaError(f"'matrices' must list exactly k={k} matrices")
        perm = [raw_vertices.index(v) for v in vertices]
        matrices = []
        for m in mats_doc:
            arr = np.array(m)
            if arr.shape != (n, n) or not np.issubdtype(arr.dtype, np.integer):
                raise SchemaError("each matrix must be an n x n integer matrix")
            if (arr < 0).any():
                raise SchemaError("matrix entries must be nonnegative")
            matrices.append(arr[np.ix_(perm, perm)].astype(np.int64))
        _check_commutation(matrices, vertices)
        return KGraph(k, vertices, matrices)

    edges_doc = document["edges"]
    if not isinstance(edges_doc, list):
        raise SchemaError("field 'edges' must be a list")
    edges = []
    seen = set()
    vset = set(vertices)
    for entry in edges_doc:
        if not isinstance(entry, dict) or set(entry) != {"id", "color", "range", "source"}:
            raise SchemaError(f"malformed edge entry {entry!r}")
        eid, color = entry["id"], entry["color"]
        if not isinstance(eid, str) or eid in seen:
            raise SchemaError(f"edge id {eid!r} missing or duplicate")
        seen.add(eid)
        if not isinstance(color, int) or not 1 <= color <= k:
            raise SchemaError(f"edge {eid!r} has color outside 1..{k}")
        if entry["range"] not in vset or entry["source"] not in vset:
            raise SchemaError(f"edge {eid!r} references an unknown vertex")
        edges.append(Edge(eid, color, entry["range"], entry["source"]))

    vindex = {v: i for i, v in enumerate(vertices)}
    matrices = [np.zeros((len(vertices), len(vertices)), dtype=np.int64) for _ in range(k)]
    for e in edges:
        matrices[e.color - 1][vindex[e.range], vindex[e.source]] += 1
    _check_commutation(matrices, vertices)

    squares_doc = document.get("squares")
    if k >= 2 and squares_doc is None:
        raise SchemaError("'squares' is required for edge-mode graphs with k >= 2")
    if k == 1 and squares_doc:
        raise SchemaError("k = 1 graphs take no squares")
    edges_by_id = {e.id: e for e in edges}
    swap = _build_swap(edges_by_id, squares_doc or [])
    _check_square_bijection(edges, swap)
    if k >= 3:
        _check_hexagon(edges_by_id, swap, edges)
    return KGraph(k, vertices, matrices, edges=edges, squares=swap)

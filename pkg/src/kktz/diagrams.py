"""Jacobi diagrams: trivalent loopless multigraphs, their canonical forms,
automorphism counts and labelled, edge-oriented decorations."""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from itertools import permutations, product

from .errors import (DegreeTooLarge, InvariantViolation, MalformedInput,
                     MissingLabels, MissingOrientation)

DEFAULT_DEGREE_BOUND = int(os.environ.get("KKTZ_DEGREE_BOUND", "4"))


@dataclass(frozen=True)
class JacobiDiagram:
    vertices: tuple
    edges: tuple
    vertex_orientation: dict | None = None   # vertex -> (h, h, h), h = (vertex, edge_index, end)
    edge_orientation: tuple | None = None    # per edge: (origin, end)
    vertex_labels: dict | None = None
    edge_labels: dict | None = None          # edge_index -> label

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "edges", tuple(tuple(e) for e in self.edges))
        _validate(self)

    @property
    def degree(self):
        return len(self.vertices) // 2

    @property
    def half_edges(self):
        return [(e[end], k, end) for k, e in enumerate(self.edges) for end in (0, 1)]

    def incident(self, v):
        return [h for h in self.half_edges if h[0] == v]

    def multiplicity_matrix(self):
        idx = {v: i for i, v in enumerate(self.vertices)}
        m = len(self.vertices)
        M = [[0] * m for _ in range(m)]
        for a, b in self.edges:
            M[idx[a]][idx[b]] += 1
            M[idx[b]][idx[a]] += 1
        return M

    def to_json(self):
        d = {"degree": self.degree, "vertices": list(self.vertices),
             "edges": [list(e) for e in self.edges]}
        if self.vertex_orientation is not None:
            d["vertex_orientation"] = [[list(h) for h in self.vertex_orientation[v]]
                                       for v in self.vertices]
        if self.edge_orientation is not None:
            d["edge_orientation"] = [list(e) for e in self.edge_orientation]
        if self.vertex_labels is not None:
            d["vertex_labels"] = {str(k): v for k, v in self.vertex_labels.items()}
        if self.edge_labels is not None:
            d["edge_labels"] = {str(k): v for k, v in self.edge_labels.items()}
        return d


def _validate(g):
    vs = g.vertices
    if len(set(vs)) != len(vs):
        raise InvariantViolation("repeated vertex id")
    if len(vs) % 2:
        raise InvariantViolation("odd number of vertices")
    deg = {v: 0 for v in vs}
    for e in g.edges:
        if len(e) != 2:
            raise MalformedInput(f"edge {e} is not a pair")
        a, b = e
        if a not in deg or b not in deg:
            raise InvariantViolation(f"edge {e} uses an unknown vertex")
        if a == b:
            raise InvariantViolation(f"simple loop at vertex {a}")
        deg[a] += 1
        deg[b] += 1
    bad = [v for v, d in deg.items() if d != 3]
    if bad:
        raise InvariantViolation(f"vertices {bad} are not trivalent")
    if g.edge_orientation is not None:
        if len(g.edge_orientation) != len(g.edges):
            raise MalformedInput("edge_orientation length mismatch")
        for e, o in zip(g.edges, g.edge_orientation):
            if sorted(e) != sorted(o):
                raise InvariantViolation(f"orientation {o} does not match edge {e}")
    if g.vertex_orientation is not None:
        hs = set(g.half_edges)
        for v in vs:
            cyc = g.vertex_orientation.get(v)
            if cyc is None or len(cyc) != 3:
                raise MalformedInput(f"vertex {v} needs a cyclic triple")
            cyc = [tuple(h) for h in cyc]
            if len(set(cyc)) != 3 or any(h not in hs or h[0] != v for h in cyc):
                raise InvariantViolation(f"bad cyclic order at vertex {v}")
    n = len(vs) // 2
    if g.vertex_labels is not None:
        if sorted(g.vertex_labels) != sorted(vs) or \
                sorted(g.vertex_labels.values()) != list(range(1, 2 * n + 1)):
            raise InvariantViolation("vertex labels must biject onto 1..2n")
    if g.edge_labels is not None:
        if sorted(g.edge_labels) != list(range(len(g.edges))) or \
                sorted(g.edge_labels.values()) != list(range(1, 3 * n + 1)):
            raise InvariantViolation("edge labels must biject onto 1..3n")


def parse_diagram(text):
    """Diagram from a JSON string (or an already-decoded dict)."""
    try:
        d = json.loads(text) if isinstance(text, (str, bytes)) else dict(text)
        vertices = [int(v) for v in d["vertices"]]
        edges = [tuple(int(x) for x in e) for e in d["edges"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedInput(str(exc)) from exc
    if "degree" in d and int(d["degree"]) * 2 != len(vertices):
        raise MalformedInput("degree does not match vertex count")
    vo = eo = vl = el = None
    try:
        if d.get("vertex_orientation") is not None:
            if len(d["vertex_orientation"]) != len(vertices):
                raise MalformedInput("one cyclic triple per vertex expected")
            vo = {v: tuple(tuple(int(x) for x in h) for h in cyc)
                  for v, cyc in zip(vertices, d["vertex_orientation"])}
        if d.get("edge_orientation") is not None:
            eo = tuple(tuple(int(x) for x in o) for o in d["edge_orientation"])
        if d.get("vertex_labels") is not None:
            vl = {int(k): int(v) for k, v in d["vertex_labels"].items()}
        if d.get("edge_labels") is not None:
            el = {int(k): int(v) for k, v in d["edge_labels"].items()}
    except (TypeError, ValueError) as exc:
        raise MalformedInput(str(exc)) from exc
    return JacobiDiagram(vertices, edges, vo, eo, vl, el)


# -- small named diagrams --------------------------------------------------

def empty_diagram():
    return JacobiDiagram((), ())


def theta():
    return JacobiDiagram((1, 2), ((1, 2), (1, 2), (1, 2)))


def k4():
    return JacobiDiagram((1, 2, 3, 4), ((1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)))


def doubled_square():
    # two double edges joined by two rungs
    return JacobiDiagram((1, 2, 3, 4), ((1, 2), (1, 2), (3, 4), (3, 4), (2, 3), (4, 1)))


def disjoint_union(g, h):
    off = max(g.vertices, default=0)
    shift = {v: v + off - min(h.vertices, default=0) + 1 for v in h.vertices}
    return JacobiDiagram(g.vertices + tuple(shift[v] for v in h.vertices),
                         g.edges + tuple((shift[a], shift[b]) for a, b in h.edges))


def from_matrix(M):
    m = len(M)
    edges = [(i + 1, j + 1) for i in range(m) for j in range(i + 1, m) for _ in range(M[i][j])]
    return JacobiDiagram(tuple(range(1, m + 1)), tuple(edges))


def is_connected(g):
    if not g.vertices:
        return True
    adj = {v: set() for v in g.vertices}
    for a, b in g.edges:
        adj[a].add(b)
        adj[b].add(a)
    seen, stack = {g.vertices[0]}, [g.vertices[0]]
    while stack:
        for w in adj[stack.pop()]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == len(g.vertices)


# -- canonical form ---------------------------------------------------------

def _canon_matrix(M):
    """Lexicographically largest column-major upper triangle over vertex orders."""
    m = len(M)
    best = [None, None]

    def rec(perm, code, rest):
        if not rest:
            if best[0] is None or code > best[0]:
                best[0], best[1] = code, tuple(perm)
            return
        k = len(code)
        for v in sorted(rest):
            seg = tuple(M[p][v] for p in perm)
            nc = code + seg
            if best[0] is not None:
                ref = best[0][:k + len(seg)]
                if nc < ref:
                    continue
            perm.append(v)
            rest.discard(v)
            rec(perm, nc, rest)
            rest.add(v)
            perm.pop()

    rec([], (), set(range(m)))
    return best[0] or (), best[1] or ()


def canonical_form(g):
    code, _ = _canon_matrix(g.multiplicity_matrix())
    return (len(g.vertices), code)


def canonical_diagram(g):
    """Isomorphic copy of g with vertices 1..2n in canonical order."""
    M = g.multiplicity_matrix()
    _, perm = _canon_matrix(M)
    return from_matrix([[M[a][b] for b in perm] for a in perm])


def is_isomorphic(g1, g2):
    return canonical_form(g1) == canonical_form(g2)


def _check_bound(n, bound):
    bound = DEFAULT_DEGREE_BOUND if bound is None else bound
    if n > bound:
        raise DegreeTooLarge(f"degree {n} exceeds bound {bound}")
    if n < 0:
        raise MalformedInput("negative degree")


def _fill_multigraphs(m):
    deg = [3] * m
    M = [[0] * m for _ in range(m)]
    out = []

    def touched(j):
        return deg[j] < 3

    def choose(i, r, start, picks):
        if r == 0:
            for j in picks:
                M[i][j] += 1
                M[j][i] += 1
                deg[j] -= 1
            deg_i, deg[i] = deg[i], 0
            rec()
            deg[i] = deg_i
            for j in picks:
                M[i][j] -= 1
                M[j][i] -= 1
                deg[j] += 1
            return
        fresh_seen = False
        for j in range(start, m):
            if j == i or deg[j] - picks.count(j) <= 0:
                continue
            fresh = not touched(j) and j not in picks
            if fresh:
                # untouched vertices are interchangeable: use the first only
                if fresh_seen:
                    continue
                fresh_seen = True
            choose(i, r - 1, j, picks + [j])

    def rec():
        i = next((k for k in range(m) if deg[k] > 0), None)
        if i is None:
            out.append([row[:] for row in M])
            return
        choose(i, deg[i], i + 1, [])

    rec()
    return out


def generate_diagrams(n, connected=True, bound=None):
    """One diagram per isomorphism class, sorted by canonical form."""
    _check_bound(n, bound)
    if n == 0:
        return [empty_diagram()]
    classes = {}
    for M in _fill_multigraphs(2 * n):
        g = from_matrix(M)
        if connected and not is_connected(g):
            continue
        key = canonical_form(g)
        if key not in classes:
            classes[key] = canonical_diagram(g)
    return [classes[k] for k in sorted(classes)]


def count_automorphisms(g):
    """#Aut as half-edge permutations: vertex maps preserving multiplicities,
    each weighted by the ways of matching parallel edges and flipping them."""
    M = g.multiplicity_matrix()
    m = len(M)
    weight = 1
    for i in range(m):
        for j in range(i + 1, m):
            weight *= math.factorial(M[i][j])
    count = 0

    def rec(img):
        nonlocal count
        k = len(img)
        if k == m:
            count += 1
            return
        for v in range(m):
            if v in img:
                continue
            if all(M[img[i]][v] == M[i][k] for i in range(k)):
                img.append(v)
                rec(img)
                img.pop()

    rec([])
    return count * weight


# -- labelled, edge-oriented diagrams ---------------------------------------

@dataclass(frozen=True, order=True)
class LabelledOrientedDiagram:
    """Vertices are the labels 1..2n; arrows[i] = (origin, end) of the edge labelled i+1."""
    n: int
    arrows: tuple = field(default=())

    def to_diagram(self):
        es = tuple(tuple(a) for a in self.arrows)
        vs = tuple(range(1, 2 * self.n + 1))
        return JacobiDiagram(vs, es, edge_orientation=es,
                             vertex_labels={v: v for v in vs},
                             edge_labels={i: i + 1 for i in range(len(es))})

    def underlying(self):
        return JacobiDiagram(tuple(range(1, 2 * self.n + 1)), self.arrows)

    def half_edges_at(self, v):
        return [(i + 1, end) for i, a in enumerate(self.arrows) for end in (0, 1) if a[end] == v]


def labelled_from_diagram(g):
    if g.vertex_labels is None or g.edge_labels is None:
        raise MissingLabels("vertex and edge labels are required")
    if g.edge_orientation is None:
        raise MissingOrientation("edge orientation is required")
    arrows = [None] * len(g.edges)
    for k, (o, e) in enumerate(g.edge_orientation):
        arrows[g.edge_labels[k] - 1] = (g.vertex_labels[o], g.vertex_labels[e])
    return LabelledOrientedDiagram(g.degree, tuple(arrows))


def as_labelled(g):
    return g if isinstance(g, LabelledOrientedDiagram) else labelled_from_diagram(g)


def labelled_count_formula(n, bound=None):
    _check_bound(n, bound)
    return sum(2 ** (3 * n) * math.factorial(2 * n) * math.factorial(3 * n)
               // count_automorphisms(g) for g in generate_diagrams(n, True, bound))


def enumerate_labelled(n, bound=None):
    """The set of connected labelled edge-oriented diagrams of degree n, sorted."""
    _check_bound(n, bound)
    if n < 1:
        raise MalformedInput("labelled enumeration needs n >= 1")
    out = set()
    for g in generate_diagrams(n, True, bound):
        edges = [(a - 1, b - 1) for a, b in g.edges]
        for pi in permutations(range(1, 2 * n + 1)):
            pairs = [(pi[a], pi[b]) for a, b in edges]
            for order in set(permutations(pairs)):
                for flips in product((0, 1), repeat=3 * n):
                    out.add(LabelledOrientedDiagram(n, tuple(
                        (p[1], p[0]) if f else p for p, f in zip(order, flips))))
    return sorted(out)


def permutation_sign(seq_from, seq_to):
    """Parity of the permutation carrying the listing seq_from to seq_to."""
    pos = {x: i for i, x in enumerate(seq_from)}
    perm = [pos[x] for x in seq_to]
    if sorted(perm) != list(range(len(perm))):
        raise InvariantViolation("listings are not permutations of each other")
    seen = [False] * len(perm)
    sign = 1
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def orientation_sign(g, vertex_orientation):
    """Sign of the vertex-ordered listing of H against the edge-ordered one.

    vertex_orientation maps a vertex label to three half-edges (edge_label, end),
    end 0 for the origin of the arrow and 1 for its end."""
    g = as_labelled(g)
    if vertex_orientation is None:
        raise MissingOrientation("vertex orientation is required")
    edge_listing = [(i + 1, end) for i in range(len(g.arrows)) for end in (0, 1)]
    try:
        vertex_listing = [tuple(h) for v in range(1, 2 * g.n + 1) for h in vertex_orientation[v]]
    except KeyError as exc:
        raise MissingOrientation(f"no cyclic order at vertex {exc}") from exc
    return permutation_sign(edge_listing, vertex_listing)


def canonical_vertex_orientation(g):
    """A vertex orientation of g with orientation_sign = +1."""
    g = as_labelled(g)
    vo = {v: tuple(g.half_edges_at(v)) for v in range(1, 2 * g.n + 1)}
    if orientation_sign(g, vo) < 0:
        a, b, c = vo[1]
        vo[1] = (b, a, c)
    return vo

"""The graded algebra of oriented Jacobi diagrams modulo AS and IHX.

An oriented diagram is stored as a rotation system: a tuple ``opp`` of length
6n where slot 3v+t is the t-th half-edge in the cyclic order at vertex v and
``opp[s]`` is the other half of the edge through s.  Canonical keys are the
relabelled rotation systems produced by a minimal traversal code.
"""
from __future__ import annotations

import threading
from fractions import Fraction
from itertools import product as iproduct

import numpy as np

from .diagrams import (DEFAULT_DEGREE_BOUND, JacobiDiagram, _check_bound, as_labelled,
                       canonical_vertex_orientation, generate_diagrams, orientation_sign)
from .errors import MalformedInput, MissingOrientation, NonzeroConstantTerm

DEFAULT_SERIES_BOUND = 2


# -- rotation systems ---------------------------------------------------------

def has_loop(opp):
    return any(opp[s] // 3 == s // 3 for s in range(len(opp)))


def _traverse(opp, start):
    num = {start // 3: 0}
    rot = {start // 3: start % 3}
    queue = [start // 3]
    code = []
    i = 0
    while i < len(queue):
        v = queue[i]
        i += 1
        r = rot[v]
        for t in range(3):
            o = opp[3 * v + (r + t) % 3]
            w = o // 3
            if w not in num:
                num[w] = len(queue)
                rot[w] = o % 3
                queue.append(w)
            code.append(3 * num[w] + (o % 3 - rot[w]) % 3)
    return tuple(code)


def _components(opp):
    m = len(opp) // 3
    comp = [-1] * m
    out = []
    for v0 in range(m):
        if comp[v0] >= 0:
            continue
        comp[v0] = len(out)
        stack, members = [v0], [v0]
        while stack:
            v = stack.pop()
            for t in range(3):
                w = opp[3 * v + t] // 3
                if comp[w] < 0:
                    comp[w] = comp[v0]
                    stack.append(w)
                    members.append(w)
        out.append(sorted(members))
    return out


def canonical_rotation(opp):
    """Canonical key of an oriented diagram; isomorphic rotation systems agree."""
    opp = tuple(opp)
    codes = []
    for members in _components(opp):
        codes.append(min(_traverse(opp, 3 * v + t) for v in members for t in range(3)))
    codes.sort()
    out, off = [], 0
    for c in codes:
        out.extend(x + off for x in c)
        off += len(c)
    return tuple(out)


def reverse_at(opp, v):
    """AS move: reverse the cyclic order at vertex v."""
    f = list(range(len(opp)))
    f[3 * v + 1], f[3 * v + 2] = f[3 * v + 2], f[3 * v + 1]
    new = [0] * len(opp)
    for s in range(len(opp)):
        new[f[s]] = f[opp[s]]
    return tuple(new)


def disjoint_rotation(k1, k2):
    off = len(k1)
    return tuple(k1) + tuple(x + off for x in k2)


def ihx_terms(opp, h1):
    """The three reconnections around the edge through slot h1 (I, H, X order).

    With (a, b, e1) at the vertex of h1 and (c, d, e2) at the other end the
    terms carry (a,b)/(c,d), (a,c)/(d,b) and (a,d)/(b,c)."""
    h2 = opp[h1]
    vj, vk = h1 // 3, h2 // 3
    a, b = 3 * vj + (h1 % 3 + 1) % 3, 3 * vj + (h1 % 3 + 2) % 3
    c, d = 3 * vk + (h2 % 3 + 1) % 3, 3 * vk + (h2 % 3 + 2) % 3
    out = []
    for (x1, x2), (y1, y2) in (((a, b), (c, d)), ((a, c), (d, b)), ((a, d), (b, c))):
        f = list(range(len(opp)))
        for s, tgt in ((x1, 3 * vj), (x2, 3 * vj + 1), (h1, 3 * vj + 2),
                       (y1, 3 * vk), (y2, 3 * vk + 1), (h2, 3 * vk + 2)):
            f[s] = tgt
        new = [0] * len(opp)
        for s in range(len(opp)):
            new[f[s]] = f[opp[s]]
        out.append(tuple(new))
    return out


def rotation_from_diagram(g):
    if g.vertex_orientation is None:
        raise MissingOrientation("oriented diagram expected")
    slot = {}
    for i, v in enumerate(g.vertices):
        for t, h in enumerate(g.vertex_orientation[v]):
            slot[tuple(h)] = 3 * i + t
    opp = [0] * (3 * len(g.vertices))
    for k, (p, q) in enumerate(g.edges):
        s, r = slot[(p, k, 0)], slot[(q, k, 1)]
        opp[s], opp[r] = r, s
    return tuple(opp)


def diagram_from_rotation(opp):
    m = len(opp) // 3
    edges, halves = [], {}
    for s in range(len(opp)):
        if s < opp[s]:
            k = len(edges)
            edges.append((s // 3 + 1, opp[s] // 3 + 1))
            halves[s] = (s // 3 + 1, k, 0)
            halves[opp[s]] = (opp[s] // 3 + 1, k, 1)
    vo = {v + 1: tuple(halves[3 * v + t] for t in range(3)) for v in range(m)}
    return JacobiDiagram(tuple(range(1, m + 1)), tuple(edges), vertex_orientation=vo)


def rotation_from_labelled(g, vertex_orientation):
    g = as_labelled(g)
    slot = {}
    for v in range(1, 2 * g.n + 1):
        for t, h in enumerate(vertex_orientation[v]):
            slot[tuple(h)] = 3 * (v - 1) + t
    opp = [0] * (6 * g.n)
    for i in range(len(g.arrows)):
        s, r = slot[(i + 1, 0)], slot[(i + 1, 1)]
        opp[s], opp[r] = r, s
    return tuple(opp)


def oriented_generators(n, bound=None):
    """Canonical keys of all degree-n oriented diagrams (connected or not), sorted."""
    _check_bound(n, bound)
    keys = set()
    for g in generate_diagrams(n, connected=False, bound=bound):
        base = [[h for h in g.half_edges if h[0] == v] for v in g.vertices]
        for flips in iproduct((0, 1), repeat=len(g.vertices)):
            vo = {}
            for v, hs, f in zip(g.vertices, base, flips):
                vo[v] = (hs[1], hs[0], hs[2]) if f else tuple(hs)
            gg = JacobiDiagram(g.vertices, g.edges, vertex_orientation=vo)
            keys.add(canonical_rotation(rotation_from_diagram(gg)))
    return sorted(keys)


# -- relations ------------------------------------------------------------------

class RelationSet:
    """AS pairs and IHX triples; each row is a list of (rotation system, coeff)."""

    def __init__(self, degree, as_rows, ihx_rows):
        self.degree = degree
        self.as_rows = as_rows
        self.ihx_rows = ihx_rows

    @property
    def rows(self):
        return self.as_rows + self.ihx_rows

    def __len__(self):
        return len(self.as_rows) + len(self.ihx_rows)


def relation_set(n, bound=None):
    as_rows, ihx_rows = [], []
    for key in oriented_generators(n, bound):
        for v in range(2 * n):
            as_rows.append([(key, 1), (reverse_at(key, v), 1)])
        for h in range(len(key)):
            ihx_rows.append([(t, 1) for t in ihx_terms(key, h)])
    return RelationSet(n, as_rows, ihx_rows)


def row_vector(row):
    """Canonicalized sparse vector of a relation row; looped terms vanish."""
    vec = {}
    for opp, c in row:
        if has_loop(opp):
            continue
        k = canonical_rotation(opp)
        vec[k] = vec.get(k, 0) + Fraction(c)
    return {k: c for k, c in vec.items() if c != 0}


class ReductionBasis:
    """Fully reduced echelon form of the relation space in one degree.

    Pivots go to the largest available key so survivors are the smallest keys."""

    def __init__(self, n, bound=None):
        self.degree = n
        self.columns = oriented_generators(n, bound)
        self.col_index = {k: i for i, k in enumerate(self.columns)}
        self.pivots = {}
        for row in relation_set(n, bound).rows:
            self.add_row(row_vector(row))

    def _eliminate(self, vec):
        vec = dict(vec)
        for c in [c for c in vec if c in self.pivots]:
            coef = vec.get(c)
            if not coef:
                continue
            for k, x in self.pivots[c].items():
                y = vec.get(k, 0) - coef * x
                if y:
                    vec[k] = y
                else:
                    vec.pop(k, None)
        return vec

    def add_row(self, vec):
        vec = self._eliminate(vec)
        if not vec:
            return False
        p = max(vec, key=self.col_index.__getitem__)
        inv = 1 / vec[p]
        vec = {k: x * inv for k, x in vec.items()}
        for q, prow in self.pivots.items():
            coef = prow.get(p)
            if coef:
                for k, x in vec.items():
                    y = prow.get(k, 0) - coef * x
                    if y:
                        prow[k] = y
                    else:
                        prow.pop(k, None)
        self.pivots[p] = vec
        return True

    @property
    def rank(self):
        return len(self.pivots)

    @property
    def dimension(self):
        return len(self.columns) - self.rank

    @property
    def survivors(self):
        return [k for k in self.columns if k not in self.pivots]

    def normal_form(self, vec):
        return {k: c for k, c in self._eliminate(vec).items() if c != 0}


_BASES = {}
_BASES_LOCK = threading.Lock()


def reduction_basis(n, bound=None):
    _check_bound(n, bound)
    with _BASES_LOCK:
        if n not in _BASES:
            _BASES[n] = ReductionBasis(n, bound)
        return _BASES[n]


def dim_A_n(n, bound=None):
    return reduction_basis(n, bound).dimension


def relation_matrix(n, bound=None):
    """Dense integer matrix of the relations (rows) over oriented generators."""
    cols = oriented_generators(n, bound)
    idx = {k: i for i, k in enumerate(cols)}
    rows = []
    for row in relation_set(n, bound).rows:
        vec = row_vector(row)
        r = [0] * len(cols)
        for k, c in vec.items():
            r[idx[k]] = int(c)
        rows.append(r)
    return np.array(rows, dtype=object).reshape(len(rows), len(cols)), cols


# -- algebra elements -----------------------------------------------------------

def _degree(key):
    return len(key) // 6


class AlgebraElement:
    """Exact rational combination of canonical oriented diagrams, kept reduced."""

    def __init__(self, terms=None, bound=DEFAULT_SERIES_BOUND, reduced=False):
        self.bound = bound
        raw = {}
        for k, c in (terms or {}).items():
            k = tuple(k)
            if _degree(k) > bound:
                continue
            c = Fraction(c)
            if c:
                raw[k] = raw.get(k, 0) + c
        self.terms = raw if reduced else _reduce_terms(raw)

    # construction helpers
    @classmethod
    def one(cls, bound=DEFAULT_SERIES_BOUND):
        return cls({(): 1}, bound)

    @classmethod
    def zero(cls, bound=DEFAULT_SERIES_BOUND):
        return cls({}, bound)

    @classmethod
    def from_rotation(cls, opp, coeff=1, bound=DEFAULT_SERIES_BOUND):
        if has_loop(opp):
            return cls.zero(bound)
        return cls({canonical_rotation(opp): coeff}, bound)

    def copy_with(self, terms):
        return AlgebraElement(terms, self.bound, reduced=True)

    def degree_part(self, n):
        return self.copy_with({k: c for k, c in self.terms.items() if _degree(k) == n})

    def degrees(self):
        return sorted({_degree(k) for k in self.terms})

    def is_zero(self):
        return not self.terms

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = AlgebraElement.one(self.bound) * other
        return isinstance(other, AlgebraElement) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __add__(self, other):
        out = dict(self.terms)
        for k, c in other.terms.items():
            y = out.get(k, 0) + c
            if y:
                out[k] = y
            else:
                out.pop(k, None)
        return AlgebraElement(out, min(self.bound, other.bound), reduced=True)

    def __neg__(self):
        return self.copy_with({k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, AlgebraElement):
            return product(self, other)
        other = Fraction(other)
        return self.copy_with({k: c * other for k, c in self.terms.items()} if other else {})

    __rmul__ = __mul__

    def __repr__(self):
        parts = [f"{c}*D{_degree(k)}" for k, c in sorted(self.terms.items())]
        return f"AlgebraElement({' + '.join(parts) or '0'}, bound={self.bound})"

    def to_json(self):
        terms = []
        for k in sorted(self.terms):
            c = self.terms[k]
            terms.append({"diagram": diagram_from_rotation(k).to_json() if k else
                          {"degree": 0, "vertices": [], "edges": [], "vertex_orientation": []},
                          "coeff": f"{c.numerator}/{c.denominator}"})
        return {"bound": self.bound, "terms": terms}


def _reduce_terms(raw):
    by_deg = {}
    for k, c in raw.items():
        by_deg.setdefault(_degree(k), {})[k] = c
    out = {}
    for n, vec in by_deg.items():
        out.update(reduction_basis(n, max(n, DEFAULT_DEGREE_BOUND)).normal_form(vec) if n else vec)
    return out


def reduce(x):
    return AlgebraElement(x.terms, x.bound)


def element_from_json(d):
    from .diagrams import parse_diagram
    try:
        bound = int(d.get("bound", DEFAULT_SERIES_BOUND))
        terms = {}
        for t in d["terms"]:
            g = parse_diagram(t["diagram"])
            key = canonical_rotation(rotation_from_diagram(g)) if g.vertices else ()
            if g.vertices and has_loop(rotation_from_diagram(g)):
                continue
            terms[key] = terms.get(key, 0) + Fraction(str(t["coeff"]))
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        raise MalformedInput(str(exc)) from exc
    return AlgebraElement(terms, bound)


def product(x, y):
    bound = min(x.bound, y.bound)
    out = {}
    for k1, c1 in x.terms.items():
        for k2, c2 in y.terms.items():
            if _degree(k1) + _degree(k2) > bound:
                continue
            k = canonical_rotation(disjoint_rotation(k1, k2))
            out[k] = out.get(k, 0) + c1 * c2
    return AlgebraElement(out, bound)


def bar_involution(x):
    return x.copy_with({k: (-c if _degree(k) % 2 else c) for k, c in x.terms.items()})


def exp_truncated(x):
    if x.degree_part(0).terms:
        raise NonzeroConstantTerm("exp needs a vanishing degree-0 part")
    total = AlgebraElement.one(x.bound)
    power = AlgebraElement.one(x.bound)
    for k in range(1, x.bound + 1):
        power = product(power, x) * Fraction(1, k)
        total = total + power
    return total


def labelled_class(g, vertex_orientation, bound=None):
    """Class of a labelled edge-oriented diagram carrying the given vertex orientation."""
    g = as_labelled(g)
    bound = max(DEFAULT_SERIES_BOUND, g.n) if bound is None else bound
    sign = orientation_sign(g, vertex_orientation)
    return AlgebraElement.from_rotation(rotation_from_labelled(g, vertex_orientation), sign, bound)


def class_of_labelled(g, bound=None):
    g = as_labelled(g)
    return labelled_class(g, canonical_vertex_orientation(g), bound)


def theta_class(bound=DEFAULT_SERIES_BOUND):
    """[θ]: the class of θ with every edge running from vertex 1 to vertex 2."""
    from .diagrams import LabelledOrientedDiagram
    return class_of_labelled(LabelledOrientedDiagram(1, ((1, 2),) * 3), bound)


def random_element(rng, bound=DEFAULT_SERIES_BOUND, terms=4, max_degree=None, min_degree=0):
    max_degree = bound if max_degree is None else max_degree
    pool = [k for n in range(min_degree, max_degree + 1)
            for k in (oriented_generators(n) if n else [()])]
    out = {}
    for _ in range(terms):
        k = pool[int(rng.integers(len(pool)))]
        out[k] = out.get(k, 0) + Fraction(int(rng.integers(-9, 10)), int(rng.integers(1, 7)))
    return AlgebraElement(out, bound)

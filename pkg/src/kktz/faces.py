"""Codimension-one faces of the configuration spaces and the combinatorial
cancellation of their contributions."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from itertools import combinations

from .algebra import class_of_labelled
from .diagrams import LabelledOrientedDiagram, as_labelled, enumerate_labelled
from .errors import CancellationGap, EmptyV, NotApplicable, Unclassifiable, UnknownVertex

INFINITY, COLLAPSE, VARIANT = "infinity", "collapse", "anomaly_variant"


@dataclass(frozen=True, order=True)
class FaceDescriptor:
    kind: str
    B: tuple
    ambient: str = "C_V"

    @property
    def name(self):
        inner = "{" + ",".join(map(str, self.B)) + "}"
        if self.kind == INFINITY:
            return f"F(∞;{inner})"
        return f"F({inner})" if self.kind == COLLAPSE else f"f({inner})"


def enumerate_faces(V, ambient="C_V"):
    V = tuple(sorted(V))
    if ambient == "C_V":
        if not V:
            raise EmptyV("C_V needs at least one point")
        subsets = [tuple(B) for k in range(1, len(V) + 1) for B in combinations(V, k)]
        return ([FaceDescriptor(INFINITY, B, ambient) for B in subsets]
                + [FaceDescriptor(COLLAPSE, B, ambient) for B in subsets if len(B) >= 2])
    if ambient == "S_V":
        if len(V) < 2:
            raise EmptyV("S_V needs at least two points")
        return [FaceDescriptor(VARIANT, tuple(B), ambient)
                for k in range(2, len(V)) for B in combinations(V, k)]
    raise ValueError(f"unknown ambient {ambient!r}")


def face_count_formula(m, ambient="C_V"):
    if ambient == "C_V":
        return (2 ** m - 1) + (2 ** m - m - 1)
    return 2 ** m - m - 2


@dataclass(frozen=True)
class InducedSubgraph:
    vertices: tuple
    edges: tuple   # (edge id, (p, q))

    def valence(self, v):
        return sum((p == v) + (q == v) for _, (p, q) in self.edges)

    def is_connected(self):
        if not self.vertices:
            return True
        seen, stack = {self.vertices[0]}, [self.vertices[0]]
        while stack:
            v = stack.pop()
            for _, (p, q) in self.edges:
                for a, b in ((p, q), (q, p)):
                    if a == v and b not in seen:
                        seen.add(b)
                        stack.append(b)
        return len(seen) == len(self.vertices)

    def edge_multiset(self):
        return Counter(tuple(sorted(e)) for _, e in self.edges)


def induced_subgraph(g, B):
    B = tuple(sorted(B))
    if isinstance(g, LabelledOrientedDiagram):
        names, pairs = range(1, 2 * g.n + 1), [(i + 1, a) for i, a in enumerate(g.arrows)]
    else:
        lab = g.vertex_labels or {v: v for v in g.vertices}
        names = lab.values()
        elab = g.edge_labels or {k: k for k in range(len(g.edges))}
        pairs = [(elab[k], (lab[p], lab[q])) for k, (p, q) in enumerate(g.edges)]
    missing = set(B) - set(names)
    if missing:
        raise UnknownVertex(f"vertices {sorted(missing)} not in diagram")
    inB = set(B)
    return InducedSubgraph(B, tuple((k, e) for k, e in pairs if e[0] in inB and e[1] in inB))


@dataclass(frozen=True)
class FaceClassification:
    kind: str
    vertex: int | None = None   # v_m for the sigma case
    edge: int | None = None     # edge label for the IHX case
    vj: int | None = None
    vk: int | None = None


def classify_face(g, face):
    g = as_labelled(g)
    if face.kind == INFINITY:
        return FaceClassification("VanishesAtInfinity")
    B = face.B
    sub = induced_subgraph(g, B)
    if not sub.is_connected():
        return FaceClassification("VanishesDisconnected")
    val = {v: sub.valence(v) for v in B}
    if len(B) >= 3 and any(x == 1 for x in val.values()):
        return FaceClassification("VanishesUnivalent")
    two = [v for v in B if val[v] == 2]
    if two:
        return FaceClassification("CancelsBySigma", vertex=min(two))
    if len(B) == 2 and len(sub.edges) == 1:
        label, (p, q) = sub.edges[0]
        return FaceClassification("IHXFamily", edge=label, vj=p, vk=q)
    if face.kind == COLLAPSE and len(B) == 2 * g.n:
        return FaceClassification("AnomalyFaceFV")
    raise Unclassifiable(f"no rule applies to {face.name}")


def sigma(B, g):
    g = as_labelled(g)
    c = classify_face(g, FaceDescriptor(COLLAPSE, tuple(sorted(B))))
    if c.kind != "CancelsBySigma":
        raise NotApplicable(f"face is {c.kind}")
    inB = set(B)
    i, j = [k for k, a in enumerate(g.arrows)
            if c.vertex in a and a[0] in inB and a[1] in inB]
    arrows = list(g.arrows)
    arrows[i], arrows[j] = g.arrows[j][::-1], g.arrows[i][::-1]
    return LabelledOrientedDiagram(g.n, tuple(arrows))


def ihx_family(g, B):
    """The six diagrams obtained by redistributing the four half-edges next to
    the edge of Γ_B between its two ends; indexed by the pair kept at v_j."""
    g = as_labelled(g)
    c = classify_face(g, FaceDescriptor(COLLAPSE, tuple(sorted(B))))
    if c.kind != "IHXFamily":
        raise NotApplicable(f"face is {c.kind}")
    ell = c.edge - 1
    others = [(k, end) for k, a in enumerate(g.arrows) if k != ell
              for end in (0, 1) if a[end] in (c.vj, c.vk)]
    out = []
    for S in combinations(others, 2):
        arrows = [list(a) for a in g.arrows]
        for k, end in others:
            arrows[k][end] = c.vj if (k, end) in S else c.vk
        out.append(LabelledOrientedDiagram(g.n, tuple(tuple(a) for a in arrows)))
    return out


def boundary_cancellation_check(n, labelled=None):
    """Classify every (labelled diagram, face) pair and verify the cancellations."""
    E = labelled if labelled is not None else enumerate_labelled(n)
    Eset = set(E)
    faces = enumerate_faces(range(1, 2 * n + 1), "C_V")
    by_class = Counter()
    cls_cache, class_cache = {}, {}
    family_of = {}
    ihx_groups = sigma_pairs = parallel_sigma = sigma_fixed = 0
    fixed_sizes = set()
    survivors = set()

    def cls(x):
        t = class_cache.get(x)
        if t is None:
            t = class_cache[x] = class_of_labelled(x)
        return t

    for g in E:
        shape = tuple(sorted(tuple(sorted(a)) for a in g.arrows))
        for face in faces:
            ck = (shape, face)
            c = cls_cache.get(ck)
            if c is None:
                try:
                    c = cls_cache[ck] = classify_face(g, face)
                except Unclassifiable as exc:
                    raise CancellationGap(str(exc)) from exc
            by_class[c.kind] += 1
            if c.kind == "CancelsBySigma":
                s = sigma(face.B, g)
                if s not in Eset or sigma(face.B, s) != g:
                    raise CancellationGap(f"sigma fails on {g} at {face.name}")
                if cls(s) != cls(g):
                    raise CancellationGap(f"sigma changes the class of {g}")
                if g < s:
                    sigma_pairs += 1
                elif g == s:
                    # I = -I for a fixed point, so the term vanishes on its own
                    sigma_fixed += 1
                    fixed_sizes.add(len(face.B))
                if len(face.B) == 2:
                    parallel_sigma += 1
            elif c.kind == "IHXFamily":
                fam = ihx_family(g, face.B)
                key = (face.B, frozenset(fam))
                if len(key[1]) != 6 or g not in key[1] or not key[1] <= Eset:
                    raise CancellationGap(f"bad IHX family at {g}, {face.name}")
                prev = family_of.get((g, face.B))
                if prev is not None:
                    if prev != key:
                        raise CancellationGap("IHX families overlap inconsistently")
                    continue
                total = None
                for x in fam:
                    family_of[(x, face.B)] = key
                    total = cls(x) if total is None else total + cls(x)
                if not total.is_zero():
                    raise CancellationGap(f"IHX family sum {total} is nonzero")
                ihx_groups += 1
            elif c.kind == "AnomalyFaceFV":
                survivors.add("F(V)")
    if by_class["CancelsBySigma"] != 2 * sigma_pairs + sigma_fixed:
        raise CancellationGap("sigma does not pair the faces off")
    return {"degree": n,
            "labelled_diagrams": len(E),
            "faces_total": len(E) * len(faces),
            "faces_per_diagram": len(faces),
            "by_class": dict(sorted(by_class.items())),
            "ihx_groups": ihx_groups,
            "sigma_pairs": sigma_pairs,
            "sigma_fixed_points": sigma_fixed,
            "sigma_fixed_point_face_sizes": sorted(fixed_sizes),
            "sigma_two_vertex_faces": parallel_sigma,
            "survivors": sorted(survivors)}

from collections import deque
from itertools import combinations, combinations_with_replacement, permutations, product

import numpy as np
import pytest

from kktz import diagrams as D
from kktz.errors import (DegreeTooLarge, InvariantViolation, MalformedInput, MissingLabels,
                         MissingOrientation)


# -- oracles ------------------------------------------------------------------

def _brute_classes(n, connected):
    """Isomorphism classes of trivalent loopless multigraphs on 2n vertices by
    listing every multiset of 3n vertex pairs."""
    m = 2 * n
    pairs = list(combinations(range(m), 2))
    perms = list(permutations(range(m)))
    seen = set()
    for ms in combinations_with_replacement(pairs, 3 * n):
        deg = [0] * m
        for a, b in ms:
            deg[a] += 1
            deg[b] += 1
        if any(d != 3 for d in deg):
            continue
        if connected:
            adj = {v: set() for v in range(m)}
            for a, b in ms:
                adj[a].add(b)
                adj[b].add(a)
            reach, todo = {0}, deque([0])
            while todo:
                for w in adj[todo.popleft()] - reach:
                    reach.add(w)
                    todo.append(w)
            if len(reach) != m:
                continue
        seen.add(min(tuple(sorted(tuple(sorted((p[a], p[b]))) for a, b in ms)) for p in perms))
    return len(seen)


def _half_edge_automorphisms(g):
    """Count permutations of half-edges that keep vertex incidence and edge pairing."""
    hs = [(k, end) for k in range(len(g.edges)) for end in (0, 1)]
    at = {v: [h for h in hs if g.edges[h[0]][h[1]] == v] for v in g.vertices}
    count = 0
    for pi in permutations(g.vertices):
        vmap = dict(zip(g.vertices, pi))
        for choice in product(*[list(permutations(at[vmap[v]])) for v in g.vertices]):
            sigma = {}
            for v, img in zip(g.vertices, choice):
                sigma.update(zip(at[v], img))
            if all(sigma[(k, 1 - e)] == (sigma[(k, e)][0], 1 - sigma[(k, e)][1]) for k, e in hs):
                count += 1
    return count


# -- tests ----------------------------------------------------------------------

@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("connected", [True, False])
def test_generation_matches_brute_force(n, connected):
    assert len(D.generate_diagrams(n, connected)) == _brute_classes(n, connected)


def test_generated_diagrams_pairwise_distinct_and_trivalent():
    gs = D.generate_diagrams(3, connected=False)
    for g in gs:
        assert all(sum(v in e for e in g.edges) == 3 for v in g.vertices)
    for a, b in combinations(gs, 2):
        assert not D.is_isomorphic(a, b)


@pytest.mark.parametrize("make", [D.theta, D.k4, D.doubled_square])
def test_automorphisms_match_half_edge_count(make):
    g = make()
    assert D.count_automorphisms(g) == _half_edge_automorphisms(g)


def test_known_automorphism_counts():
    # [DERIVED] K4: all 24 vertex permutations; doubled square: 4 symmetries x 2! x 2!
    assert D.count_automorphisms(D.k4()) == 24
    assert D.count_automorphisms(D.doubled_square()) == 16
    assert D.count_automorphisms(D.empty_diagram()) == 1


def test_isomorphism_under_random_relabelling():
    rng = np.random.default_rng(0)
    for g in D.generate_diagrams(3, connected=False):
        perm = rng.permutation(len(g.vertices)) + 10
        relab = dict(zip(g.vertices, perm.tolist()))
        h = D.JacobiDiagram(tuple(relab[v] for v in g.vertices),
                            tuple((relab[a], relab[b]) for a, b in reversed(g.edges)))
        assert D.is_isomorphic(g, h)
        assert D.canonical_form(g) == D.canonical_form(h)


def test_k4_not_isomorphic_to_doubled_square():
    assert not D.is_isomorphic(D.k4(), D.doubled_square())


def test_invalid_diagrams_rejected():
    with pytest.raises(InvariantViolation):
        D.JacobiDiagram((1, 2), ((1, 1), (1, 2), (2, 2)))
    with pytest.raises(InvariantViolation):
        D.JacobiDiagram((1, 2), ((1, 2), (1, 2)))
    with pytest.raises(MalformedInput):
        D.parse_diagram('{"vertices": [1, 2]}')
    with pytest.raises(MalformedInput):
        D.parse_diagram('{"degree": 2, "vertices": [1, 2], "edges": [[1,2],[1,2],[1,2]]}')


def test_degree_bound():
    with pytest.raises(DegreeTooLarge):
        D.generate_diagrams(3, bound=2)


def test_json_round_trip():
    g = D.k4()
    assert D.parse_diagram(g.to_json()) == g


def test_labelled_degree_one_by_hand():
    # [DERIVED] theta on labels 1,2: each of the 3 edges independently 1->2 or 2->1
    E = D.enumerate_labelled(1)
    assert len(E) == 8
    assert set(E) == {D.LabelledOrientedDiagram(1, a)
                      for a in product([(1, 2), (2, 1)], repeat=3)}


def test_labelled_needs_labels_and_orientation():
    with pytest.raises(MissingLabels):
        D.labelled_from_diagram(D.theta())
    g = D.JacobiDiagram((1, 2), ((1, 2),) * 3, vertex_labels={1: 1, 2: 2},
                        edge_labels={0: 1, 1: 2, 2: 3})
    with pytest.raises(MissingOrientation):
        D.labelled_from_diagram(g)


def test_permutation_sign():
    assert D.permutation_sign("abc", "abc") == 1
    assert D.permutation_sign("abc", "bac") == -1
    assert D.permutation_sign("abcd", "badc") == 1
    assert D.permutation_sign("abcd", "bcda") == -1


def test_orientation_sign_and_canonical_choice():
    g = D.LabelledOrientedDiagram(1, ((1, 2),) * 3)
    vo = {1: ((1, 0), (2, 0), (3, 0)), 2: ((1, 1), (2, 1), (3, 1))}
    # vertex listing in edge-listing positions is [0,2,4,1,3,5]: one 4-cycle, so odd
    assert D.orientation_sign(g, vo) == -1
    swapped = dict(vo)
    swapped[1] = ((2, 0), (1, 0), (3, 0))
    assert D.orientation_sign(g, swapped) == 1
    for h in D.enumerate_labelled(1):
        assert D.orientation_sign(h, D.canonical_vertex_orientation(h)) == 1

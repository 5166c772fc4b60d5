"""Nested collapse trees and the chart maps xi / r near a limit configuration.

Finite case: points collapse inside R^3 (chart phi = identity).
Infinity case: points escape to infinity, chart phi_inf(mu x) = x / mu.
Maps V -> R^3 are stored as arrays of shape (|V|, 3), rows in sorted V order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateDirection, DegenerateScale, MalformedInput, OutsideNeighborhood

MIN_NORM = 0.1
MIN_SEPARATION = 0.05


def _fs(A):
    return frozenset(A)


def _key(A):
    return (-len(A), tuple(sorted(A)))


class NestedTree:
    """Laminar family of subsets of V with basepoints and witness points."""

    def __init__(self, V, members, b=None, bprime=None, variant="finite",
                 special=None, degenerate=None, b_root=None):
        self.V = tuple(sorted(V))
        self.index = {a: i for i, a in enumerate(self.V)}
        self.members = sorted({_fs(A) for A in members}, key=_key)
        self.variant = variant
        self.special = [_fs(A) for A in (special or [])]
        self.degenerate = {_fs(A) for A in (degenerate or [])}
        if b is None:
            b = self._assign_basepoints(min(self.V) if b_root is None else b_root)
        self.b = {_fs(A): x for A, x in b.items()}
        if bprime is None:
            bprime = {A: self._first_witness(A) for A in self.members if len(A) >= 2}
        self.bprime = {_fs(A): x for A, x in bprime.items()}

    # structure
    def parent(self, A):
        ups = [B for B in self.members if A < B]
        return min(ups, key=len) if ups else None

    def daughters(self, A):
        return [B for B in self.members if B < A and self.parent(B) == A]

    def sons(self, A):
        inside = set().union(*self.daughters(A)) if self.daughters(A) else set()
        return sorted(set(A) - inside)

    def child_of(self, A, a):
        for D in self.daughters(A):
            if a in D:
                return D
        return _fs([a])

    def depth(self):
        return max((sum(1 for B in self.members if A <= B) for A in self.members), default=0)

    def special_daughter(self, i):
        return self.special[i + 1] if i + 1 < len(self.special) else None

    def level(self, A):
        """Index i(A) of the smallest special member containing A."""
        return max(i for i, S in enumerate(self.special) if A <= S)

    def _assign_basepoints(self, root_b):
        b = {}
        for A in self.members:          # parents come first in this order
            P = self.parent(A)
            ref = root_b if P is None else b[P]
            b[A] = ref if ref in A else min(A)
        return b

    def _first_witness(self, A):
        bA = self.b[A]
        sons = set(self.sons(A))
        bases = {self.b[D] for D in self.daughters(A) if bA not in D}
        for a in sorted(A):
            if a != bA and (a in sons or a in bases):
                return a
        return None

    def codim(self):
        if self.variant == "finite":
            return len(self.members)
        return len(self.special) + len(self.degenerate)

    def to_json(self):
        sp = {A: i for i, A in enumerate(self.special)}
        out = []
        for A in self.members:
            rec = {"set": sorted(A), "b": self.b[A], "bprime": self.bprime.get(A),
                   "degenerate": A in self.degenerate}
            if self.variant == "infinity":
                rec["special"] = sp.get(A)
            out.append(rec)
        return {"V": list(self.V), "members": out, "variant": self.variant}


def tree_from_json(d):
    try:
        variant = d.get("variant", "finite")
        mem = d["members"]
        members = [m["set"] for m in mem]
        b = {_fs(m["set"]): m["b"] for m in mem}
        bprime = {_fs(m["set"]): m["bprime"] for m in mem if m.get("bprime") is not None}
        degenerate = [m["set"] for m in mem if m.get("degenerate")]
        sp = sorted((m["special"], m["set"]) for m in mem if m.get("special") is not None)
        return NestedTree(d["V"], members, b, bprime or None, variant,
                          [s for _, s in sp], degenerate)
    except (KeyError, TypeError) as exc:
        raise MalformedInput(str(exc)) from exc


def validate_tree(t):
    """Return (ok, violations)."""
    bad = []
    Vs = _fs(t.V)
    if Vs not in t.members:
        bad.append("V is not a member")
    for A in t.members:
        if not A <= Vs or not A:
            bad.append(f"{sorted(A)} is not a nonempty subset of V")
        if t.variant == "finite" and len(A) < 2:
            bad.append(f"{sorted(A)} has fewer than two elements")
    for i, A in enumerate(t.members):
        for B in t.members[i + 1:]:
            if not (A <= B or B <= A or not (A & B)):
                bad.append(f"{sorted(A)} and {sorted(B)} overlap without nesting")
    if bad:
        return False, bad
    for A in t.members:
        if t.b.get(A) not in A:
            bad.append(f"b({sorted(A)}) not in the set")
    for A in t.members:
        for B in t.members:
            if A < B and t.b.get(B) in A and t.b.get(A) != t.b.get(B):
                bad.append(f"basepoints of {sorted(A)} and {sorted(B)} are incoherent")
    for A in t.members:
        if len(A) < 2:
            continue
        x = t.bprime.get(A)
        bases = {t.b[D] for D in t.daughters(A) if t.b[A] not in D}
        if x is None or x == t.b[A] or not (x in t.sons(A) or x in bases):
            bad.append(f"b'({sorted(A)}) = {x} is not an admissible witness")
    if t.variant == "infinity":
        sp = t.special
        if not sp or sp[0] != Vs:
            bad.append("special chain must start at V")
        for i in range(len(sp) - 1):
            if sp[i + 1] not in t.daughters(sp[i]):
                bad.append(f"V({i + 2}) is not a daughter of V({i + 1})")
        for A in t.members:
            if A not in sp and A not in t.degenerate:
                bad.append(f"{sorted(A)} is neither special nor degenerate")
        for A in t.degenerate:
            if len(A) < 2:
                bad.append(f"degenerate {sorted(A)} is a singleton")
            if A in sp and A != sp[-1]:
                bad.append(f"{sorted(A)} is special, degenerate and not last")
            P = t.parent(A)
            if A not in sp and P is not None and P in sp and t.special_daughter(sp.index(P)) == A:
                bad.append(f"{sorted(A)} is a special daughter marked degenerate")
        for A in sp[1:]:
            if t.parent(A) in t.degenerate:
                bad.append(f"special {sorted(A)} has a degenerate mother")
        if sp and any(t.b.get(A) != t.b.get(sp[-1]) for A in sp):
            bad.append("special members must share the basepoint of V(sigma)")
    else:
        if t.special or t.degenerate:
            bad.append("finite trees carry no special/degenerate markings")
    return not bad, bad


def codim(t):
    return t.codim()


# -- chart points -------------------------------------------------------------

@dataclass
class ChartPoint:
    mu: dict
    w: dict
    u: np.ndarray | None = None      # finite case
    nu: list = field(default_factory=list)   # infinity case
    s: list = field(default_factory=list)

    def flat(self, t):
        parts = [np.array([self.mu[A] for A in t.members if A in self.mu])]
        parts += [self.w[A].ravel() for A in t.members if A in self.w]
        if self.u is not None:
            parts.append(self.u)
        parts.append(np.asarray(self.nu, dtype=float))
        parts += [x.ravel() for x in self.s]
        return np.concatenate(parts)


def chart_distance(P1, P2, t):
    return float(np.max(np.abs(P1.flat(t) - P2.flat(t))))


def _norm(x):
    return float(np.linalg.norm(x))


def _mask(t, A):
    m = np.zeros((len(t.V), 1))
    for a in A:
        m[t.index[a]] = 1.0
    return m


def _separation(t, A, y):
    groups = [[t.index[a] for a in sorted(C)] for C in
              t.daughters(A) + [_fs([x]) for x in t.sons(A)]]
    best = math.inf
    for i, g1 in enumerate(groups):
        for g2 in groups[i + 1:]:
            for p in g1:
                for q in g2:
                    best = min(best, _norm(y[p] - y[q]))
    return best


# -- finite case --------------------------------------------------------------

def v_vectors(P, t):
    """v_A as the full nested sum over C in tau inside A."""
    out = {}
    for A in t.members:
        v = np.zeros((len(t.V), 3))
        for C in t.members:
            if C <= A:
                coef = 1.0
                for D in t.members:
                    if C <= D < A:
                        coef *= P.mu[D]
                v = v + coef * P.w[C]
        if _norm(v) == 0:
            raise DegenerateScale(f"v_{sorted(A)} vanishes")
        out[A] = v
    return out


def finite_admissible(P, t):
    v = v_vectors(P, t)
    for A in t.members:
        if _norm(v[A]) < MIN_NORM or _separation(t, A, v[A] / _norm(v[A])) < MIN_SEPARATION:
            return False
    return True


def chart_xi(P, t, check=True):
    """Q[A] = (u_A, lambda_A, y_A)."""
    if check and not finite_admissible(P, t):
        raise OutsideNeighborhood("chart point outside the admissible neighborhood")
    v = v_vectors(P, t)
    Vs = _fs(t.V)
    nV = _norm(v[Vs])
    Q = {}
    for A in t.members:
        prod = 1.0
        for D in t.members:
            if A <= D:
                prod *= P.mu[D]
        uA = P.u + (P.mu[Vs] / nV) * v[Vs][t.index[t.b[A]]]
        Q[A] = (uA, _norm(v[A]) * prod / nV, v[A] / _norm(v[A]))
    return Q


def realized_map(Q, t):
    uV, lam, y = Q[_fs(t.V)]
    return uV + lam * y


def _collapse_daughters(t, A, y):
    w1 = np.zeros_like(y)
    for a in A:
        C = t.child_of(A, a)
        src = a if len(C) == 1 else t.b[C]
        w1[t.index[a]] = y[t.index[src]]
    n = _norm(w1)
    if n == 0:
        raise DegenerateDirection(f"w1 vanishes for {sorted(A)}")
    return w1 / n


def retraction_r(Q, t):
    Vs = _fs(t.V)
    w = {A: _collapse_daughters(t, A, Q[A][2]) for A in t.members}
    mu = {Vs: Q[Vs][1]}
    for A in t.members:
        if A == Vs:
            continue
        H = t.parent(A)
        yH = Q[H][2]
        bp, bA, bpH = t.index[t.bprime[A]], t.index[t.b[A]], t.index[t.bprime[H]]
        wb = w[A][bp]
        mu[A] = (_norm(w[H][bpH]) * float(np.dot(yH[bp] - yH[bA], wb))
                 / (_norm(yH[bpH]) * float(np.dot(wb, wb))))
    return ChartPoint(mu=mu, w=w, u=np.array(Q[Vs][0], dtype=float))


def finite_conditions(Q, t):
    """Residuals of restriction compatibility (C1) and nested colinearity (C2),
    plus the smallest colinearity multiple (must be >= 0)."""
    x = realized_map(Q, t)
    c1 = 0.0
    for A in t.members:
        uA, lam, y = Q[A]
        for a in A:
            c1 = max(c1, _norm(uA + lam * y[t.index[a]] - x[t.index[a]]))
    c2, cmin = 0.0, math.inf
    for A in t.members:
        for B in t.members:
            if A < B:
                yB, yA = Q[B][2], Q[A][2]
                p = (yB - yB[t.index[t.b[A]]]) * _mask(t, A)
                c = float(np.sum(p * yA))
                c2 = max(c2, _norm(p - c * yA))
                cmin = min(cmin, c)
    return {"C1": c1, "C2": c2, "min_multiple": cmin if cmin < math.inf else 0.0}


# -- random instances -----------------------------------------------------------

def _random_daughters(rng, pool, min_size=2, p_stop=0.35):
    pool = list(pool)
    rng.shuffle(pool)
    out = []
    while len(pool) >= min_size and rng.random() > p_stop:
        k = int(rng.integers(min_size, len(pool) + 1))
        out.append(sorted(pool[:k]))
        pool = pool[k:]
    return out


def random_tree(rng, max_size=5, max_depth=3):
    m = int(rng.integers(2, max_size + 1))
    V = list(range(1, m + 1))
    members = [V]

    def grow(A, depth):
        if depth >= max_depth:
            return
        for D in _random_daughters(rng, A):
            if len(D) < len(A):
                members.append(D)
                grow(D, depth + 1)

    grow(V, 1)
    return NestedTree(V, members, b_root=int(rng.choice(V)))


def _random_direction(rng, t, A, zero_region=(), constant_on=None):
    """Unit map on V: zero outside A and on the child holding b(A) (or on zero_region),
    constant on each daughter."""
    f = np.zeros((len(t.V), 3))
    kids = t.daughters(A) + [_fs([a]) for a in t.sons(A)] if constant_on is None else constant_on
    for C in kids:
        if (t.b.get(A) in C and not zero_region) or (C & set(zero_region)):
            continue
        val = rng.normal(size=3)
        for a in C:
            f[t.index[a]] = val
    return f / _norm(f)


def random_chart_point(rng, t, mu_range=(0.05, 0.5), tries=200):
    for _ in range(tries):
        mu = {A: float(rng.uniform(*mu_range)) for A in t.members}
        w = {A: _random_direction(rng, t, A) for A in t.members}
        P = ChartPoint(mu=mu, w=w, u=rng.normal(size=3))
        if finite_admissible(P, t):
            return P
    raise OutsideNeighborhood("could not sample an admissible point")


# -- infinity case --------------------------------------------------------------

def random_infinity_tree(rng, max_size=4, max_sigma=2):
    m = int(rng.integers(1, max_size + 1))
    V = list(range(1, m + 1))
    chain = [V]
    while len(chain) < max_sigma and len(chain[-1]) >= 2 and rng.random() < 0.6:
        cur = chain[-1]
        k = int(rng.integers(1, len(cur)))
        chain.append(sorted(rng.choice(cur, size=k, replace=False).tolist()))
    last = chain[-1]
    degenerate = []
    last_deg = len(last) >= 2 and rng.random() < 0.5
    if last_deg:
        degenerate.append(last)

    def grow(A, depth):
        if depth >= 3:
            return
        for D in _random_daughters(rng, A):
            if len(D) < len(A):
                degenerate.append(D)
                grow(D, depth + 1)

    for i, S in enumerate(chain):
        nxt = set(chain[i + 1]) if i + 1 < len(chain) else set()
        if S is last and last_deg:
            grow(S, 1)
        else:
            for D in _random_daughters(rng, [a for a in S if a not in nxt]):
                degenerate.append(D)
                grow(D, 1)
    b_sigma = int(rng.choice(last))
    return NestedTree(V, chain + degenerate, variant="infinity", special=chain,
                      degenerate=degenerate, b_root=b_sigma)


def w_tilde(P, t):
    out = {}
    for A in sorted(t.degenerate, key=len):
        out[A] = P.w[A] + sum((P.mu[C] * out[C] for C in t.daughters(A)),
                              np.zeros((len(t.V), 3)))
    return out


def s_tilde(P, t):
    wt = w_tilde(P, t)
    sig = len(t.special)
    st = [None] * sig
    last = t.special[-1]
    if last in t.degenerate:
        st[-1] = P.s[-1] + P.mu[last] * wt[last]
    else:
        st[-1] = P.s[-1] + sum((P.mu[C] * wt[C] for C in t.daughters(last)),
                               np.zeros((len(t.V), 3)))
    for i in range(sig - 2, -1, -1):
        nxt = t.special[i + 1]
        st[i] = P.s[i] + P.nu[i + 1] * st[i + 1] + sum(
            (P.mu[C] * wt[C] for C in t.daughters(t.special[i]) if C != nxt),
            np.zeros((len(t.V), 3)))
    return st, wt


def lambdas(P):
    return [float(np.prod(P.nu[:r + 1])) for r in range(len(P.nu))]


def infinity_admissible(P, t):
    st, wt = s_tilde(P, t)
    for A, x in wt.items():
        if _norm(x) < MIN_NORM or _separation(t, A, x / _norm(x)) < MIN_SEPARATION:
            return False
    for i, x in enumerate(st):
        S = t.special[i]
        if _norm(x) < MIN_NORM:
            return False
        y = x / _norm(x)
        outside = set(S) - set(t.special_daughter(i) or ())
        if min(_norm(y[t.index[a]]) for a in outside) < MIN_SEPARATION:
            return False
        if S not in t.degenerate and _separation(t, S, y) < MIN_SEPARATION:
            return False
    return True


def chart_xi_infty(P, t, check=True):
    """Q[A] = ('plain', ell, S) or ('degenerate', ell, u, m, v)."""
    if check and not infinity_admissible(P, t):
        raise OutsideNeighborhood("chart point outside the admissible neighborhood")
    st, wt = s_tilde(P, t)
    lam = lambdas(P)
    Q = {}
    for A in t.members:
        i = t.level(A)
        sA = st[i] * _mask(t, A)
        if A not in t.degenerate:
            n = _norm(sA)
            Q[A] = ("plain", lam[i] * n, sA / n)
            continue
        sb = sA[t.index[t.b[A]]]
        nb = _norm(sb)
        prod = 1.0
        for D in t.degenerate:
            if A <= D <= t.special[i]:
                prod *= P.mu[D]
        Q[A] = ("degenerate", lam[i] * math.sqrt(len(A)) * nb, sb / nb,
                prod * _norm(wt[A]) / (math.sqrt(len(A)) * nb), wt[A] / _norm(wt[A]))
    return Q


def chart_coordinates(Q, t, A):
    """The map A -> R^3 (in the coordinates of phi_inf) carried by Q[A]."""
    q = Q[A]
    if q[0] == "plain":
        return q[1] * q[2]
    _, ell, u, m, v = q
    return ell * (_mask(t, A) * u / math.sqrt(len(A)) + m * v)


def realized_map_infty(Q, t):
    """Actual points: phi_inf^{-1} applied to the chart coordinates of V."""
    x = chart_coordinates(Q, t, _fs(t.V))
    r2 = np.sum(x * x, axis=1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        return x / r2, x


def infinity_conditions(Q, t):
    x = chart_coordinates(Q, t, _fs(t.V))
    c1 = 0.0
    for A in t.members:
        y = chart_coordinates(Q, t, A)
        for a in A:
            c1 = max(c1, _norm(y[t.index[a]] - x[t.index[a]]))
    return {"C1": c1}


def retraction_r_infty(Q, t):
    sig = len(t.special)
    last = t.special[-1]
    w = {}
    for A in t.degenerate:
        w[A] = _collapse_daughters(t, A, Q[A][4])
    s = [None] * sig
    Sfull = {}
    for i, A in enumerate(t.special):
        if A in t.degenerate:
            s[i] = _mask(t, A) * Q[A][2] / math.sqrt(len(A))
            continue
        S = Q[A][2]
        Sfull[i] = S
        nxt = t.special_daughter(i) or frozenset()
        s1 = np.zeros_like(S)
        for a in A:
            if a in nxt:
                continue
            C = t.child_of(A, a)
            s1[t.index[a]] = S[t.index[a if len(C) == 1 else t.b[C]]]
        s[i] = s1 / _norm(s1)
    mu = {}
    for A in t.degenerate:
        if A == last:
            continue
        H = t.parent(A)
        bp, bA, bpH = t.index[t.bprime[A]], t.index[t.b[A]], t.index[t.bprime[H]]
        wb = w[A][bp]
        if H in t.degenerate:
            big, small = Q[H][4], w[H]
        else:
            j = t.special.index(H)
            big, small = Sfull[j], s[j]
        mu[A] = (float(np.dot(big[bp] - big[bA], wb)) / float(np.dot(wb, wb))
                 * _norm(small[bpH]) / _norm(big[bpH]))
    if last in t.degenerate:
        wt = {}
        for A in sorted((D for D in t.degenerate if D <= last), key=len):
            wt[A] = w[A] + sum((mu[C] * wt[C] for C in t.daughters(A)),
                               np.zeros((len(t.V), 3)))
        mu[last] = Q[last][3] / _norm(wt[last])
    b_sigma = t.index[t.b[last]]
    nu = [0.0] * sig
    for i in range(1, sig):
        A = t.special[i]
        if i == sig - 1 and (A in t.degenerate or len(A) == 1):
            x = b_sigma
        else:
            x = t.index[t.bprime[A]]
        Sp, sp = Sfull[i - 1], s[i - 1]
        bpp = t.index[t.bprime[t.special[i - 1]]]
        nu[i] = (float(np.dot(Sp[x], s[i][x])) / float(np.dot(s[i][x], s[i][x]))
                 * _norm(sp[bpp]) / _norm(Sp[bpp]))
    Vs = t.special[0]
    ellV = Q[Vs][1]
    if Vs in t.degenerate or len(Vs) == 1:
        nu[0] = ellV
    else:
        x = t.index[t.bprime[Vs]]
        nu[0] = ellV * float(np.dot(Sfull[0][x], s[0][x])) / float(np.dot(s[0][x], s[0][x]))
    return ChartPoint(mu=mu, w=w, nu=nu, s=s)


def random_infinity_point(rng, t, scale_range=(0.05, 0.5), tries=200):
    sig = len(t.special)
    for _ in range(tries):
        nu = [float(rng.uniform(*scale_range)) for _ in range(sig)]
        mu = {A: float(rng.uniform(*scale_range)) for A in t.degenerate}
        w = {A: _random_direction(rng, t, A) for A in t.degenerate}
        s = []
        for i, A in enumerate(t.special):
            if A in t.degenerate:
                val = rng.normal(size=3)
                val /= _norm(val) * math.sqrt(len(A))
                s.append(_mask(t, A) * val)
                continue
            nxt = t.special_daughter(i) or frozenset()
            kids = [C for C in t.daughters(A) if C != nxt] + [_fs([a]) for a in t.sons(A)]
            f = np.zeros((len(t.V), 3))
            for C in kids:
                val = rng.normal(size=3)
                for a in C:
                    f[t.index[a]] = val
            s.append(f / _norm(f))
        P = ChartPoint(mu=mu, w=w, nu=nu, s=s)
        if infinity_admissible(P, t):
            return P
    raise OutsideNeighborhood("could not sample an admissible point")


def roundtrip_residuals(rng, instances, variant="finite"):
    """Max |r(xi(P)) - P| over random admissible instances, plus condition residuals."""
    worst, cond = 0.0, 0.0
    for _ in range(instances):
        if variant == "finite":
            t = random_tree(rng)
            P = random_chart_point(rng, t)
            Q = chart_xi(P, t)
            R = retraction_r(Q, t)
            c = finite_conditions(Q, t)
            cond = max(cond, c["C1"], c["C2"])
        else:
            t = random_infinity_tree(rng)
            P = random_infinity_point(rng, t)
            Q = chart_xi_infty(P, t)
            R = retraction_r_infty(Q, t)
            cond = max(cond, infinity_conditions(Q, t)["C1"])
        worst = max(worst, chart_distance(P, R, t))
    return worst, cond

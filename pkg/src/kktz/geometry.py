"""Quaternionic matrix identities, mapping degrees, linking numbers and the
extended direction map of two points in S^3 = R^3 + infinity."""
from __future__ import annotations

import math

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import CoincidentPoints, CurvesTooClose, MalformedInput, NonUnit, NotClosed

UNIT_TOL = 1e-12
P13 = np.array([[0.0, 0.0, 1.0], [0.0, 1.0, 0.0], [-1.0, 0.0, 0.0]])


# -- quaternions (x0 + x1 i + x2 j + x3 k), vectorized over leading axes ----------

def qmul(p, q):
    p, q = np.asarray(p, float), np.asarray(q, float)
    a0, a1, a2, a3 = np.moveaxis(p, -1, 0)
    b0, b1, b2, b3 = np.moveaxis(q, -1, 0)
    return np.stack([a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
                     a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
                     a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
                     a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0], axis=-1)


def qconj(q):
    q = np.asarray(q, float)
    return q * np.array([1.0, -1.0, -1.0, -1.0])


def random_unit_quaternions(rng, n):
    q = rng.normal(size=(n, 4))
    return q / np.linalg.norm(q, axis=1, keepdims=True)


def _check_unit(q):
    q = np.asarray(q, float)
    if np.any(np.abs(np.linalg.norm(q, axis=-1) - 1.0) > UNIT_TOL * 10):
        raise NonUnit("quaternion is not of unit norm")
    return q


def complex_pair(q):
    """q = z3 + z4 j with z3 = x0 + i x1, z4 = x2 + i x3."""
    q = np.asarray(q, float)
    return q[..., 0] + 1j * q[..., 1], q[..., 2] + 1j * q[..., 3]


_BASIS = np.eye(4)[1:]   # i, j, k


def rho(q):
    """Matrix of x -> q x q^-1 on the pure quaternions (columns: images of i, j, k)."""
    q = _check_unit(q)
    qi = qconj(q)
    cols = [qmul(qmul(q, e), qi)[..., 1:] for e in _BASIS]
    return np.stack(cols, axis=-1)


def rho_closed_form(q):
    z3, z4 = complex_pair(_check_unit(q))
    a = np.abs(z3) ** 2 - np.abs(z4) ** 2
    c34 = z3 * np.conj(z4)
    p34 = z3 * z4
    rows = [[a, 2 * c34.imag, 2 * c34.real],
            [2 * p34.imag, (z3 ** 2 + z4 ** 2).real, (z4 ** 2 - z3 ** 2).imag],
            [-2 * p34.real, (z3 ** 2 + z4 ** 2).imag, (z3 ** 2 - z4 ** 2).real]]
    return np.moveaxis(np.array(rows), (0, 1), (-2, -1))


def g3(q):
    """The displayed gluing matrix in coordinates (Re z, Im z, h)."""
    z3, z4 = complex_pair(_check_unit(q))
    c34 = z3 * np.conj(z4)
    p34 = z3 * z4
    rows = [[(z3 ** 2 - z4 ** 2).real, (z4 ** 2 - z3 ** 2).imag, -2 * c34.real],
            [(z3 ** 2 + z4 ** 2).imag, (z3 ** 2 + z4 ** 2).real, -2 * c34.imag],
            [2 * p34.real, -2 * p34.imag, np.abs(z3) ** 2 - np.abs(z4) ** 2]]
    return np.moveaxis(np.array(rows), (0, 1), (-2, -1))


def g3_sphere_action(q, z, h):
    """(z', h') from the stereographic computation, for a point (z, h) of S^2."""
    z3, z4 = complex_pair(_check_unit(q))
    zp = -2 * h * z3 * np.conj(z4) + z3 ** 2 * z - np.conj(z4) ** 2 * np.conj(z)
    hp = h * (np.abs(z3) ** 2 - np.abs(z4) ** 2) + 2 * (z * z3 * z4).real
    return zp, hp


def g3_conjugation_residuals(qs):
    """Max residual of g3 against P13 rho^-1 P13^-1 and against P13 rho^-1 P13."""
    R = rho(qs)
    Rinv = np.swapaxes(R, -1, -2)
    G = g3(qs)
    a = P13 @ Rinv @ np.linalg.inv(P13)
    b = P13 @ Rinv @ P13
    return {"P13 rho^-1 P13^-1": float(np.max(np.abs(G - a))),
            "P13 rho^-1 P13": float(np.max(np.abs(G - b)))}


def resolve_g3_conjugator(qs):
    res = g3_conjugation_residuals(qs)
    best = min(res, key=res.get)
    return best, res


def right_multiplication_matrix(q):
    """Real 4x4 matrix of x -> x q in the basis (1, i, j, k)."""
    q = np.asarray(q, float)
    return np.stack([qmul(e, q) for e in np.eye(4)], axis=-1)


_CMR_BASIS = np.array([[1, 0, 1, 0],
                       [-1j, 0, 1j, 0],
                       [0, 1, 0, 1],
                       [0, -1j, 0, 1j]]) / math.sqrt(2)


def mr_complex(q):
    z1, z2 = complex_pair(q)
    return np.array([[z1, -np.conj(z2)], [z2, np.conj(z1)]])


def cmr_expected(q):
    z1, z2 = complex_pair(q)
    Z = 0j
    return np.array([[z1, -np.conj(z2), Z, Z],
                     [z2, np.conj(z1), Z, Z],
                     [Z, Z, np.conj(z1), -z2],
                     [Z, Z, np.conj(z2), z1]])


def cmr_block_check(q):
    """Max entrywise residual between the complexified right multiplication in
    the basis (1-Ii, j-Ik, 1+Ii, j+Ik)/sqrt2 and the block display."""
    q = _check_unit(q)
    U = _CMR_BASIS
    M = U.conj().T @ right_multiplication_matrix(q).astype(complex) @ U
    return float(np.max(np.abs(M - cmr_expected(q))))


# -- mapping degree ---------------------------------------------------------------

VOL_S3 = 2 * math.pi ** 2
VOL_SO3 = 8 * math.pi ** 2   # Haar volume with the unit-speed Lie algebra frame


def _vee(W):
    return np.stack([W[..., 2, 1], W[..., 0, 2], W[..., 1, 0]], axis=-1)


def _qexp(e, theta):
    return np.cos(theta)[..., None] * np.array([1.0, 0, 0, 0]) + np.sin(theta)[..., None] * e


def _jacobian_dets(f, qs, target, h):
    """Determinants of df in left-translated frames (q i, q j, q k) on S^3 and
    body-frame coordinates on the target."""
    cols = []
    fq = f(qs)
    for e in _BASIS:
        hp = _qexp(e, np.full(len(qs), h))
        hm = _qexp(e, np.full(len(qs), -h))
        fp, fm = f(qmul(qs, hp)), f(qmul(qs, hm))
        d = (fp - fm) / (2 * h)
        if target == "SO3":
            cols.append(_vee(np.swapaxes(fq, -1, -2) @ d))
        else:
            cols.append(qmul(qconj(fq), d)[..., 1:])
    return np.linalg.det(np.stack(cols, axis=-1))


def map_degree(f, samples, seed, target="SO3", h=1e-5, chunk=200_000, singular_tol=1e-8):
    """Monte Carlo degree of f: S^3 -> SO(3) (3x3 matrices) or S^3 -> S^3 (unit quaternions)."""
    rng = np.random.default_rng(seed)
    total = total2 = 0.0
    singular = 0
    done = 0
    while done < samples:
        n = min(chunk, samples - done)
        qs = random_unit_quaternions(rng, n)
        dets = _jacobian_dets(f, qs, target, h)
        singular += int(np.sum(np.abs(dets) < singular_tol))
        total += float(np.sum(dets))
        total2 += float(np.sum(dets ** 2))
        done += n
    mean = total / samples
    var = max(total2 / samples - mean ** 2, 0.0)
    scale = VOL_S3 / VOL_SO3 if target == "SO3" else 1.0
    return {"estimate": mean * scale, "stderr": math.sqrt(var / samples) * scale,
            "samples": samples, "singular_samples": singular}


def rho_squared(q):
    return rho(qmul(q, q))


def haar_volume_axis_angle():
    """Haar volume of SO(3) from the axis-angle density 2(1 - cos t), computed by quadrature."""
    from scipy.integrate import quad
    val, _ = quad(lambda t: 2 * (1 - math.cos(t)), 0, math.pi)
    return 4 * math.pi * val


MAPS = {
    "rho": (rho, "SO3"),
    "rho2": (rho_squared, "SO3"),
    "identity": (lambda q: q, "S3"),
    "constant": (lambda q: np.tile(np.array([1.0, 0, 0, 0]), (len(q), 1)), "S3"),
    "square": (lambda q: qmul(q, q), "S3"),
}


# -- curves and linking -----------------------------------------------------------

class ParametricCurve:
    """Closed curve on [0, 1): closed form (f, df) or periodic spline through samples."""

    def __init__(self, f=None, df=None, samples=None, closure_tol=1e-9):
        if samples is not None:
            pts = np.asarray(samples, float)
            if np.linalg.norm(pts[0] - pts[-1]) < closure_tol:
                pts = pts[:-1]
            t = np.linspace(0, 1, len(pts) + 1)
            spl = CubicSpline(t, np.vstack([pts, pts[:1]]), bc_type="periodic")
            f, df = spl, spl.derivative()
        self.f, self.df = f, df
        gap = np.linalg.norm(np.asarray(self.f(np.array([0.0]))) - np.asarray(self.f(np.array([1.0]))))
        if gap > closure_tol:
            raise NotClosed(f"endpoint gap {gap:.3g}")

    def __call__(self, t):
        return np.asarray(self.f(t))

    def tangent(self, t):
        return np.asarray(self.df(t))

    def traversed(self, times):
        f, df = self.f, self.df
        return ParametricCurve(lambda t: f((times * t) % 1.0), lambda t: times * df((times * t) % 1.0))

    def moved(self, R, shift):
        f, df = self.f, self.df
        return ParametricCurve(lambda t: f(t) @ R.T + shift, lambda t: df(t) @ R.T)


def circle(center, normal, radius, start=None):
    c, n = np.asarray(center, float), np.asarray(normal, float)
    n = n / np.linalg.norm(n)
    a = np.asarray(start, float) if start is not None else np.cross(n, [1.0, 0, 0])
    if np.linalg.norm(a) < 1e-8:
        a = np.cross(n, [0, 1.0, 0])
    a = a - np.dot(a, n) * n
    a /= np.linalg.norm(a)
    b = np.cross(n, a)
    two_pi = 2 * math.pi

    def f(t):
        t = np.asarray(t)[..., None]
        return c + radius * (np.cos(two_pi * t) * a + np.sin(two_pi * t) * b)

    def df(t):
        t = np.asarray(t)[..., None]
        return radius * two_pi * (-np.sin(two_pi * t) * a + np.cos(two_pi * t) * b)

    return ParametricCurve(f, df)


def hopf_pair():
    return circle([0, 0, 0], [0, 0, 1], 1.0), circle([1, 0, 0], [0, 1, 0], 1.0, start=[-1, 0, 0])


def split_pair():
    return circle([0, 0, 0], [0, 0, 1], 1.0), circle([0, 0, 3], [0, 1, 0], 1.0)


def curve_from_json(d):
    try:
        if "samples" in d:
            return ParametricCurve(samples=d["samples"])
        if d.get("kind") == "circle":
            return circle(d["center"], d["normal"], d["radius"])
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedInput(str(exc)) from exc
    raise MalformedInput("curve needs 'samples' or kind 'circle'")


def _nodes(panels, order):
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(0, 1, panels + 1)
    h = np.diff(edges)
    t = (edges[:-1, None] + (x[None] + 1) / 2 * h[:, None]).ravel()
    ww = (w[None] / 2 * h[:, None]).ravel()
    return t, ww


def _gauss_sum(K1, K2, nodes, order=16):
    t, w = _nodes(max(nodes // order, 1), order)
    X, dX = K1(t), K1.tangent(t)
    Y, dY = K2(t), K2.tangent(t)
    D = X[:, None, :] - Y[None, :, :]
    r = np.linalg.norm(D, axis=-1)
    cr = np.cross(dX[:, None, :], dY[None, :, :])
    with np.errstate(divide="ignore", invalid="ignore"):
        val = np.einsum("ijk,ijk->ij", D, cr) / r ** 3
    return float(w @ val @ w) / (4 * math.pi), float(r.min()), X, Y


def gauss_linking(K1, K2, nodes=256, max_nodes=4096, min_distance=1e-6):
    """Gauss double integral with composite Gauss-Legendre nodes, refined while the
    curves come within 10 node spacings of each other."""
    est, dmin, X, Y = _gauss_sum(K1, K2, nodes)
    if dmin < min_distance:
        raise CurvesTooClose(f"curves within {dmin:.3g}")
    spacing = max(np.max(np.linalg.norm(np.diff(X, axis=0), axis=1)),
                  np.max(np.linalg.norm(np.diff(Y, axis=0), axis=1)))
    while dmin < 10 * spacing and nodes < max_nodes:
        nodes *= 2
        est, dmin, X, Y = _gauss_sum(K1, K2, nodes)
        spacing /= 2
    coarse, _, _, _ = _gauss_sum(K1, K2, max(nodes // 2, 16))
    k = int(round(est))
    return {"estimate": est, "integer": k, "confidence": 0.5 - abs(est - k),
            "stderr": abs(est - coarse), "nodes": nodes, "min_distance": dmin}


def crossing_linking_number(K1, K2, rng, segments=2000, tol=1e-4, max_tries=20):
    """Half the signed crossing count between the two components in a random projection."""
    t = np.linspace(0, 1, segments + 1)
    A, B = K1(t), K2(t)
    for _ in range(max_tries):
        d = rng.normal(size=3)
        d /= np.linalg.norm(d)
        e1 = np.cross(d, [1.0, 0, 0] if abs(d[0]) < 0.9 else [0, 1.0, 0])
        e1 /= np.linalg.norm(e1)
        e2 = np.cross(d, e1)
        P = np.stack([A @ e1, A @ e2], -1)
        Q = np.stack([B @ e1, B @ e2], -1)
        p0, p1 = P[:-1, None], P[1:, None]
        q0, q1 = Q[None, :-1], Q[None, 1:]
        r, s = p1 - p0, q1 - q0
        den = r[..., 0] * s[..., 1] - r[..., 1] * s[..., 0]
        qp = q0 - p0
        with np.errstate(divide="ignore", invalid="ignore"):
            u = (qp[..., 0] * s[..., 1] - qp[..., 1] * s[..., 0]) / den
            v = (qp[..., 0] * r[..., 1] - qp[..., 1] * r[..., 0]) / den
        hit = (u >= 0) & (u < 1) & (v >= 0) & (v < 1)
        ii, jj = np.nonzero(hit)
        near = (np.minimum(np.abs(u[ii, jj]), np.abs(1 - u[ii, jj])) < tol) | \
               (np.minimum(np.abs(v[ii, jj]), np.abs(1 - v[ii, jj])) < tol)
        if np.any(near) or np.any(np.abs(den[ii, jj]) < 1e-14):
            continue
        total = 0
        for i, j, uu, vv in zip(ii, jj, u[ii, jj], v[ii, jj]):
            a_pt = A[i] + uu * (A[i + 1] - A[i])
            b_pt = B[j] + vv * (B[j + 1] - B[j])
            ta, tb = A[i + 1] - A[i], B[j + 1] - B[j]
            over, under = (ta, tb) if a_pt @ d > b_pt @ d else (tb, ta)
            total += 1 if d @ np.cross(over, under) > 0 else -1
        return total / 2
    raise CurvesTooClose("no generic projection found")


def random_link(rng, k, points=400, split=False):
    """Core circle and a curve winding k times around it, both smoothly
    perturbed, under a random rigid motion; sampled then splined."""
    R, r = 2.0, 0.7
    t = np.linspace(0, 1, points, endpoint=False)
    T = 2 * np.pi * t
    phase = rng.uniform(0, 2 * np.pi, size=(3, 3))
    amp = 0.08

    def wiggle(T):
        return amp * np.stack([np.sin((m + 1) * T + phase[c, m]) for c in range(3)
                               for m in range(1)], -1)

    core = np.stack([R * np.cos(T), R * np.sin(T), 0 * T], -1) + wiggle(T)
    rad = R + r * np.cos(k * T)
    sat = np.stack([rad * np.cos(T + 0.3), rad * np.sin(T + 0.3), r * np.sin(k * T)], -1) + wiggle(T + 1.0)
    if split:
        sat = sat + np.array([0, 0, 5.0])
    Qm, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    if np.linalg.det(Qm) < 0:
        Qm[:, 0] *= -1
    shift = rng.normal(size=3)
    return (ParametricCurve(samples=core @ Qm.T + shift),
            ParametricCurve(samples=sat @ Qm.T + shift))


# -- extended direction map -------------------------------------------------------

def phi_inf(z):
    """Chart near infinity: z -> z / |z|^2 (so mu x -> x / mu for unit x)."""
    z = np.asarray(z, float)
    return z / np.dot(z, z)


def _unit(v):
    n = np.linalg.norm(v)
    if n == 0:
        raise CoincidentPoints("zero direction")
    return np.asarray(v, float) / n


def p_s3_extended(x, y):
    """Direction from x to y, extended to boundary coordinates.

    A point is an array in R^3 or a tag: ("infinity", v) for the limit of
    phi_inf(mu v) as mu -> 0, or ("diagonal", c, d) for the pair."""
    if isinstance(x, tuple) and x[0] == "diagonal":
        return _unit(x[2])
    xi = isinstance(x, tuple) and x[0] == "infinity"
    yi = isinstance(y, tuple) and y[0] == "infinity"
    if xi and yi:
        a, b = np.asarray(x[1], float), np.asarray(y[1], float)
        return _unit(np.dot(a, a) * b - np.dot(b, b) * a)
    if xi:
        return -_unit(x[1])
    if yi:
        return _unit(y[1])
    x, y = np.asarray(x, float), np.asarray(y, float)
    if np.allclose(x, y, atol=0, rtol=0):
        raise CoincidentPoints("x = y")
    return _unit(y - x)


def propagator_limit_residuals(rng, steps=10, ratio=0.25):
    """Residuals between boundary values and interior values along geometric sequences."""
    x, y = rng.normal(size=3), rng.normal(size=3)
    xu = _unit(x)
    d = rng.normal(size=3)
    seq = [ratio ** (k + 1) for k in range(steps)]
    res = {}
    lim = p_s3_extended(("infinity", xu), y)
    res["infinity_x_sequence"] = [float(np.linalg.norm(p_s3_extended(phi_inf(m * xu), y) - lim)) for m in seq]
    yu = _unit(y)
    lim = p_s3_extended(x, ("infinity", yu))
    res["infinity_y_sequence"] = [float(np.linalg.norm(p_s3_extended(x, phi_inf(m * yu)) - lim)) for m in seq]
    lim = p_s3_extended(("infinity", x), ("infinity", y))
    res["double_infinity_sequence"] = [float(np.linalg.norm(
        p_s3_extended(phi_inf(m * x), phi_inf(m * y)) - lim)) for m in seq]
    lim = p_s3_extended(("diagonal", x, d), None)
    res["diagonal_sequence"] = [float(np.linalg.norm(p_s3_extended(x, x + m * d) - lim)) for m in seq]
    return {k: v[-1] for k, v in res.items()}, res

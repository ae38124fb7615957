"""Points, caps, separated node sets and reference quadrature on S^{d-1}.

Only ``d = 2`` (the circle) and ``d = 3`` (the 2-sphere) are supported.  The
surface measure is normalized to total mass one throughout the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.spatial import SphericalVoronoi, cKDTree
from scipy.special import roots_jacobi
from scipy.stats import qmc

__all__ = [
    "DomainError",
    "CapabilityError",
    "as_unit",
    "as_points",
    "geodesic_distance",
    "Cap",
    "SeparatedSet",
    "min_separation",
    "covering_radius",
    "build_maximal_separated_set",
    "normalized_cap_area",
    "QuadRule",
    "sphere_rule",
    "cap_rule",
    "IntegrationReport",
    "reference_integrate",
    "reference_integrate_report",
    "angles_to_points",
]

UNIT_TOL = 1e-12


class DomainError(ValueError):
    """An argument lies outside the domain of an operation."""


class CapabilityError(NotImplementedError):
    """The requested configuration is not supported by this implementation."""


def _check_dim(d: int) -> int:
    d = int(d)
    if d not in (2, 3):
        raise DomainError(f"dimension d={d} not supported (d must be 2 or 3)")
    return d


def as_unit(x, tol: float = UNIT_TOL) -> np.ndarray:
    """Return ``x`` as a float vector, raising if it is not a unit vector."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise DomainError("expected a single vector")
    _check_dim(x.shape[0])
    if abs(np.linalg.norm(x) - 1.0) > tol:
        raise DomainError(f"vector {x} is not unit length (norm {np.linalg.norm(x)!r})")
    return x


def as_points(x, tol: float = 1e-10) -> np.ndarray:
    """Coerce ``x`` to an ``(N, d)`` array of unit vectors."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    _check_dim(x.shape[1])
    nrm = np.linalg.norm(x, axis=1)
    if np.any(np.abs(nrm - 1.0) > tol):
        raise DomainError("points are not on the unit sphere")
    return x


def angles_to_points(theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    return np.stack([np.cos(theta), np.sin(theta)], axis=-1)


def geodesic_distance(x, y) -> float:
    """Great-circle distance ``arccos <x, y>`` in radians."""
    x = as_unit(x)
    y = as_unit(y)
    if x.shape != y.shape:
        raise DomainError("points live in different dimensions")
    return float(np.arccos(np.clip(np.dot(x, y), -1.0, 1.0)))


def _pair_angles(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return np.arccos(np.clip(x @ y.T, -1.0, 1.0))


def _chord(angle: float) -> float:
    return 2.0 * math.sin(min(angle, math.pi) / 2.0)


def _angle_from_chord(c):
    return 2.0 * np.arcsin(np.clip(np.asarray(c) / 2.0, 0.0, 1.0))


@dataclass(frozen=True)
class Cap:
    """Closed cap ``{y : d(center, y) <= radius}``."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_unit(self.center))
        if not (0.0 < self.radius <= math.pi + 1e-15):
            raise DomainError(f"cap radius {self.radius} outside (0, pi]")

    @property
    def d(self) -> int:
        return self.center.shape[0]

    def contains(self, pts) -> np.ndarray:
        pts = np.atleast_2d(pts)
        return pts @ self.center >= math.cos(self.radius) - 1e-15


def normalized_cap_area(d: int, r: float) -> float:
    """Normalized surface measure of a cap of radius ``r``."""
    d = _check_dim(d)
    r = min(float(r), math.pi)
    if d == 2:
        return r / math.pi
    return (1.0 - math.cos(r)) / 2.0


# ---------------------------------------------------------------------------
# separated sets
# ---------------------------------------------------------------------------


def min_separation(points) -> float:
    """Minimum pairwise geodesic distance (``pi`` for fewer than two points)."""
    pts = np.atleast_2d(points)
    if len(pts) < 2:
        return math.pi
    tree = cKDTree(pts)
    dist, _ = tree.query(pts, k=2)
    return float(_angle_from_chord(dist[:, 1].min()))


def _covering_radius_circle(points: np.ndarray) -> tuple[float, np.ndarray]:
    theta = np.sort(np.mod(np.arctan2(points[:, 1], points[:, 0]), 2 * np.pi))
    gaps = np.diff(np.concatenate([theta, [theta[0] + 2 * np.pi]]))
    i = int(np.argmax(gaps))
    mid = theta[i] + gaps[i] / 2.0
    return float(gaps[i] / 2.0), angles_to_points(mid)


def _far_points_sphere(points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Candidate farthest points (Voronoi vertices) and their distances."""
    if len(points) >= 4:
        try:
            sv = SphericalVoronoi(points, radius=1.0, center=np.zeros(3), threshold=1e-9)
            verts = sv.vertices / np.linalg.norm(sv.vertices, axis=1, keepdims=True)
        except (ValueError, RuntimeError):
            verts = None
    else:
        verts = None
    if verts is None:
        # few or degenerate points: probe densely, the extremum is not needed exactly
        probe = _fibonacci_sphere(20000)
        verts = np.vstack([probe, -points])
    dist, _ = cKDTree(points).query(verts, k=1)
    return verts, _angle_from_chord(dist)


def _fibonacci_sphere(n: int) -> np.ndarray:
    i = np.arange(n) + 0.5
    z = 1.0 - 2.0 * i / n
    phi = np.pi * (1.0 + 5 ** 0.5) * i
    s = np.sqrt(1.0 - z * z)
    return np.stack([s * np.cos(phi), s * np.sin(phi), z], axis=1)


def covering_radius(points) -> float:
    """``max_x min_u d(x, u)`` over the sphere, computed exactly.

    On the circle this is half the largest angular gap; on the 2-sphere the
    maximizer is a vertex of the spherical Voronoi diagram.
    """
    pts = as_points(points)
    if pts.shape[1] == 2:
        return _covering_radius_circle(pts)[0]
    _, dist = _far_points_sphere(pts)
    return float(dist.max())


@dataclass
class SeparatedSet:
    """A maximal ``separation``-separated point set on the sphere."""

    points: np.ndarray
    separation: float
    covering_radius: float
    seed: int = 0

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return len(self.points)

    def verify(self, slack: float = 1e-12) -> None:
        """Raise ``AssertionError`` unless separation and maximality hold."""
        sep = min_separation(self.points)
        if sep < self.separation - slack:
            raise AssertionError(f"separation {sep} < {self.separation}")
        cov = covering_radius(self.points)
        if not cov < self.separation:
            raise AssertionError(f"covering radius {cov} >= {self.separation}")
        # packing: disjoint caps of radius eps/2; covering: caps of radius eps
        n = len(self.points)
        if n * normalized_cap_area(self.d, self.separation / 2) > 1 + 1e-9:
            raise AssertionError("cardinality exceeds the packing bound")
        if n * normalized_cap_area(self.d, self.separation) < 1 - 1e-9:
            raise AssertionError("cardinality below the covering bound")


def _candidate_stream(d: int, count: int, seed: int) -> np.ndarray:
    m = int(2 ** math.ceil(math.log2(max(count, 2))))
    if d == 2:
        u = qmc.Sobol(1, scramble=True, seed=seed).random(m)[:, 0]
        return angles_to_points(2 * np.pi * u)
    u = qmc.Sobol(2, scramble=True, seed=seed).random(m)
    z = 1.0 - 2.0 * u[:, 0]
    phi = 2 * np.pi * u[:, 1]
    s = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    return np.stack([s * np.cos(phi), s * np.sin(phi), z], axis=1)


def _greedy_insert(accepted: np.ndarray, cand: np.ndarray, chord: float) -> np.ndarray:
    """Sequential greedy insertion in stream order, done batch-wise."""
    tol = 1e-12
    if len(accepted):
        dist, _ = cKDTree(accepted).query(cand, k=1)
        cand = cand[dist >= chord - tol]
    if len(cand) == 0:
        return accepted
    pairs = cKDTree(cand).query_pairs(chord - tol, output_type="ndarray")
    nbrs: list[list[int]] = [[] for _ in range(len(cand))]
    for i, j in pairs:
        lo, hi = (i, j) if i < j else (j, i)
        nbrs[hi].append(lo)
    keep = np.zeros(len(cand), dtype=bool)
    for i in range(len(cand)):
        if not any(keep[j] for j in nbrs[i]):
            keep[i] = True
    new = cand[keep]
    return new if len(accepted) == 0 else np.vstack([accepted, new])


def build_maximal_separated_set(d: int, eps: float, seed: int = 0) -> SeparatedSet:
    """Greedy construction of a maximal ``eps``-separated set.

    Points from a scrambled Sobol stream are inserted greedily; then the
    farthest points of the sphere (exact, via gaps or Voronoi vertices) are
    added until the covering radius drops below ``eps``.  The result is
    deterministic given ``seed``.
    """
    d = _check_dim(d)
    if not eps > 0:
        raise DomainError("separation must be positive")
    if eps > math.pi:
        raise DomainError("separation must not exceed pi")
    chord = _chord(eps)
    expected = 1.0 / normalized_cap_area(d, eps / 2)
    stream = _candidate_stream(d, int(4 * expected) + 8, seed)
    pts = stream[:1]
    start = 1
    size = 64
    while start < len(stream):
        pts = _greedy_insert(pts, stream[start:start + size], chord)
        start += size
        size *= 2

    # farthest-point fill until maximal
    for _ in range(10000):
        if d == 2:
            cov, far = _covering_radius_circle(pts)
            if cov < eps:
                break
            pts = np.vstack([pts, far])
            continue
        verts, dist = _far_points_sphere(pts)
        if dist.max() < eps:
            break
        order = np.argsort(-dist, kind="stable")
        order = order[dist[order] >= eps - 1e-12]
        pts = _greedy_insert(pts, verts[order], chord)
    pts = pts / np.linalg.norm(pts, axis=1, keepdims=True)
    out = SeparatedSet(pts, float(eps), covering_radius(pts), int(seed))
    out.verify()
    return out


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------


@dataclass
class QuadRule:
    """Nodes and weights approximating ``int g(x) w(x) dsigma(x)``."""

    points: np.ndarray
    weights: np.ndarray
    exact: bool = True  # False when singular directions could not be aligned
    info: dict = field(default_factory=dict)

    def integrate(self, values) -> float:
        values = np.asarray(values)
        return float(np.dot(self.weights, values))

    def __len__(self) -> int:
        return len(self.weights)


Singular = Sequence[tuple[np.ndarray, float]]


def _zero_angles(singular: Singular) -> list[tuple[float, float]]:
    """Angles on the circle where ``<x, v> = 0`` with the attached exponents."""
    out: list[tuple[float, float]] = []
    for v, a in singular:
        if a <= 0:
            continue
        base = math.atan2(v[1], v[0])
        for t in (base + math.pi / 2, base - math.pi / 2):
            t = t % (2 * math.pi)
            for k, (s, b) in enumerate(out):
                if abs(s - t) < 1e-12 or abs(abs(s - t) - 2 * math.pi) < 1e-12:
                    out[k] = (s, b + a)
                    break
            else:
                out.append((t, a))
    return sorted(out)


def _jacobi_panel(a: float, b: float, alpha: float, beta: float, q: int):
    """Nodes/weights on ``[a, b]`` for ``int F(t) (b-t)^alpha (t-a)^beta dt``.

    Returned weights are divided by the Jacobi factor, so they integrate
    ``F(t) * singular(t)`` once multiplied by the true singular weight.
    """
    x, w = roots_jacobi(q, alpha, beta)
    half = (b - a) / 2.0
    t = a + half * (x + 1.0)
    w = w * half ** (1.0 + alpha + beta)
    jac = (b - t) ** alpha * (t - a) ** beta
    return t, w / jac


def _arc_nodes(a: float, b: float, zeros: list[tuple[float, float]], q: int):
    """Panel-split nodes for ``int_a^b F(t) dt`` with cusps at ``zeros``."""
    cuts = [(a, 0.0), (b, 0.0)]
    for t0, e in zeros:
        for shift in (-2 * math.pi, 0.0, 2 * math.pi):
            t = t0 + shift
            if a - 1e-14 <= t <= b + 1e-14:
                cuts.append((min(max(t, a), b), e))
    cuts.sort()
    merged: list[list[float]] = []
    for t, e in cuts:
        if merged and abs(merged[-1][0] - t) < 1e-13:
            merged[-1][1] += e
        else:
            merged.append([t, e])
    ts, ws = [], []
    for (t0, e0), (t1, e1) in zip(merged[:-1], merged[1:]):
        if t1 - t0 < 1e-15:
            continue
        t, w = _jacobi_panel(t0, t1, e1, e0, q)
        ts.append(t)
        ws.append(w)
    return np.concatenate(ts), np.concatenate(ws)


def _axis_index(v: np.ndarray) -> int | None:
    i = int(np.argmax(np.abs(v)))
    return i if abs(abs(v[i]) - 1.0) < 1e-12 else None


def _nodes_per_panel(level: int) -> int:
    return 8 * 2 ** int(level)


def sphere_rule(
    d: int,
    level: int = 4,
    weight_fn: Callable[[np.ndarray], np.ndarray] | None = None,
    singular: Singular = (),
) -> QuadRule:
    """Quadrature for ``int g(x) w(x) dsigma(x)`` (normalized ``dsigma``).

    ``singular`` lists ``(v, a)`` pairs such that ``w`` behaves like
    ``|<x, v>|**a`` near the hyperplane ``v^perp``; panels are split there
    and Gauss-Jacobi rules absorb the cusp.  On the 2-sphere the splitting is
    exact only for coordinate hyperplanes; other directions fall back to a
    plain product rule and the returned rule is flagged ``exact=False``.
    """
    d = _check_dim(d)
    if weight_fn is None:
        singular = []
    singular = [(np.asarray(v, dtype=float), float(a)) for v, a in singular if a > 0]
    q = _nodes_per_panel(level)
    if d == 2:
        zeros = _zero_angles(singular)
        if not zeros:
            m = 4 * q
            theta = 2 * np.pi * np.arange(m) / m
            w = np.full(m, 1.0 / m)
        else:
            t0 = zeros[0][0]
            theta, w = _arc_nodes(t0, t0 + 2 * np.pi, zeros, q)
            w = w / (2 * np.pi)
        pts = angles_to_points(theta)
        exact = True
    else:
        pts, w, exact = _sphere3_nodes(singular, q)
    if weight_fn is not None:
        w = w * np.asarray(weight_fn(pts), dtype=float)
    return QuadRule(pts, w, exact, {"d": d, "level": level})


def _sphere3_nodes(singular, q):
    exps = np.zeros(3)
    exact = True
    for v, a in singular:
        i = _axis_index(v)
        if i is None:
            exact = False
        else:
            exps[i] += a
    if not exact:
        exps[:] = 0.0
    # azimuth: cusps of |x1|^a1 at phi = pi/2, 3pi/2 and |x2|^a2 at 0, pi
    zeros = []
    if exps[0] > 0:
        zeros += [(math.pi / 2, exps[0]), (3 * math.pi / 2, exps[0])]
    if exps[1] > 0:
        zeros += [(0.0, exps[1]), (math.pi, exps[1])]
    if zeros:
        phi, wphi = _arc_nodes(0.0, 2 * math.pi, sorted(zeros), q)
    else:
        m = 4 * q
        phi = 2 * np.pi * np.arange(m) / m
        wphi = np.full(m, 2 * np.pi / m)
    # polar: (1 - z^2)^((a1 + a2)/2) at the poles, |z|^a3 at the equator
    pole = (exps[0] + exps[1]) / 2.0
    if exps[2] > 0:
        z1, w1 = _jacobi_panel(-1.0, 0.0, exps[2], pole, q)
        z2, w2 = _jacobi_panel(0.0, 1.0, pole, exps[2], q)
        z, wz = np.concatenate([z1, z2]), np.concatenate([w1, w2])
    else:
        z, wz = _jacobi_panel(-1.0, 1.0, pole, pole, 2 * q)
    Z, P = np.meshgrid(z, phi, indexing="ij")
    s = np.sqrt(np.clip(1.0 - Z * Z, 0.0, None))
    pts = np.stack([s * np.cos(P), s * np.sin(P), Z], axis=-1).reshape(-1, 3)
    w = (wz[:, None] * wphi[None, :]).reshape(-1) / (4 * np.pi)
    return pts, w, exact


def cap_rule(
    cap: Cap,
    level: int = 4,
    weight_fn: Callable[[np.ndarray], np.ndarray] | None = None,
    singular: Singular = (),
) -> QuadRule:
    """Quadrature over a cap (normalized measure), split at weight zeros on the circle."""
    if weight_fn is None:
        singular = []
    singular = [(np.asarray(v, dtype=float), float(a)) for v, a in singular if a > 0]
    q = _nodes_per_panel(level)
    c = cap.center
    if cap.d == 2:
        t0 = math.atan2(c[1], c[0])
        theta, w = _arc_nodes(t0 - cap.radius, t0 + cap.radius, _zero_angles(singular), q)
        pts = angles_to_points(theta)
        w = w / (2 * np.pi)
        exact = True
    else:
        # geodesic polar coordinates around the center
        u = np.cross(c, [1.0, 0.0, 0.0] if abs(c[0]) < 0.9 else [0.0, 1.0, 0.0])
        u /= np.linalg.norm(u)
        v = np.cross(c, u)
        x, wt = np.polynomial.legendre.leggauss(2 * q)
        t = cap.radius * (x + 1) / 2
        wt = wt * cap.radius / 2 * np.sin(t)
        m = 4 * q
        psi = 2 * np.pi * np.arange(m) / m
        T, Ps = np.meshgrid(t, psi, indexing="ij")
        pts = (np.cos(T)[..., None] * c
               + np.sin(T)[..., None] * (np.cos(Ps)[..., None] * u + np.sin(Ps)[..., None] * v))
        pts = pts.reshape(-1, 3)
        w = np.repeat(wt, m) * (2 * np.pi / m) / (4 * np.pi)
        exact = not singular
    if weight_fn is not None:
        w = w * np.asarray(weight_fn(pts), dtype=float)
    return QuadRule(pts, w, exact, {"cap": True, "level": level})


@dataclass
class IntegrationReport:
    value: float
    coarse_value: float
    discrepancy: float
    level: int
    exact_splitting: bool

    def __float__(self) -> float:
        return self.value


def _weight_parts(weight):
    """Split a weight argument into (callable, singular directions)."""
    if weight is None:
        return None, ()
    if hasattr(weight, "density") and hasattr(weight, "singular"):
        return weight.density, weight.singular
    return weight, ()


def reference_integrate_report(f, weight=None, d: int = 2, level: int = 4,
                               singular: Singular = ()) -> IntegrationReport:
    """Integrate ``f * weight`` at ``level`` and ``level - 1`` and report both."""
    wfn, sing = _weight_parts(weight)
    sing = list(sing) + list(singular)
    fine = sphere_rule(d, level, wfn, sing)
    coarse = sphere_rule(d, max(level - 1, 0), wfn, sing)
    vf = fine.integrate(f(fine.points))
    vc = coarse.integrate(f(coarse.points))
    return IntegrationReport(vf, vc, abs(vf - vc), level, fine.exact)


def reference_integrate(f, weight=None, d: int = 2, level: int = 4,
                        singular: Singular = ()) -> float:
    """``int f(x) weight(x) dsigma(x)`` with the normalized surface measure.

    ``weight`` may be ``None``, a callable on ``(N, d)`` point arrays, or a
    :class:`~dunklsphere.weight.DunklWeight` (whose root hyperplanes are then
    used as panel boundaries).
    """
    wfn, sing = _weight_parts(weight)
    rule = sphere_rule(d, level, wfn, list(sing) + list(singular))
    return rule.integrate(f(rule.points))

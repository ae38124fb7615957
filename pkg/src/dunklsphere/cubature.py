"""Positive cubature rules for ``h_kappa^2 dsigma`` and Marcinkiewicz-Zygmund checks.

A rule's weights are masses of ``h_kappa^2 dsigma`` with the normalized
surface measure, so they sum to ``a_d^kappa``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import nnls

from .harmonics import quad_level_for, spanning_set, weighted_rule
from .sphere import (
    DomainError,
    SeparatedSet,
    build_maximal_separated_set,
    covering_radius,
    min_separation,
    sphere_rule,
)
from .weight import DunklWeight, cap_measures

__all__ = [
    "CubatureInfeasible",
    "CubatureRule",
    "moments",
    "solve_weights",
    "build_rule",
    "exactness_check",
    "mz_check",
    "MZBracket",
    "equispaced_circle",
    "DEFAULT_DELTA",
]

DEFAULT_DELTA = 0.25


class CubatureInfeasible(RuntimeError):
    """Raised when no positive weights reach the moment tolerance."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


@dataclass
class CubatureRule:
    nodes: SeparatedSet
    weights: np.ndarray
    exact_degree: int
    residual: float
    weight_model_bracket: tuple
    weight: DunklWeight = field(repr=False)
    delta: float = float("nan")
    method: str = "min-deviation"

    @property
    def points(self) -> np.ndarray:
        return self.nodes.points

    def integrate(self, f) -> float:
        return float(np.dot(self.weights, f(self.points)))

    def to_record(self) -> dict:
        return {
            "d": self.weight.d,
            "kappa": [float(k) for k in self.weight.kappas],
            "roots": [list(map(float, v)) for v in self.weight.roots.positive_roots],
            "group": self.weight.roots.group_tag,
            "degree": int(self.exact_degree),
            "nodes": self.points.tolist(),
            "weights": [float(x) for x in self.weights],
            "residual": float(self.residual),
            "weight_model_bracket": [float(x) for x in self.weight_model_bracket],
            "separation": float(self.nodes.separation),
            "covering_radius": float(self.nodes.covering_radius),
            "seed": int(self.nodes.seed),
            "delta": float(self.delta),
            "method": self.method,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "CubatureRule":
        from .weight import RootSystem

        w = DunklWeight(RootSystem(tuple(map(tuple, rec["roots"])), tuple(rec["kappa"]), rec["group"]))
        nodes = SeparatedSet(np.asarray(rec["nodes"]), rec["separation"], rec["covering_radius"], rec["seed"])
        return cls(nodes, np.asarray(rec["weights"]), rec["degree"], rec["residual"],
                   tuple(rec["weight_model_bracket"]), w, rec["delta"], rec.get("method", ""))


def equispaced_circle(m: int, phase: float = 0.0) -> SeparatedSet:
    """``m`` equally spaced points on the circle as a separated set."""
    th = phase + 2 * np.pi * np.arange(m) / m
    pts = np.stack([np.cos(th), np.sin(th)], axis=1)
    return SeparatedSet(pts, 2 * np.pi / m, np.pi / m, 0)


def moments(weight: DunklWeight, degree: int) -> np.ndarray:
    """``int b_j h_kappa^2 dsigma`` for the unweighted spanning set ``b_j`` of ``Pi_degree``."""
    rule = sphere_rule(weight.d, quad_level_for(2 * degree + 8),
                       None if weight.is_trivial else weight.density, weight.singular)
    B, _ = spanning_set(weight.d, degree, rule.points)
    return B.T @ rule.weights


def _model_masses(weight: DunklWeight, pts: np.ndarray, radius: float) -> np.ndarray:
    return cap_measures(weight, pts, radius, level=0 if weight.d == 3 else 1)


def solve_weights(nodes, weight: DunklWeight, degree: int, tol: float = 1e-8,
                  delta: float = DEFAULT_DELTA) -> CubatureRule:
    """Positive weights exact on ``Pi_degree`` for ``h_kappa^2 dsigma``.

    The weights are the minimum-deviation correction of the cap-measure
    model ``lambda0_xi = w(c(xi, delta/degree))``: with ``D = diag(lambda0)``
    solve ``min ||z - 1||`` subject to ``A D z = b``.  If that solution has a
    non-positive entry, non-negative least squares on ``A D z = b`` is used
    instead and zero weights are pruned.
    """
    if degree < 0:
        raise DomainError("degree must be non-negative")
    if not isinstance(nodes, SeparatedSet):
        pts = np.asarray(nodes, dtype=float)
        nodes = SeparatedSet(pts, min_separation(pts), covering_radius(pts), 0)
    pts = nodes.points
    A, _ = spanning_set(weight.d, degree, pts)
    A = A.T  # (dim, M)
    if A.shape[1] < A.shape[0]:
        raise CubatureInfeasible("fewer nodes than the dimension of Pi_degree", float("inf"))
    b = moments(weight, degree)
    radius = delta / max(degree, 1)
    lam0 = _model_masses(weight, pts, radius)
    lam0 = lam0 * (b[0] / (A[0] @ lam0))
    AD = A * lam0
    z = 1.0 + np.linalg.lstsq(AD, b - AD.sum(axis=1), rcond=None)[0]
    method = "min-deviation"
    keep = np.ones(len(pts), dtype=bool)
    if z.min() <= 0:
        z, _ = nnls(AD, b, maxiter=50 * AD.shape[1])
        keep = z > 0
        method = "nnls"
    lam = lam0 * z
    resid = float(np.max(np.abs(A[:, keep] @ lam[keep] - b)))
    if resid > tol:
        raise CubatureInfeasible("moment residual above tolerance", resid)
    if not keep.all():
        nodes = SeparatedSet(pts[keep], nodes.separation, covering_radius(pts[keep]), nodes.seed)
    lam = lam[keep]
    ratio = lam / cap_measures(weight, nodes.points, radius, level=1)
    return CubatureRule(nodes, lam, int(degree), resid, (float(ratio.min()), float(ratio.max())),
                        weight, float(delta), method)


def build_rule(weight: DunklWeight, degree: int, delta: float = DEFAULT_DELTA, tol: float = 1e-8,
               seed: int = 0, retries: int = 3) -> CubatureRule:
    """Separated nodes at spacing ``delta/degree`` plus :func:`solve_weights`, halving ``delta`` on failure."""
    last = None
    for _ in range(retries + 1):
        eps = min(delta / max(degree, 1), math.pi)
        nodes = build_maximal_separated_set(weight.d, eps, seed)
        try:
            return solve_weights(nodes, weight, degree, tol, delta)
        except CubatureInfeasible as exc:
            last = exc
            delta /= 2.0
    raise last


def exactness_check(rule: CubatureRule, degree: int | None = None, trials: int = 200,
                    seed: int = 0) -> float:
    """Max of ``|Q f - int f h^2| / (a ||f||_{2,kappa})`` over random ``f in Pi_degree``.

    Random ``f`` have standard-normal coefficients in the spanning set.  The
    reference integral uses the panel quadrature, independently of the moment
    vector the solver matched.
    """
    w = rule.weight
    degree = rule.exact_degree if degree is None else degree
    coef = np.random.default_rng(seed).standard_normal((trials, len(spanning_set(w.d, degree, np.eye(w.d)[:1])[1])))
    ref = weighted_rule(w, quad_level_for(2 * degree + 8))
    F_ref = spanning_set(w.d, degree, ref.points)[0] @ coef.T  # (Q, trials)
    F_nodes = spanning_set(w.d, degree, rule.points)[0] @ coef.T
    exact = ref.weights @ F_ref
    nrm = np.sqrt(ref.weights @ (F_ref * F_ref))
    approx = rule.weights @ F_nodes / w.norm_const
    return float(np.max(np.abs(approx - exact) / nrm))


@dataclass
class MZBracket:
    p: float
    n: int
    c_low: float
    c_high: float
    trials: int

    def __iter__(self):
        return iter((self.c_low, self.c_high))


def mz_check(rule: CubatureRule, p: float, trials: int = 200, seed: int = 0,
             n: int | None = None) -> MZBracket:
    """Range of ``discrete / continuous`` norm ratios over random ``f in Pi_n``.

    The discrete norm is ``(sum lambda |f(xi)|^p / a)^{1/p}`` (``max |f(xi)|``
    for ``p = inf``); the default band limit is ``n = floor(degree / 3)``.
    """
    w = rule.weight
    n = rule.exact_degree // 3 if n is None else n
    if n < 0:
        raise DomainError("band limit must be non-negative")
    _, degs = spanning_set(w.d, n, np.eye(w.d)[:1])
    coef = np.random.default_rng(seed).standard_normal((trials, len(degs)))
    ref = weighted_rule(w, quad_level_for(8 * n + 16) if math.isinf(p) else quad_level_for(2 * n + 8))
    fr = np.abs(spanning_set(w.d, n, ref.points)[0] @ coef.T)
    fn = np.abs(spanning_set(w.d, n, rule.points)[0] @ coef.T)
    lam = rule.weights / w.norm_const
    if math.isinf(p):
        disc = fn.max(axis=0)
        cont = np.maximum(fr.max(axis=0), disc)
    else:
        cont = (ref.weights @ fr ** p) ** (1 / p)
        disc = (lam @ fn ** p) ** (1 / p)
    ratios = disc / cont
    return MZBracket(float(p), int(n), float(min(ratios)), float(max(ratios)), trials)

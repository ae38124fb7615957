"""Root systems, reflection-invariant weights ``h_kappa^2`` and cap measures."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .sphere import (
    Cap,
    DomainError,
    _angle_from_chord,
    _arc_nodes,
    _zero_angles,
    as_points,
    as_unit,
    cap_rule,
    reference_integrate,
)

__all__ = [
    "RootSystem",
    "DunklWeight",
    "reflect",
    "eval_weight",
    "cap_measure",
    "cap_measures",
    "cap_measure_model",
    "w_n_approx",
    "DoublingReport",
    "doubling_diagnostics",
    "lemma31_ratio",
    "admissible_betas",
    "parse_root_system",
    "format_root_system",
]

Z2D = "Z2d"
GENERAL = "GeneralVerified"


def reflect(x, v) -> np.ndarray:
    """Reflection of ``x`` in the hyperplane orthogonal to ``v``."""
    v = np.asarray(v, dtype=float)
    vv = float(v @ v)
    if vv == 0.0:
        raise DomainError("cannot reflect in the hyperplane of the zero vector")
    x = np.asarray(x, dtype=float)
    return x - 2.0 * (x @ v)[..., None] / vv * v if x.ndim > 1 else x - 2.0 * (x @ v) / vv * v


@dataclass(frozen=True)
class RootSystem:
    """Positive roots with multiplicities.

    Roots are stored unit-normalized.  ``group_tag`` is ``"Z2d"`` for the
    coordinate sign-flip group and ``"GeneralVerified"`` for any other system
    whose closure under reflections has been checked numerically.
    """

    positive_roots: tuple
    multiplicities: tuple
    group_tag: str = GENERAL

    def __post_init__(self):
        roots = np.atleast_2d(np.asarray(self.positive_roots, dtype=float))
        kap = tuple(float(k) for k in self.multiplicities)
        if roots.shape[0] != len(kap):
            raise DomainError("one multiplicity per positive root is required")
        if any(k < 0 for k in kap):
            raise DomainError("multiplicities must be non-negative")
        nrm = np.linalg.norm(roots, axis=1)
        if np.any(nrm == 0):
            raise DomainError("roots must be nonzero")
        roots = roots / nrm[:, None]
        object.__setattr__(self, "positive_roots", tuple(map(tuple, roots)))
        object.__setattr__(self, "multiplicities", kap)
        if self.group_tag not in (Z2D, GENERAL):
            raise DomainError(f"unknown group tag {self.group_tag!r}")
        if self.group_tag == Z2D and not np.allclose(roots, np.eye(roots.shape[1])):
            raise DomainError("Z2d root systems consist of the coordinate vectors")
        self.verify()

    @classmethod
    def z2d(cls, kappas) -> "RootSystem":
        kappas = tuple(float(k) for k in kappas)
        return cls(tuple(map(tuple, np.eye(len(kappas)))), kappas, Z2D)

    @property
    def d(self) -> int:
        return len(self.positive_roots[0])

    @property
    def roots(self) -> np.ndarray:
        return np.asarray(self.positive_roots)

    @property
    def kappas(self) -> np.ndarray:
        return np.asarray(self.multiplicities)

    def _index_of(self, u: np.ndarray, tol: float = 1e-10) -> int | None:
        r = self.roots
        hit = np.where((np.abs(r - u).max(axis=1) < tol) | (np.abs(r + u).max(axis=1) < tol))[0]
        return int(hit[0]) if len(hit) else None

    def verify(self, tol: float = 1e-10) -> None:
        """Check closure under reflections and conjugation-invariance of multiplicities."""
        r = self.roots
        for i, j in itertools.product(range(len(r)), repeat=2):
            img = reflect(r[i], r[j])
            k = self._index_of(img, tol)
            if k is None:
                raise DomainError(f"root set not closed: sigma_{j}(root {i}) is not a root")
            # sigma_{img} = sigma_j sigma_i sigma_j is conjugate to sigma_i
            if abs(self.multiplicities[k] - self.multiplicities[i]) > tol:
                raise DomainError("multiplicities differ on a conjugacy class")

    def group_elements(self, limit: int = 4096) -> np.ndarray:
        """All elements of the generated reflection group as ``(|G|, d, d)``."""
        d = self.d
        gens = [np.eye(d) - 2.0 * np.outer(v, v) for v in self.roots]
        elems = [np.eye(d)]
        keys = {tuple(np.round(np.eye(d), 9).ravel())}
        frontier = [np.eye(d)]
        while frontier:
            nxt = []
            for g in frontier:
                for s in gens:
                    h = s @ g
                    key = tuple(np.round(h, 9).ravel())
                    if key not in keys:
                        keys.add(key)
                        elems.append(h)
                        nxt.append(h)
                        if len(elems) > limit:
                            raise DomainError("reflection group too large (not finite?)")
            frontier = nxt
        return np.asarray(elems)


def parse_root_system(text: str) -> RootSystem:
    """Parse ``d=<int>`` followed by ``root <d floats> kappa <float>`` lines."""
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines or not lines[0].replace(" ", "").startswith("d="):
        raise DomainError("root system text must start with 'd=<int>'")
    d = int(lines[0].replace(" ", "")[2:])
    roots, kap = [], []
    for ln in lines[1:]:
        tok = ln.split()
        if len(tok) != d + 3 or tok[0] != "root" or tok[d + 1] != "kappa":
            raise DomainError(f"malformed root line: {ln!r}")
        roots.append([float(t) for t in tok[1:d + 1]])
        kap.append(float(tok[d + 2]))
    if not roots:
        raise DomainError("no roots given")
    roots_arr = np.asarray(roots)
    tag = Z2D if roots_arr.shape[0] == d and np.allclose(
        roots_arr / np.linalg.norm(roots_arr, axis=1, keepdims=True), np.eye(d)) else GENERAL
    return RootSystem(tuple(map(tuple, roots_arr)), tuple(kap), tag)


def format_root_system(rs: RootSystem) -> str:
    out = [f"d={rs.d}"]
    for v, k in zip(rs.positive_roots, rs.multiplicities):
        out.append("root " + " ".join(repr(float(c)) for c in v) + f" kappa {float(k)!r}")
    return "\n".join(out) + "\n"


def _z2d_norm_const(kappas) -> float:
    d = len(kappas)
    lg = (math.lgamma(d / 2) + sum(math.lgamma(k + 0.5) for k in kappas)
          - d / 2 * math.log(math.pi) - math.lgamma(sum(kappas) + d / 2))
    return math.exp(lg)


@dataclass(frozen=True)
class DunklWeight:
    """The weight ``h_kappa^2(x) = prod |<x, v>|^(2 kappa_v)`` and its constants."""

    roots: RootSystem
    gamma_kappa: float = field(init=False, compare=False)
    lambda_kappa: float = field(init=False, compare=False)
    norm_const: float = field(init=False, compare=False)

    def __post_init__(self):
        g = float(sum(self.roots.multiplicities))
        object.__setattr__(self, "gamma_kappa", g)
        object.__setattr__(self, "lambda_kappa", (self.d - 2) / 2.0 + g)
        if g == 0:
            a = 1.0
        elif self.roots.group_tag == Z2D:
            a = _z2d_norm_const(self.roots.multiplicities)
        else:
            a = reference_integrate(lambda p: np.ones(len(p)), self, self.d, level=5)
        object.__setattr__(self, "norm_const", a)

    @classmethod
    def z2d(cls, kappas) -> "DunklWeight":
        return cls(RootSystem.z2d(kappas))

    @classmethod
    def unweighted(cls, d: int) -> "DunklWeight":
        return cls(RootSystem.z2d([0.0] * d))

    @property
    def d(self) -> int:
        return self.roots.d

    @property
    def kappas(self) -> np.ndarray:
        return self.roots.kappas

    @property
    def is_trivial(self) -> bool:
        return self.gamma_kappa == 0

    @property
    def kernel_supported(self) -> bool:
        return self.roots.group_tag == Z2D or self.is_trivial

    @property
    def singular(self) -> list:
        return [(v, 2.0 * k) for v, k in zip(self.roots.roots, self.roots.kappas) if k > 0]

    def density(self, pts) -> np.ndarray:
        """``h_kappa^2`` at each row of ``pts`` (no normalization)."""
        pts = np.atleast_2d(pts)
        out = np.ones(len(pts))
        for v, k in zip(self.roots.roots, self.roots.kappas):
            if k > 0:
                out *= np.abs(pts @ v) ** (2.0 * k)
        return out

    def describe(self) -> dict:
        return {
            "d": self.d,
            "group": self.roots.group_tag,
            "roots": [list(map(float, v)) for v in self.roots.positive_roots],
            "kappa": list(map(float, self.roots.multiplicities)),
        }


def eval_weight(w: DunklWeight, x) -> float | np.ndarray:
    """``h_kappa^2(x)``; a scalar for a single unit vector."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        return float(w.density(as_unit(x)[None, :])[0])
    return w.density(as_points(x))


# ---------------------------------------------------------------------------
# cap measures
# ---------------------------------------------------------------------------


def cap_measure(w: DunklWeight, cap: Cap, level: int = 4) -> float:
    """``w(c) = int_c h_kappa^2 dsigma`` (normalized ``dsigma``, not divided by ``a_d^kappa``)."""
    rule = cap_rule(cap, level, w.density, w.singular)
    return rule.integrate(np.ones(len(rule)))


def cap_measures(w: DunklWeight, centers, radius: float, level: int = 2) -> np.ndarray:
    """Vectorized :func:`cap_measure` for many centers sharing one radius."""
    centers = as_points(centers)
    radius = float(min(radius, math.pi))
    q = 8 * 2 ** level
    if w.d == 2:
        zeros = _zero_angles(w.singular)
        out = np.empty(len(centers))
        for i, c in enumerate(centers):
            t0 = math.atan2(c[1], c[0])
            theta, wt = _arc_nodes(t0 - radius, t0 + radius, zeros, q)
            pts = np.stack([np.cos(theta), np.sin(theta)], axis=1)
            out[i] = np.dot(wt, w.density(pts)) / (2 * math.pi)
        return out
    x, wt = np.polynomial.legendre.leggauss(2 * q)
    t = radius * (x + 1) / 2
    wt = wt * radius / 2 * np.sin(t)
    m = 4 * q
    psi = 2 * np.pi * np.arange(m) / m
    ct, st = np.cos(t), np.sin(t)
    cp, sp = np.cos(psi), np.sin(psi)
    wflat = (np.repeat(wt, m) * (2 * np.pi / m) / (4 * np.pi))
    out = np.empty(len(centers))
    for i, c in enumerate(centers):
        u = np.cross(c, [1.0, 0.0, 0.0] if abs(c[0]) < 0.9 else [0.0, 1.0, 0.0])
        u /= np.linalg.norm(u)
        v = np.cross(c, u)
        ring = cp[:, None] * u + sp[:, None] * v  # (m, 3)
        pts = ct[:, None, None] * c + st[:, None, None] * ring[None, :, :]
        out[i] = np.dot(wflat, w.density(pts.reshape(-1, 3)))
    return out


def cap_measure_model(w: DunklWeight, x, n: int) -> float:
    """``n^{-(d-1)} prod_j (|<x, v_j>| + 1/n)^(2 kappa_j)``."""
    if n < 1:
        raise DomainError("n must be at least 1")
    x = as_unit(x)
    val = float(n) ** (-(w.d - 1))
    for v, k in zip(w.roots.roots, w.roots.kappas):
        val *= (abs(float(x @ v)) + 1.0 / n) ** (2.0 * k)
    return val


def w_n_approx(w: DunklWeight, x, n: int, level: int = 4) -> float:
    """``w_n(x) = n^{d-1} w(c(x, 1/n))``."""
    if n < 1:
        raise DomainError("n must be at least 1")
    return float(n) ** (w.d - 1) * cap_measure(w, Cap(as_unit(x), 1.0 / n), level)


# ---------------------------------------------------------------------------
# doubling
# ---------------------------------------------------------------------------


@dataclass
class DoublingReport:
    estimated_s_w: float
    max_ratio_samples: list  # rows (center, radius, m, ratio)
    grid: dict
    comparability_constant: float = float("nan")


def doubling_diagnostics(w: DunklWeight, centers, radii, depths=(0, 1, 2, 3),
                         n_values=(8, 16, 32), level: int = 3) -> DoublingReport:
    """Estimate the doubling exponent ``s_w`` from cap-measure ratios.

    ``s_w`` is the largest ``log2(w(2^m B) / w(B)) / m`` over the grid (m >= 1).
    The constant in ``w(c(x,1/n)) <= C (1 + n d(x,y))^{s_w} w(c(y,1/n))`` is
    also estimated over all center pairs.
    """
    centers = as_points(centers)
    rows = []
    s_w = 0.0
    for c in centers:
        for r in radii:
            base = cap_measure(w, Cap(c, r), level)
            for m in depths:
                big = cap_measure(w, Cap(c, min(r * 2 ** m, math.pi)), level) if m else base
                ratio = big / base
                rows.append((c.tolist(), float(r), int(m), float(ratio)))
                if m >= 1:
                    s_w = max(s_w, math.log2(ratio) / m)
    comp = 0.0
    for n in n_values:
        meas = cap_measures(w, centers, 1.0 / n, level=min(level, 3))
        dist = 2 * np.arcsin(np.clip(np.linalg.norm(centers[:, None] - centers[None], axis=-1) / 2, 0, 1))
        ratio = meas[:, None] / (meas[None, :] * (1 + n * dist) ** s_w)
        comp = max(comp, float(ratio.max()))
    grid = {"n_centers": len(centers), "radii": list(map(float, radii)),
            "depths": list(map(int, depths)), "n_values": list(map(int, n_values))}
    return DoublingReport(float(s_w), rows, grid, comp)


# ---------------------------------------------------------------------------
# negative power sums of cubature weights
# ---------------------------------------------------------------------------


def admissible_betas(w: DunklWeight, fractions=(0.25, 0.5, 0.75, 0.95), free_cap: float = 1.0):
    """Grid of exponents inside ``(0, 1/(2 gamma_kappa))``."""
    top = free_cap if w.gamma_kappa == 0 else 1.0 / (2.0 * w.gamma_kappa)
    return [f * top for f in fractions]


def lemma31_ratio(rule, beta: float, n: int) -> float:
    """``sum_xi lambda_xi^{-beta} / n^{(d-1)(1+beta)}`` for a positive cubature rule.

    The rule weights are masses of ``h_kappa^2 dsigma`` (they sum to ``a_d^kappa``).
    """
    w = rule.weight
    if beta <= 0:
        raise DomainError("beta must be positive")
    if w.gamma_kappa > 0 and beta >= 1.0 / (2.0 * w.gamma_kappa):
        raise DomainError("beta must lie below 1/(2 gamma_kappa)")
    lam = np.asarray(rule.weights, dtype=float)
    if np.any(lam <= 0):
        raise DomainError("cubature weights must be positive")
    return float(np.sum(lam ** (-beta)) / float(n) ** ((w.d - 1) * (1 + beta)))

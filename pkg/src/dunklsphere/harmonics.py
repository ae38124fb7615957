"""Gegenbauer polynomials, h-harmonic expansions, reproducing kernels and ``eta_n``.

Expansions are computed by quadrature against an orthonormal basis of
``Pi_N`` restricted to the sphere.  The basis is obtained by orthonormalizing
a degree-ordered spanning set (trigonometric functions on the circle, real
spherical harmonics on the 2-sphere) under the weighted inner product

    <f, g>_kappa = (1 / a_d^kappa) int f g h_kappa^2 dsigma,

so the columns of degree ``k`` span ``H_k(h_kappa^2)`` exactly.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import roots_jacobi

from .sphere import CapabilityError, DomainError, QuadRule, as_points, sphere_rule
from .weight import DunklWeight

__all__ = [
    "gegenbauer",
    "gegenbauer_table",
    "eta",
    "spanning_set",
    "quad_level_for",
    "weighted_rule",
    "HarmonicBasis",
    "harmonic_basis",
    "HarmonicExpansion",
    "expand",
    "kernel_table",
    "kernel_P",
    "kernel_L",
    "eta_n_apply",
    "eta_n_apply_kernel",
    "dyadic_block",
    "project",
    "project_kernel",
    "frac_laplacian",
    "dunkl_laplacian_numeric",
    "lp_norm",
    "ApproxBracket",
    "best_approx_error",
]


# ---------------------------------------------------------------------------
# one-dimensional ingredients
# ---------------------------------------------------------------------------


def gegenbauer_table(nmax: int, lam: float, t) -> np.ndarray:
    """``C_k^lam(t)`` for ``k = 0..nmax`` stacked along axis 0."""
    if lam <= 0:
        raise DomainError("Gegenbauer index must be positive")
    if nmax < 0:
        raise DomainError("degree must be non-negative")
    t = np.asarray(t, dtype=float)
    out = np.empty((nmax + 1,) + t.shape)
    out[0] = 1.0
    if nmax >= 1:
        out[1] = 2.0 * lam * t
    for k in range(1, nmax):
        out[k + 1] = (2.0 * (k + lam) * t * out[k] - (k + 2.0 * lam - 1.0) * out[k - 1]) / (k + 1.0)
    return out


def gegenbauer(n: int, lam: float, t):
    """Gegenbauer polynomial ``C_n^lam(t)`` via the three-term recurrence."""
    val = gegenbauer_table(n, lam, t)[n]
    return float(val) if np.ndim(val) == 0 else val


def _blend(u):
    u = np.asarray(u, dtype=float)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        g0 = np.where(u > 0, np.exp(-1.0 / np.where(u > 0, u, 1.0)), 0.0)
        g1 = np.where(u < 1, np.exp(-1.0 / np.where(u < 1, 1.0 - u, 1.0)), 0.0)
    return g0 / (g0 + g1)


def eta(t):
    """Smooth cutoff: 1 on ``[0, 1]``, 0 on ``[2, inf)``, ``exp(-1/u)`` blend between."""
    t = np.asarray(t, dtype=float)
    out = np.where(t <= 1.0, 1.0, np.where(t >= 2.0, 0.0, _blend(2.0 - np.clip(t, 1.0, 2.0))))
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# spanning sets and quadrature
# ---------------------------------------------------------------------------


def _real_sph_harm(nmax: int, pts: np.ndarray):
    """Real spherical harmonics, orthonormal for the normalized measure on S^2."""
    z = np.clip(pts[:, 2], -1.0, 1.0)
    s = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    phi = np.arctan2(pts[:, 1], pts[:, 0])
    # fully normalized associated Legendre functions, times sqrt(4 pi)
    P = {}
    P[(0, 0)] = np.ones_like(z)
    for m in range(1, nmax + 1):
        P[(m, m)] = math.sqrt((2 * m + 1) / (2 * m)) * s * P[(m - 1, m - 1)]
    for m in range(0, nmax):
        P[(m + 1, m)] = math.sqrt(2 * m + 3) * z * P[(m, m)]
    for m in range(0, nmax + 1):
        for l in range(m + 2, nmax + 1):
            a = math.sqrt((4 * l * l - 1) / (l * l - m * m))
            b = math.sqrt(((l - 1) ** 2 - m * m) / (4 * (l - 1) ** 2 - 1))
            P[(l, m)] = a * (z * P[(l - 1, m)] - b * P[(l - 2, m)])
    cols, degs = [], []
    for l in range(nmax + 1):
        cols.append(P[(l, 0)])
        degs.append(l)
        for m in range(1, l + 1):
            cols.append(math.sqrt(2) * P[(l, m)] * np.cos(m * phi))
            cols.append(math.sqrt(2) * P[(l, m)] * np.sin(m * phi))
            degs += [l, l]
    return np.stack(cols, axis=1), np.asarray(degs)


def spanning_set(d: int, nmax: int, pts) -> tuple[np.ndarray, np.ndarray]:
    """Degree-ordered spanning set of ``Pi_nmax`` on the sphere and its degrees.

    The functions are orthonormal for the unweighted normalized measure:
    ``1, sqrt2 cos k theta, sqrt2 sin k theta`` on the circle and real
    spherical harmonics on the 2-sphere.
    """
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    if d == 2:
        th = np.arctan2(pts[:, 1], pts[:, 0])
        cols, degs = [np.ones(len(pts))], [0]
        for k in range(1, nmax + 1):
            cols += [math.sqrt(2) * np.cos(k * th), math.sqrt(2) * np.sin(k * th)]
            degs += [k, k]
        return np.stack(cols, axis=1), np.asarray(degs)
    if d == 3:
        return _real_sph_harm(nmax, pts)
    raise DomainError("only d in {2, 3} is supported")


def quad_level_for(degree: int) -> int:
    """Smallest level whose panel rules resolve products of total degree ``degree``."""
    level = 0
    while 8 * 2 ** level < degree // 2 + 16:
        level += 1
    return level


@functools.lru_cache(maxsize=32)
def weighted_rule(weight: DunklWeight, level: int) -> QuadRule:
    """Quadrature for ``(1/a) int g h_kappa^2 dsigma`` (weights sum to one)."""
    rule = sphere_rule(weight.d, level, None if weight.is_trivial else weight.density, weight.singular)
    return QuadRule(rule.points, rule.weights / weight.norm_const, rule.exact, dict(rule.info))


# ---------------------------------------------------------------------------
# orthonormal h-harmonic basis
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HarmonicBasis:
    """Orthonormal basis ``Phi = B R^{-1}`` of ``Pi_N`` under ``<., .>_kappa``."""

    weight: DunklWeight
    max_degree: int
    level: int
    rinv: np.ndarray
    degrees: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.degrees)

    def block_slice(self, k: int) -> slice:
        idx = np.nonzero(self.degrees == k)[0]
        return slice(int(idx[0]), int(idx[-1]) + 1)

    def evaluate(self, pts) -> np.ndarray:
        B, _ = spanning_set(self.weight.d, self.max_degree, as_points(pts, tol=1e-8))
        return B @ self.rinv

    @property
    def rule(self) -> QuadRule:
        return weighted_rule(self.weight, self.level)


@functools.lru_cache(maxsize=16)
def harmonic_basis(weight: DunklWeight, max_degree: int, level: int | None = None) -> HarmonicBasis:
    """Orthonormalize the spanning set under the weighted quadrature inner product."""
    if level is None:
        level = quad_level_for(2 * max_degree)
    rule = weighted_rule(weight, level)
    B, degs = spanning_set(weight.d, max_degree, rule.points)
    sw = np.sqrt(rule.weights)[:, None]
    _, R = np.linalg.qr(sw * B)
    rinv = np.linalg.solve(R, np.eye(len(R)))
    # one refinement pass removes the residual loss of orthogonality
    _, R2 = np.linalg.qr(sw * (B @ rinv))
    rinv = rinv @ np.linalg.solve(R2, np.eye(len(R2)))
    return HarmonicBasis(weight, int(max_degree), int(level), rinv, degs)


@dataclass
class HarmonicExpansion:
    """Coefficients of a function in the orthonormal basis, grouped by degree."""

    basis: HarmonicBasis
    coeffs: np.ndarray

    @property
    def weight(self) -> DunklWeight:
        return self.basis.weight

    @property
    def max_degree(self) -> int:
        return self.basis.max_degree

    @property
    def block_coeffs(self) -> list[np.ndarray]:
        return [self.coeffs[self.basis.block_slice(k)] for k in range(self.max_degree + 1)]

    def block_norms(self) -> np.ndarray:
        return np.array([np.linalg.norm(c) for c in self.block_coeffs])

    def __call__(self, pts) -> np.ndarray:
        return self.basis.evaluate(pts) @ self.coeffs

    evaluate = __call__

    def _with(self, coeffs) -> "HarmonicExpansion":
        return HarmonicExpansion(self.basis, np.asarray(coeffs, dtype=float))

    def scale_blocks(self, factors) -> "HarmonicExpansion":
        factors = np.asarray(factors, dtype=float)
        return self._with(self.coeffs * factors[self.basis.degrees])

    def block(self, k: int) -> "HarmonicExpansion":
        return self.scale_blocks((np.arange(self.max_degree + 1) == k).astype(float))

    def truncate(self, n: int) -> "HarmonicExpansion":
        return self.scale_blocks((np.arange(self.max_degree + 1) <= n).astype(float))

    def __add__(self, other: "HarmonicExpansion") -> "HarmonicExpansion":
        return self._with(self.coeffs + other.coeffs)

    def __sub__(self, other: "HarmonicExpansion") -> "HarmonicExpansion":
        return self._with(self.coeffs - other.coeffs)

    def __mul__(self, c: float) -> "HarmonicExpansion":
        return self._with(self.coeffs * c)

    __rmul__ = __mul__

    def l2_norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def degree(self, tol: float = 1e-12) -> int:
        nz = np.nonzero(self.block_norms() > tol * max(1.0, self.l2_norm()))[0]
        return int(nz[-1]) if len(nz) else 0


def _values_on(f, pts) -> np.ndarray:
    if isinstance(f, HarmonicExpansion):
        return f(pts)
    return np.asarray(f(pts), dtype=float) * np.ones(len(pts))


def expand(f, weight: DunklWeight, max_degree: int, level: int | None = None) -> HarmonicExpansion:
    """Orthogonal projection of ``f`` onto ``Pi_max_degree`` (coefficients by quadrature).

    ``f`` is a callable on ``(N, d)`` arrays or another expansion.  For
    non-polynomial ``f`` pass a higher ``level`` to reduce aliasing.
    """
    if not weight.kernel_supported:
        raise CapabilityError("expansions require a Z2d group or kappa = 0")
    basis = harmonic_basis(weight, int(max_degree))
    if level is None:
        level = basis.level
        if isinstance(f, HarmonicExpansion):
            level = max(level, quad_level_for(max_degree + f.max_degree))
    rule = weighted_rule(weight, level)
    vals = _values_on(f, rule.points)
    coeffs = basis.evaluate(rule.points).T @ (rule.weights * vals)
    return HarmonicExpansion(basis, coeffs)


# ---------------------------------------------------------------------------
# reproducing kernels
# ---------------------------------------------------------------------------


@functools.lru_cache(maxsize=64)
def _jacobi_nodes(kappa: float, q: int):
    """Probability nodes for ``c (1 + t)(1 - t^2)^(kappa - 1) dt``; point mass at 1 if kappa = 0."""
    if kappa == 0:
        return np.array([1.0]), np.array([1.0])
    t, w = roots_jacobi(q, kappa - 1.0, kappa - 1.0)
    w = w * (1.0 + t)
    return t, w / w.sum()


def _pair_arrays(x, y):
    x = as_points(x, tol=1e-8)
    y = as_points(y, tol=1e-8)
    if len(x) == 1 and len(y) > 1:
        x = np.repeat(x, len(y), axis=0)
    if len(y) == 1 and len(x) > 1:
        y = np.repeat(y, len(x), axis=0)
    if x.shape != y.shape:
        raise DomainError("x and y must have matching shapes")
    return x, y


def kernel_table(weight: DunklWeight, nmax: int, x, y) -> np.ndarray:
    """``P_k(h_kappa^2; x_i, y_i)`` for ``k = 0..nmax``, shape ``(nmax + 1, M)``.

    Unweighted: ``((k + lam)/lam) C_k^lam(<x, y>)``, with the circle limit
    ``2 cos(k theta)`` when ``lam = 0``.  For ``Z_2^d`` the intertwining
    integral over ``[-1, 1]^d`` is evaluated by a product Gauss-Jacobi rule.
    """
    if not weight.kernel_supported:
        raise CapabilityError("reproducing kernels require a Z2d group or kappa = 0")
    x, y = _pair_arrays(x, y)
    lam = weight.lambda_kappa
    k = np.arange(nmax + 1, dtype=float)
    if weight.is_trivial:
        t = np.clip(np.sum(x * y, axis=1), -1.0, 1.0)
        if lam == 0:
            theta = np.arccos(t)
            out = 2.0 * np.cos(k[:, None] * theta[None, :])
            out[0] = 1.0
            return out
        return ((k + lam) / lam)[:, None] * gegenbauer_table(nmax, lam, t)
    q = 2 * math.ceil(nmax / 2) + 8
    nodes = [_jacobi_nodes(float(kap), q) for kap in weight.kappas]
    grids = np.meshgrid(*[n[0] for n in nodes], indexing="ij")
    wts = np.ones_like(grids[0])
    for g, (_, w) in zip(range(len(nodes)), nodes):
        shape = [1] * len(nodes)
        shape[g] = -1
        wts = wts * w.reshape(shape)
    T = np.stack([g.ravel() for g in grids], axis=1)  # (Q, d)
    wts = wts.ravel()
    out = np.empty((nmax + 1, len(x)))
    chunk = max(1, 2_000_000 // max(len(T) * (nmax + 1), 1))
    for s in range(0, len(x), chunk):
        arg = (x[s:s + chunk] * y[s:s + chunk]) @ T.T  # (M, Q)
        C = gegenbauer_table(nmax, lam, np.clip(arg, -1.0, 1.0))
        out[:, s:s + chunk] = C @ wts
    return ((k + lam) / lam)[:, None] * out


def _scalar_or_array(v, x):
    return float(v[0]) if np.ndim(x) == 1 and len(v) == 1 else v


def kernel_P(weight: DunklWeight, n: int, x, y):
    """Reproducing kernel of ``H_n(h_kappa^2)`` (normalized so ``P_0 = 1``)."""
    if n < 0:
        raise DomainError("degree must be non-negative")
    return _scalar_or_array(kernel_table(weight, n, x, y)[n], x)


def kernel_L(weight: DunklWeight, n: int, x, y):
    """``L_n(x, y) = sum_{k < 2n} eta(k/n) P_k(x, y)``."""
    if n < 1:
        raise DomainError("n must be at least 1")
    tab = kernel_table(weight, 2 * n - 1, x, y)
    coef = eta(np.arange(2 * n) / n)
    return _scalar_or_array(coef @ tab, x)


# ---------------------------------------------------------------------------
# operators on expansions
# ---------------------------------------------------------------------------


def _as_expansion(f, weight: DunklWeight, degree: int, level: int | None) -> HarmonicExpansion:
    if isinstance(f, HarmonicExpansion) and f.max_degree >= degree and level is None:
        if f.max_degree == degree:
            return f
        return expand(f, weight, degree)
    return expand(f, weight, degree, level)


def eta_n_apply(f, weight: DunklWeight, n: int, level: int | None = None) -> HarmonicExpansion:
    """``eta_n f = sum_k eta(k/n) proj_k f``; band-limited to degree ``< 2n``."""
    if n < 1:
        raise DomainError("n must be at least 1")
    e = _as_expansion(f, weight, 2 * n - 1, level)
    return e.scale_blocks(eta(np.arange(e.max_degree + 1) / n))


def eta_n_apply_kernel(f, weight: DunklWeight, n: int, x, level: int | None = None) -> np.ndarray:
    """``eta_n f(x)`` as the kernel integral ``(1/a) int f(y) L_n(x, y) h^2(y) dsigma(y)``."""
    rule = weighted_rule(weight, level if level is not None else quad_level_for(4 * n))
    vals = _values_on(f, rule.points)
    x = as_points(x)
    out = np.empty(len(x))
    for i, xi in enumerate(x):
        out[i] = np.dot(rule.weights * vals, kernel_L(weight, n, xi[None, :], rule.points))
    return out


def dyadic_block(f, weight: DunklWeight, s: int, level: int | None = None) -> HarmonicExpansion:
    """``A_0 f = eta_1 f`` and ``A_s f = eta_{2^s} f - eta_{2^{s-1}} f``."""
    if s < 0:
        raise DomainError("s must be non-negative")
    top = 2 ** (s + 1) - 1
    e = _as_expansion(f, weight, top, level)
    k = np.arange(top + 1)
    fac = eta(k / 2 ** s) - (eta(k / 2 ** (s - 1)) if s >= 1 else 0.0)
    return e.scale_blocks(fac)


def project(f, weight: DunklWeight, n: int, level: int | None = None) -> HarmonicExpansion:
    """``proj_n f`` as an expansion holding only the degree-``n`` block."""
    if n < 0:
        raise DomainError("degree must be non-negative")
    return _as_expansion(f, weight, n, level).block(n)


def project_kernel(f, weight: DunklWeight, n: int, x, level: int | None = None) -> np.ndarray:
    """``proj_n f(x)`` via the reproducing kernel and the reference quadrature."""
    rule = weighted_rule(weight, level if level is not None else quad_level_for(2 * n + 8))
    vals = _values_on(f, rule.points)
    x = as_points(x)
    return np.array([np.dot(rule.weights * vals, kernel_table(weight, n, xi[None, :], rule.points)[n])
                     for xi in x])


def frac_laplacian(exp: HarmonicExpansion, r: float) -> HarmonicExpansion:
    """``(-Delta_{h,0})^{r/2}``: block ``k`` scaled by ``(k(k + 2 lambda_kappa))^{r/2}``.

    Block 0 is annihilated for ``r > 0`` and kept for ``r = 0``; negative ``r``
    requires a vanishing block 0.
    """
    lam = exp.weight.lambda_kappa
    k = np.arange(exp.max_degree + 1, dtype=float)
    eig = k * (k + 2.0 * lam)
    if r < 0 and np.linalg.norm(exp.block_coeffs[0]) > 1e-14:
        raise DomainError("negative powers are undefined on constants")
    with np.errstate(divide="ignore"):
        fac = np.where(eig > 0, eig ** (r / 2.0), 1.0 if r == 0 else 0.0)
    return exp.scale_blocks(fac)


# 6th-order central differences
_D1 = np.array([-1 / 60, 3 / 20, -3 / 4, 0.0, 3 / 4, -3 / 20, 1 / 60])
_D2 = np.array([1 / 90, -3 / 20, 3 / 2, -49 / 18, 3 / 2, -3 / 20, 1 / 90])


def dunkl_laplacian_numeric(f, weight: DunklWeight, x, h: float = 2e-3) -> np.ndarray:
    """Apply the Dunkl Laplacian to the degree-0 homogeneous extension of ``f``.

    ``Delta_h F = Delta F + sum_v kappa_v (2 <grad F, v>/<x, v>
    - |v|^2 (F(x) - F(x sigma_v)) / <x, v>^2)``, with derivatives by finite
    differences.  On the sphere this equals ``Delta_{h,0} f``.
    """
    x = as_points(x)
    d = x.shape[1]

    def F(y):
        return _values_on(f, y / np.linalg.norm(y, axis=1, keepdims=True))

    off = np.arange(-3, 4)
    grad = np.zeros_like(x)
    lap = np.zeros(len(x))
    for i in range(d):
        e = np.zeros(d)
        e[i] = h
        vals = np.stack([F(x + o * e) for o in off])  # (7, M)
        grad[:, i] = _D1 @ vals / h
        lap += _D2 @ vals / h ** 2
    f0 = F(x)
    out = lap
    for v, kap in zip(weight.roots.roots, weight.roots.kappas):
        if kap == 0:
            continue
        xv = x @ v
        refl = x - 2.0 * xv[:, None] * v
        out = out + kap * (2.0 * (grad @ v) / xv - (f0 - F(refl)) / xv ** 2)
    return out


# ---------------------------------------------------------------------------
# norms and best approximation
# ---------------------------------------------------------------------------


def lp_norm(f, weight: DunklWeight, p: float, level: int = 4) -> float:
    """``||f||_{p,kappa}`` for the normalized weighted measure (max over nodes for p = inf)."""
    rule = weighted_rule(weight, level)
    vals = np.abs(_values_on(f, rule.points))
    if math.isinf(p):
        return float(vals.max())
    return float(np.dot(rule.weights, vals ** p) ** (1.0 / p))


@dataclass
class ApproxBracket:
    lower: float
    upper: float
    p: float
    n: int
    method: str

    def __iter__(self):
        return iter((self.lower, self.upper))


def best_approx_error(f, weight: DunklWeight, n: int, p: float, max_degree: int | None = None,
                      level: int | None = None) -> ApproxBracket:
    """Bracket for ``E_n(f)_{p,kappa} = inf ||f - P||_{p,kappa}`` over ``P in Pi_n``.

    ``p = 2`` is exact (orthogonal truncation).  For ``p = 1, inf`` the upper
    end is ``min(||f - S_n f||, ||f - eta_m f||)`` with ``2m - 1 <= n`` and the
    lower end comes from duality: for any ``g`` orthogonal to ``Pi_n``,
    ``E_n(f)_p >= |<f, g>| / ||g||_{p'}``.  Other ``p`` return the
    ``eta``-based upper bound only (lower end 0).
    """
    if n < 0:
        raise DomainError("n must be non-negative")
    N = max_degree if max_degree is not None else max(2 * n + 8, 16)
    if level is None:
        level = quad_level_for(2 * N + 8)
    rule = weighted_rule(weight, level)
    basis = harmonic_basis(weight, N)
    Phi = basis.evaluate(rule.points)
    fv = _values_on(f, rule.points)
    wq = rule.weights
    coeffs = Phi.T @ (wq * fv)
    low_cols = basis.degrees <= n
    Pn = Phi[:, low_cols]

    def perp(g):  # remove the Pi_n component of node values
        return g - Pn @ (Pn.T @ (wq * g))

    def norm(g, pp):
        g = np.abs(g)
        return float(g.max()) if math.isinf(pp) else float(np.dot(wq, g ** pp) ** (1 / pp))

    resid_sn = perp(fv)
    if p == 2:
        e = norm(resid_sn, 2)
        return ApproxBracket(e, e, 2.0, n, "orthogonal truncation")
    uppers = [norm(resid_sn, p)]
    m = (n + 1) // 2
    if m >= 1:
        k = np.arange(N + 1)
        eta_c = coeffs * eta(k / m)[basis.degrees]
        uppers.append(norm(fv - Phi @ eta_c, p))
    upper = min(uppers)
    if p not in (1, 1.0) and not math.isinf(p):
        return ApproxBracket(0.0, upper, float(p), n, "eta upper bound only")
    lowers = []
    if math.isinf(p):
        lowers.append(norm(resid_sn, 2))  # ||.||_2 <= ||.||_inf on a probability measure
        cands = [resid_sn, np.sign(resid_sn) * (np.abs(resid_sn) > 0.5 * np.abs(resid_sn).max())]
        for g in cands:
            g = perp(g)
            den = norm(g, 1)
            if den > 0:
                lowers.append(abs(np.dot(wq, fv * g)) / den)
    else:
        for g in (np.sign(resid_sn), resid_sn):
            g = perp(g)
            den = norm(g, math.inf)
            if den > 0:
                lowers.append(abs(np.dot(wq, fv * g)) / den)
    lower = min(max(lowers, default=0.0), upper)
    return ApproxBracket(lower, upper, float(p), n, "duality / eta bracket")

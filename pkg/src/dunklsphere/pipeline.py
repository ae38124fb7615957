"""Upper-bound assembly, the bump-system lower bound, and empirical rate regression.

The upper bound evaluates the block sum

    sum_s 2^{-s(r - a(d-1))} sum_{k=1}^{s+1} (#Lambda_s / 2^{(k-1)(d-1)})^{a/beta} e_{n_{s,k}}(B l_p^{m_{s,k}}, l_q^{m_{s,k}})

with ``a = 1/p - 1/q``, Schuett reference values (constant 1) in place of the
entropy numbers, and the budget schedule ``n_s``, ``n_{s,k}`` driven by ``J``,
``J_1`` and ``rho``.  The cardinality model is ``#Lambda_s = c_Lambda 2^{s(d-1)}``.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np

from .ball_entropy import BallSpec, entropy_lower, schuett_value, trivial_radius
from .corpus import bump_profile
from .harmonics import expand, frac_laplacian, quad_level_for, weighted_rule
from .sphere import (
    Cap,
    DomainError,
    build_maximal_separated_set,
    cap_rule,
    normalized_cap_area,
    sphere_rule,
)
from .weight import DunklWeight

__all__ = [
    "ConfigError",
    "PipelineConfig",
    "AllocationSchedule",
    "block_sizes",
    "calibrate_c_alloc",
    "allocate",
    "upper_bound_value",
    "BumpSystem",
    "build_bump_system",
    "BumpNormReport",
    "verify_bump_norms",
    "lower_bound_value",
    "RateReport",
    "rate_regression",
    "kolmogorov_ratio",
    "bracket_floor",
]


class ConfigError(DomainError):
    """A configuration violates a hypothesis needed by the bound."""


def bracket_floor(x: float) -> int:
    """``[x]``: the largest integer strictly less than ``x`` (clamped at 0)."""
    return max(int(math.ceil(x)) - 1, 0)


def _inv(p: float) -> float:
    return 0.0 if math.isinf(p) else 1.0 / p


@dataclass(frozen=True)
class PipelineConfig:
    r: float
    p: float
    q: float
    weight: DunklWeight
    rho: float = 0.1
    beta: float | None = None
    n_grid: tuple = tuple(2 ** j for j in range(4, 13))
    c_lambda: float = 2.0
    free_beta_cap: float = 1.0

    def __post_init__(self):
        if self.r <= 0:
            raise ConfigError("r must be positive")
        if not (self.p >= 1 and self.q >= 1):
            raise ConfigError("p and q must lie in [1, inf]")
        if self.rho <= 0:
            raise ConfigError("rho must be positive")
        g = self.weight.gamma_kappa
        if self.beta is None:
            object.__setattr__(self, "beta", 0.95 / (2 * g) if g > 0 else 0.95 * self.free_beta_cap)
        if self.beta <= 0 or (g > 0 and self.beta >= 1 / (2 * g)):
            raise ConfigError("beta must lie in (0, 1/(2 gamma_kappa))")
        d = self.weight.d
        a_plus = max(self.alpha, 0.0)
        need = (d - 1) * a_plus * (2 * g + 1)
        if not self.r > need:
            raise ConfigError(f"r must exceed (d-1)(1/p-1/q)_+(2 gamma_kappa+1) = {need:.6g}")
        if self.alpha > 0:
            need2 = (1 + self.rho) * (d - 1) * self.alpha * (1 / self.beta + 1)
            if not self.r > need2:
                raise ConfigError(f"r must exceed (1+rho)(d-1)(1/p-1/q)(1/beta+1) = {need2:.6g}")

    @property
    def d(self) -> int:
        return self.weight.d

    @property
    def alpha(self) -> float:
        return _inv(self.p) - _inv(self.q)

    def effective(self) -> "PipelineConfig":
        """For ``q < p`` the bound runs through the embedding into the ``(q, q)`` class."""
        if self.alpha >= 0:
            return self
        return PipelineConfig(self.r, self.q, self.q, self.weight, self.rho, self.beta,
                              self.n_grid, self.c_lambda, self.free_beta_cap)

    def card(self, s: int) -> int:
        """``#Lambda_s``."""
        return int(round(self.c_lambda * 2 ** (s * (self.d - 1))))


def block_sizes(s: int, d: int, card: int) -> list[int]:
    """``m_{s,1} = 2``, ``m_{s,k}`` the dyadic shells ``2^{k(d-1)} - 2^{(k-1)(d-1)}``
    (with the first shell shortened to ``2^{2(d-1)} - 2``) for ``2 <= k <= s``, and
    ``m_{s,s+1} = #Lambda_s - 2^{s(d-1)}``."""
    D = d - 1
    if s == 0:
        return [card]
    sizes = [2]
    for k in range(2, s + 1):
        sizes.append(2 ** (k * D) - (2 if k == 2 else 2 ** ((k - 1) * D)))
    if s == 1:
        sizes = [2]
    sizes.append(card - (2 ** (s * D) if s >= 2 else 2))
    return sizes


@dataclass
class AllocationSchedule:
    n: int
    J: int
    J0: float
    c_alloc: float
    n_s: list
    n_sk: list  # per s: list of budgets for k = 1..s+1
    m_sk: list
    J1: dict = field(default_factory=dict)
    degenerate: bool = False
    rescaled: list = field(default_factory=list)

    def verify(self) -> None:
        if sum(self.n_s) > self.n:
            raise AssertionError("sum of n_s exceeds n")
        for s, (ns, row) in enumerate(zip(self.n_s, self.n_sk)):
            if sum(row) > ns:
                raise AssertionError(f"inner budgets exceed n_s at s={s}")
            if min(row, default=0) < 0:
                raise AssertionError("negative budget")

    def to_record(self) -> dict:
        return {"n": self.n, "J": self.J, "J0": self.J0, "c_alloc": self.c_alloc,
                "n_s": self.n_s, "n_sk": self.n_sk, "m_sk": self.m_sk,
                "J1": {str(k): v for k, v in self.J1.items()}, "degenerate": self.degenerate}


def _n_s(cfg: PipelineConfig, J: int, s: int) -> int:
    D, rho = cfg.d - 1, cfg.rho
    expo = (1 - rho) if s <= J else (1 + rho)
    return bracket_floor(cfg.card(s) * 2.0 ** (expo * D * (J - s)))


def _s_max(cfg: PipelineConfig, J: int) -> int:
    return int(math.floor((1 + cfg.rho) / cfg.rho * J))


def _total(cfg: PipelineConfig, J: int) -> int:
    return sum(_n_s(cfg, J, s) for s in range(0, _s_max(cfg, J) + 1))


@functools.lru_cache(maxsize=64)
def calibrate_c_alloc(cfg: PipelineConfig, j_max: int = 24) -> float:
    """``max_J sum_s n_s(J) / 2^{J(d-1)}``: then ``2^{J(d-1)} <= n / C`` guarantees ``sum n_s <= n``."""
    D = cfg.d - 1
    return max(_total(cfg, J) / 2.0 ** (J * D) for J in range(0, j_max + 1))


def _inner(cfg: PipelineConfig, ns: int, sizes: list, J: int, s: int):
    """Budgets ``n_{s,k}``; the ``J_1`` split applies for ``s > J``."""
    D, rho = cfg.d - 1, cfg.rho
    J1 = None
    if s <= J:
        row = [bracket_floor(2.0 ** ((1 - rho) * D * (J - k)) * m) for k, m in enumerate(sizes, 1)]
    else:
        J1 = int(math.floor(math.log2(max(ns, 1)) / D))
        row = []
        for k, m in enumerate(sizes, 1):
            expo = (1 - rho) if k <= J1 else (1 + rho)
            row.append(bracket_floor(2.0 ** (expo * D * (J1 - k)) * m))
    rescaled = False
    tot = sum(row)
    if tot > ns:
        row = [int(math.floor(x * ns / tot)) for x in row]
        rescaled = True
    return row, J1, rescaled


def allocate(n: int, cfg: PipelineConfig) -> AllocationSchedule:
    """Budget schedule for ``e_n``: ``J`` from the calibrated constant, then ``n_s`` and ``n_{s,k}``."""
    if n < 2:
        raise DomainError("n must be at least 2")
    cfg = cfg.effective()
    D = cfg.d - 1
    C = calibrate_c_alloc(cfg)
    ratio = n / C
    degenerate = ratio < 1
    J = 0 if degenerate else int(math.floor(math.log2(ratio) / D + 1e-12))
    smax = _s_max(cfg, J)
    n_s = [_n_s(cfg, J, s) for s in range(0, smax + 1)]
    if degenerate:
        tot = sum(n_s)
        n_s = [int(math.floor(x * n / tot)) for x in n_s] if tot > n else n_s
    n_sk, m_sk, J1s, resc = [], [], {}, []
    for s, ns in enumerate(n_s):
        sizes = block_sizes(s, cfg.d, cfg.card(s))
        row, J1, rescaled = _inner(cfg, ns, sizes, J, s)
        n_sk.append(row)
        m_sk.append(sizes)
        if J1 is not None:
            J1s[s] = J1
        if rescaled:
            resc.append(s)
    sched = AllocationSchedule(int(n), J, (1 + cfg.rho) / cfg.rho * J, C, n_s, n_sk, m_sk, J1s,
                               degenerate, resc)
    sched.verify()
    return sched


def _entropy_ref(n: int, m: int, p: float, q: float) -> float:
    return trivial_radius(m, p, q) if n < 1 else schuett_value(n, m, p, q)


def _term(cfg: PipelineConfig, s: int, budgets) -> float:
    """Contribution of level ``s`` with the given inner budgets (``None``: all zero)."""
    D, a = cfg.d - 1, cfg.alpha
    card = cfg.card(s)
    sizes = block_sizes(s, cfg.d, card)
    if budgets is None:
        budgets = [0] * len(sizes)
    inner = 0.0
    for k, (m, nk) in enumerate(zip(sizes, budgets), 1):
        if m <= 0:
            continue
        inner += (card / 2.0 ** ((k - 1) * D)) ** (a / cfg.beta) * _entropy_ref(nk, m, cfg.p, cfg.q)
    return 2.0 ** (-s * (cfg.r - a * D)) * inner


def upper_bound_value(n: int, cfg: PipelineConfig, return_parts: bool = False):
    """Numeric upper bound for ``e_n(BW_p^r, L_q)`` up to one multiplicative constant.

    Levels with a budget are summed explicitly; the remaining levels (zero
    budget, entropy replaced by the ball radius) are summed to ``s_stop`` and
    the rest is bounded by the closed-form series
    ``sum_{s > S} (s + 2) C x^s`` with ``x = 2^{-(r - a(d-1)(1 + 1/beta))}``.
    """
    cfg_e = cfg.effective()
    sched = allocate(n, cfg_e)
    D, a = cfg_e.d - 1, cfg_e.alpha
    head = sum(_term(cfg_e, s, row) for s, row in enumerate(sched.n_sk))
    S0 = len(sched.n_sk)
    x = 2.0 ** (-(cfg_e.r - a * D * (1 + 1 / cfg_e.beta)))
    if not x < 1:
        raise ConfigError("series diverges: r <= (1/p-1/q)(d-1)(1+1/beta)")
    S = S0 + 60
    mid = sum(_term(cfg_e, s, None) for s in range(S0, S + 1))
    # per-level bound: (s + 2) blocks, each weight <= (c 2^{d-1})^{a/beta} 2^{s D a/beta}, radius 1
    Cst = (cfg_e.c_lambda * 2.0 ** D) ** (a / cfg_e.beta)
    tail = Cst * x ** (S + 1) * ((S + 3) - (S + 2) * x) / (1 - x) ** 2
    total = head + mid + tail
    if return_parts:
        return total, {"head": head, "truncated_levels": mid, "series_tail": tail, "schedule": sched}
    return total


# ---------------------------------------------------------------------------
# bump systems
# ---------------------------------------------------------------------------


@dataclass
class BumpSystem:
    l: int
    centers: np.ndarray
    eps_strip: float
    weight: DunklWeight

    @property
    def N(self) -> int:
        return len(self.centers)

    def bump(self, i: int):
        c, l = self.centers[i], self.l
        return lambda pts: bump_profile(l * np.arccos(np.clip(np.atleast_2d(pts) @ c, -1.0, 1.0)))

    def combination(self, a):
        a = np.asarray(a, dtype=float)
        C, l = self.centers, self.l

        def f(pts):
            dist = np.arccos(np.clip(np.atleast_2d(pts) @ C.T, -1.0, 1.0))
            return bump_profile(l * dist) @ a

        return f

    def strip_roots(self) -> np.ndarray:
        return np.array([v for v, k in zip(self.weight.roots.roots, self.weight.kappas) if k > 0])

    def strip_measure(self) -> float:
        """Normalized measure of ``E_j = {|pi/2 - d(x, v_j)| <= 2 eps}`` summed over roots."""
        m = len(self.strip_roots())
        t = 2.0 * self.eps_strip
        per = 4.0 * t / (2 * math.pi) if self.weight.d == 2 else math.sin(t)
        return m * per

    def verify(self) -> None:
        C = self.centers
        if len(C) >= 2:
            g = np.arccos(np.clip(C @ C.T, -1.0, 1.0))
            np.fill_diagonal(g, np.inf)
            if g.min() <= 2.0 / self.l:
                raise AssertionError("bump supports overlap")
        R = self.strip_roots()
        if len(R):
            gap = np.abs(np.arcsin(np.clip(C @ R.T, -1.0, 1.0)))  # |pi/2 - d(x, v)|
            if gap.min() <= 2.0 * self.eps_strip + 1.0 / self.l:
                raise AssertionError("a bump support meets a strip")

    def orbit_group(self) -> np.ndarray:
        R = self.strip_roots()
        if not len(R):
            return np.eye(self.weight.d)[None]
        from .weight import RootSystem

        return RootSystem(tuple(map(tuple, R)), (1.0,) * len(R), "GeneralVerified").group_elements()


def build_bump_system(l: int, cfg_or_weight, seed: int = 0, eps_strip: float | None = None) -> BumpSystem:
    """Disjoint caps ``c(x_i, 1/l)`` whose closures stay out of the strips ``E_j``."""
    w = cfg_or_weight.weight if isinstance(cfg_or_weight, PipelineConfig) else cfg_or_weight
    if l < 1:
        raise DomainError("l must be positive")
    nroots = int(np.sum(w.kappas > 0))
    eps = math.pi / (64 * max(nroots, 1)) if eps_strip is None else eps_strip
    sep = min(2.0 / l * (1 + 1e-3), math.pi)
    S = build_maximal_separated_set(w.d, sep, seed)
    C = S.points
    R = np.array([v for v, k in zip(w.roots.roots, w.kappas) if k > 0])
    if len(R):
        gap = np.abs(np.arcsin(np.clip(C @ R.T, -1.0, 1.0))).min(axis=1)
        C = C[gap > 2.0 * eps + 1.0 / l]
    if len(C) == 0:
        raise DomainError("strips leave no room for bumps; use a smaller eps_strip or larger l")
    sys = BumpSystem(int(l), C, float(eps), w)
    sys.verify()
    return sys


@dataclass
class BumpNormReport:
    p: float
    ratio_low: float
    ratio_high: float
    leakage: float
    leakage_bump: int
    truncation_degree: int
    truncation_tail: float
    max_overlap: int
    group_order: int
    sup_single: float


def _bump_integrals(sys: BumpSystem, p: float, level: int = 4) -> np.ndarray:
    w = sys.weight
    out = []
    for i in range(sys.N):
        rule = cap_rule(Cap(sys.centers[i], 1.0 / sys.l), level,
                        None if w.is_trivial else w.density, w.singular)
        out.append(rule.integrate(sys.bump(i)(rule.points) ** p) / w.norm_const)
    return np.asarray(out)


def verify_bump_norms(sys: BumpSystem, p: float = 2.0, trials: int = 100, seed: int = 0,
                      leak_bumps: int = 2, degree_factor: int = 8) -> BumpNormReport:
    """Norm equivalence, orbit-support leakage of ``Delta_{h,0} phi_i``, and orbit overlap counts.

    ``||f_a||_{p,kappa}`` uses the disjointness of supports:
    ``||f_a||^p = sum |a_i|^p ||phi_i||^p``.  Leakage is the largest
    ``|Delta_{h,0} phi_i|`` outside the orbit caps divided by its maximum,
    for the truncated expansion of degree ``degree_factor * l``; the
    reported tail is the l2 mass of ``phi_i`` beyond that degree, estimated
    from an expansion of twice the degree.
    """
    rng = np.random.default_rng(seed)
    d, l, w = sys.weight.d, sys.l, sys.weight
    scale = float(l) ** (-(d - 1) * _inv(p)) if not math.isinf(p) else 1.0
    ratios = []
    if math.isinf(p):
        for _ in range(trials):
            a = rng.standard_normal(sys.N)
            ratios.append(np.abs(a).max() / np.abs(a).max())  # sup of each bump is exactly 1
    else:
        I = _bump_integrals(sys, p)
        for _ in range(trials):
            a = rng.standard_normal(sys.N)
            ratios.append((np.dot(np.abs(a) ** p, I)) ** (1 / p) / (scale * np.sum(np.abs(a) ** p) ** (1 / p)))
    G = sys.orbit_group()
    # leakage of the truncated Dunkl Laplacian outside the orbit caps
    N = degree_factor * l
    leak, worst, tail = 0.0, -1, 0.0
    probe = sphere_rule(d, quad_level_for(4 * N)).points
    for i in range(min(leak_bumps, sys.N)):
        phi = sys.bump(i)
        lvl = quad_level_for(4 * N)
        e = expand(phi, w, N, level=lvl)
        lap = frac_laplacian(e, 2.0) * -1.0
        vals = lap(probe)
        orbit = np.array([g @ sys.centers[i] for g in G])
        inside = (probe @ orbit.T >= math.cos(1.0 / l) - 1e-12).any(axis=1)
        rel = np.abs(vals[~inside]).max() / np.abs(vals).max()
        if rel > leak:
            leak, worst = float(rel), i
        e2 = expand(phi, w, 2 * N, level=quad_level_for(8 * N))
        tail = max(tail, float(np.linalg.norm(e2.coeffs[e2.basis.degrees > N])))
    # overlap of orbit caps at sample points
    orbit_all = np.einsum("gij,nj->gni", G, sys.centers).reshape(-1, d)
    cnt = (probe @ orbit_all.T >= math.cos(1.0 / l)).sum(axis=1)
    return BumpNormReport(float(p), float(min(ratios)), float(max(ratios)), leak, worst, N, tail,
                          int(cnt.max()), len(G), 1.0)


def lower_bound_value(n: int, cfg: PipelineConfig, embed_constant: float = 1.0, seed: int = 0) -> float:
    """``c n^{-r/(d-1) + 1/p - 1/q} e_n(B l_p^{2n}, l_q^{2n})`` with ``c = embed_constant``."""
    if not 1 <= n <= 12:
        raise DomainError("lower_bound_value is meant for 1 <= n <= 12")
    lo, _ = entropy_lower(BallSpec(2 * n, cfg.p, cfg.q), n, seed=seed, restarts=16)
    return embed_constant * float(n) ** (-cfg.r / (cfg.d - 1) + cfg.alpha) * lo


@dataclass
class RateReport:
    n_grid: list
    values: list
    slope: float
    intercept: float
    target: float
    residuals: list

    def to_record(self) -> dict:
        return {"n_grid": self.n_grid, "values": self.values, "slope": self.slope,
                "intercept": self.intercept, "target": self.target, "residuals": self.residuals}


def rate_regression(n_grid, values, target_exponent: float) -> RateReport:
    """Least-squares slope of ``log(value)`` against ``log(n)``."""
    n_grid = [float(x) for x in n_grid]
    values = [float(v) for v in values]
    if len(n_grid) < 4 or len(n_grid) != len(values):
        raise DomainError("need at least 4 grid points with one value each")
    if min(values) <= 0:
        raise DomainError("values must be positive")
    x, y = np.log(n_grid), np.log(values)
    slope, icpt = np.polyfit(x, y, 1)
    res = y - (slope * x + icpt)
    return RateReport(n_grid, values, float(slope), float(icpt), float(target_exponent), res.tolist())


def kolmogorov_ratio(f, weight: DunklWeight, r: float, v: float, p: float, degree: int,
                     level: int | None = None) -> float:
    """``||D^r f|| / (||D^{2v} f||^{r/(2v)} ||f||^{1 - r/(2v)})`` with ``D^s = (-Delta_{h,0})^{s/2}``."""
    if not 0 < r < 2 * v:
        raise DomainError("need 0 < r < 2v")
    e = expand(f, weight, degree)
    rule = weighted_rule(weight, level if level is not None else quad_level_for(2 * degree + 8))

    def norm(g):
        vals = np.abs(g(rule.points))
        return float(vals.max()) if math.isinf(p) else float(np.dot(rule.weights, vals ** p) ** (1 / p))

    t = r / (2 * v)
    return norm(frac_laplacian(e, r)) / (norm(frac_laplacian(e, 2 * v)) ** t * norm(e) ** (1 - t))

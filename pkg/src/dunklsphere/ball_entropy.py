"""Weighted sequence spaces, dyadic block reductions and entropy numbers of l_p balls.

``e_k(B l_p^m, l_q^m)`` is the smallest radius for which ``2^k`` l_q balls
cover the unit l_p ball.  :func:`entropy_bracket` returns certified lower and
upper bounds:

* upper bounds come from explicit nets: keep the ``s`` largest coordinates
  and round them to a cubic lattice of step ``h``; the number of distinct
  images is counted by a convolution over per-coordinate costs;
* lower bounds come from the volume ratio, from explicit packings (sparse sign
  vectors, lattice points in the ball, greedy farthest-point search).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product

import numpy as np
from scipy.signal import fftconvolve
from scipy.special import comb, gammaln

from .sphere import DomainError

__all__ = [
    "WeightedVector",
    "BallSpec",
    "EntropyBracket",
    "weighted_norm",
    "isometry_U",
    "SortedWeightReport",
    "sorted_weight_bound",
    "Block",
    "DyadicReduction",
    "dyadic_blocks",
    "dyadic_reduce",
    "schuett_value",
    "remark37_bound",
    "trivial_radius",
    "entropy_upper",
    "entropy_lower",
    "entropy_bracket",
    "verify_cover",
    "brute_force_oracle",
    "sample_ball",
]

INF = math.inf


def _inv(p: float) -> float:
    return 0.0 if math.isinf(p) else 1.0 / p


def _check_p(p: float) -> float:
    p = float(p)
    if not (p >= 1.0):
        raise DomainError("exponents must lie in [1, inf]")
    return p


# ---------------------------------------------------------------------------
# weighted sequence spaces
# ---------------------------------------------------------------------------


@dataclass
class WeightedVector:
    values: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        self.weights = np.asarray(self.weights, dtype=float)
        if self.values.shape != self.weights.shape:
            raise DomainError("values and weights must have the same length")
        if np.any(self.weights <= 0):
            raise DomainError("weights must be positive")


@dataclass(frozen=True)
class BallSpec:
    m: int
    p: float
    q: float
    weights: tuple | None = None

    def __post_init__(self):
        if self.m < 1:
            raise DomainError("m must be at least 1")
        _check_p(self.p)
        _check_p(self.q)
        if self.weights is not None and len(self.weights) != self.m:
            raise DomainError("need one weight per coordinate")

    @property
    def alpha(self) -> float:
        """``1/p - 1/q``."""
        return _inv(self.p) - _inv(self.q)


@dataclass
class EntropyBracket:
    k: int
    lower: float
    upper: float
    lower_method: str
    upper_method: str
    certificate: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0 <= self.lower <= self.upper * (1 + 1e-12):
            raise AssertionError(f"invalid bracket [{self.lower}, {self.upper}]")

    def contains(self, value: float, slack: float = 0.0) -> bool:
        return self.lower * (1 - slack) <= value <= self.upper * (1 + slack)

    def to_record(self) -> dict:
        return {"k": self.k, "lower": self.lower, "upper": self.upper,
                "lower_method": self.lower_method, "upper_method": self.upper_method,
                "certificate": self.certificate}


def weighted_norm(x, w=None, p: float = 2.0) -> float:
    """``(sum |x_i|^p w_i)^{1/p}``; ``p = inf`` gives ``max |x_i|`` regardless of ``w``."""
    if isinstance(x, WeightedVector):
        x, w = x.values, x.weights
    x = np.abs(np.asarray(x, dtype=float))
    p = _check_p(p)
    if math.isinf(p):
        return float(x.max()) if x.size else 0.0
    w = np.ones_like(x) if w is None else np.asarray(w, dtype=float)
    return float(np.sum(x ** p * w) ** (1.0 / p))


def isometry_U(x, w, p: float, q: float):
    """``v = w^{1 - p/q}`` and ``Ux = x w^{1/q}``.

    ``||Ux||_{p,v} = ||x||_{p,w}`` and ``||Ux||_q = ||x||_{q,w}``.
    """
    p, q = _check_p(p), _check_p(q)
    if p > q:
        raise DomainError("isometry_U needs p <= q")
    x = np.asarray(x, dtype=float)
    w = np.asarray(w, dtype=float)
    if np.any(w <= 0):
        raise DomainError("weights must be positive")
    ratio = 1.0 if math.isinf(q) and math.isinf(p) else p * _inv(q)
    v = w ** (1.0 - ratio)
    return v, x * w ** _inv(q)


@dataclass
class SortedWeightReport:
    hypothesis_holds: bool
    hypothesis_sum: float
    bound_holds: bool | None
    worst_ratio: float  # max_j w_j^{-1} / (m/j)^{1/gamma}


def sorted_weight_bound(w, gamma: float) -> SortedWeightReport:
    """Check ``w_j^{-1} <= (m/j)^{1/gamma}`` (ascending order) given ``sum w_j^{-gamma} <= m``."""
    if gamma <= 0:
        raise DomainError("gamma must be positive")
    w = np.sort(np.asarray(w, dtype=float))
    m = len(w)
    total = float(np.sum(w ** (-gamma)))
    hyp = total <= m * (1 + 1e-12)
    j = np.arange(1, m + 1)
    ratio = float(np.max((1.0 / w) / (m / j) ** (1.0 / gamma)))
    return SortedWeightReport(hyp, total, (ratio <= 1 + 1e-12) if hyp else None, ratio)


# ---------------------------------------------------------------------------
# dyadic reduction
# ---------------------------------------------------------------------------


def schuett_value(k: float, m: int, p: float, q: float) -> float:
    """Three-regime reference value for ``e_k(B l_p^m, l_q^m)`` with all constants 1."""
    if k < 1 or m < 1:
        raise DomainError("k and m must be at least 1")
    a = _inv(p) - _inv(q)
    if a < 0:
        return 2.0 ** (-k / (2.0 * m)) * m ** (-a)
    if k < math.log2(2 * m):
        return 1.0
    if k <= 2 * m:
        return (math.log2(1 + m / k) / k) ** a
    return 2.0 ** (-k / (2.0 * m)) * m ** (-a)


def remark37_bound(n: float, m: int, p: float, q: float, gamma: float) -> float:
    """``(m/n)^{(1/gamma) a} * {1, n^{-a}, 2^{-n/(8m)} m^{-a}}`` with ``a = 1/p - 1/q``."""
    if n < 1:
        raise DomainError("n must be at least 1")
    a = _inv(p) - _inv(q)
    front = (m / n) ** (a / gamma)
    if n <= math.log2(2 * m):
        return front
    if n <= 2 * m:
        return front * n ** (-a)
    return front * 2.0 ** (-n / (8.0 * m)) * m ** (-a)


def dyadic_blocks(m: int) -> list[int]:
    """``m_1 = 2, m_k = 2^{k-1} (2 <= k <= j0 - 1), m_{j0} = m - 2^{j0-1}`` with ``2^{j0} <= m``."""
    if m < 1:
        raise DomainError("m must be at least 1")
    j0 = int(math.floor(math.log2(m)))
    if j0 <= 1:
        return [m]
    return [2] + [2 ** (k - 1) for k in range(2, j0)] + [m - 2 ** (j0 - 1)]


@dataclass
class Block:
    size: int
    budget: int
    scale: float


@dataclass
class DyadicReduction:
    spec: BallSpec
    gamma: float
    blocks: list
    hypothesis: SortedWeightReport | None

    def bound(self, entropy=None) -> float:
        """``sum_k scale_k * e_{n_k}(B l_p^{m_k}, l_q^{m_k})`` for a supplied entropy estimator."""
        if entropy is None:
            entropy = lambda n, mk: _schuett_or_trivial(n, mk, self.spec.p, self.spec.q)  # noqa: E731
        return float(sum(b.scale * entropy(b.budget, b.size) for b in self.blocks))


def _schuett_or_trivial(n: int, m: int, p: float, q: float) -> float:
    return trivial_radius(m, p, q) if n < 1 else schuett_value(n, m, p, q)


def dyadic_reduce(spec: BallSpec, gamma: float, k_budget: int, budgets=None) -> DyadicReduction:
    """Block decomposition with scale factors ``(m/2^{k-1})^{(1/gamma)(1/p - 1/q)}``.

    Without explicit ``budgets`` the total ``k_budget`` is split greedily,
    one unit at a time, to the block whose Schuett term drops most.
    """
    if gamma <= 0:
        raise DomainError("gamma must be positive")
    hyp = None
    if spec.weights is not None:
        hyp = sorted_weight_bound(spec.weights, gamma)
        if not hyp.hypothesis_holds:
            raise DomainError(
                f"weight hypothesis fails: sum w^-gamma = {hyp.hypothesis_sum:.6g} > m = {spec.m}")
    sizes = dyadic_blocks(spec.m)
    a = spec.alpha
    scales = [(spec.m / 2 ** (k - 1)) ** (a / gamma) for k in range(1, len(sizes) + 1)]
    if budgets is None:
        budgets = [0] * len(sizes)
        term = lambda i, n: scales[i] * _schuett_or_trivial(n, sizes[i], spec.p, spec.q)  # noqa: E731
        for _ in range(int(k_budget)):
            gains = [term(i, budgets[i]) - term(i, budgets[i] + 1) for i in range(len(sizes))]
            budgets[int(np.argmax(gains))] += 1
    budgets = [int(b) for b in budgets]
    if len(budgets) != len(sizes) or sum(budgets) > k_budget or min(budgets) < 0:
        raise DomainError("budgets must be non-negative, one per block, and sum to at most k_budget")
    blocks = [Block(s, b, c) for s, b, c in zip(sizes, budgets, scales)]
    return DyadicReduction(spec, float(gamma), blocks, hyp)


# ---------------------------------------------------------------------------
# ball geometry helpers
# ---------------------------------------------------------------------------


def trivial_radius(m: int, p: float, q: float) -> float:
    """``sup ||x||_q`` over the unit l_p ball of ``R^m``."""
    a = _inv(p) - _inv(q)
    return 1.0 if a >= 0 else float(m) ** (-a)


def _log_ball_volume(m: int, p: float) -> float:
    if math.isinf(p):
        return m * math.log(2.0)
    return m * (math.log(2.0) + gammaln(1.0 + 1.0 / p)) - gammaln(1.0 + m / p)


def _tail_bound(m: int, s: int, p: float, q: float) -> float:
    """``sup ||x - (top s coordinates of x)||_q`` over the unit l_p ball."""
    if s >= m:
        return 0.0
    a = _inv(p) - _inv(q)
    if a < 0:
        return float(m - s) ** (-a)
    if math.isinf(q):
        return (s + 1.0) ** (-_inv(p))
    if p == 1.0:
        j = np.arange(s + 1, m + 1, dtype=float)
        return float(np.max((j - s) ** (1.0 / q) / j))
    return (s + 1.0) ** (-a)


def sample_ball(m: int, p: float, n: int, rng) -> np.ndarray:
    """Points of the unit l_p ball: uniform interior samples plus boundary-heavy ones."""
    if math.isinf(p):
        x = rng.uniform(-1, 1, size=(n, m))
        x[: n // 2] = np.sign(x[: n // 2]) * (np.abs(x[: n // 2]) > 0.3)
        return x
    g = rng.gamma(1.0 / p, 1.0, size=(n, m)) ** (1.0 / p) * rng.choice([-1.0, 1.0], size=(n, m))
    e = rng.exponential(size=(n, 1))
    r = np.sum(np.abs(g) ** p, axis=1, keepdims=True) + e
    x = g / r ** (1.0 / p)
    # push half of the samples to the sphere and sparsify some of them
    half = n // 2
    x[:half] /= np.sum(np.abs(x[:half]) ** p, axis=1, keepdims=True) ** (1.0 / p)
    mask = rng.random(size=(half // 2, m)) < 0.5
    y = x[: half // 2] * mask
    nrm = np.sum(np.abs(y) ** p, axis=1, keepdims=True) ** (1.0 / p)
    x[: half // 2] = np.where(nrm > 0, y / np.where(nrm > 0, nrm, 1.0), x[: half // 2])
    return x


def _extreme_points(m: int, p: float) -> np.ndarray:
    pts = []
    for s in sorted({1, 2, m}):
        if s > m or math.comb(m, s) * 2 ** s > 4096:
            continue
        for supp in _subsets(m, s):
            for signs in product((-1.0, 1.0), repeat=s):
                v = np.zeros(m)
                v[list(supp)] = np.asarray(signs) * (1.0 if math.isinf(p) else s ** (-1.0 / p))
                pts.append(v)
    return np.asarray(pts)


def _subsets(m: int, s: int):
    from itertools import combinations

    return combinations(range(m), s)


def _qdist(a: np.ndarray, b: np.ndarray, q: float) -> np.ndarray:
    """Pairwise l_q distances, shape ``(len(a), len(b))``."""
    diff = np.abs(a[:, None, :] - b[None, :, :])
    if math.isinf(q):
        return diff.max(axis=2)
    return np.sum(diff ** q, axis=2) ** (1.0 / q)


# ---------------------------------------------------------------------------
# counting lattice images
# ---------------------------------------------------------------------------

_GRID = 2048


def _coordinate_histogram(budget: float, p: float, offset: float, unit: float, round_up: bool):
    """Histogram over whole cost units of ``c_a = (a - offset)^p``.

    ``a`` runs over ``1, 2, ...`` when ``offset = 1/2`` (nonzero coordinates
    of the integer lattice) and over ``0, 1, ...`` when ``offset = 0``.  With
    ``round_up=False`` each cost is rounded down, so folding the histogram
    over-counts the vectors with total cost at most ``budget``; with
    ``round_up=True`` costs are rounded up and the fold under-counts.
    """
    nb = int(math.floor(budget / unit + 1e-9)) + 1
    amin = 1 if offset > 0 else 0
    if round_up:
        # a with ceil(c_a / unit) <= b  <=>  (a - offset)^p <= b * unit
        # the 1e-11 relative slack keeps lattice points lying exactly on the sphere
        lim = (unit * np.arange(nb, dtype=float) * (1 + 1e-11)) ** (1.0 / p)
        cum = np.floor(lim + offset) - amin + 1
    else:
        # a with floor(c_a / unit) <= b and c_a <= budget, allowing equality at the edges
        lim = np.minimum(unit * np.arange(1, nb + 1, dtype=float), budget) ** (1.0 / p)
        cum = np.floor(lim + offset + 1e-9) - amin + 1
    cum = np.maximum(cum, 0.0)
    return np.maximum(np.diff(cum, prepend=0.0), 0.0)


def _fold_counts(hist: np.ndarray, jmax: int, cap: float = 2.0 ** 80) -> list[float]:
    """``S_j = #{(a_1..a_j): sum cost <= budget}`` for ``j = 0..jmax``."""
    out = [1.0]
    cur = np.zeros_like(hist)
    cur[0] = 1.0
    for _ in range(jmax):
        cur = fftconvolve(cur, hist)[: len(hist)]
        cur = np.clip(np.rint(np.maximum(cur, 0.0)), 0.0, cap)
        out.append(float(min(cur.sum(), cap)))
    return out


def _net_count(m: int, s: int, p: float, h: float, lattice: str) -> float:
    """Upper bound on the number of distinct rounded images (``<= s`` kept coordinates)."""
    if math.isinf(p):
        if lattice == "integer":
            A = math.floor(1.0 / h + 0.5)
            return float(sum(comb(m, j, exact=True) * (2 * A) ** j for j in range(s + 1)))
        A = math.floor(1.0 / h)
        return float(comb(m, s, exact=True) * (2 * (A + 1)) ** s)
    budget = h ** (-p)
    unit = budget / _GRID
    if lattice == "integer":
        hist = _coordinate_histogram(budget, p, 0.5, unit, round_up=False)
        S = _fold_counts(hist, s)
        return float(sum(comb(m, j, exact=True) * 2.0 ** j * S[j] for j in range(s + 1)))
    hist = _coordinate_histogram(budget, p, 0.0, unit, round_up=False)
    S = _fold_counts(hist, s)
    return float(comb(m, s, exact=True) * 2.0 ** s * S[s])


def _lattice_points_in_ball(m: int, p: float, h: float) -> float:
    """Lower bound on ``#(h Z^m cap B l_p^m)``."""
    if math.isinf(p):
        return float((2 * math.floor(1.0 / h + 1e-12) + 1) ** m)
    budget = h ** (-p)
    unit = budget / _GRID
    hist = _coordinate_histogram(budget, p, 0.0, unit, round_up=True)
    # index a >= 0 with sign: a = 0 counted once, a >= 1 twice
    hist2 = 2.0 * hist
    hist2[0] -= 1.0
    return _fold_counts(hist2, m)[m]


def _radius(m: int, s: int, p: float, q: float, h: float) -> float:
    t = _tail_bound(m, s, p, q)
    if s == 0:
        return t
    if math.isinf(q):
        return max(t, h / 2.0)
    return (t ** q + s * (h / 2.0) ** q) ** (1.0 / q)


def _best_h(m: int, s: int, p: float, q: float, k: int, lattice: str):
    """Smallest step ``h`` (bisection in log scale) with at most ``2^k`` images."""
    target = 2.0 ** k
    lo, hi = 1e-6, 4.0

    def fits(h):  # margin guards the floating-point convolution counts
        return _net_count(m, s, p, h, lattice) * (1 + 1e-9) + 1 <= target

    if not fits(hi):
        return None
    if fits(lo):
        return lo
    while hi / lo > 1 + 1e-7:
        mid = math.sqrt(lo * hi)
        if fits(mid):
            hi = mid
        else:
            lo = mid
    return hi


def _enumerate_net(m: int, s: int, p: float, h: float, lattice: str, limit: int = 4096):
    """Explicit centers of the rounding net (``None`` when there are more than ``limit``)."""
    from itertools import combinations

    if _net_count(m, s, p, h, lattice) > limit:
        return None
    pinf = math.isinf(p)

    def cost(a):
        return 0.0 if a == 0 and lattice == "integer" else (
            (abs(a) - 0.5) * h if lattice == "integer" else abs(a) * h)

    if lattice == "integer":
        amax = int(math.floor(1.0 / h + 0.5)) + 1
        vals = [a for a in range(-amax, amax + 1) if cost(a) <= 1 + 1e-12]
    else:
        amax = int(math.floor(1.0 / h)) + 1
        vals = [a for a in range(0, amax + 1) if cost(a) <= 1 + 1e-12]
    centers = set()
    sizes = range(s + 1) if lattice == "integer" else [s]
    for j in sizes:
        for supp in combinations(range(m), j):
            for combo in product(vals, repeat=j):
                cs = [cost(a) for a in combo]
                tot = max(cs, default=0.0) if pinf else sum(c ** p for c in cs)
                if tot > 1 + 1e-12:
                    continue
                if lattice == "integer":
                    y = np.zeros(m)
                    y[list(supp)] = h * np.asarray(combo, dtype=float)
                    centers.add(tuple(y))
                else:
                    for signs in product((-1.0, 1.0), repeat=j):
                        y = np.zeros(m)
                        y[list(supp)] = np.asarray(signs) * h * (np.asarray(combo) + 0.5)
                        centers.add(tuple(y))
    return np.asarray(sorted(centers)) if centers else np.zeros((1, m))


def entropy_upper(spec: BallSpec, k: int, with_centers: bool = True):
    """Certified covering radius with at most ``2^k`` centers.

    Returns ``(bound, certificate)``.  The certificate names the construction
    (``s`` kept coordinates, lattice type and step ``h``), the counted number
    of centers, and the explicit centers when there are at most 4096.
    """
    if k < 0:
        raise DomainError("k must be non-negative")
    m, p, q = spec.m, spec.p, spec.q
    best = (trivial_radius(m, p, q), {"construction": "trivial", "centers_count": 1})
    for lattice in ("integer", "half"):
        for s in range(1, m + 1):
            h = _best_h(m, s, p, q, k, lattice)
            if h is None:
                continue
            r = _radius(m, s, p, q, h)
            if r < best[0]:
                best = (r, {"construction": "rounding", "lattice": lattice, "s": s, "h": h,
                            "centers_count": _net_count(m, s, p, h, lattice),
                            "tail_bound": _tail_bound(m, s, p, q)})
    bound, cert = best
    if with_centers and cert["construction"] == "rounding":
        centers = _enumerate_net(m, cert["s"], p, cert["h"], cert["lattice"])
        if centers is not None:
            cert["centers"] = centers.tolist()
            cert["centers_count"] = len(centers)
    elif with_centers:
        cert["centers"] = [[0.0] * m]
    return float(bound), cert


def _greedy_packing(m: int, p: float, q: float, npts: int, restarts: int, seed: int) -> float:
    """Largest min-distance found for ``npts`` points of the ball by farthest-point selection."""
    rng = np.random.default_rng(seed)
    ext = _extreme_points(m, p)
    best = 0.0
    for _ in range(restarts):
        pool = np.vstack([ext, sample_ball(m, p, max(1500, 8 * npts), rng)])
        start = int(rng.integers(len(pool)))
        chosen = [start]
        dmin = _qdist(pool, pool[[start]], q)[:, 0]
        for _ in range(npts - 1):
            nxt = int(np.argmax(dmin))
            chosen.append(nxt)
            dmin = np.minimum(dmin, _qdist(pool, pool[[nxt]], q)[:, 0])
        sel = pool[chosen]
        dd = _qdist(sel, sel, q)
        np.fill_diagonal(dd, np.inf)
        best = max(best, float(dd.min()))
    return best


def entropy_lower(spec: BallSpec, k: int, seed: int = 0, restarts: int = 64):
    """Certified lower bound on ``e_k``; returns ``(bound, certificate)``.

    Candidates: the volume ratio ``2^{-k/m} (vol B_p / vol B_q)^{1/m}``; a
    packing of sparse sign vectors (``C(m, s) 2^s > 2^k`` points at mutual
    distance ``2^{1/q} s^{-1/p}``); the lattice ``h Z^m`` inside the ball
    (mutual distance ``h``); and, for ``k <= 8``, a greedy farthest-point
    packing with ``restarts`` random pools.  Any ``N > 2^k`` points at mutual
    distance ``D`` certify ``e_k >= D/2``.
    """
    if k < 0:
        raise DomainError("k must be non-negative")
    m, p, q = spec.m, spec.p, spec.q
    cands = {}
    cands["volume"] = 2.0 ** (-k / m) * math.exp((_log_ball_volume(m, p) - _log_ball_volume(m, q)) / m)
    sparse = 0.0
    for s in range(1, m + 1):
        if comb(m, s, exact=True) * 2 ** s > 2 ** k:
            sparse = max(sparse, 2.0 ** _inv(q) * (s ** (-_inv(p)) if not math.isinf(p) else 1.0) / 2.0)
    cands["packing-sparse"] = sparse
    # lattice packing: largest h with more than 2^k lattice points in the ball
    lo, hi = 1e-9, 2.0

    def enough(h):
        return _lattice_points_in_ball(m, p, h) * (1 - 1e-9) - 1 > 2 ** k

    if enough(lo):
        while hi / lo > 1 + 1e-7:
            mid = math.sqrt(lo * hi)
            if enough(mid):
                lo = mid
            else:
                hi = mid
        cands["packing-lattice"] = lo / 2.0
    if k <= 8:
        cands["packing-greedy"] = _greedy_packing(m, p, q, 2 ** k + 1, restarts, seed) / 2.0
    method = max(cands, key=cands.get)
    return float(cands[method]), {"method": method, "candidates": cands}


def entropy_bracket(spec: BallSpec, k: int, seed: int = 0, with_centers: bool = False,
                    restarts: int = 64) -> EntropyBracket:
    lo, lcert = entropy_lower(spec, k, seed, restarts)
    up, ucert = entropy_upper(spec, k, with_centers)
    lmethod = "volume" if lcert["method"] == "volume" else "packing"
    umethod = "net" if ucert["construction"] == "trivial" else (
        "lattice" if ucert.get("s") == spec.m else "schuett_construction")
    return EntropyBracket(k, lo, up, lmethod, umethod, {"lower": lcert, "upper": ucert})


def verify_cover(spec: BallSpec, centers, radius: float, samples: int = 20000, seed: int = 0) -> float:
    """Largest distance from sampled ball points (and extreme points) to the nearest center.

    A value ``<= radius`` is consistent with the certificate.
    """
    rng = np.random.default_rng(seed)
    pts = np.vstack([_extreme_points(spec.m, spec.p), sample_ball(spec.m, spec.p, samples, rng)])
    centers = np.asarray(centers, dtype=float)
    worst = 0.0
    for i in range(0, len(pts), 2000):
        worst = max(worst, float(_qdist(pts[i:i + 2000], centers, spec.q).min(axis=1).max()))
    return worst


# ---------------------------------------------------------------------------
# brute-force oracle for tiny instances
# ---------------------------------------------------------------------------


@dataclass
class OracleResult:
    lower: float
    upper: float
    greedy_radius: float
    grid_radius: float


def brute_force_oracle(spec: BallSpec, k: int, resolution: float = 0.05) -> OracleResult:
    """Bracket for ``e_k`` from a grid discretization (``m <= 3``, ``k <= 6``).

    Gonzalez farthest-point selection picks ``2^k`` grid centers with covering
    radius ``R`` over the grid; the ``2^k + 1`` traversal points are mutually at
    least ``R`` apart, so ``R/2 <= e_k``.  Every ball point lies within the
    grid's fill distance ``rho`` of a grid point, so ``e_k <= R + rho``.
    """
    m, p, q = spec.m, spec.p, spec.q
    if m > 3 or k > 6:
        raise DomainError("the brute-force oracle is limited to m <= 3, k <= 6")
    steps = int(round(1.0 / resolution))
    resolution = 1.0 / steps
    ticks = resolution * np.arange(-steps, steps + 1)
    grid = np.array(list(product(ticks, repeat=m)))
    norms = np.abs(grid).max(axis=1) if math.isinf(p) else np.sum(np.abs(grid) ** p, axis=1) ** (1 / p)
    pts = grid[norms <= 1 + 1e-12]
    # rounding each coordinate toward zero stays in the ball and moves by < resolution
    rho = resolution if math.isinf(q) else resolution * m ** (1.0 / q)
    start = int(np.argmax(np.sum(np.abs(pts), axis=1)))
    dmin = _qdist(pts, pts[[start]], q)[:, 0]
    for _ in range(2 ** k - 1):
        nxt = int(np.argmax(dmin))
        dmin = np.minimum(dmin, _qdist(pts, pts[[nxt]], q)[:, 0])
    R = float(dmin.max())
    return OracleResult(R / 2.0, R + rho, R, rho)

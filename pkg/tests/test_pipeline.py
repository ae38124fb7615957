import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dunklsphere.corpus import random_band_limited
from dunklsphere.harmonics import dunkl_laplacian_numeric, project, weighted_rule
from dunklsphere.pipeline import (
    ConfigError,
    PipelineConfig,
    _bump_integrals,
    _term,
    allocate,
    block_sizes,
    bracket_floor,
    build_bump_system,
    calibrate_c_alloc,
    kolmogorov_ratio,
    lower_bound_value,
    rate_regression,
    upper_bound_value,
    verify_bump_norms,
)
from dunklsphere.sphere import DomainError, reference_integrate
from dunklsphere.weight import DunklWeight

W0 = DunklWeight.unweighted(2)
W5 = DunklWeight.z2d((0.5, 0.5))
W1 = DunklWeight.z2d((1.0, 1.0))
GRID = [2 ** j for j in range(4, 13)]


def test_bracket_floor_is_strict():
    assert bracket_floor(3.0) == 2
    assert bracket_floor(3.2) == 3
    assert bracket_floor(0.5) == 0
    assert bracket_floor(-4.0) == 0


def test_config_hypotheses():
    with pytest.raises(ConfigError):
        PipelineConfig(1.4, 1, 2, W5)  # r <= (d-1)(1/p-1/q)(2 gamma + 1) = 1.5
    with pytest.raises(ConfigError):
        PipelineConfig(1.6, 1, 2, W5, rho=1.0)  # violates the slack condition
    with pytest.raises(ConfigError):
        PipelineConfig(2.0, 2, 2, W5, beta=0.5)  # beta must be < 1/(2 gamma)
    cfg = PipelineConfig(2.0, 2, 2, W5)
    assert cfg.beta == pytest.approx(0.95 / 2)
    assert PipelineConfig(2.0, 2, 2, W0).beta == pytest.approx(0.95)


@pytest.mark.parametrize("d", [2, 3])
@pytest.mark.parametrize("s", range(0, 7))
def test_block_sizes_partition(d, s):
    card = 2 * 2 ** (s * (d - 1))
    sizes = block_sizes(s, d, card)
    assert sum(sizes) == card
    assert len(sizes) == (1 if s == 0 else s + 1)
    if s >= 1:
        assert sizes[0] == 2
        assert sizes[-1] == card - 2 ** (s * (d - 1)) if s >= 2 else True
        for k, m in enumerate(sizes[1:-1], start=2):
            assert 1 <= m / 2 ** ((k - 1) * (d - 1)) <= 2 ** (d - 1)


@given(st.integers(2, 2 ** 14), st.sampled_from([2, 3]), st.sampled_from([0.1, 0.25, 0.5]))
def test_allocation_budgets_feasible(n, d, rho):
    cfg = PipelineConfig(3.0, 2, 2, DunklWeight.unweighted(d), rho=rho)
    sched = allocate(n, cfg)
    assert sum(sched.n_s) <= n
    assert sum(sum(row) for row in sched.n_sk) <= n
    for ns, row in zip(sched.n_s, sched.n_sk):
        assert sum(row) <= ns


def test_allocation_on_grid_and_minimal_n():
    cfg = PipelineConfig(2.0, 2, 2, W5)
    for n in GRID:
        allocate(n, cfg).verify()
    small = allocate(2, cfg)
    assert small.degenerate and small.J == 0


def test_allocation_J_and_monotone_tail():
    cfg = PipelineConfig(2.0, 2, 2, W0, rho=0.1)
    C = calibrate_c_alloc(cfg)
    sched = allocate(256, cfg)
    assert sched.J == math.floor(math.log2(256 / C))
    beyond = sched.n_s[sched.J:]
    assert all(a >= b for a, b in zip(beyond, beyond[1:]))
    assert set(sched.J1) == set(range(sched.J + 1, len(sched.n_s)))


def test_upper_bound_non_increasing_and_last_octave():
    for r in (2.0, 3.0):
        cfg = PipelineConfig(r, 2, 2, W5)
        vals = [upper_bound_value(n, cfg) for n in GRID]
        assert all(b <= a * (1 + 1e-12) for a, b in zip(vals, vals[1:]))
        ratio = vals[-1] / vals[-2]
        assert 0.5 * 2 ** -r <= ratio <= 2 * 2 ** -r


def test_upper_bound_large_r_dominated_by_level_zero():
    cfg = PipelineConfig(40.0, 2, 2, W5)
    val, parts = upper_bound_value(4096, cfg, return_parts=True)
    level0 = _term(cfg, 0, parts["schedule"].n_sk[0])
    assert val == pytest.approx(level0, rel=1e-6)


def test_upper_bound_q_less_than_p_uses_embedding():
    a = upper_bound_value(256, PipelineConfig(2.0, 4, 2, W5))
    b = upper_bound_value(256, PipelineConfig(2.0, 2, 2, W5))
    assert a == b


def test_rate_regression():
    n = np.array(GRID, dtype=float)
    rep = rate_regression(n, 3.0 * n ** -2.0, -2.0)
    assert rep.slope == pytest.approx(-2.0, abs=1e-10)
    assert rate_regression(n, np.ones_like(n), 0.0).slope == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(DomainError):
        rate_regression(n[:3], n[:3], -1)
    with pytest.raises(DomainError):
        rate_regression(n, -n, -1)


@pytest.mark.parametrize("w", [W1, W5, W0])
def test_bump_geometry(w):
    sys = build_bump_system(8, w)
    sys.verify()
    assert sys.strip_measure() <= 0.5
    if w.is_trivial:
        assert sys.strip_measure() == 0 and len(sys.strip_roots()) == 0
    # N is of order l^{d-1}
    assert 4 <= sys.N <= 8 * math.pi


def test_bump_strip_measure_three_dimensions():
    w = DunklWeight.z2d((0.5, 0.5, 0.5))
    sys = build_bump_system(4, w)
    sys.verify()
    assert sys.strip_measure() == pytest.approx(3 * math.sin(2 * math.pi / 192))
    assert sys.strip_measure() <= 0.5


def test_bump_strips_too_wide():
    with pytest.raises(DomainError):
        build_bump_system(8, W1, eps_strip=0.5)


def test_single_bump_norms():
    sys = build_bump_system(8, W1)
    assert verify_bump_norms(sys, math.inf, trials=5, leak_bumps=0).ratio_low == 1.0
    # p = 1 on a standard basis vector: the integral of one bump, by an independent rule
    I = _bump_integrals(sys, 1.0)
    ref = reference_integrate(sys.bump(0), W1, 2, level=6) / W1.norm_const
    assert I[0] == pytest.approx(ref, rel=1e-6)
    assert 0.05 < I[0] * sys.l < 5  # of order l^{-(d-1)}


def test_bump_dunkl_laplacian_vanishes_off_orbit():
    """Finite differences: Delta_h phi_i is exactly zero away from the orbit caps."""
    sys = build_bump_system(8, W1)
    G = sys.orbit_group()
    c = sys.centers[0]
    orbit = np.array([g @ c for g in G])
    th = np.linspace(0, 2 * np.pi, 721)
    x = np.stack([np.cos(th), np.sin(th)], axis=1)
    far = (x @ orbit.T < math.cos(1 / sys.l + 0.02)).all(axis=1) & (np.abs(x).min(axis=1) > 0.05)
    lap = dunkl_laplacian_numeric(sys.bump(0), W1, x[far])
    assert np.all(lap == 0.0)
    near = (x @ c > math.cos(0.7 / sys.l))
    assert np.abs(dunkl_laplacian_numeric(sys.bump(0), W1, x[near])).max() > 1.0


def test_orbit_overlap_bounded_by_group_order():
    rep = verify_bump_norms(build_bump_system(8, W5), 2.0, trials=5, leak_bumps=0)
    assert rep.max_overlap <= rep.group_order


def test_lower_bound_value():
    cfg = PipelineConfig(2.0, 2, 2, W5)
    v = lower_bound_value(2, cfg)
    assert math.isfinite(v) and v > 0
    with pytest.raises(DomainError):
        lower_bound_value(13, cfg)


def test_kolmogorov_ratio():
    f = random_band_limited(2, 0, 8, seed=3)
    assert kolmogorov_ratio(f, W5, 1.0, 1.0, 2.0, 8) <= 1 + 1e-12
    blk = project(f, W5, 5)
    assert kolmogorov_ratio(blk, W5, 1.0, 1.0, 2.0, 5) == pytest.approx(1.0, rel=1e-10)
    assert math.isfinite(kolmogorov_ratio(f, W5, 1.0, 1.0, math.inf, 8))
    with pytest.raises(DomainError):
        kolmogorov_ratio(f, W5, 3.0, 1.0, 2.0, 8)

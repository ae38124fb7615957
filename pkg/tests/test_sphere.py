import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dunklsphere.sphere import (
    Cap,
    DomainError,
    angles_to_points,
    as_unit,
    build_maximal_separated_set,
    cap_rule,
    covering_radius,
    geodesic_distance,
    min_separation,
    normalized_cap_area,
    reference_integrate,
    reference_integrate_report,
    sphere_rule,
)


def unit_vectors(d):
    return st.lists(st.floats(-1, 1), min_size=d, max_size=d).filter(
        lambda v: np.linalg.norm(v) > 0.1).map(lambda v: np.asarray(v) / np.linalg.norm(v))


def test_as_unit_rejects_non_unit():
    with pytest.raises(DomainError):
        as_unit([1.0, 1.0])


@given(unit_vectors(3), unit_vectors(3), unit_vectors(3))
def test_geodesic_triangle_inequality(x, y, z):
    assert geodesic_distance(x, z) <= geodesic_distance(x, y) + geodesic_distance(y, z) + 1e-12


@given(unit_vectors(3), unit_vectors(3))
def test_geodesic_symmetric_and_bounded(x, y):
    dxy = geodesic_distance(x, y)
    assert dxy == pytest.approx(geodesic_distance(y, x), abs=1e-14)
    assert 0 <= dxy <= math.pi


def test_cap_area_values():
    assert normalized_cap_area(2, math.pi / 2) == pytest.approx(0.5)
    assert normalized_cap_area(3, math.pi / 2) == pytest.approx(0.5)
    assert normalized_cap_area(3, math.pi) == pytest.approx(1.0)


@pytest.mark.parametrize("d,eps", [(2, 0.3), (2, 0.05), (3, 0.4), (3, 0.15)])
def test_separated_set_is_valid_and_maximal(d, eps):
    S = build_maximal_separated_set(d, eps, seed=1)
    S.verify()
    assert min_separation(S.points) >= eps - 1e-12
    assert covering_radius(S.points) < eps


def test_separated_set_is_deterministic():
    a = build_maximal_separated_set(3, 0.3, seed=7)
    b = build_maximal_separated_set(3, 0.3, seed=7)
    assert np.array_equal(a.points, b.points)


def _brute_force_maximal_sizes(eps, grid=360):
    """Sizes of maximal eps-separated subsets of a circle grid (sizes above 3 are
    excluded by packing: four points need 4 * eps <= 2 pi)."""
    th = 2 * np.pi * np.arange(grid) / grid
    sizes = set()
    for k in (1, 2, 3):
        for sub in itertools.combinations(range(0, grid, 6), k):
            pts = angles_to_points(th[list(sub)])
            if k > 1 and min_separation(pts) < eps:
                continue
            if covering_radius(pts) < eps:
                sizes.add(k)
    return sizes


def test_circle_06pi_cardinality_two_or_three():
    eps = 0.6 * math.pi
    S = build_maximal_separated_set(2, eps, seed=0)
    S.verify()
    assert len(S) in (2, 3)
    assert _brute_force_maximal_sizes(eps) == {2, 3}


@pytest.mark.parametrize("eps", [0.0, -1.0, 4.0])
def test_separated_set_rejects_bad_eps(eps):
    with pytest.raises(DomainError):
        build_maximal_separated_set(2, eps)


def test_sphere_rule_integrates_monomials():
    # mean of x^2 over S^1 and S^2, mean of x^2 y^2 z^2 over S^2
    assert reference_integrate(lambda p: p[:, 0] ** 2, d=2) == pytest.approx(0.5, abs=1e-14)
    assert reference_integrate(lambda p: p[:, 0] ** 2, d=3) == pytest.approx(1 / 3, abs=1e-14)
    assert reference_integrate(lambda p: (p[:, 0] * p[:, 1] * p[:, 2]) ** 2, d=3) == pytest.approx(1 / 105, abs=1e-14)


def test_singular_weight_integration_matches_closed_form():
    # mean of |x|^{2k} over S^1 equals Gamma(k+1/2)/(sqrt(pi) Gamma(k+1))
    k = 0.3
    rep = reference_integrate_report(lambda p: np.ones(len(p)), lambda p: np.abs(p[:, 0]) ** (2 * k),
                                     d=2, singular=[(np.array([1.0, 0.0]), 2 * k)])
    exact = math.gamma(k + 0.5) / (math.sqrt(math.pi) * math.gamma(k + 1))
    assert rep.value == pytest.approx(exact, rel=1e-12)
    assert rep.discrepancy < 1e-12


@pytest.mark.parametrize("d", [2, 3])
def test_cap_rule_measures_cap(d):
    rule = cap_rule(Cap(as_unit(np.ones(d) / np.sqrt(d)), 0.4), level=2)
    assert rule.weights.sum() == pytest.approx(normalized_cap_area(d, 0.4), rel=1e-12)


def test_sphere_rule_weights_sum_to_one():
    for d in (2, 3):
        assert sphere_rule(d, 1).weights.sum() == pytest.approx(1.0, abs=1e-13)

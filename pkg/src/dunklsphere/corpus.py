"""Named test functions on the sphere, built from small config dictionaries.

Each entry is ``{"name": ..., **params}``.  Recognized names::

    constant              value
    coordinate-monomial   alpha (list of d exponents)
    cap-indicator         center, radius
    bump                  center, scale
    band-limited-random   degree, seed
    band-shell            low, high, seed      (spectrum confined to low..high)
"""

from __future__ import annotations

import numpy as np

from .harmonics import eta, spanning_set
from .sphere import DomainError, as_points, as_unit

__all__ = ["bump_profile", "make_function", "random_band_limited", "CORPUS_NAMES"]

CORPUS_NAMES = ("constant", "coordinate-monomial", "cap-indicator", "bump",
                "band-limited-random", "band-shell")


def bump_profile(t):
    """C-infinity profile equal to 1 on ``[0, 1/2]`` and vanishing on ``[1, inf)``."""
    return eta(2.0 * np.asarray(t, dtype=float))


def random_band_limited(d: int, low: int, high: int, seed: int):
    """Standard-normal coefficients on the unweighted spanning set, degrees ``low..high``."""
    if not 0 <= low <= high:
        raise DomainError("need 0 <= low <= high")
    _, degs = spanning_set(d, high, np.eye(d)[:1])
    coef = np.random.default_rng(seed).standard_normal(len(degs))
    coef[degs < low] = 0.0

    def f(pts):
        B, _ = spanning_set(d, high, as_points(pts, tol=1e-8))
        return B @ coef

    f.degree = high
    return f


def make_function(spec: dict, d: int):
    """Callable ``f(points) -> values`` described by ``spec``."""
    name = spec.get("name")
    if name == "constant":
        value = float(spec.get("value", 1.0))
        f = lambda pts: np.full(len(np.atleast_2d(pts)), value)  # noqa: E731
        f.degree = 0
        return f
    if name == "coordinate-monomial":
        alpha = np.asarray(spec["alpha"], dtype=int)
        if alpha.shape != (d,) or np.any(alpha < 0):
            raise DomainError("alpha must hold d non-negative integers")
        f = lambda pts: np.prod(np.atleast_2d(pts) ** alpha, axis=1)  # noqa: E731
        f.degree = int(alpha.sum())
        return f
    if name == "cap-indicator":
        c = as_unit(spec["center"])
        cr = np.cos(float(spec["radius"]))
        return lambda pts: (np.atleast_2d(pts) @ c >= cr).astype(float)
    if name == "bump":
        c = as_unit(spec["center"])
        scale = float(spec["scale"])
        return lambda pts: bump_profile(np.arccos(np.clip(np.atleast_2d(pts) @ c, -1, 1)) / scale)
    if name == "band-limited-random":
        return random_band_limited(d, 0, int(spec["degree"]), int(spec.get("seed", 0)))
    if name == "band-shell":
        return random_band_limited(d, int(spec["low"]), int(spec["high"]), int(spec.get("seed", 0)))
    raise DomainError(f"unknown corpus function {name!r}")

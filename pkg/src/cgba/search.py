"""Boundary-location primitives.

All searches share the same contract: they return a ``BoundaryPoint`` whose
point is adversarial (phi = +1) and which brackets a non-adversarial point
within the search tolerance along the search path. Oracle queries are never
spent re-checking labels the caller already knows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfig, InvalidInput, NoAdversarialFound
from .geometry import as_vector, chord_point, unit

DEFAULT_TOLERANCE = 1e-4


@dataclass(frozen=True)
class BoundaryPoint:
    """An adversarial point hugging the decision boundary.

    ``witness`` is the non-adversarial point on the other side of the
    bracket (within the search tolerance along the path), kept so tests can
    re-verify the sign change without spending counted queries.
    """

    point: np.ndarray
    distance: float
    witness: np.ndarray | None = None


def _check_tolerance(eps: float) -> float:
    if eps <= 0:
        raise InvalidConfig("search tolerance must be positive")
    return float(eps)


def binary_search_ray(x_s, x_adv, phi, eps: float = DEFAULT_TOLERANCE) -> BoundaryPoint:
    """Bisect the segment [x_s, x_adv] down to ``eps``.

    Requires phi(x_adv) = +1, which is the caller's knowledge and is not
    re-queried; x_s is assumed non-adversarial and is likewise never queried.
    """
    eps = _check_tolerance(eps)
    x_s = as_vector(x_s)
    x_adv = as_vector(x_adv)
    delta = x_adv - x_s
    length = float(np.linalg.norm(delta))
    if length == 0.0:
        raise InvalidInput("x_adv coincides with x_s")
    if length <= eps:
        return BoundaryPoint(x_adv, length, witness=x_s)
    lo, hi = 0.0, 1.0
    while (hi - lo) * length > eps:
        mid = 0.5 * (lo + hi)
        if phi(x_s + mid * delta) == 1:
            hi = mid
        else:
            lo = mid
    point = x_s + hi * delta
    return BoundaryPoint(point, float(np.linalg.norm(point - x_s)),
                         witness=x_s + lo * delta)


def _bisect_radius(x_s, theta, lo, hi, phi, eps) -> BoundaryPoint:
    """Bisect radii along ``theta``: lo non-adversarial, hi adversarial."""
    while hi - lo > eps:
        mid = 0.5 * (lo + hi)
        if phi(x_s + mid * theta) == 1:
            hi = mid
        else:
            lo = mid
    point = x_s + hi * theta
    return BoundaryPoint(point, float(np.linalg.norm(point - x_s)),
                         witness=x_s + lo * theta)


def initial_radius_search(x_s, theta, phi, eps: float = DEFAULT_TOLERANCE,
                          r0: float = 0.1,
                          r_max: float | None = None) -> BoundaryPoint:
    """Smallest adversarial radius along a direction from the source.

    Doubles the radius from ``r0`` until the query turns adversarial, then
    bisects the bracketing interval. ``r_max`` defaults to four times the
    diagonal of the unit cube in the ambient dimension.
    """
    eps = _check_tolerance(eps)
    x_s = as_vector(x_s)
    theta = unit(theta)
    if r_max is None:
        r_max = 4.0 * math.sqrt(x_s.shape[0])
    lo = 0.0
    r = float(r0)
    while r <= r_max:
        if phi(x_s + r * theta) == 1:
            return _bisect_radius(x_s, theta, lo, r, phi, eps)
        lo = r
        r *= 2.0
    raise NoAdversarialFound(
        f"no adversarial point within {r_max:g} along the direction")


def bssp(x_s, x_c, x_bt, phi, eps: float = DEFAULT_TOLERANCE) -> BoundaryPoint:
    """Boundary search along the semicircular path.

    ``x_bt`` is adversarial and ``x_c`` non-adversarial, both on the circle
    whose diameter is the chord [x_s, x_bt]. The resultant of the two ends'
    unit directions is queried on that circle and replaces the end with the
    matching label, until the two ends are within ``eps`` of each other. The
    result's distance never exceeds the chord length.
    """
    eps = _check_tolerance(eps)
    x_s = as_vector(x_s)
    x_c = as_vector(x_c)
    x_bt = as_vector(x_bt)
    chord = x_bt - x_s
    radius = float(np.linalg.norm(chord))
    if radius == 0.0 or np.array_equal(x_c, x_s):
        raise InvalidInput("endpoints must differ from the source")
    if np.array_equal(x_c, x_bt):
        raise InvalidInput("adversarial and benign ends coincide")
    v_hat = chord / radius
    zeta_adv = v_hat
    zeta_c = unit(x_c - x_s)
    while True:
        point_adv = chord_point(x_s, v_hat, radius, zeta_adv)
        point_c = chord_point(x_s, v_hat, radius, zeta_c)
        if float(np.linalg.norm(point_adv - point_c)) <= eps:
            return BoundaryPoint(point_adv,
                                 float(np.linalg.norm(point_adv - x_s)),
                                 witness=point_c)
        zeta_r = unit(zeta_adv + zeta_c)
        if phi(chord_point(x_s, v_hat, radius, zeta_r)) == 1:
            zeta_adv = zeta_r
        else:
            zeta_c = zeta_r
        if np.array_equal(zeta_adv, zeta_c):
            # Float resolution exhausted before the eps test fired.
            return BoundaryPoint(point_adv,
                                 float(np.linalg.norm(point_adv - x_s)),
                                 witness=point_c)


def bsnv(x_s, x_bt, eta_hat, phi, eps: float = DEFAULT_TOLERANCE,
         r_max: float | None = None) -> BoundaryPoint | None:
    """Binary search along the estimated normal direction from the source.

    Probes the current perturbation norm first (the natural scale: a flat
    boundary puts the new point at or inside that radius), then doubles up
    to ``r_max``. Returns ``None`` when the ray misses the adversarial
    region entirely, which is the high-curvature divergence mode of this
    search; a miss is an answer, not an error.
    """
    eps = _check_tolerance(eps)
    x_s = as_vector(x_s)
    x_bt = as_vector(x_bt)
    eta = unit(eta_hat)
    r_t = float(np.linalg.norm(x_bt - x_s))
    if r_t == 0.0:
        raise InvalidInput("x_bt coincides with x_s")
    if r_max is None:
        r_max = 4.0 * r_t
    lo = 0.0
    r = r_t
    while True:
        if phi(x_s + r * eta) == 1:
            return _bisect_radius(x_s, eta, lo, r, phi, eps)
        lo = r
        if r >= r_max:
            return None
        r = min(2.0 * r, r_max)


def initialize_targeted(x_s, targets, phi,
                        eps: float = DEFAULT_TOLERANCE) -> BoundaryPoint:
    """Best initial boundary point over K directions toward the target class.

    Binary search along the first direction sets the incumbent distance; each
    later direction is probed once at that distance and only refined with a
    full binary search when the probe is already adversarial.
    """
    eps = _check_tolerance(eps)
    targets = [as_vector(t) for t in targets]
    if not targets:
        raise InvalidInput("need at least one target sample")
    x_s = as_vector(x_s)
    best = binary_search_ray(x_s, targets[0], phi, eps)
    for target in targets[1:]:
        theta = unit(target - x_s)
        probe = x_s + best.distance * theta
        if phi(probe) == 1:
            candidate = binary_search_ray(x_s, probe, phi, eps)
            if candidate.distance < best.distance:
                best = candidate
    return best

"""Vector/angle arithmetic and the semicircular-path parametrization.

Points and directions are plain 1-D float64 ``numpy`` arrays. A *direction*
is unit-norm; a *point* lives in input space. The central object is the
semicircle spanned by the chord from a source point to the current boundary
point: every query point of the attacks lies on the circle whose diameter is
that chord, restricted to the 2-plane spanned by the chord direction and the
estimated boundary normal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput, OutOfHemisphere, ZeroVector

ZERO_NORM = 1e-30
PARALLEL_TOL = 1e-12


def as_vector(v) -> np.ndarray:
    """Coerce to a contiguous 1-D float64 array, rejecting NaN/Inf."""
    arr = np.ascontiguousarray(v, dtype=np.float64).reshape(-1)
    if not np.all(np.isfinite(arr)):
        raise InvalidInput("vector has non-finite components")
    return arr


def unit(v) -> np.ndarray:
    """Normalize ``v`` to unit length.

    Raises ``ZeroVector`` when the norm is below 1e-30.
    """
    arr = as_vector(v)
    n = float(np.linalg.norm(arr))
    if n < ZERO_NORM:
        raise ZeroVector("cannot normalize a zero vector")
    return arr / n


def orthonormal_complement(v_hat: np.ndarray) -> np.ndarray:
    """Deterministic unit vector orthogonal to ``v_hat``.

    Gram-Schmidt against the lowest-index coordinate axis that is not
    parallel to ``v_hat``; used when an estimated normal degenerates onto
    the chord direction.
    """
    n = v_hat.shape[0]
    if n < 2:
        raise InvalidInput("need at least 2 dimensions for a complement")
    for k in range(n):
        axis = np.zeros(n)
        axis[k] = 1.0
        residual = axis - float(v_hat[k]) * v_hat
        norm = float(np.linalg.norm(residual))
        if norm > 1e-6:
            return residual / norm
    raise ZeroVector("no coordinate axis independent of v_hat")


@dataclass(frozen=True)
class SemicircleFrame:
    """Geometry of one boundary-search iteration.

    ``source`` is the attacked point, ``anchor`` the current boundary point,
    ``v_hat`` the chord direction, ``eta_hat`` the (estimated) boundary
    normal at the anchor, and ``theta_t = arccos(v_hat . eta_hat)``.
    """

    source: np.ndarray
    anchor: np.ndarray
    radius_chord: float
    v_hat: np.ndarray
    eta_hat: np.ndarray
    theta_t: float

    @classmethod
    def from_points(cls, source, anchor, eta_hat) -> "SemicircleFrame":
        source = as_vector(source)
        anchor = as_vector(anchor)
        chord = anchor - source
        radius = float(np.linalg.norm(chord))
        if radius < ZERO_NORM:
            raise InvalidInput("anchor coincides with source")
        v_hat = chord / radius
        eta = unit(eta_hat)
        cos_t = float(np.dot(v_hat, eta))
        if abs(cos_t) > 1.0 - PARALLEL_TOL:
            # Normal collapsed onto the chord: the 2-plane is undefined, so
            # fall back to a deterministic orthogonal completion.
            eta = orthonormal_complement(v_hat)
            cos_t = 0.0
        theta = math.acos(max(-1.0, min(1.0, cos_t)))
        return cls(source, anchor, radius, v_hat, eta, theta)

    def point_on_path(self, zeta: np.ndarray) -> np.ndarray:
        """Query point on the semicircular path in direction ``zeta``."""
        return chord_point(self.source, self.v_hat, self.radius_chord, zeta)


def chord_point(source: np.ndarray, v_hat: np.ndarray, radius_chord: float,
                zeta: np.ndarray) -> np.ndarray:
    """Point on the circle of diameter [source, source + radius_chord*v_hat].

    The perturbation added in direction ``zeta`` has length
    ``radius_chord * (zeta . v_hat)``, which places the result on the circle
    (Thales): its distance from the source never exceeds the chord length.
    """
    cos_psi = float(np.dot(zeta, v_hat))
    if cos_psi < 0.0:
        raise OutOfHemisphere("search direction exceeds 90 deg from the chord")
    return source + radius_chord * cos_psi * zeta


def search_direction(frame: SemicircleFrame, m: float) -> np.ndarray:
    """Unit direction (eta_hat + m * v_hat) / ||.|| inside the search plane."""
    raw = frame.eta_hat + m * frame.v_hat
    return unit(raw)


def semicircle_point(frame: SemicircleFrame, zeta) -> np.ndarray:
    """Query point on the semicircular path for search direction ``zeta``."""
    return frame.point_on_path(as_vector(zeta))


def multiplier_for_angle(theta_t: float, psi: float) -> float:
    """Multiplier m with arccos(v_hat . zeta(m)) == psi, given theta_t.

    Derived from the search-direction normalization: for
    zeta(m) = (eta + m v)/||eta + m v|| one has
    v . zeta(m) = cos(psi) exactly when m = sin(theta) cot(psi) - cos(theta).
    """
    if not 0.0 < theta_t < math.pi:
        raise InvalidInput("theta_t must lie in (0, pi)")
    if not 0.0 < psi < math.pi:
        raise InvalidInput("psi must lie in (0, pi)")
    return math.sin(theta_t) / math.tan(psi) - math.cos(theta_t)


def cgba_multiplier(theta_t: float, i: int) -> float:
    """Multiplier for the CGBA schedule psi_i = 90deg - 90deg / 2**i.

    The schedule starts at 45 deg and opens toward 90 deg as ``i`` grows, so
    successive query points slide along the semicircle toward the source.
    """
    if i < 1:
        raise InvalidInput("schedule index i must be >= 1")
    psi = 0.5 * math.pi * (1.0 - 0.5 ** i)
    return multiplier_for_angle(theta_t, psi)


def cgbah_multiplier(theta_t: float, i: int) -> float:
    """Multiplier for the CGBA-H schedule psi_i = theta_t / 2**i.

    The schedule halves the angle toward the chord direction, so successive
    query points approach the current boundary point.
    """
    if i < 1:
        raise InvalidInput("schedule index i must be >= 1")
    psi = theta_t / (2.0 ** i)
    return multiplier_for_angle(theta_t, psi)

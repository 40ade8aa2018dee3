"""Analytic boundary-search solutions on a 2-D parabolic boundary.

The model: a source at the origin of the (x, y) plane, the adversarial
region is y >= x**2/(4p) + h, and the current boundary point sits at polar
angle delta_t from the x-axis. Both search primitives then have closed
forms: the normal-direction search intersects a line through the origin
with the parabola, and the semicircular search intersects the circle whose
diameter is the source-to-boundary chord with the parabola (a quartic with
the current boundary point as a known root). These exact solutions
cross-check the query-based searches cell by cell.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (InvalidConfig, NoBoundaryInDirection, NumericalFailure)
from .geometry import unit
from .oracles import BoundPhi, Indicator, ParabolicOracle2D, QueryCounter
from .search import bsnv as bsnv_search
from . import engine

FOUND = "found"
DIVERGES = "diverges"
NOT_FOUND = "not_found"
NO_BOUNDARY = "no_boundary"

_EXIST_TOL = 1e-12


def rt_of_delta(p: float, h: float, delta_t: float) -> float:
    """Perturbation norm of the boundary point at polar angle ``delta_t``.

    Evaluated in the cancellation-free form 2h / (sin(d) * (1 + sqrt(1 -
    (h/p) cot^2 d))), which also gives the vertical-ray limit h at
    delta_t = 90 deg directly. Raises ``NoBoundaryInDirection`` when the ray
    misses the parabola (p < h cot^2 delta_t).
    """
    if p <= 0 or h <= 0:
        raise InvalidConfig("p and h must be positive")
    if not 0.0 < delta_t <= 0.5 * math.pi:
        raise InvalidConfig("delta_t must lie in (0, pi/2]")
    if delta_t == 0.5 * math.pi:
        return h
    cot = math.cos(delta_t) / math.sin(delta_t)
    ratio = (h / p) * cot * cot
    if ratio > 1.0 + _EXIST_TOL:
        raise NoBoundaryInDirection(
            f"no boundary point at delta={math.degrees(delta_t):g} deg for p={p:g}")
    ratio = min(ratio, 1.0)
    return 2.0 * h / (math.sin(delta_t) * (1.0 + math.sqrt(1.0 - ratio)))


@dataclass(frozen=True)
class ParabolicScenario:
    """Boundary geometry p, h plus the current boundary point at delta_t."""

    p: float
    h: float
    delta_t: float
    r_t: float = field(init=False)
    a_x: float = field(init=False)
    a_y: float = field(init=False)

    def __post_init__(self):
        r_t = rt_of_delta(self.p, self.h, self.delta_t)
        object.__setattr__(self, "r_t", r_t)
        object.__setattr__(self, "a_x", r_t * math.cos(self.delta_t))
        object.__setattr__(self, "a_y", r_t * math.sin(self.delta_t))
        residual = abs(self.a_y - (self.a_x ** 2 / (4 * self.p) + self.h))
        if residual > 1e-9 * max(1.0, self.h):
            raise NumericalFailure(
                f"boundary point off the parabola by {residual:g}")

    @property
    def is_tangent(self) -> bool:
        cot = math.cos(self.delta_t) / math.sin(self.delta_t)
        return math.isclose(self.p, self.h * cot * cot, rel_tol=1e-9)

    def boundary_point(self) -> np.ndarray:
        return np.array([self.a_x, self.a_y])

    def normal_at_boundary(self) -> np.ndarray:
        """True unit normal at the boundary point, toward the adversarial side."""
        return unit(np.array([-self.a_x / (2.0 * self.p), 1.0]))

    def oracle(self) -> ParabolicOracle2D:
        return ParabolicOracle2D(self.p, self.h)


@dataclass(frozen=True)
class NormalSearchSolution:
    status: str
    point: tuple[float, float] | None = None
    distance: float | None = None


def bsnv_analytic(scenario: ParabolicScenario) -> NormalSearchSolution:
    """Exact normal-direction search result.

    The normal at the boundary point has slope m = -2p/a_x; the search ray
    is the line y = m x from the source. It meets the parabola only when
    p m^2 >= h; at equality of old and new perturbation norms the iterate
    is flagged as diverging (the tangent delta_t = 45 deg configuration).
    """
    if scenario.a_x == 0.0:
        # Vertical normal: the ray hits the vertex.
        return NormalSearchSolution(FOUND, (0.0, scenario.h), scenario.h)
    m = -2.0 * scenario.p / scenario.a_x
    disc = 1.0 - scenario.h / (scenario.p * m * m)
    if disc < -_EXIST_TOL:
        return NormalSearchSolution(NOT_FOUND)
    disc = max(disc, 0.0)
    denom = 1.0 + math.sqrt(disc)
    point = (2.0 * scenario.h / m / denom, 2.0 * scenario.h / denom)
    distance = math.hypot(*point)
    status = FOUND
    if math.isclose(distance, scenario.r_t, rel_tol=1e-9):
        status = DIVERGES
    return NormalSearchSolution(status, point, distance)


def _deflate(coeffs: list[float], root: float) -> list[float]:
    """Synthetic division of a polynomial by (x - root)."""
    out = [coeffs[0]]
    for c in coeffs[1:-1]:
        out.append(c + out[-1] * root)
    return out


def _quartic_coeffs(s: ParabolicScenario) -> list[float]:
    # Circle through source and boundary point: x^2 + y^2 - a_x x - a_y y = 0,
    # with y = x^2/(4p) + h substituted in.
    return [
        1.0 / (16.0 * s.p * s.p),
        0.0,
        1.0 + (2.0 * s.h - s.a_y) / (4.0 * s.p),
        -s.a_x,
        s.h * (s.h - s.a_y),
    ]


def _polish_root(coeffs: list[float], x: float, steps: int = 3) -> float:
    deriv = [c * (len(coeffs) - 1 - k) for k, c in enumerate(coeffs[:-1])]
    for _ in range(steps):
        fx = np.polyval(coeffs, x)
        dfx = np.polyval(deriv, x)
        if dfx == 0.0:
            break
        x -= fx / dfx
    return x


def bssp_analytic(scenario: ParabolicScenario) -> tuple[tuple[float, float], float]:
    """Exact semicircular-search result: the other circle/parabola crossing.

    The intersection quartic is deflated by the known root at the current
    boundary point; the remaining real roots on the searched half of the
    circle (the side of the boundary normal) are candidates, of which the
    one closest to the source is returned.
    """
    s = scenario
    coeffs = _quartic_coeffs(s)
    cubic = _deflate(coeffs, s.a_x)
    roots = np.roots(cubic)
    v_hat = unit(np.array([s.a_x, s.a_y]))
    eta = s.normal_at_boundary()
    eta_perp = eta - float(np.dot(eta, v_hat)) * v_hat
    norm = float(np.linalg.norm(eta_perp))
    eta_perp = eta_perp / norm if norm > 0 else np.zeros(2)
    scale = max(1.0, abs(s.a_x), s.r_t)
    candidates = []
    for root in roots:
        if abs(root.imag) > 1e-7 * scale:
            continue
        x = _polish_root(coeffs, float(root.real))
        if abs(x - s.a_x) <= 1e-7 * scale:
            continue
        y = x * x / (4.0 * s.p) + s.h
        circle_residual = x * x + y * y - s.a_x * x - s.a_y * y
        if abs(circle_residual) > 1e-9 * scale * scale:
            continue
        zeta = np.array([x, y])
        dist = float(np.linalg.norm(zeta))
        if dist > 0 and float(np.dot(zeta / dist, eta_perp)) < -1e-9:
            continue  # mirror half of the circle, unreachable by the search
        candidates.append(((x, y), dist))
    if not candidates:
        raise NumericalFailure("no second real intersection root found")
    return min(candidates, key=lambda item: item[1])


@dataclass(frozen=True)
class SweepRow:
    delta_deg: float
    p: float
    r_bsnv: float          # nan when the normal search fails
    r_bssp: float          # nan when the scenario itself is infeasible
    bsnv_status: str


def default_p_grid(h: float, lo: float = 0.1, hi: float = 1000.0,
                   count: int = 60) -> np.ndarray:
    """Log-spaced latus-rectum parameters, in units of h."""
    if count < 1:
        raise InvalidConfig("grid needs at least one point")
    return h * np.logspace(math.log10(lo), math.log10(hi), count)


def _cross_check_cell(scenario: ParabolicScenario, analytic_bsnv,
                      analytic_bssp_dist, eps: float) -> None:
    oracle = scenario.oracle()
    x_s = np.zeros(2)
    x_bt = scenario.boundary_point()
    eta = scenario.normal_at_boundary()
    phi = BoundPhi(oracle, Indicator.nontargeted(0), QueryCounter())

    found = bsnv_search(x_s, x_bt, eta, phi, eps,
                        r_max=10.0 * 2.0 * math.sqrt(2.0) * scenario.h)
    if analytic_bsnv.status == NOT_FOUND:
        if found is not None:
            raise NumericalFailure(
                f"query bsnv found a point where the analytic solution has none "
                f"(delta={math.degrees(scenario.delta_t):g}, p={scenario.p:g})")
    else:
        if found is None:
            raise NumericalFailure(
                f"query bsnv missed the analytic solution "
                f"(delta={math.degrees(scenario.delta_t):g}, p={scenario.p:g})")
        if abs(found.distance - analytic_bsnv.distance) > 10.0 * eps:
            raise NumericalFailure(
                f"query bsnv distance {found.distance:.9g} != analytic "
                f"{analytic_bsnv.distance:.9g}")

    step = engine.cgba_iteration(x_s, x_bt, eta, phi, eps)
    if abs(step.distance - analytic_bssp_dist) > 10.0 * eps:
        raise NumericalFailure(
            f"query bssp distance {step.distance:.9g} != analytic "
            f"{analytic_bssp_dist:.9g} "
            f"(delta={math.degrees(scenario.delta_t):g}, p={scenario.p:g})")


def sweep(h: float, deltas_deg, p_values, cross_check: bool = False,
          eps: float = 1e-6) -> list[SweepRow]:
    """Evaluate both analytic searches over a (delta, p) grid.

    With ``cross_check`` the query-based searches run against the matching
    two-class parabolic oracle and must agree with the analytic values
    within ten search tolerances; disagreement raises.
    """
    deltas_deg = list(deltas_deg)
    p_values = list(p_values)
    if not deltas_deg or not p_values:
        raise InvalidConfig("sweep grids must be non-empty")
    rows = []
    for delta_deg in deltas_deg:
        delta = math.radians(delta_deg)
        for p in p_values:
            try:
                scenario = ParabolicScenario(p, h, delta)
            except NoBoundaryInDirection:
                rows.append(SweepRow(delta_deg, p, math.nan, math.nan,
                                     NO_BOUNDARY))
                continue
            normal_solution = bsnv_analytic(scenario)
            r_bsnv = (math.nan if normal_solution.status == NOT_FOUND
                      else normal_solution.distance)
            try:
                _, r_bssp = bssp_analytic(scenario)
            except NumericalFailure:
                r_bssp = math.nan
            if cross_check and not math.isnan(r_bssp):
                _cross_check_cell(scenario, normal_solution, r_bssp, eps)
            rows.append(SweepRow(delta_deg, p, r_bsnv, r_bssp,
                                 normal_solution.status))
    return rows


def write_sweep_csv(rows, path) -> None:
    """CSV with 9 significant digits per numeric column."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["delta_deg", "p", "r_bsnv", "r_bssp", "bsnv_status"])
        for row in rows:
            writer.writerow([
                f"{row.delta_deg:.9g}", f"{row.p:.9g}",
                f"{row.r_bsnv:.9g}", f"{row.r_bssp:.9g}", row.bsnv_status,
            ])

"""Iterative attacks: CGBA, CGBA-H, and a normal-direction baseline.

Each iteration estimates the boundary normal from Gaussian probes, then
locates the next boundary point with the variant's search: CGBA walks its
query angle outward (45, 67.5, ... deg from the chord) until a
non-adversarial semicircle point brackets the boundary and refines with the
semicircular search; CGBA-H halves the angle toward the chord until an
adversarial semicircle point appears and refines with a straight-chord
binary search; the baseline bisects along the estimated normal. Every
classifier call is charged to one query counter, and budget exhaustion
anywhere simply ends the attack with the best point found so far.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .errors import (BudgetExhausted, DegenerateEstimate, InvalidConfig,
                     InvalidInput)
from .geometry import (SemicircleFrame, cgba_multiplier, cgbah_multiplier,
                       search_direction, semicircle_point, unit)
from .oracles import (BoundPhi, ClipAdapter, DecisionOracle, Indicator,
                      QueryCounter)
from .search import (BoundaryPoint, binary_search_ray, bsnv,
                     initial_radius_search, initialize_targeted)
from .search import bssp as bssp_search
from .subspace import (SubspaceConfig, estimate_normal, full_space,
                       query_schedule, sample_probes)

CGBA = "cgba"
CGBA_H = "cgba-h"
BSNV_BASELINE = "bsnv"
VARIANTS = (CGBA, CGBA_H, BSNV_BASELINE)

TERMINATED_BUDGET = "budget"
TERMINATED_ITERATION_CAP = "iteration_cap"
TERMINATED_CONVERGED = "converged"


@dataclass(frozen=True)
class AttackConfig:
    """Attack hyper-parameters; the defaults are the reference setting."""

    variant: str = CGBA
    n0: int = 30
    sigma: float = 0.0002
    subspace: SubspaceConfig | None = None     # None: full space at sigma
    tolerance: float = 0.0001
    budget: int | None = None
    max_inner_i: int = 20
    max_iterations: int | None = None
    rng_seed: int = 0
    bsnv_r_max_factor: float = 4.0
    # Test hook: analytic unit normal (toward the adversarial side) as a
    # function of the boundary point, bypassing Monte-Carlo estimation.
    normal_oracle: Callable[[np.ndarray], np.ndarray] | None = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise InvalidConfig(f"unknown variant {self.variant!r}")
        if self.n0 < 1 or self.max_inner_i < 1:
            raise InvalidConfig("n0 and max_inner_i must be >= 1")
        if self.sigma <= 0 or self.tolerance <= 0:
            raise InvalidConfig("sigma and tolerance must be positive")
        if self.budget is not None and self.budget < 1:
            raise InvalidConfig("budget must be positive")
        if self.rng_seed < 0:
            raise InvalidConfig("rng_seed must be non-negative")

    def resolved_subspace(self) -> SubspaceConfig:
        return self.subspace if self.subspace is not None else full_space(self.sigma)


@dataclass(frozen=True)
class RandomDirection:
    """Initialize by expanding a seeded random direction until adversarial."""

    seed: int


@dataclass(frozen=True)
class TargetImages:
    """Initialize by the best of K directions toward known adversarial points."""

    points: tuple

    def __init__(self, points):
        object.__setattr__(self, "points", tuple(np.asarray(p, float)
                                                 for p in points))


@dataclass(frozen=True)
class TraceRecord:
    iteration: int
    queries: int
    distance: float
    snapshot: int


@dataclass
class AttackTrace:
    """Per-iteration history of one attack run.

    ``queries_spent`` is the exact counter delta for the whole attack,
    including queries burnt in a final iteration the budget cut short;
    records only snapshot completed iterations.
    """

    records: list[TraceRecord]
    snapshots: list[np.ndarray]
    final: BoundaryPoint
    terminated_by: str
    queries_spent: int = 0
    clipped_queries: int = 0

    def distances(self) -> list[float]:
        return [r.distance for r in self.records]

    def to_dict(self) -> dict:
        return {
            "records": [{"iteration": r.iteration, "queries": r.queries,
                         "distance": r.distance, "snapshot": r.snapshot}
                        for r in self.records],
            "snapshots": [s.tolist() for s in self.snapshots],
            "final": {"point": self.final.point.tolist(),
                      "distance": self.final.distance},
            "terminated_by": self.terminated_by,
            "queries_spent": self.queries_spent,
            "clipped_queries": self.clipped_queries,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AttackTrace":
        records = [TraceRecord(r["iteration"], r["queries"], r["distance"],
                               r["snapshot"]) for r in data["records"]]
        snapshots = [np.asarray(s, float) for s in data["snapshots"]]
        final = BoundaryPoint(np.asarray(data["final"]["point"], float),
                              float(data["final"]["distance"]))
        return cls(records, snapshots, final, data["terminated_by"],
                   data.get("queries_spent", records[-1].queries if records else 0),
                   data.get("clipped_queries", 0))


def cgba_iteration(x_s, x_bt, eta_hat, phi, eps: float,
                   max_inner_i: int = 20) -> BoundaryPoint:
    """One CGBA step given a normal estimate at the current boundary point.

    Opens the query angle along the semicircle until a non-adversarial point
    is found, then runs the semicircular bisection between it and the
    current boundary point. If even the widest angle stays adversarial, the
    last query point (already nearly at the source) takes the role of the
    non-adversarial end.
    """
    frame = SemicircleFrame.from_points(x_s, x_bt, eta_hat)
    x_q = None
    for i in range(1, max_inner_i + 1):
        zeta = search_direction(frame, cgba_multiplier(frame.theta_t, i))
        x_q = semicircle_point(frame, zeta)
        if phi(x_q) == -1:
            break
    return bssp_search(x_s, x_q, x_bt, phi, eps)


def cgbah_iteration(x_s, x_bt, eta_hat, phi, eps: float,
                    max_inner_i: int = 20) -> BoundaryPoint:
    """One CGBA-H step: halve the query angle until an adversarial
    semicircle point appears, then binary search the straight chord to it.

    Falls back to re-tightening the current boundary point when no query
    along the halving schedule is adversarial.
    """
    frame = SemicircleFrame.from_points(x_s, x_bt, eta_hat)
    for i in range(1, max_inner_i + 1):
        zeta = search_direction(frame, cgbah_multiplier(frame.theta_t, i))
        x_q = semicircle_point(frame, zeta)
        if phi(x_q) == 1:
            return binary_search_ray(x_s, x_q, phi, eps)
    return binary_search_ray(x_s, x_bt, phi, eps)


def bsnv_iteration(x_s, x_bt, eta_hat, phi, eps: float,
                   r_max_factor: float = 4.0) -> BoundaryPoint | None:
    """One baseline step: bisect along the estimated normal from the source."""
    r_t = float(np.linalg.norm(np.asarray(x_bt, float) - np.asarray(x_s, float)))
    return bsnv(x_s, x_bt, eta_hat, phi, eps, r_max=r_max_factor * r_t)


def _estimate_normal(x_bt: np.ndarray, cfg: AttackConfig, t: int,
                     phi: BoundPhi) -> np.ndarray | None:
    """Estimated (or injected) unit normal; None when both probe batches
    cancel, which aborts the iteration without moving the boundary point."""
    if cfg.normal_oracle is not None:
        return unit(cfg.normal_oracle(x_bt))
    n_t = query_schedule(cfg.n0, t)
    subspace = cfg.resolved_subspace()
    for attempt in (0, 1):
        batch = sample_probes(subspace, x_bt.shape[0], n_t,
                              rng_seed=[cfg.rng_seed, t, attempt])
        try:
            return estimate_normal(x_bt, batch, phi)
        except DegenerateEstimate:
            continue
    return None


def _run_loop(x_s: np.ndarray, start: BoundaryPoint, cfg: AttackConfig,
              oracle: DecisionOracle, indicator: Indicator,
              counter: QueryCounter) -> AttackTrace:
    phi = BoundPhi(oracle, indicator, counter)
    clip_base = oracle.clip_events if isinstance(oracle, ClipAdapter) else 0

    snapshots = [start.point]
    records = [TraceRecord(0, counter.used, start.distance, 0)]
    current = start
    best = start
    terminated = TERMINATED_ITERATION_CAP
    t = 0
    while True:
        t += 1
        if cfg.max_iterations is not None and t > cfg.max_iterations:
            terminated = TERMINATED_ITERATION_CAP
            break
        if current.distance <= cfg.tolerance:
            terminated = TERMINATED_CONVERGED
            break
        probe_cost = 0 if cfg.normal_oracle else query_schedule(cfg.n0, t)
        if counter.budget is not None and counter.remaining < probe_cost + 1:
            terminated = TERMINATED_BUDGET
            break
        try:
            eta = _estimate_normal(current.point, cfg, t, phi)
            if eta is None:
                step = None            # degenerate estimate: keep the point
            elif cfg.variant == CGBA:
                step = cgba_iteration(x_s, current.point, eta, phi,
                                      cfg.tolerance, cfg.max_inner_i)
            elif cfg.variant == CGBA_H:
                step = cgbah_iteration(x_s, current.point, eta, phi,
                                       cfg.tolerance, cfg.max_inner_i)
            else:
                step = bsnv_iteration(x_s, current.point, eta, phi,
                                      cfg.tolerance, cfg.bsnv_r_max_factor)
        except BudgetExhausted:
            terminated = TERMINATED_BUDGET
            break
        if step is not None:
            current = step
            if current.distance < best.distance:
                best = current
        snapshots.append(current.point)
        records.append(TraceRecord(t, counter.used, current.distance,
                                   len(snapshots) - 1))

    clipped = (oracle.clip_events - clip_base
               if isinstance(oracle, ClipAdapter) else 0)
    return AttackTrace(records, snapshots, best, terminated,
                       queries_spent=counter.used, clipped_queries=clipped)


def _check_start(start: BoundaryPoint, cfg: AttackConfig) -> BoundaryPoint:
    if not isinstance(start, BoundaryPoint):
        raise InvalidInput("start must be a BoundaryPoint")
    if cfg.budget is not None and cfg.budget < 1:
        raise InvalidConfig("budget must be positive")
    return start


def run_cgba(x_s, start: BoundaryPoint, cfg: AttackConfig,
             oracle: DecisionOracle, indicator: Indicator,
             counter: QueryCounter | None = None) -> AttackTrace:
    cfg = replace(cfg, variant=CGBA)
    return _run_loop(np.asarray(x_s, float), _check_start(start, cfg), cfg,
                     oracle, indicator, counter or QueryCounter(cfg.budget))


def run_cgba_h(x_s, start: BoundaryPoint, cfg: AttackConfig,
               oracle: DecisionOracle, indicator: Indicator,
               counter: QueryCounter | None = None) -> AttackTrace:
    cfg = replace(cfg, variant=CGBA_H)
    return _run_loop(np.asarray(x_s, float), _check_start(start, cfg), cfg,
                     oracle, indicator, counter or QueryCounter(cfg.budget))


def run_bsnv_baseline(x_s, start: BoundaryPoint, cfg: AttackConfig,
                      oracle: DecisionOracle, indicator: Indicator,
                      counter: QueryCounter | None = None) -> AttackTrace:
    cfg = replace(cfg, variant=BSNV_BASELINE)
    return _run_loop(np.asarray(x_s, float), _check_start(start, cfg), cfg,
                     oracle, indicator, counter or QueryCounter(cfg.budget))


_RUNNERS = {CGBA: run_cgba, CGBA_H: run_cgba_h, BSNV_BASELINE: run_bsnv_baseline}


def attack(x_s, cfg: AttackConfig, oracle: DecisionOracle,
           indicator: Indicator,
           init: RandomDirection | TargetImages,
           counter: QueryCounter | None = None) -> AttackTrace:
    """Full attack: verify the source, find the initial boundary point,
    then run the configured variant. Initialization queries (including the
    one-query source check) count against the budget."""
    x_s = np.asarray(x_s, dtype=np.float64).reshape(-1)
    if counter is None:
        counter = QueryCounter(cfg.budget)
    phi = BoundPhi(oracle, indicator, counter)
    if phi(x_s) != -1:
        raise InvalidInput("source point is already adversarial for this indicator")
    if isinstance(init, RandomDirection):
        rng = np.random.default_rng(init.seed)
        theta = rng.standard_normal(x_s.shape[0])
        start = initial_radius_search(x_s, theta, phi, cfg.tolerance)
    elif isinstance(init, TargetImages):
        start = initialize_targeted(x_s, init.points, phi, cfg.tolerance)
    else:
        raise InvalidInput(f"unknown initialization {init!r}")
    return _RUNNERS[cfg.variant](x_s, start, cfg, oracle, indicator, counter)

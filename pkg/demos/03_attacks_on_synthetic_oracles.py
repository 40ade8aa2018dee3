"""Full attacks on two synthetic classifiers with opposite curvature.

A halfspace (flat boundary) favors the outward-schedule attack; a narrow
cone (sharply curved boundary) favors the angle-halving variant. Both runs
share one query budget and seed so the traces are directly comparable.
"""

import math

import numpy as np

from cgba import (AttackConfig, ConeOracle, HalfSpaceOracle, Indicator,
                  TargetImages, attack, unit)

BUDGET = 3000


def show(tag, trace):
    d = trace.distances()
    print(f"  {tag:7s} final {trace.final.distance:10.6f}  "
          f"iterations {len(d) - 1:3d}  queries {trace.queries_spent:5d}  "
          f"terminated by {trace.terminated_by}")


print("flat boundary (halfspace at distance 0.5, n=8):")
half = HalfSpaceOracle(unit(np.random.default_rng(1).standard_normal(8)), 0.5)
for variant in ("cgba", "cgba-h", "bsnv"):
    cfg = AttackConfig(variant=variant, budget=BUDGET, rng_seed=0)
    trace = attack(np.zeros(8), cfg, half, Indicator.nontargeted(0),
                   TargetImages([half.normal * 3.0]))
    show(variant, trace)
print("  (optimum is 0.5, the perpendicular distance)\n")

print("high curvature (5-degree cone, n=16, optimum ~1.118):")
n = 16
axis = np.zeros(n); axis[0] = 1.0
offaxis = np.zeros(n); offaxis[1] = 1.0
cone = ConeOracle(np.zeros(n), axis, math.radians(5.0))
x_s = -axis + 0.5 * offaxis
for variant in ("cgba", "cgba-h", "bsnv"):
    cfg = AttackConfig(variant=variant, budget=BUDGET, rng_seed=0)
    trace = attack(x_s, cfg, cone, Indicator.nontargeted(0),
                   TargetImages([3.0 * axis]))
    show(variant, trace)

print("\nper-iteration distances of the two semicircular variants on the cone:")
for variant in ("cgba", "cgba-h"):
    cfg = AttackConfig(variant=variant, budget=BUDGET, rng_seed=0)
    trace = attack(x_s, cfg, cone, Indicator.nontargeted(0),
                   TargetImages([3.0 * axis]))
    head = ", ".join(f"{v:.4f}" for v in trace.distances()[:8])
    print(f"  {variant:7s} {head}, ...")

"""Decision-based (hard-label) black-box attack toolkit.

Implements the CGBA and CGBA-H iterative attacks, their geometric search
primitives (semicircular boundary search, normal-direction search,
K-direction initialization), Monte-Carlo boundary-normal estimation in full
or DCT-reduced space, an executable analytic model of both searches on a
parabolic boundary, and a benchmark harness with a wire protocol for remote
classifiers.
"""

from .engine import (AttackConfig, AttackTrace, RandomDirection, TargetImages,
                     attack, run_bsnv_baseline, run_cgba, run_cgba_h)
from .geometry import (SemicircleFrame, cgba_multiplier, cgbah_multiplier,
                       search_direction, semicircle_point, unit)
from .oracles import (BlobMlpOracle, BoundPhi, ConeOracle, DecisionOracle,
                      HalfSpaceOracle, Indicator, ParabolicOracle2D,
                      QueryCounter, clip_adapter)
from .search import (BoundaryPoint, binary_search_ray, bsnv, bssp,
                     initial_radius_search, initialize_targeted)
from .subspace import (ProbeBatch, SubspaceConfig, dct_subspace,
                       estimate_normal, full_space, query_schedule,
                       sample_probes)
from .theory import (ParabolicScenario, bsnv_analytic, bssp_analytic,
                     rt_of_delta, sweep)

__version__ = "0.1.0"

__all__ = [
    "AttackConfig", "AttackTrace", "RandomDirection", "TargetImages",
    "attack", "run_cgba", "run_cgba_h", "run_bsnv_baseline",
    "SemicircleFrame", "unit", "search_direction", "semicircle_point",
    "cgba_multiplier", "cgbah_multiplier",
    "DecisionOracle", "Indicator", "QueryCounter", "BoundPhi",
    "HalfSpaceOracle", "ParabolicOracle2D", "ConeOracle", "BlobMlpOracle",
    "clip_adapter",
    "BoundaryPoint", "binary_search_ray", "initial_radius_search", "bssp",
    "bsnv", "initialize_targeted",
    "SubspaceConfig", "ProbeBatch", "full_space", "dct_subspace",
    "sample_probes", "estimate_normal", "query_schedule",
    "ParabolicScenario", "rt_of_delta", "bsnv_analytic", "bssp_analytic",
    "sweep",
]

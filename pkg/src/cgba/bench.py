"""Experiment runner and query-efficiency metrics.

Metrics follow the best-so-far convention: a trace's perturbation at a
checkpoint is the distance of its last record whose cumulative query count
fits the checkpoint. Median perturbation, success rate against a threshold,
and the trapezoidal area under the median-versus-queries curve are the
three aggregates. Experiments are fully determined by their spec: every
random draw is derived from the spec seed, so rerunning a spec reproduces
the output artifacts byte for byte.
"""

from __future__ import annotations

import concurrent.futures
import hashlib
import json
import math
import os
from dataclasses import asdict, dataclass

import numpy as np

from .engine import (VARIANTS, AttackConfig, AttackTrace, RandomDirection,
                     TargetImages, attack)
from .errors import (EmptySet, InsufficientPoints, InvalidConfig,
                     NoAdversarialFound)
from .geometry import unit
from .oracles import (BlobMlpOracle, ConeOracle, DecisionOracle,
                      HalfSpaceOracle, Indicator, ParabolicOracle2D,
                      QueryCounter, clip_adapter)
from .remote import RemoteOracle
from .subspace import dct_subspace, full_space

# ---------------------------------------------------------------------------
# Metrics


def distance_at(trace: AttackTrace, checkpoint: int) -> float:
    """Best-so-far perturbation norm once ``checkpoint`` queries are spent."""
    chosen = None
    for record in trace.records:
        if record.queries <= checkpoint:
            chosen = record
        else:
            break
    if chosen is None:
        chosen = trace.records[0]
    return chosen.distance


def median_l2(traces, checkpoint: int) -> float:
    traces = list(traces)
    if not traces:
        raise EmptySet("no traces to aggregate")
    return float(np.median([distance_at(t, checkpoint) for t in traces]))


def asr(traces, threshold: float, checkpoint: int) -> float:
    """Fraction of traces at or below the perturbation threshold."""
    traces = list(traces)
    if not traces:
        raise EmptySet("no traces to aggregate")
    if threshold <= 0:
        raise InvalidConfig("threshold must be positive")
    hits = sum(1 for t in traces if distance_at(t, checkpoint) <= threshold)
    return hits / len(traces)


def auc(points) -> float:
    """Trapezoidal area under a (queries, median) curve."""
    points = list(points)
    if len(points) < 2:
        raise InsufficientPoints("need at least two curve points")
    total = 0.0
    for (q0, m0), (q1, m1) in zip(points, points[1:]):
        if q1 <= q0:
            raise InvalidConfig("curve points must have increasing queries")
        total += 0.5 * (m0 + m1) * (q1 - q0)
    return total


# ---------------------------------------------------------------------------
# Oracle specs


def parse_oracle_spec(spec: str) -> tuple[str, dict]:
    """Parse ``name[:k=v,...]``, ``remote:HOST:PORT`` or ``weights:PATH``."""
    if spec.startswith("remote:"):
        rest = spec[len("remote:"):]
        host, _, port = rest.rpartition(":")
        if not host or not port.isdigit():
            raise InvalidConfig(f"remote spec must be remote:HOST:PORT, got {spec!r}")
        return "remote", {"host": host, "port": int(port)}
    if spec.startswith("weights:"):
        return "weights", {"path": spec[len("weights:"):]}
    name, _, tail = spec.partition(":")
    params: dict = {}
    if tail:
        for item in tail.split(","):
            key, sep, value = item.partition("=")
            if not sep:
                raise InvalidConfig(f"oracle parameter {item!r} is not k=v")
            try:
                params[key] = int(value)
            except ValueError:
                try:
                    params[key] = float(value)
                except ValueError:
                    params[key] = value
    return name, params


def build_oracle(spec: str) -> DecisionOracle:
    kind, params = parse_oracle_spec(spec)
    if kind == "halfspace":
        n = int(params.get("n", 8))
        seed = int(params.get("seed", 1))
        offset = float(params.get("offset", 0.5))
        normal = unit(np.random.default_rng(seed).standard_normal(n))
        return HalfSpaceOracle(normal, offset)
    if kind == "parabola":
        return ParabolicOracle2D(float(params.get("p", 1.0)),
                                 float(params.get("h", 1.0)))
    if kind == "cone":
        n = int(params.get("n", 16))
        half = math.radians(float(params.get("half_angle_deg", 5.0)))
        axis = np.zeros(n)
        axis[0] = 1.0
        return ConeOracle(np.zeros(n), axis, half)
    if kind == "blobmlp":
        return BlobMlpOracle.train(int(params.get("n", 16)),
                                   int(params.get("classes", 4)),
                                   int(params.get("seed", 7)))
    if kind == "weights":
        return BlobMlpOracle.load(params["path"])
    if kind == "remote":
        return RemoteOracle.connect_tcp(params["host"], params["port"])
    raise InvalidConfig(f"unknown oracle spec {spec!r}")


# ---------------------------------------------------------------------------
# Sample synthesis for the built-in oracles


@dataclass(frozen=True)
class SampleCase:
    source: np.ndarray
    source_label: int
    target_label: int
    targets: tuple


def _rejection(rng, draw, predicate, tries: int = 2000) -> np.ndarray:
    for _ in range(tries):
        x = draw(rng)
        if predicate(x):
            return x
    raise InvalidConfig("sample synthesis failed; oracle region too small")


def synthesize_case(oracle: DecisionOracle, kind: str, mode: str,
                    rng: np.random.Generator, k: int) -> SampleCase:
    """Seeded (source, targets) pair generation for a built-in oracle."""
    if kind == "blobmlp":
        classes = oracle.num_classes
        source_label = int(rng.integers(classes))
        target_label = int((source_label + 1 + rng.integers(classes - 1)) % classes)
        source = oracle.sample_class(source_label, rng)
        targets = tuple(oracle.sample_class(target_label, rng) for _ in range(k))
        return SampleCase(source, source_label, target_label, targets)

    n = oracle.n
    if kind == "halfspace":
        normal, offset = oracle.normal, oracle.offset
        source = _rejection(
            rng, lambda r: (offset - 1.0) * normal + 0.4 * r.standard_normal(n),
            lambda x: oracle.classify(x) == 0)
        draw_adv = lambda r: (offset + 1.0) * normal + 0.4 * r.standard_normal(n)
        targets = tuple(_rejection(rng, draw_adv,
                                   lambda x: oracle.classify(x) == 1)
                        for _ in range(k))
    elif kind == "parabola":
        h = oracle.h
        source = _rejection(rng, lambda r: 0.3 * h * r.standard_normal(2),
                            lambda x: oracle.classify(x) == 0)

        def draw_adv(r):
            x0 = h * r.standard_normal()
            lift = h * (0.1 + abs(r.standard_normal()))
            return np.array([x0, x0 * x0 / (4.0 * oracle.p) + h + lift])

        targets = tuple(_rejection(rng, draw_adv,
                                   lambda x: oracle.classify(x) == 1)
                        for _ in range(k))
    elif kind == "cone":
        axis, apex = oracle.axis, oracle.apex
        source = _rejection(
            rng, lambda r: apex - axis + 0.2 * r.standard_normal(n),
            lambda x: oracle.classify(x) == 0)

        def draw_adv(r):
            depth = 1.0 + r.uniform(0.0, 2.0)
            lateral = r.standard_normal(n)
            lateral -= float(np.dot(lateral, axis)) * axis
            lateral *= 0.2 * depth * math.tan(oracle.half_angle)
            return apex + depth * axis + lateral

        targets = tuple(_rejection(rng, draw_adv,
                                   lambda x: oracle.classify(x) == 1)
                        for _ in range(k))
    else:
        raise InvalidConfig(
            f"synthetic samples are unsupported for oracle kind {kind!r}; "
            "provide sample files instead")
    return SampleCase(source, int(oracle.classify(source)), 1, targets)


def load_case(path: str) -> SampleCase:
    data = np.load(path)
    targets = tuple(data["targets"]) if "targets" in data else ()
    return SampleCase(np.asarray(data["source"], float),
                      int(data["source_label"]),
                      int(data["target_label"]) if "target_label" in data else 1,
                      targets)


# ---------------------------------------------------------------------------
# Experiments


@dataclass(frozen=True)
class ExperimentSpec:
    """Everything that determines an experiment's outputs."""

    oracle: str
    variants: tuple = ("cgba",)
    mode: str = "nontargeted"
    budget: int = 1000
    checkpoints: tuple = (250, 500, 1000)
    seed: int = 0
    samples: int = 4
    k_init: int = 1
    n0: int = 30
    sigma: float = 0.0002
    eps: float = 0.0001
    subspace: str = "full"
    image_shape: tuple | None = None
    threshold: float = 1.0
    init: str = ""            # "", "random" or "targets"; "" picks by mode
    clip: bool = False
    sample_files: tuple = ()
    workers: int = 1

    def __post_init__(self):
        if self.mode not in ("nontargeted", "targeted"):
            raise InvalidConfig(f"unknown mode {self.mode!r}")
        for variant in self.variants:
            if variant not in VARIANTS:
                raise InvalidConfig(f"unknown variant {variant!r}")
        if not self.variants:
            raise InvalidConfig("at least one variant required")
        if list(self.checkpoints) != sorted(set(self.checkpoints)):
            raise InvalidConfig("checkpoints must be strictly increasing")
        if not self.checkpoints:
            raise InvalidConfig("at least one checkpoint required")
        if self.samples < 1 and not self.sample_files:
            raise InvalidConfig("need at least one sample")
        if self.init not in ("", "random", "targets"):
            raise InvalidConfig(f"unknown init {self.init!r}")

    def resolved_init(self) -> str:
        if self.init:
            return self.init
        return "targets" if self.mode == "targeted" else "random"

    def parse_subspace(self, n: int):
        if self.subspace == "full":
            return full_space(self.sigma)
        if self.subspace.startswith("dct:"):
            factor = float(self.subspace[len("dct:"):])
            if self.image_shape is None:
                raise InvalidConfig("dct subspace needs an image shape")
            return dct_subspace(self.sigma, tuple(self.image_shape), factor)
        raise InvalidConfig(f"unknown subspace {self.subspace!r}")


def config_hash(spec: ExperimentSpec) -> str:
    canonical = json.dumps(asdict(spec), sort_keys=True, default=list)
    return hashlib.sha256(canonical.encode()).hexdigest()[:12]


def _run_cell(spec: ExperimentSpec, base_oracle, kind: str, variant: str,
              sample_id: int) -> dict:
    owns_oracle = base_oracle is None
    if owns_oracle:
        base_oracle = build_oracle(spec.oracle)   # own connection per cell
    try:
        return _run_cell_on(spec, base_oracle, kind, variant, sample_id)
    finally:
        if owns_oracle and hasattr(base_oracle, "close"):
            base_oracle.close()


def _run_cell_on(spec: ExperimentSpec, base_oracle, kind: str, variant: str,
                 sample_id: int) -> dict:
    oracle = clip_adapter(base_oracle) if spec.clip else base_oracle
    if spec.sample_files:
        case = load_case(spec.sample_files[sample_id % len(spec.sample_files)])
    else:
        rng = np.random.default_rng([spec.seed, sample_id, 0xCA5E])
        case = synthesize_case(base_oracle, kind, spec.mode, rng,
                               max(1, spec.k_init))
    if spec.mode == "targeted":
        indicator = Indicator.targeted(case.target_label)
    else:
        indicator = Indicator.nontargeted(case.source_label)
    # Variants share the probe seed on a given sample for paired comparison.
    cfg = AttackConfig(variant=variant, n0=spec.n0, sigma=spec.sigma,
                       subspace=spec.parse_subspace(base_oracle.n),
                       tolerance=spec.eps, budget=spec.budget,
                       rng_seed=(spec.seed * 1_000_003 + sample_id) % (2 ** 31))
    counter = QueryCounter(spec.budget)
    if spec.resolved_init() == "targets":
        if not case.targets:
            raise InvalidConfig("targets init requested but no targets available")
        trace = attack(case.source, cfg, oracle, indicator,
                       TargetImages(case.targets[:max(1, spec.k_init)]),
                       counter=counter)
    else:
        trace = None
        last_error = None
        for attempt in range(20):
            try:
                trace = attack(case.source, cfg, oracle, indicator,
                               RandomDirection([spec.seed, sample_id, attempt]),
                               counter=counter)
                break
            except NoAdversarialFound as exc:
                last_error = exc     # retry a fresh direction, budget shared
        if trace is None:
            raise NoAdversarialFound(str(last_error))
    payload = trace.to_dict()
    payload.update({"schema": 1, "variant": variant, "sample_id": sample_id,
                    "seed": spec.seed})
    return payload


def run_experiment(spec: ExperimentSpec, out_dir: str) -> dict:
    """Execute all (variant, sample) cells and write the artifacts.

    Per-cell failures are recorded and do not abort the run; the summary
    carries them so the CLI can signal a nonzero exit.
    """
    os.makedirs(out_dir, exist_ok=True)
    digest = config_hash(spec)
    kind, _ = parse_oracle_spec(spec.oracle)
    # Remote cells each open their own connection; builtin oracles are pure
    # and shared (per-cell clip adapters keep cell state isolated).
    base_oracle = None if kind == "remote" else build_oracle(spec.oracle)
    sample_count = (len(spec.sample_files) if spec.sample_files
                    else spec.samples)
    cells = [(variant, sample_id) for variant in spec.variants
             for sample_id in range(sample_count)]

    results: dict = {}
    if spec.workers > 1:
        with concurrent.futures.ThreadPoolExecutor(spec.workers) as pool:
            futures = {
                pool.submit(_run_cell, spec, base_oracle, kind, v, s): (v, s)
                for v, s in cells}
            for future in concurrent.futures.as_completed(futures):
                key = futures[future]
                try:
                    results[key] = future.result()
                except Exception as exc:
                    results[key] = {"error": f"{type(exc).__name__}: {exc}",
                                    "variant": key[0], "sample_id": key[1]}
    else:
        for key in cells:
            try:
                results[key] = _run_cell(spec, base_oracle, kind, *key)
            except Exception as exc:
                results[key] = {"error": f"{type(exc).__name__}: {exc}",
                                "variant": key[0], "sample_id": key[1]}

    failures = []
    traces_by_variant: dict[str, list[AttackTrace]] = {v: [] for v in spec.variants}
    for (variant, sample_id) in sorted(results):
        payload = results[(variant, sample_id)]
        name = f"{digest}_{variant}_{sample_id:04d}.json"
        with open(os.path.join(out_dir, name), "w") as fh:
            json.dump(payload, fh, sort_keys=True)
            fh.write("\n")
        if "error" in payload:
            failures.append({"variant": variant, "sample_id": sample_id,
                             "error": payload["error"]})
        else:
            traces_by_variant[variant].append(AttackTrace.from_dict(payload))

    report = compute_report(traces_by_variant, spec.checkpoints, spec.threshold)
    report["config"] = asdict(spec)
    report["config_hash"] = digest
    report["failures"] = failures

    write_aggregate_csv(report, os.path.join(out_dir, "aggregate.csv"))
    with open(os.path.join(out_dir, "summary.json"), "w") as fh:
        json.dump(report, fh, sort_keys=True, indent=2, default=list)
        fh.write("\n")
    return report


def compute_report(traces_by_variant: dict, checkpoints, threshold: float) -> dict:
    variants = {}
    for variant, traces in traces_by_variant.items():
        if not traces:
            variants[variant] = {"median_l2": [], "asr": [], "auc": None}
            continue
        medians = [median_l2(traces, q) for q in checkpoints]
        rates = [asr(traces, threshold, q) for q in checkpoints]
        curve_auc = (auc(list(zip(checkpoints, medians)))
                     if len(checkpoints) >= 2 else None)
        variants[variant] = {"median_l2": medians, "asr": rates,
                             "auc": curve_auc}
    return {"checkpoints": list(checkpoints), "threshold": threshold,
            "variants": variants}


def write_aggregate_csv(report: dict, path: str) -> None:
    """RFC-4180-style CSV, LF line endings, full-precision floats."""
    lines = ["variant,checkpoint,median_l2,asr"]
    for variant in sorted(report["variants"]):
        data = report["variants"][variant]
        for q, median, rate in zip(report["checkpoints"],
                                   data["median_l2"], data["asr"]):
            lines.append(f"{variant},{q},{median!r},{rate!r}")
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def read_aggregate_csv(path: str) -> dict:
    """Parse the aggregate CSV back into {variant: [(checkpoint, median, asr)]}."""
    out: dict = {}
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "variant,checkpoint,median_l2,asr":
            raise InvalidConfig(f"unexpected CSV header {header!r}")
        for line in fh:
            variant, q, median, rate = line.strip().split(",")
            out.setdefault(variant, []).append(
                (int(q), float(median), float(rate)))
    return out


def load_traces(directory: str) -> tuple[dict, dict]:
    """Load per-trace JSONs, grouped by variant; failures returned separately."""
    grouped: dict[str, list[AttackTrace]] = {}
    failures: dict[str, list] = {}
    for name in sorted(os.listdir(directory)):
        if not name.endswith(".json") or name == "summary.json":
            continue
        with open(os.path.join(directory, name)) as fh:
            payload = json.load(fh)
        if "records" not in payload:
            failures.setdefault(payload.get("variant", "?"), []).append(name)
            continue
        grouped.setdefault(payload["variant"], []).append(
            AttackTrace.from_dict(payload))
    return grouped, failures

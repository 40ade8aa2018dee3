"""Hard-label classifier abstractions, the +/-1 indicator, and query accounting.

Every oracle exposes exactly one capability: ``classify(point) -> label``.
Attacks never see scores or gradients. All built-in oracles treat a point on
the decision boundary as adversarial (the ``>=`` convention), which keeps
binary-search postconditions one-sided and deterministic.
"""

from __future__ import annotations

import math
import threading
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from .errors import BudgetExhausted, InvalidConfig, InvalidInput
from .geometry import as_vector, unit


class DecisionOracle(ABC):
    """Deterministic top-1 classifier over n-dimensional points."""

    n: int
    num_classes: int

    @abstractmethod
    def classify(self, x: np.ndarray) -> int:
        """Return the top-1 label for ``x``."""


@dataclass(frozen=True)
class Indicator:
    """The +/-1 adversarial test.

    Non-targeted: +1 iff the label differs from ``source_label``.
    Targeted: +1 iff the label equals ``target_label``.
    """

    source_label: int | None = None
    target_label: int | None = None

    @classmethod
    def nontargeted(cls, source_label: int) -> "Indicator":
        return cls(source_label=source_label)

    @classmethod
    def targeted(cls, target_label: int) -> "Indicator":
        return cls(target_label=target_label)

    @property
    def is_targeted(self) -> bool:
        return self.target_label is not None

    def __post_init__(self):
        if (self.source_label is None) == (self.target_label is None):
            raise InvalidConfig("exactly one of source/target label must be set")

    def __call__(self, label: int) -> int:
        if self.is_targeted:
            return 1 if label == self.target_label else -1
        return 1 if label != self.source_label else -1


class QueryCounter:
    """Monotone query tally with an optional hard budget.

    ``charge()`` is atomic; it raises ``BudgetExhausted`` *before* going past
    the budget, so ``used <= budget`` holds at every observation point.
    """

    def __init__(self, budget: int | None = None):
        if budget is not None and budget < 0:
            raise InvalidConfig("budget must be non-negative")
        self.budget = budget
        self._used = 0
        self._lock = threading.Lock()

    @property
    def used(self) -> int:
        return self._used

    @property
    def remaining(self) -> float:
        if self.budget is None:
            return math.inf
        return self.budget - self._used

    def charge(self, amount: int = 1) -> None:
        with self._lock:
            if self.budget is not None and self._used + amount > self.budget:
                raise BudgetExhausted(
                    f"budget {self.budget} exhausted at {self._used} queries")
            self._used += amount


class BoundPhi:
    """Oracle + indicator + counter bound into the phi(x) -> +/-1 callable.

    Every call consumes exactly one unit of budget. This is the only path by
    which attack code is allowed to query a classifier.
    """

    def __init__(self, oracle: DecisionOracle, indicator: Indicator,
                 counter: QueryCounter):
        self.oracle = oracle
        self.indicator = indicator
        self.counter = counter

    def __call__(self, x: np.ndarray) -> int:
        self.counter.charge()
        return self.indicator(self.oracle.classify(x))


class ClipAdapter(DecisionOracle):
    """Clamp every query to [0, 1] componentwise before classification.

    The caller's point is untouched; ``clip_events`` counts queries where
    clamping actually changed the point.
    """

    def __init__(self, inner: DecisionOracle):
        self.inner = inner
        self.n = inner.n
        self.num_classes = inner.num_classes
        self.clip_events = 0

    def classify(self, x: np.ndarray) -> int:
        clipped = np.clip(x, 0.0, 1.0)
        if not np.array_equal(clipped, x):
            self.clip_events += 1
        return self.inner.classify(clipped)


def clip_adapter(oracle: DecisionOracle) -> ClipAdapter:
    return ClipAdapter(oracle)


class CountingOracle(DecisionOracle):
    """Audit wrapper counting raw ``classify`` calls (tests cross-check this
    against the trace's reported query totals)."""

    def __init__(self, inner: DecisionOracle):
        self.inner = inner
        self.n = inner.n
        self.num_classes = inner.num_classes
        self.calls = 0

    def classify(self, x: np.ndarray) -> int:
        self.calls += 1
        return self.inner.classify(x)


class HalfSpaceOracle(DecisionOracle):
    """Linear two-class oracle: label 1 iff x . normal >= offset."""

    def __init__(self, normal, offset: float):
        self.normal = unit(normal)
        self.offset = float(offset)
        self.n = self.normal.shape[0]
        self.num_classes = 2

    def classify(self, x: np.ndarray) -> int:
        return 1 if float(np.dot(x, self.normal)) >= self.offset else 0


class ParabolicOracle2D(DecisionOracle):
    """Parabolic two-class boundary: label 1 iff y >= x**2 / (4 p) + h.

    Lives natively in the analytic plane (n=2 identity embedding); an
    optional (origin, basis) pair embeds the plane into higher dimensions,
    with plane coordinates read off by projection onto the basis rows.
    """

    def __init__(self, p: float, h: float, origin=None, basis=None):
        if p <= 0 or h <= 0:
            raise InvalidConfig("p and h must be positive")
        self.p = float(p)
        self.h = float(h)
        if (origin is None) != (basis is None):
            raise InvalidConfig("origin and basis must be given together")
        if origin is None:
            self.origin = np.zeros(2)
            self.basis = np.eye(2)
        else:
            self.origin = as_vector(origin)
            self.basis = np.asarray(basis, dtype=np.float64)
            if self.basis.shape != (2, self.origin.shape[0]):
                raise InvalidConfig("basis must be 2 x n")
        self.n = self.origin.shape[0]
        self.num_classes = 2

    def plane_coords(self, x: np.ndarray) -> tuple[float, float]:
        rel = as_vector(x) - self.origin
        u = self.basis @ rel
        return float(u[0]), float(u[1])

    def classify(self, x: np.ndarray) -> int:
        px, py = self.plane_coords(x)
        return 1 if py >= px * px / (4.0 * self.p) + self.h else 0


class ConeOracle(DecisionOracle):
    """Label 1 inside a circular cone of given half-angle around an axis.

    The adversarial region seen from outside is a narrow solid angle, the
    desk-scale stand-in for a high-curvature targeted boundary.
    """

    def __init__(self, apex, axis, half_angle_rad: float):
        if not 0.0 < half_angle_rad < 0.5 * math.pi:
            raise InvalidConfig("half angle must be in (0, pi/2)")
        self.apex = as_vector(apex)
        self.axis = unit(axis)
        self.half_angle = float(half_angle_rad)
        self._cos = math.cos(self.half_angle)
        self.n = self.apex.shape[0]
        self.num_classes = 2

    def classify(self, x: np.ndarray) -> int:
        rel = np.asarray(x, dtype=np.float64).reshape(-1) - self.apex
        norm = float(np.linalg.norm(rel))
        if norm == 0.0:
            return 1
        return 1 if float(np.dot(rel, self.axis)) >= self._cos * norm else 0


class BlobMlpOracle(DecisionOracle):
    """Small fixed MLP (one hidden layer, width 32, ReLU, argmax head).

    Weights come either from deterministic seeded training on synthetic
    Gaussian blobs or from a saved ``.npz`` file; they are immutable after
    construction.
    """

    HIDDEN = 32

    def __init__(self, w1, b1, w2, b2, centers=None, cluster_std=1.0):
        self.w1 = np.asarray(w1, dtype=np.float64)
        self.b1 = np.asarray(b1, dtype=np.float64)
        self.w2 = np.asarray(w2, dtype=np.float64)
        self.b2 = np.asarray(b2, dtype=np.float64)
        self.centers = None if centers is None else np.asarray(centers, float)
        self.cluster_std = float(cluster_std)
        self.n = self.w1.shape[1]
        self.num_classes = self.w2.shape[0]
        for arr in (self.w1, self.b1, self.w2, self.b2):
            arr.setflags(write=False)

    @classmethod
    def train(cls, n: int, num_classes: int, seed: int,
              samples_per_class: int = 120, cluster_std: float = 0.6,
              epochs: int = 400, lr: float = 0.3) -> "BlobMlpOracle":
        """Deterministically train on seeded Gaussian blobs."""
        if n > 64:
            raise InvalidConfig("blob oracle supports n <= 64")
        rng = np.random.default_rng(seed)
        centers = rng.normal(0.0, 2.0, size=(num_classes, n))
        xs = np.concatenate([
            centers[c] + cluster_std * rng.normal(size=(samples_per_class, n))
            for c in range(num_classes)
        ])
        ys = np.repeat(np.arange(num_classes), samples_per_class)

        w1 = rng.normal(0.0, 1.0 / math.sqrt(n), size=(cls.HIDDEN, n))
        b1 = np.zeros(cls.HIDDEN)
        w2 = rng.normal(0.0, 1.0 / math.sqrt(cls.HIDDEN),
                        size=(num_classes, cls.HIDDEN))
        b2 = np.zeros(num_classes)
        onehot = np.eye(num_classes)[ys]
        m = xs.shape[0]
        for _ in range(epochs):
            hidden_pre = xs @ w1.T + b1
            hidden = np.maximum(hidden_pre, 0.0)
            logits = hidden @ w2.T + b2
            logits -= logits.max(axis=1, keepdims=True)
            expv = np.exp(logits)
            probs = expv / expv.sum(axis=1, keepdims=True)
            grad_logits = (probs - onehot) / m
            grad_w2 = grad_logits.T @ hidden
            grad_b2 = grad_logits.sum(axis=0)
            grad_hidden = (grad_logits @ w2) * (hidden_pre > 0.0)
            grad_w1 = grad_hidden.T @ xs
            grad_b1 = grad_hidden.sum(axis=0)
            w1 -= lr * grad_w1
            b1 -= lr * grad_b1
            w2 -= lr * grad_w2
            b2 -= lr * grad_b2
        return cls(w1, b1, w2, b2, centers=centers, cluster_std=cluster_std)

    def logits(self, x: np.ndarray) -> np.ndarray:
        hidden = np.maximum(self.w1 @ x + self.b1, 0.0)
        return self.w2 @ hidden + self.b2

    def classify(self, x: np.ndarray) -> int:
        return int(np.argmax(self.logits(np.asarray(x, dtype=np.float64))))

    def sample_class(self, label: int, rng: np.random.Generator,
                     max_tries: int = 1000) -> np.ndarray:
        """Draw a blob sample that the oracle itself classifies as ``label``."""
        if self.centers is None:
            raise InvalidInput("oracle has no blob centers to sample from")
        for _ in range(max_tries):
            x = self.centers[label] + self.cluster_std * rng.normal(size=self.n)
            if self.classify(x) == label:
                return x
        raise InvalidInput(f"could not synthesize a sample of class {label}")

    def save(self, path) -> None:
        np.savez(path, w1=self.w1, b1=self.b1, w2=self.w2, b2=self.b2,
                 centers=self.centers if self.centers is not None else np.zeros(0),
                 cluster_std=self.cluster_std)

    @classmethod
    def load(cls, path) -> "BlobMlpOracle":
        data = np.load(path)
        centers = data["centers"]
        return cls(data["w1"], data["b1"], data["w2"], data["b2"],
                   centers=None if centers.size == 0 else centers,
                   cluster_std=float(data["cluster_std"]))

"""Hard-label models the server can host.

The server only needs a callable returning an integer label for a float64
vector. A linear softmax model (argmax of W @ x + b) ships as the built-in
toy classifier; arbitrary models arrive as .npz weights files with the same
two arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class LinearSoftmaxModel:
    """argmax(W @ x + b); the softmax is monotone so the argmax skips it."""

    weights: np.ndarray   # (classes, n)
    bias: np.ndarray      # (classes,)

    def __post_init__(self):
        if self.weights.ndim != 2 or self.bias.shape != (self.weights.shape[0],):
            raise ValueError("weights must be (classes, n) with matching bias")

    @property
    def n(self) -> int:
        return self.weights.shape[1]

    @property
    def classes(self) -> int:
        return self.weights.shape[0]

    def classify(self, x: np.ndarray) -> int:
        scores = self.weights @ np.asarray(x, dtype=np.float64) + self.bias
        return int(np.argmax(scores))

    def prototype(self, label: int) -> np.ndarray:
        """A vector the model classifies as ``label`` (its own weight row)."""
        return self.weights[label].astype(np.float64)

    def save(self, path) -> None:
        np.savez(path, W=self.weights, b=self.bias)

    @classmethod
    def load(cls, path) -> "LinearSoftmaxModel":
        data = np.load(path)
        return cls(np.asarray(data["W"], np.float64),
                   np.asarray(data["b"], np.float64))

    @classmethod
    def toy(cls, n: int = 16, classes: int = 4, seed: int = 0) -> "LinearSoftmaxModel":
        """Deterministic seeded toy classifier.

        Rows are near-orthogonal Gaussian directions, so each weight row is
        a reliable prototype of its own class.
        """
        rng = np.random.default_rng(seed)
        weights = rng.normal(0.0, 1.0 / np.sqrt(n), size=(classes, n))
        bias = rng.normal(0.0, 0.01, size=classes)
        return cls(weights, bias)

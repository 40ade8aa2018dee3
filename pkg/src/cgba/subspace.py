"""Gaussian probe generation and Monte-Carlo boundary-normal estimation.

Probes are drawn either in full input space or on a low-frequency block of
the per-channel orthonormal 2-D DCT grid (dimension reduced by a factor
``f`` per image side). The boundary normal at a point is estimated as the
normalized sign-weighted sum of the probes, with the sign of each probe
given by the hard-label indicator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.fft import idctn

from .errors import DegenerateEstimate, InvalidConfig
from .geometry import ZERO_NORM

FULL = "full"
DCT = "dct"


@dataclass(frozen=True)
class SubspaceConfig:
    """Where probes are sampled and how wide the Gaussian is.

    ``mode="full"`` draws i.i.d. N(0, sigma^2) pixel-space components.
    ``mode="dct"`` draws the same Gaussian on the top-left
    (channels x floor(h/f) x floor(w/f)) block of DCT-II coefficients and
    maps it to pixel space with the orthonormal inverse transform.
    """

    sigma: float
    mode: str = FULL
    factor: float = 4.0
    image_shape: tuple[int, int, int] | None = None

    def __post_init__(self):
        if self.sigma <= 0:
            raise InvalidConfig("sigma must be positive")
        if self.mode not in (FULL, DCT):
            raise InvalidConfig(f"unknown subspace mode {self.mode!r}")
        if self.mode == DCT:
            if self.image_shape is None or len(self.image_shape) != 3:
                raise InvalidConfig("dct mode needs image_shape=(c, h, w)")
            if self.factor <= 1.0:
                raise InvalidConfig("reduction factor must exceed 1")
            _, h, w = self.image_shape
            if self.block(h) < 1 or self.block(w) < 1:
                raise InvalidConfig("reduction factor leaves an empty block")

    def block(self, side: int) -> int:
        return int(math.floor(side / self.factor))

    @property
    def dimension(self) -> int | None:
        if self.mode == DCT:
            c, h, w = self.image_shape
            return c * h * w
        return None


def full_space(sigma: float) -> SubspaceConfig:
    return SubspaceConfig(sigma=sigma, mode=FULL)


def dct_subspace(sigma: float, image_shape: tuple[int, int, int],
                 factor: float = 4.0) -> SubspaceConfig:
    return SubspaceConfig(sigma=sigma, mode=DCT, factor=factor,
                          image_shape=tuple(image_shape))


@dataclass
class ProbeBatch:
    """A batch of probe vectors and, once queried, their +/-1 outcomes."""

    probes: np.ndarray                       # (count, n)
    signs: np.ndarray | None = field(default=None)

    @property
    def count(self) -> int:
        return self.probes.shape[0]


def sample_probes(cfg: SubspaceConfig, n: int, count: int,
                  rng_seed) -> ProbeBatch:
    """Draw ``count`` i.i.d. Gaussian probes of dimension ``n``.

    Deterministic for a fixed seed. In DCT mode ``n`` must match the
    configured image shape.
    """
    if count < 1:
        raise InvalidConfig("probe count must be >= 1")
    rng = np.random.default_rng(rng_seed)
    if cfg.mode == FULL:
        return ProbeBatch(rng.normal(0.0, cfg.sigma, size=(count, n)))
    c, h, w = cfg.image_shape
    if c * h * w != n:
        raise InvalidConfig(f"image shape {cfg.image_shape} != dimension {n}")
    bh, bw = cfg.block(h), cfg.block(w)
    coeffs = np.zeros((count, c, h, w))
    coeffs[:, :, :bh, :bw] = rng.normal(0.0, cfg.sigma, size=(count, c, bh, bw))
    pixels = idctn(coeffs, type=2, norm="ortho", axes=(2, 3))
    return ProbeBatch(pixels.reshape(count, n))


def estimate_normal(boundary_point: np.ndarray, batch: ProbeBatch,
                    phi) -> np.ndarray:
    """Sign-weighted Monte-Carlo estimate of the boundary normal.

    Queries phi at ``boundary_point + z`` for each probe ``z`` in index
    order (the summation order is fixed so results are bit-reproducible),
    consuming exactly ``batch.count`` queries. The estimate points toward
    the adversarial side.
    """
    if batch.count < 1:
        raise InvalidConfig("empty probe batch")
    signs = np.empty(batch.count, dtype=np.float64)
    for i in range(batch.count):
        signs[i] = phi(boundary_point + batch.probes[i])
    batch.signs = signs
    weighted = signs[:, None] * batch.probes
    total = np.zeros_like(boundary_point, dtype=np.float64)
    for i in range(batch.count):
        total += weighted[i]
    norm = float(np.linalg.norm(total))
    if norm < ZERO_NORM:
        raise DegenerateEstimate("probe signs cancelled to a zero sum")
    return total / norm


def query_schedule(n0: int, t: int) -> int:
    """Probe count for iteration ``t``: round(n0 * sqrt(t)), at least 1."""
    if n0 < 1 or t < 1:
        raise InvalidConfig("n0 and t must be >= 1")
    return max(1, int(np.rint(n0 * math.sqrt(t))))

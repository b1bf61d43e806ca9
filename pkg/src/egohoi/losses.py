"""Reference implementations of the depth and contact-state training losses.

Depth loss::

    alpha * L_ssim(edges(d), edges(d*)) + beta * L_ssim(d, d*) + gamma * mean|d - d*|

on depth maps normalized to [0, 1], with ``L_ssim = 1 - mean SSIM`` and Sobel
edge maps. Contact-state loss is the sum of three binary cross-entropies:
the RGB branch, the multimodal branch, and their convex fusion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

DEFAULT_MAX_DEPTH = 5.0
BCE_EPS = 1e-7
DEFAULT_FUSION_WEIGHT = 0.5

_SOBEL_SCALE = 1.0 / (4.0 * math.sqrt(2.0))


class DimensionMismatch(ValueError):
    pass


class RasterTooSmall(ValueError):
    pass


@dataclass(frozen=True)
class DepthLossWeights:
    alpha: float = 0.85
    beta: float = 0.9
    gamma: float = 0.9

    def __post_init__(self) -> None:
        if min(self.alpha, self.beta, self.gamma) < 0:
            raise ValueError("depth loss weights must be non-negative")


@dataclass(frozen=True)
class SsimParams:
    window: int = 11
    sigma: float = 1.5
    dynamic_range: float = 1.0
    k1: float = 0.01
    k2: float = 0.03

    @property
    def c1(self) -> float:
        return (self.k1 * self.dynamic_range) ** 2

    @property
    def c2(self) -> float:
        return (self.k2 * self.dynamic_range) ** 2

    def kernel(self) -> np.ndarray:
        r = np.arange(self.window, dtype=np.float64) - (self.window - 1) / 2.0
        g = np.exp(-(r**2) / (2.0 * self.sigma**2))
        g /= g.sum()
        return np.outer(g, g)


@dataclass(frozen=True)
class DepthLossTerms:
    edge_ssim: float
    depth_ssim: float
    l1: float
    weights: DepthLossWeights

    @property
    def total(self) -> float:
        w = self.weights
        return w.alpha * self.edge_ssim + w.beta * self.depth_ssim + w.gamma * self.l1


@dataclass(frozen=True)
class ContactPrediction:
    cs_rgb: float
    cs_mm: float
    fusion_weight: float = DEFAULT_FUSION_WEIGHT

    @property
    def cs_lf(self) -> float:
        return fuse_contact(self.cs_rgb, self.cs_mm, self.fusion_weight)


def normalize_depth(depth: np.ndarray, max_depth: float = DEFAULT_MAX_DEPTH) -> np.ndarray:
    """Metric depth to [0, 1]; no-hit pixels (0.0) stay 0."""
    if max_depth <= 0:
        raise ValueError("max_depth must be positive")
    return np.clip(np.asarray(depth, dtype=np.float64) / max_depth, 0.0, 1.0)


def _pair(a, b) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 2:
        raise DimensionMismatch(f"expected equal 2-D rasters, got {a.shape} and {b.shape}")
    return a, b


def sobel_edges(d) -> np.ndarray:
    """Sobel gradient magnitude with replicated borders, scaled to [0, 1]
    for inputs in [0, 1]."""
    d = np.asarray(d, dtype=np.float64)
    if d.ndim != 2 or min(d.shape) < 3:
        raise RasterTooSmall(f"need a 2-D raster of at least 3x3, got {d.shape}")
    p = np.pad(d, 1, mode="edge")
    # differences first, so flat regions give exactly zero
    dx = p[:, 2:] - p[:, :-2]
    dy = p[2:, :] - p[:-2, :]
    gx = dx[:-2] + 2.0 * dx[1:-1] + dx[2:]
    gy = dy[:, :-2] + 2.0 * dy[:, 1:-1] + dy[:, 2:]
    return np.clip(np.hypot(gx, gy) * _SOBEL_SCALE, 0.0, 1.0)


def ssim_map(a, b, params: SsimParams = SsimParams()) -> np.ndarray:
    a, b = _pair(a, b)
    k = params.kernel()

    def blur(x):
        return ndimage.correlate(x, k, mode="reflect")

    mu_a, mu_b = blur(a), blur(b)
    var_a = blur(a * a) - mu_a * mu_a
    var_b = blur(b * b) - mu_b * mu_b
    cov = blur(a * b) - mu_a * mu_b
    c1, c2 = params.c1, params.c2
    num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)
    den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
    return num / den


def ssim_loss(a, b, params: SsimParams = SsimParams()) -> float:
    return float(1.0 - ssim_map(a, b, params).mean())


def l1_loss(a, b) -> float:
    a, b = _pair(a, b)
    return float(np.abs(a - b).mean())


def depth_loss_terms(d, d_star, weights: DepthLossWeights = DepthLossWeights(),
                     params: SsimParams = SsimParams()) -> DepthLossTerms:
    d, d_star = _pair(d, d_star)
    return DepthLossTerms(
        edge_ssim=ssim_loss(sobel_edges(d), sobel_edges(d_star), params),
        depth_ssim=ssim_loss(d, d_star, params),
        l1=l1_loss(d, d_star),
        weights=weights,
    )


def depth_loss(d, d_star, weights: DepthLossWeights = DepthLossWeights(),
               params: SsimParams = SsimParams()) -> float:
    """Inputs are depth maps already normalized to [0, 1] (see normalize_depth)."""
    return depth_loss_terms(d, d_star, weights, params).total


def bce(p: float, y: int) -> float:
    p = min(max(float(p), BCE_EPS), 1.0 - BCE_EPS)
    return -(y * math.log(p) + (1 - y) * math.log(1.0 - p))


def fuse_contact(cs_rgb: float, cs_mm: float, w: float = DEFAULT_FUSION_WEIGHT) -> float:
    return w * cs_rgb + (1.0 - w) * cs_mm


def contact_state_loss(cs_rgb: float, cs_mm: float, w: float, y: int) -> float:
    """Sum of the RGB-branch, multimodal-branch and fused BCE terms."""
    return bce(cs_rgb, y) + bce(cs_mm, y) + bce(fuse_contact(cs_rgb, cs_mm, w), y)

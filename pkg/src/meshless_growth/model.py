"""Capital-technology growth model: production function and coefficients.

The capital field obeys a diffusion equation with a technology-directed
taxis flux, production A*f(k), and linear depreciation; technology grows
at a position-dependent relative rate g and may itself diffuse:

    dk/dt = lap(k) - div(chi * k * grad(A)) + A f(k) - delta k
    dA/dt = d * lap(A) + A g(x)

with zero normal derivative of both fields on the boundary.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cloud import NodeCloud


@dataclass(frozen=True)
class GrowthSpec:
    """Relative technology growth rate g as a function of position."""

    kind: str = "constant"  # constant | gaussian
    level: float = 0.0
    center: tuple[float, ...] = (0.5,)
    sigma: float = 0.2

    def __post_init__(self):
        if self.kind not in ("constant", "gaussian"):
            raise ValueError(f"unknown growth kind {self.kind!r}")
        if self.kind == "gaussian" and self.sigma <= 0:
            raise ValueError("gaussian growth needs sigma > 0")


@dataclass(frozen=True)
class ModelParams:
    """Model coefficients.  Production is f(k) = a1 k^p / (1 + a2 k^q)."""

    alpha1: float = 1.0
    alpha2: float = 1.0
    p: float = 2.0
    q: float = 3.0
    delta: float = 0.05          # depreciation rate
    chi: float = 0.0             # taxis sensitivity toward technology
    tech_diffusion: float = 0.0  # d in the technology equation
    g_spec: GrowthSpec = field(default_factory=GrowthSpec)

    def __post_init__(self):
        if self.alpha1 < 0 or self.alpha2 < 0:
            raise ValueError("alpha1 and alpha2 must be nonnegative")
        if self.p <= 0 or self.q <= 0:
            raise ValueError("production exponents must be positive")
        if self.delta < 0:
            raise ValueError("delta must be nonnegative")
        if self.tech_diffusion < 0:
            raise ValueError("tech_diffusion must be nonnegative")


def production(k, params: ModelParams):
    """f(k) = a1 k^p / (1 + a2 k^q), elementwise; requires k >= 0."""
    k = np.asarray(k, dtype=float)
    if np.any(k < 0):
        raise ValueError("production requires nonnegative capital")
    out = params.alpha1 * k ** params.p / (1.0 + params.alpha2 * k ** params.q)
    return out if out.ndim else float(out)


def production_derivative(k, params: ModelParams):
    """f'(k) = a1 k^(p-1) [p + a2 (p-q) k^q] / (1 + a2 k^q)^2.

    Singular at k = 0 when p < 1.
    """
    k = np.asarray(k, dtype=float)
    if np.any(k < 0):
        raise ValueError("production_derivative requires nonnegative capital")
    if params.p < 1 and np.any(k == 0):
        raise ValueError("f'(0) is singular for p < 1")
    kq = params.alpha2 * k ** params.q
    out = params.alpha1 * k ** (params.p - 1.0) * (params.p + (params.p - params.q) * kq)
    out = out / (1.0 + kq) ** 2
    return out if out.ndim else float(out)


def tech_rate(position, spec: GrowthSpec) -> float:
    """Growth rate g at a single position."""
    if spec.kind == "constant":
        return spec.level
    pos = np.asarray(position, dtype=float).ravel()
    center = np.asarray(spec.center, dtype=float).ravel()
    if pos.size != center.size:
        raise ValueError(f"position has {pos.size} coordinates, center has {center.size}")
    r2 = float(((pos - center) ** 2).sum())
    return spec.level * float(np.exp(-r2 / (2.0 * spec.sigma ** 2)))


def tech_rate_field(cloud: NodeCloud, spec: GrowthSpec) -> np.ndarray:
    """g evaluated at every cloud node."""
    if spec.kind == "constant":
        return np.full(cloud.n_nodes, spec.level)
    center = np.asarray(spec.center, dtype=float).ravel()
    if center.size != cloud.dim:
        raise ValueError(f"growth center has {center.size} coordinates for a {cloud.dim}D cloud")
    r2 = ((cloud.positions - center) ** 2).sum(axis=1)
    return spec.level * np.exp(-r2 / (2.0 * spec.sigma ** 2))

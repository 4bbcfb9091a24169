"""Difference stencils on stars via weighted second-order Taylor fits.

For a star with offsets c_i the fit minimizes sum_i w_i^2 (U0 - Ui + c_i.d)^2
over the derivative vector d, which leads to the moment system

    (sum_i w_i^2 c_i c_i^T) d = -sum_i w_i^2 (U0 - Ui) c_i.

Solving once per star yields coefficient vectors m_i = w_i^2 M^{-1} c_i with
center vector m_0 = sum_i m_i, so any derivative is evaluated as
-m_0j U0 + sum_i m_ij Ui.  Offsets are normalized by the star radius before
assembly so the moment matrix stays well conditioned on tight clusters; the
coefficients are scaled back afterwards.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .cloud import NodeCloud, Star, select_star
from .errors import DegenerateStarError

# Reciprocal-condition floor below which a moment matrix is rejected.
RCOND_FLOOR = 1e-12

DERIV_NAMES = {1: ("x", "xx"), 2: ("x", "y", "xx", "yy", "xy")}
# Differentiation order of each component; coefficients unscale by r^-order.
DERIV_ORDERS = {1: (1, 2), 2: (1, 1, 2, 2, 2)}


@dataclass(frozen=True)
class WeightSpec:
    """Weight function choice for the Taylor fit.

    potential:   w(d) = d^(-exponent)
    exponential: w(d) = exp(-shape * (d / r_star)^2)
    """

    kind: str = "potential"
    exponent: float = 3.0
    shape: float = 6.0

    def __post_init__(self):
        if self.kind not in ("potential", "exponential"):
            raise ValueError(f"unknown weight kind {self.kind!r}")
        if self.exponent <= 0:
            raise ValueError("exponent must be positive")
        if self.shape <= 0:
            raise ValueError("shape must be positive")


def weight(distance, spec: WeightSpec, star_radius: float = 1.0):
    """Evaluate the weight at one or more distances (all strictly positive)."""
    d = np.asarray(distance, dtype=float)
    if np.any(d <= 0):
        raise ValueError("weight requires strictly positive distances")
    if spec.kind == "potential":
        return d ** (-spec.exponent)
    return np.exp(-spec.shape * (d / star_radius) ** 2)


def _taylor_rows(offsets: np.ndarray, dim: int) -> np.ndarray:
    if dim == 1:
        h = offsets[:, 0]
        return np.column_stack([h, 0.5 * h ** 2])
    h, k = offsets[:, 0], offsets[:, 1]
    return np.column_stack([h, k, 0.5 * h ** 2, 0.5 * k ** 2, h * k])


def assemble_moment_matrix(star: Star, spec: WeightSpec) -> np.ndarray:
    """Moment matrix sum_i w_i^2 c_i c_i^T over radius-scaled offsets."""
    dim = star.offsets.shape[1]
    scaled = star.offsets / star.radius
    dist = np.sqrt((scaled ** 2).sum(axis=1))
    w = weight(dist, spec, star_radius=1.0)
    c = _taylor_rows(scaled, dim)
    return (c * (w ** 2)[:, None]).T @ c


@dataclass(frozen=True)
class Stencil:
    """Per-star derivative coefficients.

    neighbor_coeffs[i, j] multiplies neighbor i in derivative j (order given
    by DERIV_NAMES for the dimension); center_coeffs[j] multiplies the center
    with a minus sign.  The Laplacian row combines the pure second-derivative
    components.
    """

    center_coeffs: np.ndarray    # (nd,)
    neighbor_coeffs: np.ndarray  # (s, nd)
    dim: int

    @property
    def laplacian_center(self) -> float:
        if self.dim == 1:
            return float(self.center_coeffs[1])
        return float(self.center_coeffs[2] + self.center_coeffs[3])

    @property
    def laplacian_neighbors(self) -> np.ndarray:
        if self.dim == 1:
            return self.neighbor_coeffs[:, 1]
        return self.neighbor_coeffs[:, 2] + self.neighbor_coeffs[:, 3]


def compute_stencil(star: Star, spec: WeightSpec) -> Stencil:
    """Solve the moment system of one star.

    Raises DegenerateStarError when the moment matrix is not positive
    definite to reciprocal condition RCOND_FLOOR.
    """
    dim = star.offsets.shape[1]
    r = star.radius
    scaled = star.offsets / r
    dist = np.sqrt((scaled ** 2).sum(axis=1))
    if np.any(dist == 0):
        raise ValueError(f"star at node {star.center} contains a zero offset")
    w = weight(dist, spec, star_radius=1.0)
    c = _taylor_rows(scaled, dim)
    m = (c * (w ** 2)[:, None]).T @ c

    eig = np.linalg.eigvalsh(m)
    if eig[0] <= 0 or eig[0] < RCOND_FLOOR * eig[-1]:
        raise DegenerateStarError(star.center, f"moment matrix rcond {eig[0] / eig[-1]:.2e}")
    try:
        chol = np.linalg.cholesky(m)
    except np.linalg.LinAlgError as exc:
        raise DegenerateStarError(star.center, str(exc)) from exc
    q = np.linalg.inv(chol).T  # M^{-1} = Q Q^T
    minv = q @ q.T

    coeffs = (w ** 2)[:, None] * (c @ minv)  # rows are m_i in scaled coords
    scale = r ** np.asarray(DERIV_ORDERS[dim], dtype=float)
    coeffs = coeffs / scale
    center = coeffs.sum(axis=0)
    return Stencil(center_coeffs=center, neighbor_coeffs=coeffs, dim=dim)


def apply_stencil(stencil: Stencil, center_value: float, neighbor_values) -> np.ndarray:
    """Evaluate all derivative components: -m_0j U0 + sum_i m_ij Ui."""
    vals = np.asarray(neighbor_values, dtype=float)
    if vals.shape != (stencil.neighbor_coeffs.shape[0],):
        raise ValueError(
            f"expected {stencil.neighbor_coeffs.shape[0]} neighbor values, got {vals.shape}"
        )
    return vals @ stencil.neighbor_coeffs - center_value * stencil.center_coeffs


class StencilTable:
    """All stars and stencils of a cloud, packed for vectorized evaluation."""

    def __init__(self, cloud: NodeCloud, stars: list[Star], stencils: list[Stencil]):
        if len(stars) != cloud.n_nodes or len(stencils) != cloud.n_nodes:
            raise ValueError("table must hold one star and stencil per node")
        self.cloud = cloud
        self.stars = stars
        self.stencils = stencils
        s = stars[0].size
        self.neighbors = np.vstack([st.neighbors for st in stars])          # (N, s)
        self.neighbor_coeffs = np.stack([sc.neighbor_coeffs for sc in stencils])
        self.center_coeffs = np.vstack([sc.center_coeffs for sc in stencils])
        if self.neighbors.shape != (cloud.n_nodes, s):
            raise ValueError("all stars must share the same size")

    @property
    def dim(self) -> int:
        return self.cloud.dim

    def derivatives(self, field: np.ndarray) -> np.ndarray:
        """All derivative components at every node, shape (N, nd)."""
        gathered = field[self.neighbors]  # (N, s)
        return (
            np.einsum("nsd,ns->nd", self.neighbor_coeffs, gathered)
            - self.center_coeffs * field[:, None]
        )

    def laplacian_parts(self, derivs: np.ndarray) -> np.ndarray:
        if self.dim == 1:
            return derivs[:, 1]
        return derivs[:, 2] + derivs[:, 3]

    def laplacian(self, field: np.ndarray) -> np.ndarray:
        return self.laplacian_parts(self.derivatives(field))


def _thread_count() -> int:
    raw = os.environ.get("MESHLESS_GROWTH_THREADS", "1")
    try:
        n = int(raw)
    except ValueError as exc:
        raise ValueError(f"MESHLESS_GROWTH_THREADS must be an integer, got {raw!r}") from exc
    if n < 1:
        raise ValueError(f"MESHLESS_GROWTH_THREADS must be >= 1, got {n}")
    return n


def build_all_stencils(
    cloud: NodeCloud,
    s: int,
    criterion: str = "distance",
    spec: WeightSpec | None = None,
    threads: int | None = None,
) -> StencilTable:
    """Select a star and solve its stencil for every node (boundary included).

    threads defaults to the MESHLESS_GROWTH_THREADS environment variable;
    results do not depend on the thread count.
    """
    spec = spec or WeightSpec()
    threads = _thread_count() if threads is None else threads
    indices = range(cloud.n_nodes)

    def build_one(i: int):
        star = select_star(cloud, i, s, criterion)
        return star, compute_stencil(star, spec)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            pairs = list(pool.map(build_one, indices))
    else:
        pairs = [build_one(i) for i in indices]
    stars = [p[0] for p in pairs]
    stencils = [p[1] for p in pairs]
    return StencilTable(cloud, stars, stencils)

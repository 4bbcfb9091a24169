"""Per-star step bound for the explicit scheme.

Freezing coefficients at one time level, the update at a star stays a
contraction when

    0 < m00 + Phi1 - Phi2          (sign condition)
    dt < 2 / (m00 + Phi1 + Phi2)   (step bound)

where m00 is the center Laplacian coefficient, Phi1 collects the signed
reaction, taxis and depreciation contributions at the center, and Phi2
majorizes the neighbor couplings by absolute value.  The terms multiplying
the technology error act as a forcing that vanishes under refinement and do
not enter the bound.  The bound is evaluated at every interior star (boundary
nodes are set by the flux condition, not by the explicit update) and the
sharpest one is reported.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import NoAdmissibleTimeStepError
from .model import ModelParams, production_derivative
from .scheme import State
from .stencil import Stencil, StencilTable
from .cloud import Star

log = logging.getLogger(__name__)

F_PRIME_MODES = ("local", "conservative")


def _f_prime(k_center: float, k_field: np.ndarray, params: ModelParams, mode: str) -> float:
    """Slope of the production term entering Phi1.

    local: f' at the center's current capital (stand-in for the mean-value
    point); conservative: sup |f'| over [k_floor, max k].  The p < 1
    singularity at k = 0 falls back to the one-sided sup, logged.
    """
    k_max = max(float(np.max(k_field)), 0.0)
    floor = 1e-8 * max(1.0, k_max)

    def sup_over(lo: float, hi: float) -> float:
        grid = np.geomspace(max(lo, floor), max(hi, floor * 10.0), 64)
        return float(np.max(np.abs(production_derivative(grid, params))))

    if mode == "conservative":
        return sup_over(floor, k_max)
    k0 = max(float(k_center), 0.0)
    if params.p < 1 and k0 == 0.0:
        log.warning("f' singular at k=0 (p=%g); using sup over [%g, %g]",
                    params.p, floor, k_max)
        return sup_over(floor, k_max)
    return float(production_derivative(k0, params))


def phi_terms(
    stencil: Stencil,
    star: Star,
    k_field: np.ndarray,
    A_field: np.ndarray,
    params: ModelParams,
    *,
    f_prime_mode: str = "local",
) -> tuple[float, float]:
    """Phi1 and Phi2 of one star evaluated on the current fields."""
    if f_prime_mode not in F_PRIME_MODES:
        raise ValueError(f"unknown f_prime_mode {f_prime_mode!r}")
    a0 = float(A_field[star.center])
    ai = A_field[star.neighbors]
    m00 = stencil.laplacian_center
    mi0 = stencil.laplacian_neighbors
    chi = params.chi

    fp = _f_prime(k_field[star.center], k_field, params, f_prime_mode)
    lap_a = -m00 * a0 + float(mi0 @ ai)

    phi1 = params.delta - a0 * fp - chi * lap_a
    phi2 = float(np.abs(mi0).sum())
    grad_components = 1 if stencil.dim == 1 else 2
    for j in range(grad_components):
        m0j = float(stencil.center_coeffs[j])
        mij = stencil.neighbor_coeffs[:, j]
        moment = float(mij @ ai)
        phi1 += chi * m0j ** 2 * a0 + chi * m0j * moment
        phi2 += abs(chi * m0j * a0) * float(np.abs(mij).sum())
        phi2 += abs(chi) * float(np.abs(mij).sum()) * abs(moment)
    return float(phi1), float(phi2)


def check_condition(
    stencil: Stencil,
    star: Star,
    k_field: np.ndarray,
    A_field: np.ndarray,
    params: ModelParams,
    *,
    f_prime_mode: str = "local",
) -> tuple[bool, float]:
    """Sign condition margin m00 + Phi1 - Phi2; positive means admissible."""
    phi1, phi2 = phi_terms(stencil, star, k_field, A_field, params,
                           f_prime_mode=f_prime_mode)
    margin = stencil.laplacian_center + phi1 - phi2
    return margin > 0, float(margin)


@dataclass(frozen=True)
class StarStability:
    node: int
    phi1: float
    phi2: float
    margin: float
    dt_max: float | None
    condition_ok: bool


@dataclass(frozen=True)
class StabilityReport:
    per_star: tuple[StarStability, ...]
    global_dt: float
    violations: tuple[int, ...]  # nodes failing the sign condition


def dt_bound(
    table: StencilTable,
    state: State,
    params: ModelParams,
    *,
    f_prime_mode: str = "local",
) -> StabilityReport:
    """Evaluate the bound at every interior star and take the minimum.

    Stars failing the sign condition are listed in violations; when any star
    passes it, the global bound is the minimum over passing stars, otherwise
    it falls back to the minimum finite bound (the marginal case m00 = Phi2,
    e.g. pure diffusion with delta = 0, has zero margin yet a perfectly
    usable bound).  All stars without a positive denominator is an error.
    """
    rows: list[StarStability] = []
    for node in table.cloud.interior_indices:
        node = int(node)
        stencil = table.stencils[node]
        star = table.stars[node]
        phi1, phi2 = phi_terms(stencil, star, state.k, state.A, params,
                               f_prime_mode=f_prime_mode)
        m00 = stencil.laplacian_center
        margin = m00 + phi1 - phi2
        denom = m00 + phi1 + phi2
        dt_max = 2.0 / denom if denom > 0 else None
        rows.append(StarStability(node, phi1, phi2, float(margin), dt_max, margin > 0))

    admissible = [r.dt_max for r in rows if r.condition_ok and r.dt_max is not None]
    finite = [r.dt_max for r in rows if r.dt_max is not None]
    if admissible:
        global_dt = min(admissible)
    elif finite:
        global_dt = min(finite)
    else:
        raise NoAdmissibleTimeStepError("no star yields a positive step bound")
    violations = tuple(r.node for r in rows if not r.condition_ok)
    return StabilityReport(tuple(rows), float(global_dt), violations)

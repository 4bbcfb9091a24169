"""Node clouds on rectangular domains and star (neighborhood) selection.

A cloud is a scattered set of nodes covering [0, L]^dim for dim 1 or 2.
Boundary nodes carry outward unit normals; corners get the normalized sum
of the adjacent edge normals.  Stars are the per-node neighbor sets the
difference stencils are built on.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CloudError, InsufficientNodesError

# Tolerance (relative to L) for deciding that a node sits on a face.
BOUNDARY_TOL = 1e-12


@dataclass(frozen=True)
class NodeCloud:
    """Scattered nodes over [0, length]^dim with boundary flags and normals."""

    dim: int
    positions: np.ndarray  # (N, dim)
    boundary: np.ndarray   # (N,) bool
    normals: np.ndarray    # (N, dim), zero rows for interior nodes
    length: float

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise CloudError(f"dim must be 1 or 2, got {self.dim}")
        if self.length <= 0:
            raise CloudError(f"length must be positive, got {self.length}")
        pos = np.asarray(self.positions, dtype=float)
        if pos.ndim != 2 or pos.shape[1] != self.dim:
            raise CloudError(f"positions must have shape (N, {self.dim})")
        tol = BOUNDARY_TOL * self.length
        if pos.min() < -tol or pos.max() > self.length + tol:
            raise CloudError("positions fall outside [0, length]^dim")
        uniq = np.unique(pos, axis=0)
        if uniq.shape[0] != pos.shape[0]:
            raise CloudError("cloud contains coincident nodes")
        onface = self._face_distance(pos) <= tol
        if np.any(np.asarray(self.boundary, dtype=bool) & ~onface):
            raise CloudError("node flagged boundary does not lie on the boundary")

    def _face_distance(self, pos: np.ndarray) -> np.ndarray:
        return np.minimum(pos, self.length - pos).min(axis=1)

    @property
    def n_nodes(self) -> int:
        return self.positions.shape[0]

    @property
    def interior_indices(self) -> np.ndarray:
        return np.flatnonzero(~self.boundary)

    @property
    def boundary_indices(self) -> np.ndarray:
        return np.flatnonzero(self.boundary)

    def spacing_estimate(self) -> float:
        """Median nearest-neighbor distance; the h used by refinement studies."""
        diffs = self.positions[:, None, :] - self.positions[None, :, :]
        dist = np.sqrt((diffs ** 2).sum(axis=2))
        np.fill_diagonal(dist, np.inf)
        return float(np.median(dist.min(axis=1)))


@dataclass(frozen=True)
class Star:
    """A center node with its selected neighbors.

    offsets[i] is positions[neighbors[i]] - positions[center]; radius is the
    largest offset norm and is the scale the stencil solve normalizes by.
    """

    center: int
    neighbors: np.ndarray  # (s,) int
    offsets: np.ndarray    # (s, dim)
    radius: float = field(default=0.0)

    def __post_init__(self):
        nbrs = np.asarray(self.neighbors, dtype=int)
        if nbrs.size == 0:
            raise ValueError("star needs at least one neighbor")
        if np.unique(nbrs).size != nbrs.size or self.center in nbrs:
            raise ValueError("star neighbors must be distinct and exclude the center")
        r = float(np.sqrt((np.asarray(self.offsets) ** 2).sum(axis=1)).max())
        object.__setattr__(self, "radius", r)

    @property
    def size(self) -> int:
        return int(np.asarray(self.neighbors).size)


def _edge_normals(dim: int, pos: np.ndarray, length: float) -> np.ndarray:
    """Outward normals from face membership; corners sum adjacent faces."""
    tol = BOUNDARY_TOL * length
    n = np.zeros_like(pos)
    for axis in range(dim):
        n[pos[:, axis] <= tol, axis] -= 1.0
        n[pos[:, axis] >= length - tol, axis] += 1.0
    norms = np.sqrt((n ** 2).sum(axis=1, keepdims=True))
    nz = norms[:, 0] > 0
    n[nz] /= norms[nz]
    return n


def _lattice(nodes_per_axis: int, length: float, dim: int):
    if nodes_per_axis < 2:
        raise CloudError("nodes_per_axis must be at least 2")
    axis = np.linspace(0.0, length, nodes_per_axis)
    if dim == 1:
        pos = axis[:, None]
    else:
        xx, yy = np.meshgrid(axis, axis, indexing="xy")
        pos = np.column_stack([xx.ravel(), yy.ravel()])
    return pos


def generate_regular(nodes_per_axis: int, length: float = 1.0, dim: int = 1) -> NodeCloud:
    """Uniform lattice over [0, length]^dim."""
    if dim not in (1, 2):
        raise CloudError(f"dim must be 1 or 2, got {dim}")
    pos = _lattice(nodes_per_axis, length, dim)
    tol = BOUNDARY_TOL * length
    onface = np.minimum(pos, length - pos).min(axis=1) <= tol
    return NodeCloud(dim, pos, onface, _edge_normals(dim, pos, length), length)


def generate_jittered(
    nodes_per_axis: int,
    length: float = 1.0,
    dim: int = 1,
    jitter: float = 0.2,
    seed: int = 0,
) -> NodeCloud:
    """Lattice perturbed by uniform noise of at most jitter*h per axis.

    Interior nodes move freely; 2D edge nodes move only along their edge so
    the boundary stays on the boundary; corners are pinned.  jitter < 0.49
    keeps the node ordering intact, so neighbors never cross.
    """
    if not 0.0 <= jitter < 0.49:
        raise CloudError(f"jitter must lie in [0, 0.49), got {jitter}")
    if dim not in (1, 2):
        raise CloudError(f"dim must be 1 or 2, got {dim}")
    pos = _lattice(nodes_per_axis, length, dim)
    h = length / (nodes_per_axis - 1)
    rng = np.random.default_rng(seed)
    shift = rng.uniform(-jitter * h, jitter * h, size=pos.shape)
    tol = BOUNDARY_TOL * length
    for axis in range(dim):
        onface = (pos[:, axis] <= tol) | (pos[:, axis] >= length - tol)
        shift[onface, axis] = 0.0  # never move a node off its face
    pos = pos + shift
    onface = np.minimum(pos, length - pos).min(axis=1) <= tol
    return NodeCloud(dim, pos, onface, _edge_normals(dim, pos, length), length)


def save_cloud(cloud: NodeCloud, path) -> None:
    """Write the cloud as CSV with header x[,y],boundary at full precision."""
    header = ["x", "boundary"] if cloud.dim == 1 else ["x", "y", "boundary"]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for p, b in zip(cloud.positions, cloud.boundary):
            writer.writerow([repr(float(v)) for v in p] + [int(b)])


def load_cloud(path) -> NodeCloud:
    """Read a cloud CSV (header x[,y],boundary); normals are recomputed.

    The domain length is inferred as the largest coordinate present, so a
    valid file must include nodes on the far faces.
    """
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise CloudError(f"{path}: empty cloud file")
    header = [c.strip() for c in rows[0]]
    if header == ["x", "boundary"]:
        dim = 1
    elif header == ["x", "y", "boundary"]:
        dim = 2
    else:
        raise CloudError(f"{path}: header must be x[,y],boundary, got {header}")
    pos, flags = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != dim + 1:
            raise CloudError(f"{path}:{lineno}: expected {dim + 1} columns, got {len(row)}")
        try:
            pos.append([float(v) for v in row[:dim]])
            flag = int(row[dim])
        except ValueError as exc:
            raise CloudError(f"{path}:{lineno}: {exc}") from exc
        if flag not in (0, 1):
            raise CloudError(f"{path}:{lineno}: boundary flag must be 0 or 1")
        flags.append(bool(flag))
    if not pos:
        raise CloudError(f"{path}: no nodes")
    positions = np.asarray(pos, dtype=float)
    length = float(positions.max())
    normals = _edge_normals(dim, positions, length)
    return NodeCloud(dim, positions, np.asarray(flags), normals, length)


def _ranked_candidates(cloud: NodeCloud, center: int):
    """All other nodes ordered by distance, ties broken by ascending index."""
    offsets = cloud.positions - cloud.positions[center]
    dist = np.sqrt((offsets ** 2).sum(axis=1))
    idx = np.arange(cloud.n_nodes)
    keep = idx != center
    idx, dist = idx[keep], dist[keep]
    order = np.lexsort((idx, dist))
    return idx[order], dist[order], offsets


def _quadrant_of(h: float, k: float) -> int:
    # Half-open, rotationally symmetric partition: each positive half-axis
    # belongs to the quadrant counterclockwise from it.  On a lattice this
    # assigns one axis neighbor and one diagonal neighbor to every quadrant.
    if h > 0 and k >= 0:
        return 0
    if h <= 0 and k > 0:
        return 1
    if h < 0 and k <= 0:
        return 2
    return 3


def select_star(cloud: NodeCloud, center: int, s: int, criterion: str = "distance") -> Star:
    """Pick s neighbors of ``center`` by the given criterion.

    distance: the s nearest nodes, distance ties broken by node index.
    quadrant (2D only): nearest ceil(s/4) per sign quadrant of the offset,
    cycling quadrants and falling back to global nearest when quadrants
    run short.
    """
    min_s = 2 if cloud.dim == 1 else 5
    if s < min_s:
        raise ValueError(f"s must be at least {min_s} in {cloud.dim}D, got {s}")
    if s > cloud.n_nodes - 1:
        raise InsufficientNodesError(
            f"star of size {s} requested but only {cloud.n_nodes - 1} candidates exist"
        )
    ranked, _, offsets = _ranked_candidates(cloud, center)

    if criterion == "distance":
        chosen = ranked[:s]
    elif criterion == "quadrant":
        if cloud.dim != 2:
            raise ValueError("quadrant criterion requires a 2D cloud")
        buckets: list[list[int]] = [[], [], [], []]
        for i in ranked:
            h, k = offsets[i]
            buckets[_quadrant_of(h, k)].append(i)
        chosen_list: list[int] = []
        rounds = math.ceil(s / 4)
        for r in range(rounds):
            for bucket in buckets:
                if len(chosen_list) < s and r < len(bucket):
                    chosen_list.append(bucket[r])
        if len(chosen_list) < s:  # short quadrants: top up with global nearest
            taken = set(chosen_list)
            for i in ranked:
                if i not in taken:
                    chosen_list.append(i)
                    if len(chosen_list) == s:
                        break
        chosen = np.asarray(chosen_list, dtype=int)
    else:
        raise ValueError(f"unknown star criterion {criterion!r}")

    return Star(center=center, neighbors=chosen, offsets=offsets[chosen])

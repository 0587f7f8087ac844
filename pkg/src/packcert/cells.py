"""4-cells (small empty-circumsphere tetrahedra), critical edges, and cell scores.

A 4-cell here is a quadruple of centers with positive volume, circumradius
strictly below sqrt(2), and no other center strictly inside its circumsphere.
Cells with fewer packing points are not constructed, so cluster sums are
partial and never sign-checked.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable

import numpy as np

from .errors import DegenerateInput
from .geom import TOL, Circumsphere, circumsphere, dihedral_angle, solid_angle_cone, tetra_volume
from .packing import Packing
from .score import CONSTANTS, L, SQRT2, beta0
from .voronoi import check_region

CRITICAL_TOL = 1e-12
PARTIAL_LABEL = "partial (k<=3 cells omitted)"


@dataclass(frozen=True, order=True)
class Edge:
    i: int
    j: int
    h: float = field(compare=False)

    def __post_init__(self):
        if self.i > self.j:
            a, b = self.j, self.i
            object.__setattr__(self, "i", a)
            object.__setattr__(self, "j", b)

    @property
    def key(self) -> tuple[int, int]:
        return (self.i, self.j)

    def is_critical(self) -> bool:
        c = CONSTANTS
        return c.h_minus - CRITICAL_TOL <= self.h <= c.h_plus + CRITICAL_TOL


@dataclass(frozen=True)
class FourCell:
    vertices: tuple[int, int, int, int]
    points: np.ndarray
    circumsphere: Circumsphere
    volume: float
    solid_angles: tuple[float, float, float, float]
    dihedrals: dict[tuple[int, int], float]
    cospherical: bool = False

    @property
    def tsol(self) -> float:
        return math.fsum(self.solid_angles)

    @property
    def diameter(self) -> float:
        d = self.points[:, None, :] - self.points[None, :, :]
        return float(np.sqrt(np.max(np.sum(d * d, axis=-1))))


@dataclass(frozen=True)
class CellCluster:
    edge: Edge
    four_cells: list[FourCell]


def make_four_cell(indices, points, cospherical: bool = False) -> FourCell:
    """Build a FourCell with its cached angles; `indices` label the four points."""
    order = np.argsort(indices)
    idx = tuple(int(indices[k]) for k in order)
    pts = np.array([points[k] for k in order], dtype=float)
    sph = circumsphere(pts)
    sol = []
    for a in range(4):
        others = [pts[b] for b in range(4) if b != a]
        sol.append(solid_angle_cone(pts[a], *others))
    dih = {}
    for a, b in combinations(range(4), 2):
        c, d = (k for k in range(4) if k not in (a, b))
        dih[(idx[a], idx[b])] = dihedral_angle(pts[a], pts[b], pts[c], pts[d])
    return FourCell(idx, pts, sph, tetra_volume(*pts), tuple(sol), dih, cospherical)


def _local_quadruples(p: Packing, i: int, cutoff: float):
    nb = p.neighbor_indices(p.centers[i], cutoff)
    pts = p.centers[nb]
    d2 = np.sum((pts[:, None, :] - pts[None, :, :]) ** 2, axis=-1)
    close = d2 < cutoff * cutoff
    me = int(np.flatnonzero(nb == i)[0])
    others = [k for k in range(len(nb)) if k != me]
    for a, b, c in combinations(others, 3):
        if close[a, b] and close[a, c] and close[b, c]:
            yield tuple(sorted((int(nb[me]), int(nb[a]), int(nb[b]), int(nb[c]))))


def enumerate_four_cells(p: Packing, region_radius: float) -> list[FourCell]:
    """All 4-cells with at least one vertex in B(0, region_radius).

    A fifth center within 1e-9 of the circumsphere marks the cell as
    cospherical; it is kept as long as nothing lies strictly inside by more
    than that margin.
    """
    check_region(p, region_radius)
    edge_cut = 2.0 * SQRT2
    seen: set[tuple[int, ...]] = set()
    cells: list[FourCell] = []
    for i in p.indices_within(region_radius):
        for quad in _local_quadruples(p, int(i), edge_cut):
            if quad in seen:
                continue
            seen.add(quad)
            pts = p.centers[list(quad)]
            if tetra_volume(*pts) <= TOL:
                continue
            try:
                sph = circumsphere(pts)
            except DegenerateInput:
                continue
            if sph.radius >= SQRT2 - TOL:
                continue
            near = p.neighbor_indices(sph.center, sph.radius + TOL)
            near = [k for k in near if k not in quad]
            dist = np.linalg.norm(p.centers[near] - sph.center, axis=1) if near else np.zeros(0)
            if np.any(dist < sph.radius - TOL):
                continue
            cells.append(make_four_cell(quad, pts, cospherical=bool(len(dist))))
    cells.sort(key=lambda X: X.vertices)
    return cells


def edges_of(X: FourCell) -> list[Edge]:
    pos = {v: k for k, v in enumerate(X.vertices)}
    return [
        Edge(a, b, float(np.linalg.norm(X.points[pos[a]] - X.points[pos[b]])) / 2.0)
        for a, b in combinations(X.vertices, 2)
    ]


def critical_edges(X: FourCell) -> tuple[list[Edge], float | None]:
    """Critical edges of X and the weight 1/|EC(X)| (None when there are none)."""
    ec = [e for e in edges_of(X) if e.is_critical()]
    return ec, (1.0 / len(ec) if ec else None)


def beta(eps: Edge, X: FourCell) -> float:
    """beta0(h(eps)) - beta0(h(eps')) when EC(X) = {eps, eps'} are opposite; else 0."""
    ec, _ = critical_edges(X)
    if len(ec) != 2 or eps.key not in {e.key for e in ec}:
        return 0.0
    a, b = ec
    if {a.i, a.j} & {b.i, b.j}:
        return 0.0
    mine, other = (a, b) if a.key == eps.key else (b, a)
    return beta0(mine.h) - beta0(other.h)


def gamma(X: FourCell, f: Callable[[float], float] = L) -> float:
    """vol(X) - (2 m1/pi) tsol(X) + (8 m2/pi) sum over edges of dih(X, e) f(h(e))."""
    c = CONSTANTS
    edge_term = math.fsum(X.dihedrals[e.key] * f(e.h) for e in edges_of(X))
    return X.volume - (2.0 * c.m1 / math.pi) * X.tsol + (8.0 * c.m2 / math.pi) * edge_term


def cell_clusters(cells: list[FourCell]) -> dict[tuple[int, int], CellCluster]:
    clusters: dict[tuple[int, int], CellCluster] = {}
    for X in cells:
        for e in critical_edges(X)[0]:
            clusters.setdefault(e.key, CellCluster(e, [])).four_cells.append(X)
    return clusters


@dataclass(frozen=True)
class ClusterRow:
    edge: Edge
    partial_gamma: float
    cell_count: int
    label: str = PARTIAL_LABEL


def cluster_report(p: Packing, region_radius: float, cells=None) -> list[ClusterRow]:
    """Per critical edge inside the region: sum over its 4-cells of gamma*wt + beta."""
    if cells is None:
        cells = enumerate_four_cells(p, region_radius)
    inside = set(int(v) for v in p.indices_within(region_radius))
    rows = []
    for key, cl in sorted(cell_clusters(cells).items()):
        if key[0] not in inside or key[1] not in inside:
            continue
        total = math.fsum(gamma(X) * critical_edges(X)[1] + beta(cl.edge, X) for X in cl.four_cells)
        rows.append(ClusterRow(cl.edge, total, len(cl.four_cells)))
    return rows


@dataclass(frozen=True)
class AngleReport:
    edge_sums: dict[tuple[int, int], float]
    vertex_sums: dict[int, float]

    @property
    def max_edge_sum(self) -> float:
        return max(self.edge_sums.values(), default=0.0)

    @property
    def max_vertex_sum(self) -> float:
        return max(self.vertex_sums.values(), default=0.0)

    @property
    def passed(self) -> bool:
        return self.max_edge_sum <= 2 * math.pi + TOL and self.max_vertex_sum <= 4 * math.pi + TOL


def edge_angle_checks(p: Packing, region_radius: float, cells=None) -> AngleReport:
    """Dihedral sums around interior edges and solid-angle sums around interior vertices."""
    if cells is None:
        cells = enumerate_four_cells(p, region_radius)
    inside = set(int(v) for v in p.indices_within(region_radius))
    edge_parts: dict[tuple[int, int], list[float]] = {}
    vertex_parts: dict[int, list[float]] = {v: [] for v in inside}
    for X in cells:
        for e in edges_of(X):
            if e.i in inside and e.j in inside and e.h < SQRT2:
                edge_parts.setdefault(e.key, []).append(X.dihedrals[e.key])
        for v, s in zip(X.vertices, X.solid_angles):
            if v in inside:
                vertex_parts[v].append(s)
    return AngleReport(
        {k: math.fsum(v) for k, v in sorted(edge_parts.items())},
        {k: math.fsum(v) for k, v in sorted(vertex_parts.items())},
    )

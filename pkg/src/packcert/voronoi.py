"""Voronoi cells of packing centers by half-space clipping.

A cell is seeded with the cube of half-width 2.5 around its owner and clipped
by the bisector of every neighbor within distance 8, nearest first. The cube
is deliberately larger than the radius-2 ball, so the containment check on
the result can actually fail.

A finite packing only determines the cell of a center v when no center missing
from the instance could cut it. Any missing center lies outside
``B(0, gen_radius)``, and a center can only cut a cell whose vertices are within
rho of v if it is within 2*rho of v. So the cell is certified exact when
``|v| + 2*rho <= gen_radius``; every center with ``|v| <= gen_radius - 6``
passes whenever the radius-2 containment holds.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BoundaryVertex, ContainmentViolation
from .geom import TOL, ConvexPolytope, clip_halfspace
from .packing import MAX_CUTOFF, Packing

SEED_HALF_WIDTH = 2.5
CONTAINMENT_RADIUS = 2.0
INTERIOR_MARGIN = 6.0


@dataclass(frozen=True)
class VoronoiCell:
    owner: int
    center: np.ndarray
    polytope: ConvexPolytope
    volume: float

    @property
    def max_radius(self) -> float:
        """Distance from the owner to the farthest cell vertex."""
        return self.polytope.max_distance(self.center)

    def contains(self, q, tol: float = TOL) -> bool:
        return self.polytope.contains(q, tol)


def _clip_cell(p: Packing, v: int) -> ConvexPolytope:
    x = p.centers[v]
    poly = ConvexPolytope.box(x, SEED_HALF_WIDTH)
    nb = p.neighbor_indices(x, MAX_CUTOFF, exclude=v)
    diff = p.centers[nb] - x
    dist = np.linalg.norm(diff, axis=1)
    order = np.argsort(dist, kind="stable")
    reach = poly.max_distance(x)
    for k in order:
        if dist[k] / 2.0 > reach + TOL:
            break  # sorted: no farther bisector can reach the cell either
        w = p.centers[nb[k]]
        poly = clip_halfspace(poly, diff[k], float(np.dot(diff[k], w + x)) / 2.0)
        reach = poly.max_distance(x)
    return poly


def voronoi_cell(p: Packing, v: int) -> VoronoiCell:
    """Voronoi cell of center `v`, certified exact for the infinite extension.

    Raises ContainmentViolation when the exact cell provably leaves
    B(v, 2 + 1e-9) (an unsaturated neighbourhood), and BoundaryVertex when the
    cell cannot be certified because missing centers could still cut it.
    """
    x = p.centers[v]
    poly = _clip_cell(p, v)
    rho = poly.max_distance(x)
    slack = p.gen_radius - float(np.linalg.norm(x))
    if rho > CONTAINMENT_RADIUS + TOL:
        # the exact cell contains points of the clipped cell up to this distance
        sure = min(rho, slack / 2.0, MAX_CUTOFF / 2.0)
        if sure > CONTAINMENT_RADIUS + TOL:
            raise ContainmentViolation(
                f"cell of center {v} reaches distance {rho:.6g} > {CONTAINMENT_RADIUS}"
            )
        raise BoundaryVertex(f"center {v} is too close to the generation boundary")
    if 2.0 * rho > slack + TOL:
        raise BoundaryVertex(f"center {v} is too close to the generation boundary")
    return VoronoiCell(int(v), x, poly, poly.volume)


def check_region(p: Packing, region_radius: float) -> None:
    if region_radius > p.gen_radius - INTERIOR_MARGIN + TOL:
        raise BoundaryVertex(
            f"region radius {region_radius} exceeds gen_radius - {INTERIOR_MARGIN:g}"
            f" = {p.gen_radius - INTERIOR_MARGIN:g}"
        )


def voronoi_volumes(p: Packing, region_radius: float) -> dict[int, float]:
    """Cell volume for every center in B(0, region_radius)."""
    check_region(p, region_radius)
    return {int(v): voronoi_cell(p, v).volume for v in p.indices_within(region_radius)}


def certified_cells(p: Packing) -> dict[int, VoronoiCell]:
    """Every cell of the instance that can be certified exact; boundary centers are skipped.

    ContainmentViolation still propagates: it is a property of the packing,
    not of where the instance was cut off.
    """
    out = {}
    for v in range(len(p.centers)):
        try:
            out[v] = voronoi_cell(p, v)
        except BoundaryVertex:
            continue
    return out

"""Score constants, the piecewise functions L, M and beta0, and the vertex score G.

All constants are derived from their defining expressions; the rounded
values quoted in the literature are only ever used as test assertions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import BoundaryVertex, NoSignChange
from .packing import Packing
from .voronoi import certified_cells, check_region, voronoi_cell

SQRT2 = math.sqrt(2.0)
FCC_CELL_VOLUME = 4.0 * SQRT2
# G only needs neighbors with h([u; v]) < sqrt(2), i.e. |u - v| < 2*sqrt(2)
G_CUTOFF = 2.0 * SQRT2


def _h_minus_bisect(h0: float, h_plus: float) -> float:
    lo, hi = 1.231, 1.232
    g = lambda h: _M(h, h_plus) - _L(h, h0)  # noqa: E731
    glo, ghi = g(lo), g(hi)
    if glo * ghi >= 0:
        raise NoSignChange(f"M - L has no sign change on [{lo}, {hi}]: {glo}, {ghi}")
    while hi - lo >= 1e-12:
        mid = 0.5 * (lo + hi)
        gm = g(mid)
        if gm == 0:
            return mid
        if (gm < 0) == (glo < 0):
            lo, glo = mid, gm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _L(h: float, h0: float) -> float:
    return (h0 - h) / (h0 - 1.0) if h <= h0 else 0.0


def _M(h: float, h_plus: float) -> float:
    if h > SQRT2:
        return 0.0
    return (
        (SQRT2 - h) / (SQRT2 - 1.0)
        * (h_plus - h) / (h_plus - 1.0)
        * (17.0 * h - 9.0 * h * h - 3.0) / 5.0
    )


@dataclass(frozen=True)
class ScoreConstants:
    h0: float
    h_plus: float
    sol0: float
    tau0: float
    m1: float
    m2: float
    h_minus: float

    @classmethod
    def compute(cls, h0: float = 1.26, h_plus: float = 1.3254) -> "ScoreConstants":
        sol0 = 3.0 * math.acos(1.0 / 3.0) - math.pi
        tau0 = 4.0 * math.pi - 20.0 * sol0
        m1 = sol0 * 2.0 * SQRT2 / tau0
        m2 = (6.0 * sol0 - math.pi) * SQRT2 / (6.0 * tau0)
        return cls(h0, h_plus, sol0, tau0, m1, m2, _h_minus_bisect(h0, h_plus))


CONSTANTS = ScoreConstants.compute()


def L(h: float) -> float:
    """Piecewise linear ramp: 1 at h = 1, 0 from h0 on."""
    return _L(h, CONSTANTS.h0)


def M(h: float) -> float:
    return _M(h, CONSTANTS.h_plus)


def beta0(h: float) -> float:
    c = CONSTANTS
    return 0.005 * (1.0 - (h - c.h0) ** 2 / (c.h_plus - c.h0) ** 2)


def find_h_minus() -> float:
    """Root of M - L on [1.231, 1.232] by bisection to width 1e-12."""
    return _h_minus_bisect(CONSTANTS.h0, CONSTANTS.h_plus)


def _check_support(f: Callable[[float], float]) -> None:
    for h in np.linspace(SQRT2, 2.0 * SQRT2, 33):
        if f(float(h)) != 0.0:
            raise ValueError(f"f must vanish for h >= sqrt(2); f({h}) = {f(float(h))}")


def _pair_sum(p: Packing, v: int, f: Callable[[float], float], cutoff: float) -> float:
    x = p.centers[v]
    if float(np.linalg.norm(x)) + cutoff > p.gen_radius:
        raise BoundaryVertex(f"neighbors of center {v} within {cutoff:.4g} are incomplete")
    nb = p.neighbor_indices(x, cutoff, exclude=v)
    hs = np.linalg.norm(p.centers[nb] - x, axis=1) / 2.0
    return math.fsum(f(float(h)) for h in hs)


def G(p: Packing, v: int, f: Callable[[float], float] = L) -> float:
    """-vol(voronoi(v)) + 8 m1 - sum over other centers u of 8 m2 f(h([v; u]))."""
    _check_support(f)
    return _score(p, v, f, voronoi_cell(p, v).volume)


def _score(p: Packing, v: int, f, vol: float) -> float:
    return -vol + 8.0 * CONSTANTS.m1 - 8.0 * CONSTANTS.m2 * _pair_sum(p, v, f, G_CUTOFF)


def L_neighbor_sum(p: Packing, v: int) -> float:
    """Sum of L(h) over neighbors with h <= h0 (distance <= 2 h0)."""
    return _pair_sum(p, v, L, 2.0 * CONSTANTS.h0)


@dataclass(frozen=True)
class CompatibilityReport:
    count: int
    min_margin: float
    argmin: int | None
    margins: dict[int, float]

    @property
    def passed(self) -> bool:
        return self.min_margin >= -1e-9


def vertex_scores(
    p: Packing, region_radius: float, f: Callable[[float], float] = L
) -> dict[int, tuple[float, float]]:
    """(Voronoi volume, G(v, f)) for every center in B(0, region_radius)."""
    check_region(p, region_radius)
    _check_support(f)
    out = {}
    for v in p.indices_within(region_radius):
        vol = voronoi_cell(p, v).volume
        out[int(v)] = (vol, _score(p, v, f, vol))
    return out


def interior_scores(p: Packing, f: Callable[[float], float] = L) -> dict[int, tuple[float, float]]:
    """(volume, G(v, f)) for every center whose cell is certified and whose score neighbourhood is complete."""
    _check_support(f)
    out = {}
    for v, cell in certified_cells(p).items():
        if float(np.linalg.norm(cell.center)) + G_CUTOFF <= p.gen_radius:
            out[v] = (cell.volume, _score(p, v, f, cell.volume))
    return out


def compatibility_from_scores(scores: dict[int, tuple[float, float]]) -> CompatibilityReport:
    margins = {v: vol + g - FCC_CELL_VOLUME for v, (vol, g) in scores.items()}
    if not margins:
        return CompatibilityReport(0, math.inf, None, margins)
    arg = min(margins, key=margins.get)
    return CompatibilityReport(len(margins), margins[arg], arg, margins)


def fcc_compatibility_check(
    p: Packing, region_radius: float, f: Callable[[float], float] = L
) -> CompatibilityReport:
    """Margin vol(voronoi(v)) + G(v, f) - 4*sqrt(2) for every center in the region."""
    return compatibility_from_scores(vertex_scores(p, region_radius, f))


def negligibility_scan(
    p: Packing, f: Callable[[float], float], r_list
) -> list[tuple[float, float, float]]:
    """(r, S(r), S(r)/r^2) with S(r) the sum of G(v, f) over centers in B(0, r)."""
    r_list = [float(r) for r in r_list]
    if not r_list:
        return []
    scores = {v: g for v, (_, g) in vertex_scores(p, max(r_list), f).items()}
    return scan_from_scores(p, scores, r_list)


def scan_from_scores(p: Packing, scores: dict[int, float], r_list) -> list[tuple[float, float, float]]:
    norms = np.linalg.norm(p.centers, axis=1)
    rows = []
    for r in map(float, r_list):
        s = math.fsum(g for v, g in scores.items() if norms[v] <= r)
        rows.append((r, s, s / (r * r)))
    return rows

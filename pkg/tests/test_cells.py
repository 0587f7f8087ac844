import math
from itertools import combinations

import mpmath as mp
import numpy as np
import pytest
from scipy.spatial import Delaunay

from packcert.cells import (
    PARTIAL_LABEL,
    Edge,
    beta,
    cell_clusters,
    cluster_report,
    critical_edges,
    edge_angle_checks,
    edges_of,
    enumerate_four_cells,
    gamma,
    make_four_cell,
)
from packcert.errors import BoundaryVertex
from packcert.geom import circumsphere, tetra_volume
from packcert.score import CONSTANTS, beta0

from conftest import regular_tetra

SQRT2 = math.sqrt(2)


@pytest.fixture(scope="module")
def fcc_cells(fcc12):
    return enumerate_four_cells(fcc12, 6)


def delaunay_oracle(p, region):
    tri = Delaunay(p.centers)
    norms = np.linalg.norm(p.centers, axis=1)
    out = set()
    for s in tri.simplices:
        pts = p.centers[s]
        if tetra_volume(*pts) <= 1e-9 or not np.any(norms[s] <= region):
            continue
        if circumsphere(pts).radius < SQRT2 - 1e-9:
            out.add(tuple(sorted(int(i) for i in s)))
    return out


def brute_oracle(p, region):
    norms = np.linalg.norm(p.centers, axis=1)
    cand = np.flatnonzero(norms <= region + 2 * SQRT2)
    out = set()
    for quad in combinations(cand.tolist(), 4):
        if not any(norms[i] <= region for i in quad):
            continue
        pts = p.centers[list(quad)]
        if tetra_volume(*pts) <= 1e-9:
            continue
        s = circumsphere(pts)
        if s.radius >= SQRT2 - 1e-9:
            continue
        d = np.linalg.norm(p.centers - s.center, axis=1)
        d[list(quad)] = np.inf
        if np.all(d >= s.radius - 1e-9):
            out.add(quad)
    return out


def test_fcc_cells_regular(fcc12, fcc_cells):
    assert fcc_cells
    for X in fcc_cells:
        assert X.circumsphere.radius == pytest.approx(math.sqrt(1.5), abs=1e-12)
        assert all(e.h == pytest.approx(1.0) for e in edges_of(X))
        assert not X.cospherical
        assert abs(gamma(X)) < 1e-9


def test_fcc_eight_cells_per_vertex(fcc12, fcc_cells):
    count = {}
    for X in fcc_cells:
        for v in X.vertices:
            count[v] = count.get(v, 0) + 1
    for v in fcc12.indices_within(6):
        assert count[int(v)] == 8


def test_fcc_matches_delaunay(fcc12, fcc_cells):
    assert {X.vertices for X in fcc_cells} == delaunay_oracle(fcc12, 6)


def test_random_matches_oracles(random10):
    for k in (1, 2, 3):
        p = random10[k]
        got = {X.vertices for X in enumerate_four_cells(p, 4)}
        assert got == delaunay_oracle(p, 4)
    p = random10[4]
    assert {X.vertices for X in enumerate_four_cells(p, 1.5)} == brute_oracle(p, 1.5)


def test_cubic_no_cells(cubic12):
    assert enumerate_four_cells(cubic12, 6) == []
    rep = edge_angle_checks(cubic12, 6)
    assert rep.passed and rep.edge_sums == {}


def test_region_check(fcc12):
    with pytest.raises(BoundaryVertex):
        enumerate_four_cells(fcc12, 7)


def test_cells_have_disjoint_interiors(random10):
    cells = enumerate_four_cells(random10[5], 4)
    for X in cells:
        c = X.points.mean(axis=0)
        for Y in cells:
            if Y is X:
                continue
            # barycentric coordinates of X's centroid with respect to Y
            T = (Y.points[1:] - Y.points[0]).T
            lam = np.linalg.solve(T, c - Y.points[0])
            bary = np.append(1 - lam.sum(), lam)
            assert bary.min() < 1e-9


def test_edges():
    X = make_four_cell([3, 1, 2, 0], regular_tetra())
    es = edges_of(X)
    assert len(es) == 6
    assert all(e.h == pytest.approx(1.0) for e in es)
    assert all(e.i < e.j for e in es)
    assert Edge(5, 2, 1.0).key == (2, 5)
    ec, wt = critical_edges(X)
    assert ec == [] and wt is None


def stretched(lengths):
    """Tetrahedron with prescribed edge lengths (12, 13, 14, 23, 24, 34) via Cayley-Menger coordinates."""
    d12, d13, d14, d23, d24, d34 = lengths
    a = np.zeros(3)
    b = np.array([d12, 0, 0])
    x = (d12**2 + d13**2 - d23**2) / (2 * d12)
    c = np.array([x, math.sqrt(d13**2 - x**2), 0])
    dx = (d12**2 + d14**2 - d24**2) / (2 * d12)
    dy = (d14**2 - d34**2 + c[0] ** 2 + c[1] ** 2 - 2 * c[0] * dx) / (2 * c[1])
    d = np.array([dx, dy, math.sqrt(d14**2 - dx**2 - dy**2)])
    return np.array([a, b, c, d])


def test_critical_edge_synthetic():
    X = make_four_cell([0, 1, 2, 3], stretched([2.5, 2, 2, 2, 2, 2]))
    ec, wt = critical_edges(X)
    assert [e.key for e in ec] == [(0, 1)]
    assert ec[0].h == pytest.approx(1.25)
    assert CONSTANTS.h_minus <= 1.25 <= CONSTANTS.h_plus
    assert wt == 1.0
    assert beta(ec[0], X) == 0.0


def test_two_opposite_critical_edges():
    X = make_four_cell([0, 1, 2, 3], stretched([2.5, 2, 2, 2, 2, 2.55]))
    ec, wt = critical_edges(X)
    assert [e.key for e in ec] == [(0, 1), (2, 3)]
    assert wt == 0.5
    a, b = ec
    assert beta(a, X) + beta(b, X) == pytest.approx(0.0, abs=1e-15)
    assert beta(a, X) == pytest.approx(beta0(1.25) - beta0(1.275))


def test_two_adjacent_critical_edges():
    X = make_four_cell([0, 1, 2, 3], stretched([2.5, 2.5, 2, 2, 2, 2]))
    ec, wt = critical_edges(X)
    assert len(ec) == 2 and wt == 0.5
    assert beta(ec[0], X) == 0.0 and beta(ec[1], X) == 0.0


def test_gamma_regular_tetra_mpmath():
    X = make_four_cell([0, 1, 2, 3], regular_tetra())
    mp.mp.dps = 40
    theta = mp.acos(mp.mpf(1) / 3)
    sol0 = 3 * theta - mp.pi
    tau0 = 4 * mp.pi - 20 * sol0
    m1 = sol0 * 2 * mp.sqrt(2) / tau0
    m2 = (6 * sol0 - mp.pi) * mp.sqrt(2) / (6 * tau0)
    g = 2 * mp.sqrt(2) / 3 - 2 * m1 / mp.pi * 4 * sol0 + 8 * m2 / mp.pi * 6 * theta
    assert abs(g) < mp.mpf(10) ** -30
    assert abs(gamma(X)) < 1e-9


def test_gamma_nonnegative_random(random10):
    for p in random10.values():
        for X in enumerate_four_cells(p, 4):
            if not critical_edges(X)[0]:
                assert gamma(X) >= -1e-9


def test_cluster_report(fcc12, fcc_cells, random10):
    assert cluster_report(fcc12, 6, fcc_cells) == []
    rows = []
    for p in random10.values():
        rows += cluster_report(p, 4)
    assert rows
    for row in rows:
        assert row.label == PARTIAL_LABEL
        assert row.cell_count >= 1
        assert math.isfinite(row.partial_gamma)


def test_cluster_with_two_cells():
    # two tetrahedra glued along the long edge (0, 1), each with that edge as the only critical one
    base = stretched([2.5, 2, 2, 2, 2, 2])
    mirror = base.copy()
    mirror[3, 2] = -mirror[3, 2]
    X = make_four_cell([0, 1, 2, 3], base)
    Y = make_four_cell([0, 1, 2, 4], mirror)
    cl = cell_clusters([X, Y])
    assert list(cl) == [(0, 1)]
    assert len(cl[(0, 1)].four_cells) == 2


def test_angle_sums_fcc(fcc12, fcc_cells):
    rep = edge_angle_checks(fcc12, 6, fcc_cells)
    assert rep.passed
    assert rep.max_edge_sum == pytest.approx(2 * math.acos(1 / 3), abs=1e-9)
    assert all(s == pytest.approx(2 * math.acos(1 / 3)) for s in rep.edge_sums.values())
    assert rep.max_vertex_sum == pytest.approx(8 * CONSTANTS.sol0, abs=1e-9)


def test_angle_sums_random(random10):
    for p in list(random10.values())[:5]:
        assert edge_angle_checks(p, 4).passed

"""Unit-sphere packings: generation, spatial queries, saturation, density, persistence.

A packing is a finite set of centers at pairwise distance >= 2, all inside
``B(0, gen_radius)``. Per-vertex quantities are only trusted well inside that
ball; see :mod:`packcert.voronoi` for how interiority is certified.
"""
from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path

import numpy as np
from scipy.spatial import Delaunay, cKDTree

from .errors import ContainerExceedsGeneration, PackingValidationError
from .geom import ball_lens_volume

KINDS = ("fcc", "cubic", "random", "custom")
CELL_SIZE = 2.0
MAX_CUTOFF = 8.0
MIN_DIST_TOL = 1e-9

RSA_MAX_REJECTIONS = 5000
REPAIR_STEP = 0.25
_RSA_BATCH = 2048


class GridIndex:
    """Uniform grid of cubic cells (side 2) for fixed-radius neighbor queries."""

    def __init__(self, points: np.ndarray, cell_size: float = CELL_SIZE):
        self.points = points
        self.cell_size = cell_size
        keys = np.floor(points / cell_size).astype(np.int64)
        buckets: dict[tuple[int, int, int], list[int]] = {}
        for i, k in enumerate(map(tuple, keys)):
            buckets.setdefault(k, []).append(i)
        self._cells = {k: np.array(v, dtype=np.int64) for k, v in buckets.items()}

    def query(self, point, cutoff: float) -> np.ndarray:
        """Indices of points within distance `cutoff` of `point`, ascending."""
        q = np.asarray(point, dtype=float)
        lo = np.floor((q - cutoff) / self.cell_size).astype(np.int64)
        hi = np.floor((q + cutoff) / self.cell_size).astype(np.int64)
        found = [
            self._cells[k]
            for k in product(*(range(a, b + 1) for a, b in zip(lo, hi)))
            if k in self._cells
        ]
        if not found:
            return np.zeros(0, dtype=np.int64)
        idx = np.concatenate(found)
        d2 = np.sum((self.points[idx] - q) ** 2, axis=1)
        return np.sort(idx[d2 <= cutoff * cutoff])


@dataclass(frozen=True, eq=False)
class Packing:
    centers: np.ndarray
    gen_radius: float
    kind: str
    seed: int | None = None
    index: GridIndex = field(init=False, repr=False)

    def __post_init__(self):
        c = np.array(self.centers, dtype=float).reshape(-1, 3)
        c.setflags(write=False)
        object.__setattr__(self, "centers", c)
        object.__setattr__(self, "gen_radius", float(self.gen_radius))
        object.__setattr__(self, "index", GridIndex(c))
        if self.kind not in KINDS:
            raise PackingValidationError(f"unknown packing kind {self.kind!r}")

    def __len__(self) -> int:
        return len(self.centers)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Packing):
            return NotImplemented
        return (
            self.kind == other.kind
            and self.seed == other.seed
            and self.gen_radius == other.gen_radius
            and np.array_equal(self.centers, other.centers)
        )

    def neighbor_indices(self, point, cutoff: float, exclude=None) -> np.ndarray:
        if cutoff > MAX_CUTOFF:
            raise ValueError(f"cutoff {cutoff} exceeds {MAX_CUTOFF}")
        idx = self.index.query(point, cutoff)
        if exclude is not None:
            idx = idx[idx != exclude]
        return idx

    def indices_within(self, radius: float) -> np.ndarray:
        """Indices of centers in the closed ball B(0, radius)."""
        return np.flatnonzero(np.linalg.norm(self.centers, axis=1) <= radius)

    def validate(self) -> None:
        """Raise PackingValidationError unless all invariants hold."""
        if len(self.centers) and not np.all(np.isfinite(self.centers)):
            raise PackingValidationError("non-finite center coordinates")
        norms = np.linalg.norm(self.centers, axis=1)
        if len(norms) and norms.max() > self.gen_radius + MIN_DIST_TOL:
            raise PackingValidationError(
                f"center at distance {norms.max()} outside gen_radius {self.gen_radius}"
            )
        if len(self.centers) > 1:
            d, _ = cKDTree(self.centers).query(self.centers, k=2)
            worst = d[:, 1].min()
            if worst < 2.0 - MIN_DIST_TOL:
                raise PackingValidationError(f"two centers at distance {worst} < 2")


def neighbors(p: Packing, v, cutoff: float) -> np.ndarray:
    """Centers w != v with |w - v| <= cutoff, as an (m, 3) array; v is a point or a center index."""
    if isinstance(v, (int, np.integer)):
        v = p.centers[v]
    v = np.asarray(v, dtype=float)
    idx = p.neighbor_indices(v, cutoff)
    pts = p.centers[idx]
    return pts[np.any(pts != v, axis=1)]


def _lattice_ball(scale_sq: int, radius: float, parity: bool) -> np.ndarray:
    # integer norm test, so boundary points at exactly `radius` are kept
    n = int(math.ceil(radius / math.sqrt(scale_sq))) + 1
    r = np.arange(-n, n + 1)
    g = np.stack(np.meshgrid(r, r, r, indexing="ij"), axis=-1).reshape(-1, 3)
    if parity:
        g = g[g.sum(axis=1) % 2 == 0]
    keep = scale_sq * np.sum(g * g, axis=1) <= radius * radius
    return math.sqrt(scale_sq) * g[keep].astype(float)


def generate_fcc(radius: float) -> Packing:
    """FCC points sqrt(2)*(x, y, z), x+y+z even, inside B(0, radius)."""
    if radius < 4:
        raise ValueError("radius must be >= 4")
    return Packing(_lattice_ball(2, radius, parity=True), radius, "fcc")


def generate_cubic(radius: float) -> Packing:
    """Points of 2Z^3 inside B(0, radius)."""
    if radius < 4:
        raise ValueError("radius must be >= 4")
    return Packing(_lattice_ball(4, radius, parity=False), radius, "cubic")


def _probe_grid(radius: float, step: float) -> np.ndarray:
    n = int(math.floor(radius / step))
    r = np.arange(-n, n + 1) * step
    g = np.stack(np.meshgrid(r, r, r, indexing="ij"), axis=-1).reshape(-1, 3)
    return g[np.sum(g * g, axis=1) <= radius * radius]


def _rsa(rng: np.random.Generator, radius: float) -> list[np.ndarray]:
    accepted: list[np.ndarray] = []
    tree = None
    rejections = 0
    while rejections < RSA_MAX_REJECTIONS:
        cand = rng.uniform(-radius, radius, size=(_RSA_BATCH, 3))
        cand = cand[np.sum(cand * cand, axis=1) <= radius * radius]
        if tree is not None:
            far = tree.query(cand, k=1)[0] >= 2.0
        else:
            far = np.ones(len(cand), dtype=bool)
        fresh: list[np.ndarray] = []
        for x, ok in zip(cand, far):
            if ok and all(np.sum((x - y) ** 2) >= 4.0 for y in fresh):
                fresh.append(x)
                rejections = 0
            else:
                rejections += 1
                if rejections >= RSA_MAX_REJECTIONS:
                    break
        if fresh:
            accepted.extend(fresh)
            tree = cKDTree(np.array(accepted))
    return accepted


def _greedy_insert(centers: list[np.ndarray], candidates: np.ndarray, min_gap: float) -> int:
    """Insert candidates in order when >= min_gap from every center; return count."""
    if len(candidates) == 0:
        return 0
    d = cKDTree(np.array(centers)).query(candidates, k=1)[0]
    added: list[np.ndarray] = []
    for x, dist in zip(candidates, d):
        if dist >= min_gap and all(np.sum((x - y) ** 2) >= min_gap * min_gap for y in added):
            added.append(x)
    centers.extend(added)
    return len(added)


def _delaunay_holes(centers: list[np.ndarray], region: float) -> np.ndarray:
    """Circumcenters of empty Delaunay spheres of radius > 2 inside B(0, region), largest first."""
    pts = np.array(centers)
    tri = Delaunay(pts)
    s = pts[tri.simplices]
    a = s[:, 1:, :] - s[:, :1, :]
    rhs = 0.5 * np.sum(a * a, axis=2)
    det = np.linalg.det(a)
    ok = np.abs(det) > 1e-9
    cc = np.full((len(s), 3), np.inf)
    cc[ok] = s[ok, 0, :] + np.linalg.solve(a[ok], rhs[ok][..., None])[..., 0]
    rad = np.linalg.norm(cc - s[:, 0, :], axis=1)
    keep = ok & (rad > 2.0 + MIN_DIST_TOL) & (np.linalg.norm(cc, axis=1) <= region)
    order = np.lexsort((cc[keep][:, 2], cc[keep][:, 1], cc[keep][:, 0], -rad[keep]))
    return cc[keep][order]


def generate_random_saturated(radius: float, seed: int) -> Packing:
    """Random sequential adsorption in B(0, radius) followed by saturation repair.

    RSA stops after 5000 consecutive rejected candidates. The repair sweeps a
    0.25-step probe grid over B(0, radius - 1) and then fills any remaining
    empty Delaunay sphere of radius > 2 centred in that ball, repeating both
    until neither inserts a center.
    """
    if radius < 4:
        raise ValueError("radius must be >= 4")
    rng = np.random.Generator(np.random.PCG64(seed))
    centers = _rsa(rng, radius)
    region = radius - 1.0
    probes = _probe_grid(region, REPAIR_STEP)
    while True:
        n_grid = _greedy_insert(centers, probes, 2.0)
        n_holes = _greedy_insert(centers, _delaunay_holes(centers, region), 2.0)
        if n_grid + n_holes == 0:
            break
    return Packing(np.array(centers), radius, "random", seed=int(seed))


@dataclass(frozen=True)
class SaturationCertificate:
    grid_step: float
    worst_gap: float
    region_radius: float

    @property
    def saturated(self) -> bool:
        return self.worst_gap < 2.0


def is_saturated(p: Packing, region_radius: float, grid_step: float) -> SaturationCertificate:
    """Probe a cubic grid over B(0, region_radius) for the largest distance to a center."""
    if region_radius + 1.0 > p.gen_radius + MIN_DIST_TOL:
        raise ContainerExceedsGeneration(
            f"region {region_radius} + 1 exceeds gen_radius {p.gen_radius}"
        )
    probes = _probe_grid(region_radius, grid_step)
    if len(p.centers) == 0:
        gap = math.inf
    else:
        gap = float(cKDTree(p.centers).query(probes, k=1)[0].max())
    return SaturationCertificate(float(grid_step), gap, float(region_radius))


def density(p: Packing, r: float) -> float:
    """Fraction of B(0, r) covered by the packed unit balls (exact)."""
    if r < 1.0 or r + 1.0 > p.gen_radius + MIN_DIST_TOL:
        raise ContainerExceedsGeneration(f"need 1 <= r and r + 1 <= {p.gen_radius}, got r={r}")
    origin = np.zeros(3)
    near = p.indices_within(r + 1.0)
    covered = math.fsum(ball_lens_volume(p.centers[i], 1.0, origin, r) for i in near)
    return covered / (4.0 / 3.0 * math.pi * r**3)


def to_dict(p: Packing) -> dict:
    return {
        "kind": p.kind,
        "seed": p.seed,
        "gen_radius": p.gen_radius,
        "centers": p.centers.tolist(),
    }


def from_dict(doc) -> Packing:
    if not isinstance(doc, dict):
        raise PackingValidationError("packing document must be a JSON object")
    missing = {"kind", "seed", "gen_radius", "centers"} - doc.keys()
    if missing:
        raise PackingValidationError(f"missing field(s): {', '.join(sorted(missing))}")
    kind, seed, gen_radius, centers = doc["kind"], doc["seed"], doc["gen_radius"], doc["centers"]
    if kind not in KINDS:
        raise PackingValidationError(f"bad kind {kind!r}")
    if seed is not None and (not isinstance(seed, int) or isinstance(seed, bool)):
        raise PackingValidationError("seed must be an integer or null")
    if not isinstance(gen_radius, (int, float)) or isinstance(gen_radius, bool):
        raise PackingValidationError("gen_radius must be a number")
    if not isinstance(centers, list) or not all(
        isinstance(c, list) and len(c) == 3 and all(isinstance(x, (int, float)) for x in c)
        for c in centers
    ):
        raise PackingValidationError("centers must be a list of [x, y, z] numbers")
    p = Packing(np.array(centers, dtype=float).reshape(-1, 3), gen_radius, kind, seed)
    p.validate()
    return p


def write_atomic(path, text: str) -> None:
    """Write text to `path` through a temporary file and rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dumps(p: Packing) -> str:
    return json.dumps(to_dict(p), separators=(",", ":")) + "\n"


def save(p: Packing, path) -> None:
    write_atomic(path, dumps(p))


def load(path) -> Packing:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise PackingValidationError(f"invalid JSON: {exc}") from exc
    return from_dict(doc)

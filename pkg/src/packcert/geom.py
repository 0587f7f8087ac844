"""Geometric kernel: circumspheres, angles, volumes and convex polytope clipping.

Lengths are in units of the packed sphere radius. Points are anything that
converts to a length-3 float array.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateInput

# Global degeneracy tolerance in units of sphere radius.
TOL = 1e-9
# Plane-side classification when clipping; far below TOL so snapping error stays invisible.
_SIDE_TOL = 1e-12


def _pt(p) -> np.ndarray:
    a = np.asarray(p, dtype=float).reshape(3)
    if not np.all(np.isfinite(a)):
        raise DegenerateInput(f"non-finite coordinates: {a}")
    return a


@dataclass(frozen=True)
class Circumsphere:
    center: np.ndarray
    radius: float


def cayley_menger(points) -> float:
    """Cayley-Menger determinant of 2..4 points (proportional to squared simplex volume)."""
    pts = np.array([_pt(p) for p in points])
    n = len(pts)
    d2 = np.sum((pts[:, None, :] - pts[None, :, :]) ** 2, axis=-1)
    cm = np.ones((n + 1, n + 1))
    cm[0, 0] = 0.0
    cm[1:, 1:] = d2
    return float(np.linalg.det(cm))


def circumsphere(points) -> Circumsphere:
    """Smallest sphere through 2-4 affinely independent points.

    The center lies in the affine hull of the points, so for two points it is
    the midpoint and for three points the circumcenter of the triangle.
    Affine independence is judged on the Cayley-Menger determinant normalised
    by the matching power of the largest squared distance.
    """
    pts = np.array([_pt(p) for p in points])
    k = len(pts) - 1
    if not 1 <= k <= 3:
        raise DegenerateInput(f"circumsphere needs 2 to 4 points, got {len(pts)}")
    d2 = np.sum((pts[:, None, :] - pts[None, :, :]) ** 2, axis=-1)
    scale = d2.max()
    if scale <= TOL**2:
        raise DegenerateInput("coincident points")
    if abs(cayley_menger(pts)) / scale**k <= TOL:
        raise DegenerateInput(f"{len(pts)} points are affinely dependent")

    # center = p0 + sum(lam_i * a_i) with (center - p0) . a_j = |a_j|^2 / 2
    a = pts[1:] - pts[0]
    gram = a @ a.T
    lam = np.linalg.solve(gram, 0.5 * np.diag(gram))
    center = pts[0] + lam @ a
    radius = float(np.max(np.linalg.norm(pts - center, axis=1)))
    return Circumsphere(center=center, radius=radius)


def solid_angle_cone(apex, a, b, c) -> float:
    """Solid angle at `apex` of the simplicial cone through a, b, c (steradians).

    Uses the half-angle arctangent form, which stays accurate for thin cones.
    """
    o = _pt(apex)
    r1, r2, r3 = (_pt(p) - o for p in (a, b, c))
    n1, n2, n3 = (float(np.linalg.norm(r)) for r in (r1, r2, r3))
    if min(n1, n2, n3) <= TOL:
        raise DegenerateInput("cone direction coincides with apex")
    u1, u2, u3 = r1 / n1, r2 / n2, r3 / n3
    triple = float(np.dot(u1, np.cross(u2, u3)))
    if abs(triple) <= 1e-12:
        raise DegenerateInput("cone directions are linearly dependent")
    denom = 1.0 + float(np.dot(u1, u2) + np.dot(u1, u3) + np.dot(u2, u3))
    return 2.0 * math.atan2(abs(triple), denom)


def dihedral_angle(v0, v1, v2, v3) -> float:
    """Angle in [0, pi] along the line v0v1 between the half-planes towards v2 and v3.

    w_i = v_i - v0; both w2 and w3 are projected orthogonally to w1 (scaled
    by |w1|^2) and the angle between the projections is returned.
    """
    p0 = _pt(v0)
    w1, w2, w3 = (_pt(v) - p0 for v in (v1, v2, v3))
    w11 = float(np.dot(w1, w1))
    if w11 <= TOL**2:
        raise DegenerateInput("dihedral edge endpoints coincide")
    wb2 = w11 * w2 - float(np.dot(w1, w2)) * w1
    wb3 = w11 * w3 - float(np.dot(w1, w3)) * w1
    n1 = math.sqrt(w11)
    for wb, w in ((wb2, w2), (wb3, w3)):
        # relative to |w1|^2 |w|, so the test is scale free
        if np.linalg.norm(wb) <= 1e-12 * w11 * max(float(np.linalg.norm(w)), n1):
            raise DegenerateInput("dihedral point lies on the edge line")
    return math.atan2(float(np.linalg.norm(np.cross(wb2, wb3))), float(np.dot(wb2, wb3)))


def tetra_volume(a, b, c, d) -> float:
    pa = _pt(a)
    return abs(float(np.linalg.det(np.array([_pt(b) - pa, _pt(c) - pa, _pt(d) - pa])))) / 6.0


def _cap(r: float, h: float) -> float:
    # volume of a spherical cap of height h on a ball of radius r
    return math.pi * h * h * (3.0 * r - h) / 3.0


def ball_lens_volume(c1, r1: float, c2, r2: float) -> float:
    """Volume of B(c1, r1) intersected with B(c2, r2)."""
    if r1 <= 0 or r2 <= 0:
        raise ValueError("radii must be positive")
    d = float(np.linalg.norm(_pt(c1) - _pt(c2)))
    if d >= r1 + r2:
        return 0.0
    if d <= abs(r1 - r2):
        r = min(r1, r2)
        return 4.0 / 3.0 * math.pi * r**3
    # the radical plane sits at distance x1 from c1 along c1 -> c2
    x1 = (d * d + r1 * r1 - r2 * r2) / (2.0 * d)
    x2 = d - x1
    return _cap(r1, r1 - x1) + _cap(r2, r2 - x2)


@dataclass(frozen=True)
class ConvexPolytope:
    """Bounded convex polytope stored as vertices plus faces.

    Each face is a ring of vertex indices, counter-clockwise seen from
    outside, lying in the plane ``normals[f] . x == offsets[f]``; the interior
    is where every ``normals[f] . x <= offsets[f]``.
    """

    vertices: np.ndarray
    faces: tuple[tuple[int, ...], ...]
    normals: np.ndarray
    offsets: np.ndarray
    _volume: list = field(default_factory=list, repr=False, compare=False)

    @classmethod
    def empty(cls) -> "ConvexPolytope":
        return cls(np.zeros((0, 3)), (), np.zeros((0, 3)), np.zeros(0))

    @classmethod
    def box(cls, center, half_width: float) -> "ConvexPolytope":
        c = _pt(center)
        signs = np.array([[sx, sy, sz] for sx in (-1, 1) for sy in (-1, 1) for sz in (-1, 1)], float)
        verts = c + half_width * signs
        # vertex index = 4*(sx>0) + 2*(sy>0) + (sz>0)
        faces = (
            (0, 1, 3, 2),  # -x
            (4, 6, 7, 5),  # +x
            (0, 4, 5, 1),  # -y
            (2, 3, 7, 6),  # +y
            (0, 2, 6, 4),  # -z
            (1, 5, 7, 3),  # +z
        )
        normals = np.array([[-1, 0, 0], [1, 0, 0], [0, -1, 0], [0, 1, 0], [0, 0, -1], [0, 0, 1]], float)
        offsets = normals @ c + half_width
        return cls(verts, faces, normals, offsets)

    @property
    def is_empty(self) -> bool:
        return len(self.faces) == 0

    @property
    def volume(self) -> float:
        if not self._volume:
            self._volume.append(polytope_volume(self))
        return self._volume[0]

    def contains(self, point, tol: float = TOL) -> bool:
        if self.is_empty:
            return False
        return bool(np.all(self.normals @ _pt(point) <= self.offsets + tol))

    def max_distance(self, point) -> float:
        """Largest distance from `point` to a vertex."""
        if self.is_empty:
            return 0.0
        return float(np.max(np.linalg.norm(self.vertices - _pt(point), axis=1)))


def clip_halfspace(poly: ConvexPolytope, normal, offset: float) -> ConvexPolytope:
    """Intersect `poly` with the half-space ``normal . x <= offset``."""
    if poly.is_empty:
        return poly
    n = _pt(normal)
    nn = float(np.linalg.norm(n))
    if nn == 0.0:
        raise DegenerateInput("zero clipping normal")
    n = n / nn
    d = float(offset) / nn
    V = poly.vertices
    s = V @ n - d
    if s.max() <= _SIDE_TOL:
        return poly
    if s.min() >= -_SIDE_TOL:
        return ConvexPolytope.empty()

    on = np.abs(s) <= _SIDE_TOL
    inside = s < -_SIDE_TOL

    # Points are keyed topologically: ("v", i) for kept vertices, ("e", i, j) for
    # edge crossings, so shared edges of neighbouring faces produce the same point.
    coords: dict[tuple, np.ndarray] = {}
    new_faces: list[list[tuple]] = []
    new_normals: list[np.ndarray] = []
    new_offsets: list[float] = []
    for f, ring in enumerate(poly.faces):
        out: list[tuple] = []
        m = len(ring)
        for k in range(m):
            i, j = ring[k], ring[(k + 1) % m]
            if inside[i] or on[i]:
                key = ("v", i)
                coords[key] = V[i]
                out.append(key)
            if (inside[i] and s[j] > _SIDE_TOL) or (inside[j] and s[i] > _SIDE_TOL):
                key = ("e", min(i, j), max(i, j))
                if key not in coords:
                    t = s[i] / (s[i] - s[j])
                    coords[key] = V[i] + t * (V[j] - V[i])
                out.append(key)
        if len(out) >= 3 and not all(k[0] == "v" and on[k[1]] for k in out):
            new_faces.append(out)
            new_normals.append(poly.normals[f])
            new_offsets.append(float(poly.offsets[f]))

    cap = [k for k in coords if k[0] == "e" or on[k[1]]]
    if len(cap) >= 3:
        pts = np.array([coords[k] for k in cap])
        center = pts.mean(axis=0)
        # basis (u, w) with u x w = n, so increasing angle is counter-clockwise from outside
        helper = np.array([1.0, 0.0, 0.0]) if abs(n[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
        u = np.cross(helper, n)
        u /= np.linalg.norm(u)
        w = np.cross(n, u)
        rel = pts - center
        order = np.argsort(np.arctan2(rel @ w, rel @ u), kind="stable")
        new_faces.append([cap[o] for o in order])
        new_normals.append(n)
        new_offsets.append(d)

    index: dict[tuple, int] = {}
    for ring in new_faces:
        for key in ring:
            if key not in index:
                index[key] = len(index)
    verts = np.zeros((len(index), 3))
    for key, i in index.items():
        verts[i] = coords[key]
    faces = tuple(tuple(index[k] for k in ring) for ring in new_faces)
    return ConvexPolytope(verts, faces, np.array(new_normals), np.array(new_offsets))


def polytope_volume(poly: ConvexPolytope) -> float:
    """Volume by pyramids from the vertex centroid over every face."""
    if poly.is_empty:
        return 0.0
    V = poly.vertices
    c = V.mean(axis=0)
    total = 0.0
    for ring, n, off in zip(poly.faces, poly.normals, poly.offsets):
        p = V[list(ring)]
        area = 0.5 * float(np.dot(n, np.cross(p, np.roll(p, -1, axis=0)).sum(axis=0)))
        total += area * (off - float(np.dot(n, c))) / 3.0
    return max(total, 0.0)

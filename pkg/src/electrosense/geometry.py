"""Boundary curves of the dictionary shapes: meshing and rigid motions.

Every shape is a closed C^{1,alpha} curve discretized with M flat panels
(P0 collocation at panel midpoints).  Smooth shapes come from an analytic
parameterization; polygonal shapes (square, rectangle, letters) get their
corners replaced by circular fillets so the curvature stays bounded, and
are parameterized by arc length.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

SHAPE_NAMES = (
    "circle", "ellipse", "flower", "square",
    "rectangle", "letterA", "letterL", "ellipse2",
)

MIN_PANELS = 32

# Corner fillet radii: generous for the box shapes, tighter for the letters
# whose strokes are thin.
FILLET_BOX = 0.1
FILLET_LETTER = 0.05


@dataclass(frozen=True)
class Material:
    """Conductivity/permittivity pair of a target; background is (1, 0)."""

    sigma: float
    eps: float

    sigma0: float = field(default=1.0, init=False)
    eps0: float = field(default=0.0, init=False)

    def __post_init__(self):
        if self.sigma <= 0 or self.eps <= 0:
            raise ValueError("material requires sigma > 0 and eps > 0")
        if self.sigma == self.sigma0:
            raise ValueError("target conductivity must differ from background")

    @property
    def lam(self) -> float:
        """Zero-frequency contrast parameter (sigma+1)/(2(sigma-1))."""
        return (self.sigma + 1.0) / (2.0 * (self.sigma - 1.0))

    @property
    def alpha(self) -> float:
        """Relaxation constant eps/(sigma-1)."""
        return self.eps / (self.sigma - 1.0)

    def admittivity(self, omega) -> complex:
        """sigma + i*eps*omega (omega may be complex)."""
        return self.sigma + 1j * self.eps * omega

    def lam_omega(self, omega) -> complex:
        """Frequency-dependent contrast (kappa+1)/(2(kappa-1))."""
        kappa = self.admittivity(omega)
        return (kappa + 1.0) / (2.0 * (kappa - 1.0))


@dataclass(frozen=True)
class RigidMotion:
    """Similarity transform x -> z + s R(theta) x with s > 0."""

    z: np.ndarray
    s: float = 1.0
    theta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "z", np.asarray(self.z, dtype=float))
        if self.z.shape != (2,):
            raise ValueError("translation must be a 2-vector")
        if self.s <= 0:
            raise ValueError("scale must be positive")

    @property
    def rotation(self) -> np.ndarray:
        c, s = np.cos(self.theta), np.sin(self.theta)
        return np.array([[c, -s], [s, c]])


@dataclass(frozen=True)
class BoundaryMesh:
    """Panel midpoint discretization of a closed curve.

    Attributes
    ----------
    points : (M, 2) panel midpoints
    normals : (M, 2) unit outward normals
    weights : (M,) panel arc lengths, all positive
    curvature : (M,) signed curvature (positive for a convex CCW curve)
    centroid : (2,) area centroid of the enclosed domain
    area : enclosed area, positive for a correctly oriented mesh
    """

    points: np.ndarray
    normals: np.ndarray
    weights: np.ndarray
    curvature: np.ndarray
    centroid: np.ndarray
    area: float

    @property
    def size(self) -> int:
        return len(self.weights)

    @property
    def perimeter(self) -> float:
        return float(self.weights.sum())

    def validate(self) -> None:
        """Raise ValueError if a mesh invariant is broken."""
        M = self.size
        if self.points.shape != (M, 2) or self.normals.shape != (M, 2):
            raise ValueError("inconsistent mesh array shapes")
        if np.any(self.weights <= 0):
            raise ValueError("non-positive panel weights")
        nrm = np.linalg.norm(self.normals, axis=1)
        if np.max(np.abs(nrm - 1.0)) > 1e-12:
            raise ValueError("normals are not unit length")
        # closed curve: the outward normal integrates to zero.  Panels tile
        # the boundary exactly by construction (shared edge parameters); the
        # quadrature residual of the closure integral is O(M^-2) with a
        # curvature constant, so the gate only has to catch open curves.
        closure = np.abs(self.weights @ self.normals).max()
        if closure > 2e-2 * self.perimeter:
            raise ValueError(f"boundary does not close up (residual {closure:.2e})")
        if self.area <= 0:
            raise ValueError("non-positive enclosed area (orientation?)")


def _finish_mesh(points, tangents, weights, curvature) -> BoundaryMesh:
    normals = np.stack([tangents[:, 1], -tangents[:, 0]], axis=1)
    area = 0.5 * np.sum(weights * np.einsum("ij,ij->i", points, normals))
    # centroid of the enclosed domain via int_D x dA = oint (x_p^2/2) nu_p ds
    cx = np.sum(weights * 0.5 * points[:, 0] ** 2 * normals[:, 0]) / area
    cy = np.sum(weights * 0.5 * points[:, 1] ** 2 * normals[:, 1]) / area
    mesh = BoundaryMesh(points, normals, weights, curvature,
                        np.array([cx, cy]), float(area))
    mesh.validate()
    return mesh


def _smooth_mesh(position, velocity, acceleration, M: int) -> BoundaryMesh:
    """Mesh a smooth curve given by theta -> x(theta), theta in [0, 2pi)."""
    dth = 2.0 * np.pi / M
    th = (np.arange(M) + 0.5) * dth
    x = position(th)
    v = velocity(th)
    a = acceleration(th)
    speed = np.linalg.norm(v, axis=1)
    tangents = v / speed[:, None]
    weights = speed * dth
    curvature = (v[:, 0] * a[:, 1] - v[:, 1] * a[:, 0]) / speed**3
    return _finish_mesh(x, tangents, weights, curvature)


def _ellipse_mesh(a: float, b: float, M: int) -> BoundaryMesh:
    return _smooth_mesh(
        lambda t: np.stack([a * np.cos(t), b * np.sin(t)], 1),
        lambda t: np.stack([-a * np.sin(t), b * np.cos(t)], 1),
        lambda t: np.stack([-a * np.cos(t), -b * np.sin(t)], 1),
        M,
    )


def _flower_mesh(petals: int, amp: float, M: int) -> BoundaryMesh:
    def r(t):
        return 1.0 + amp * np.cos(petals * t)

    def rp(t):
        return -amp * petals * np.sin(petals * t)

    def rpp(t):
        return -amp * petals**2 * np.cos(petals * t)

    def pos(t):
        return np.stack([r(t) * np.cos(t), r(t) * np.sin(t)], 1)

    def vel(t):
        return np.stack([rp(t) * np.cos(t) - r(t) * np.sin(t),
                         rp(t) * np.sin(t) + r(t) * np.cos(t)], 1)

    def acc(t):
        return np.stack(
            [rpp(t) * np.cos(t) - 2 * rp(t) * np.sin(t) - r(t) * np.cos(t),
             rpp(t) * np.sin(t) + 2 * rp(t) * np.cos(t) - r(t) * np.sin(t)], 1)

    return _smooth_mesh(pos, vel, acc, M)


class _RoundedPolygon:
    """Closed CCW polygon with circular corner fillets, arc-length parameterized."""

    def __init__(self, vertices, radius: float):
        verts = np.asarray(vertices, dtype=float)
        x, y = verts[:, 0], verts[:, 1]
        if np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y) < 0:
            verts = verts[::-1]
        V = len(verts)
        corners = []
        for i in range(V):
            v_prev, v, v_next = verts[i - 1], verts[i], verts[(i + 1) % V]
            u_in = v - v_prev
            u_in /= np.linalg.norm(u_in)
            u_out = v_next - v
            u_out /= np.linalg.norm(u_out)
            turn = np.arctan2(u_in[0] * u_out[1] - u_in[1] * u_out[0], u_in @ u_out)
            cut = radius * np.tan(abs(turn) / 2)
            edge_in = np.linalg.norm(v - v_prev)
            edge_out = np.linalg.norm(v_next - v)
            if cut > 0.5 * min(edge_in, edge_out):
                raise ValueError("fillet radius too large for polygon edge")
            p0 = v - cut * u_in
            p1 = v + cut * u_out
            left = np.array([-u_in[1], u_in[0]])
            center = p0 + radius * np.sign(turn) * left
            a0 = np.arctan2(p0[1] - center[1], p0[0] - center[0])
            corners.append((p0, p1, center, a0, turn))
        segments = []  # (kind, payload, length)
        for i in range(V):
            _, p1, *_ = corners[i]
            nxt = corners[(i + 1) % V]
            p0n = nxt[0]
            segments.append(("line", (p1, p0n), float(np.linalg.norm(p0n - p1))))
            _, _, center, a0, turn = nxt
            segments.append(("arc", (center, a0, turn, radius),
                             float(radius * abs(turn))))
        self.segments = segments
        self.radius = radius
        self.cumlen = np.concatenate([[0.0], np.cumsum([s[2] for s in segments])])
        self.length = float(self.cumlen[-1])

    def evaluate(self, s):
        """Point, unit tangent and curvature at arc lengths s."""
        s = np.atleast_1d(np.asarray(s, float))
        pts = np.zeros((len(s), 2))
        tng = np.zeros((len(s), 2))
        kap = np.zeros(len(s))
        idx = np.clip(np.searchsorted(self.cumlen, s, side="right") - 1,
                      0, len(self.segments) - 1)
        for i in np.unique(idx):
            kind, payload, _ = self.segments[i]
            sel = idx == i
            loc = s[sel] - self.cumlen[i]
            if kind == "line":
                q0, q1 = payload
                u = (q1 - q0) / np.linalg.norm(q1 - q0)
                pts[sel] = q0 + loc[:, None] * u
                tng[sel] = u
            else:
                center, a0, turn, r = payload
                ang = a0 + np.sign(turn) * loc / r
                pts[sel] = center + r * np.stack([np.cos(ang), np.sin(ang)], 1)
                tng[sel] = np.sign(turn) * np.stack([-np.sin(ang), np.cos(ang)], 1)
                kap[sel] = np.sign(turn) / r
        return pts, tng, kap


def _polygon_mesh(vertices, radius: float, M: int) -> BoundaryMesh:
    poly = _RoundedPolygon(vertices, radius)
    smid = (np.arange(M) + 0.5) * poly.length / M
    pts, tng, kap = poly.evaluate(smid)
    weights = np.full(M, poly.length / M)
    return _finish_mesh(pts, tng, weights, kap)


_SQ = np.sqrt(2.0) / 2.0  # square half-side: diagonal = 2

# Letter outlines are simple closed polylines (no holes), sized to diameter
# roughly 2 and shifted to put the centroid near the origin.
_LETTER_A = [
    (-0.7, -0.65), (-0.2, 0.95), (0.2, 0.95), (0.7, -0.65), (0.35, -0.65),
    (0.23, -0.25), (-0.23, -0.25), (-0.35, -0.65),
]
_LETTER_L = [
    (-0.441, -0.63), (0.609, -0.63), (0.609, -0.2625), (-0.0735, -0.2625),
    (-0.0735, 1.05), (-0.441, 1.05),
]

_BUILDERS = {
    "circle": lambda M: _ellipse_mesh(1.0, 1.0, M),
    "ellipse": lambda M: _ellipse_mesh(1.0, 0.5, M),
    "ellipse2": lambda M: _ellipse_mesh(1.0, 0.5, M),
    "flower": lambda M: _flower_mesh(5, 0.3, M),
    # square scaled to diameter 2 so every dictionary shape spans a similar
    # footprint; keeps the first-order expansion equally accurate across shapes
    "square": lambda M: _polygon_mesh(
        [(-_SQ, -_SQ), (_SQ, -_SQ), (_SQ, _SQ), (-_SQ, _SQ)], FILLET_BOX, M),
    "rectangle": lambda M: _polygon_mesh(
        [(-1, -0.5), (1, -0.5), (1, 0.5), (-1, 0.5)], FILLET_BOX, M),
    "letterA": lambda M: _polygon_mesh(_LETTER_A, FILLET_LETTER, M),
    "letterL": lambda M: _polygon_mesh(_LETTER_L, FILLET_LETTER, M),
}


def make_shape(name: str, M: int) -> BoundaryMesh:
    """Build the mesh of a dictionary shape with M panels.

    Raises
    ------
    ValueError
        for an unknown shape name, or if M < 32 ("insufficient resolution").
    """
    if name not in _BUILDERS:
        raise ValueError(f"unknown dictionary shape: {name!r}")
    if M < MIN_PANELS:
        raise ValueError(f"insufficient resolution: M={M} < {MIN_PANELS}")
    return _BUILDERS[name](M)


def apply_motion(mesh: BoundaryMesh, motion: RigidMotion) -> BoundaryMesh:
    """Map a mesh through x -> z + s R x (panelwise exact)."""
    R = motion.rotation
    points = mesh.points @ R.T * motion.s + motion.z
    normals = mesh.normals @ R.T
    weights = mesh.weights * motion.s
    curvature = mesh.curvature / motion.s
    centroid = motion.z + motion.s * (R @ mesh.centroid)
    area = mesh.area * motion.s**2
    return BoundaryMesh(points, normals, weights, curvature, centroid, area)


# ---------------------------------------------------------------------------
# Dictionary definition file
# ---------------------------------------------------------------------------

DEFAULT_DICTIONARY = [
    {"name": n,
     "parameterization": n if n != "ellipse2" else "ellipse",
     "sigma": 5.0 if n == "ellipse2" else 10.0,
     "eps": 2.0 if n == "ellipse2" else 1.0}
    for n in SHAPE_NAMES
]


def load_dictionary_spec(path=None) -> list[dict]:
    """Read a dictionary definition JSON (list of {name, sigma, eps, ...})."""
    if path is None:
        return [dict(e) for e in DEFAULT_DICTIONARY]
    entries = json.loads(Path(path).read_text())
    if not isinstance(entries, list) or not entries:
        raise ValueError("dictionary spec must be a non-empty list")
    for e in entries:
        if e["name"] not in _BUILDERS:
            raise ValueError(f"unknown dictionary shape: {e['name']!r}")
        float(e["sigma"]), float(e["eps"])
    return entries

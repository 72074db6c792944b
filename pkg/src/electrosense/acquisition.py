"""Source/receiver array and the first-order linear data model.

Transmitters sit on an arc of a circle (limited view for aperture < 2 pi).
Each source is a charge-neutral pair of monopoles (+1, -1) separated by a
small distance along the arc tangent; receivers are the dipole midpoints.

The asymptotic data model at truncation order K = 1 maps the symmetric
filtered PT N to predicted perturbations:

    V_sr ~ A_s N B_r^T,
    A_s = sum_j a_j / (2 pi rho_s^j) (cos th_s^j, sin th_s^j),
    B_r = 1 / (2 pi rho_r) (cos th_r, sin th_r),

polar coordinates taken about the reference point z.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .geometry import BoundaryMesh

DEFAULT_RADIUS = 10.7
DEFAULT_SOURCES = 50
DEFAULT_SEPARATION = 0.1


@dataclass(frozen=True)
class AcquisitionConfig:
    """Geometry of the transmitter arc.

    sources : (N_s, 2, 2) monopole positions, charges (+1, -1)
    receivers : (N_s, 2) dipole midpoints (receivers co-located with sources)
    """

    radius: float
    n_sources: int
    aperture: float
    separation: float
    z: np.ndarray
    sources: np.ndarray
    receivers: np.ndarray
    charges: np.ndarray

    @property
    def n_receivers(self) -> int:
        return len(self.receivers)

    def with_reference(self, z) -> "AcquisitionConfig":
        return replace(self, z=np.asarray(z, dtype=float))

    def to_json(self) -> str:
        return json.dumps(
            {"radius": self.radius, "ns": self.n_sources,
             "aperture": self.aperture, "dipole_sep": self.separation,
             "z": list(map(float, self.z))},
            sort_keys=True)


@dataclass(frozen=True)
class ForwardOperator:
    """Linear map from the symmetric PT (N11, N12, N22) to stacked MSR entries.

    Row s * N_r + r predicts V_sr; matrix shape (N_s * N_r, 3).
    """

    matrix: np.ndarray
    config: AcquisitionConfig
    order: int = 1

    def predict(self, pt_matrix: np.ndarray) -> np.ndarray:
        """Data matrix (N_s, N_r) for one symmetric 2x2 tensor."""
        u = np.array([pt_matrix[0, 0], pt_matrix[0, 1], pt_matrix[1, 1]])
        ns, nr = self.config.n_sources, self.config.n_receivers
        return (self.matrix @ u).reshape(ns, nr)

    def condition_number(self) -> float:
        s = np.linalg.svd(self.matrix, compute_uv=False)
        return float(s[0] / s[-1])


def build_array(radius: float = DEFAULT_RADIUS, n_sources: int = DEFAULT_SOURCES,
                aperture: float = 2.0 * np.pi, separation: float = DEFAULT_SEPARATION,
                z=(0.0, 0.0), meshes: tuple[BoundaryMesh, ...] = ()) -> AcquisitionConfig:
    """Place n_sources dipoles on the arc [0, aperture] of the given circle.

    Dipole axes are tangent to the arc.  For a full circle the endpoint
    angles 0 and 2 pi coincide, so the spacing switches to aperture/N_s to
    keep the sources distinct.
    """
    if not 0.0 < aperture <= 2.0 * np.pi + 1e-12:
        raise ValueError("aperture must lie in (0, 2 pi]")
    if n_sources < 2:
        raise ValueError("need at least two sources")
    if abs(aperture - 2.0 * np.pi) < 1e-9:
        angles = np.arange(n_sources) * aperture / n_sources
    else:
        angles = np.arange(n_sources) * aperture / (n_sources - 1)
    mids = radius * np.stack([np.cos(angles), np.sin(angles)], axis=1)
    tangents = np.stack([-np.sin(angles), np.cos(angles)], axis=1)
    sources = np.stack([mids + 0.5 * separation * tangents,
                        mids - 0.5 * separation * tangents], axis=1)
    charges = np.array([1.0, -1.0])
    for mesh in meshes:
        gap = np.min(np.linalg.norm(
            mesh.points[None, :, :] - mids[:, None, :], axis=2))
        if gap < 1.0:
            raise ValueError("acquisition arc collides with a target boundary")
        if radius < np.max(np.linalg.norm(mesh.points, axis=1)) + 1.0:
            raise ValueError("array radius too small for target extent")
    return AcquisitionConfig(float(radius), int(n_sources), float(aperture),
                             float(separation), np.asarray(z, dtype=float),
                             sources, mids.copy(), charges)


def source_potential(config: AcquisitionConfig, source_index: int,
                     points: np.ndarray) -> np.ndarray:
    """Static part U~(x) = sum_j a_j G(x - x_s^j) of one source."""
    points = np.atleast_2d(points)
    out = np.zeros(len(points))
    for a_j, x_j in zip(config.charges, config.sources[source_index]):
        d = points - x_j
        r2 = np.einsum("ij,ij->i", d, d)
        if np.any(r2 == 0.0):
            raise ValueError("evaluation at a source point")
        out += a_j * 0.25 / np.pi * np.log(r2)
    return out


def source_normal_derivative(config: AcquisitionConfig, mesh: BoundaryMesh) -> np.ndarray:
    """dU~/dnu at the panel midpoints for every source, shape (M, N_s)."""
    pts, nrm = mesh.points, mesh.normals
    out = np.zeros((mesh.size, config.n_sources))
    for s in range(config.n_sources):
        for a_j, x_j in zip(config.charges, config.sources[s]):
            d = pts - x_j
            r2 = np.einsum("ij,ij->i", d, d)
            out[:, s] += a_j * np.einsum("ij,ij->i", nrm, d) / (2.0 * np.pi * r2)
    # zero-mean analytically (sources outside D); remove quadrature leakage
    w = mesh.weights
    out -= np.outer(np.ones(mesh.size), w @ out) / w.sum()
    return out


def background_field(config: AcquisitionConfig, pulse_samples: np.ndarray,
                     points: np.ndarray, source_index: int = 0) -> np.ndarray:
    """U(t, x) = h(t) U~(x) on the time grid, shape (N_t, n_points)."""
    static = source_potential(config, source_index, points)
    return np.asarray(pulse_samples)[:, None] * static[None, :]


def build_forward_operator(config: AcquisitionConfig, z=None,
                           order: int = 1) -> ForwardOperator:
    """Assemble the (N_s N_r) x 3 first-order operator about z."""
    if order != 1:
        raise ValueError("only truncation order K = 1 is supported")
    if z is not None:
        config = config.with_reference(z)
    zref = config.z
    ns = config.n_sources
    A = np.zeros((ns, 2))
    for s in range(ns):
        for a_j, x_j in zip(config.charges, config.sources[s]):
            d = x_j - zref
            rho = np.hypot(*d)
            if rho == 0.0:
                raise ValueError("source coincides with the reference point")
            A[s] += a_j / (2.0 * np.pi * rho**2) * d
    d = config.receivers - zref
    rho2 = np.einsum("ij,ij->i", d, d)
    if np.any(rho2 == 0.0):
        raise ValueError("receiver coincides with the reference point")
    B = d / (2.0 * np.pi * rho2[:, None])
    # row (s, r): [A1 B1, A1 B2 + A2 B1, A2 B2] against (N11, N12, N22)
    L = np.empty((ns * config.n_receivers, 3))
    L[:, 0] = np.outer(A[:, 0], B[:, 0]).ravel()
    L[:, 1] = (np.outer(A[:, 0], B[:, 1]) + np.outer(A[:, 1], B[:, 0])).ravel()
    L[:, 2] = np.outer(A[:, 1], B[:, 1]).ravel()
    return ForwardOperator(L, config, order)

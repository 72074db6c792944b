"""Discrete boundary operators for the 2D Laplacian.

Nystrom (midpoint-rule) discretization on panel midpoints:

    S[i,k]  ~ int_{panel k} G(x_i - y) ds(y),   G(x) = log|x| / (2 pi)
    K*[i,k] ~ w_k  nu(x_i).(x_i - y_k) / (2 pi |x_i - y_k|^2)

The single-layer diagonal integrates the log singularity analytically over
the flat panel; the K* diagonal is the smooth-kernel limit kappa/(4 pi) * w
on a C^2 curve (positive on a convex CCW curve for this Green's function
sign convention).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh

from .geometry import BoundaryMesh


@dataclass(frozen=True)
class BoundaryOperator:
    """Dense collocation matrix acting on panel values: (A phi)_i = sum_k A[i,k] phi_k."""

    matrix: np.ndarray
    mesh: BoundaryMesh
    kind: str  # "single_layer" | "neumann_poincare"

    def __matmul__(self, phi):
        return self.matrix @ phi


@dataclass(frozen=True)
class SpectralData:
    """Eigenpairs of K* on the weight-zero-mean subspace.

    Eigenvectors are orthonormal in the inner product <phi, psi> = phi^T G psi
    with G = -W S (the symmetrization Gram matrix), which is positive definite
    on zero-mean densities.
    """

    eigenvalues: np.ndarray   # (M-1,)
    eigenvectors: np.ndarray  # (M, M-1), columns
    gram: np.ndarray          # (M, M) matrix of the S-weighted inner product
    mesh: BoundaryMesh

    def project(self, phi: np.ndarray) -> np.ndarray:
        """Expansion coefficients <phi, u_j> of a zero-mean density."""
        return self.eigenvectors.T @ (self.gram @ phi)

    def energy(self, phi: np.ndarray) -> float:
        """Squared norm phi^T G phi in the S-weighted inner product."""
        return float(phi @ (self.gram @ phi))


def assemble_single_layer(mesh: BoundaryMesh) -> BoundaryOperator:
    """Single-layer operator S_D; (W S) is symmetric by construction."""
    mesh.validate()
    pts, w = mesh.points, mesh.weights
    diff = pts[:, None, :] - pts[None, :, :]
    r2 = np.einsum("ijk,ijk->ij", diff, diff)
    np.fill_diagonal(r2, 1.0)
    mat = (0.25 / np.pi) * np.log(r2) * w[None, :]
    # int_{-w/2}^{w/2} log|t| dt = w (log(w/2) - 1)
    np.fill_diagonal(mat, w * (np.log(w / 2.0) - 1.0) / (2.0 * np.pi))
    return BoundaryOperator(mat, mesh, "single_layer")


def assemble_neumann_poincare(mesh: BoundaryMesh) -> BoundaryOperator:
    """Neumann-Poincare operator K*_D with curvature diagonal.

    After the smooth-kernel diagonal kappa w / (4 pi) is placed, each
    diagonal entry is nudged so the discrete adjoint identity
    sum_i w_i K*[i, k] = w_k / 2 (from K[1] = 1/2) holds exactly; the nudge
    is the size of the quadrature defect and guarantees K* maps the discrete
    zero-mean subspace into itself.
    """
    mesh.validate()
    pts, nrm, w = mesh.points, mesh.normals, mesh.weights
    diff = pts[:, None, :] - pts[None, :, :]
    r2 = np.einsum("ijk,ijk->ij", diff, diff)
    np.fill_diagonal(r2, 1.0)
    num = np.einsum("ik,ijk->ij", nrm, diff)
    mat = num / (2.0 * np.pi * r2) * w[None, :]
    np.fill_diagonal(mat, mesh.curvature * w / (4.0 * np.pi))
    defect = 0.5 * w - w @ mat
    mat[np.diag_indices_from(mat)] += defect / w
    return BoundaryOperator(mat, mesh, "neumann_poincare")


def eval_single_layer(mesh: BoundaryMesh, density: np.ndarray,
                      targets: np.ndarray) -> np.ndarray:
    """Evaluate S_D[phi] at points strictly outside the boundary.

    Raises ValueError ("near-singular evaluation") when a target sits within
    one panel size of the boundary, where the midpoint rule is unreliable.
    """
    targets = np.atleast_2d(np.asarray(targets, dtype=float))
    diff = targets[:, None, :] - mesh.points[None, :, :]
    r2 = np.einsum("ijk,ijk->ij", diff, diff)
    h = mesh.weights.max()
    if np.min(r2) < h**2:
        raise ValueError("near-singular evaluation: target too close to boundary")
    kernel = (0.25 / np.pi) * np.log(r2) * mesh.weights[None, :]
    return kernel @ density


def evaluation_matrix(mesh: BoundaryMesh, targets: np.ndarray) -> np.ndarray:
    """Matrix E with E @ phi = S_D[phi](targets); same validity check as eval."""
    targets = np.atleast_2d(np.asarray(targets, dtype=float))
    diff = targets[:, None, :] - mesh.points[None, :, :]
    r2 = np.einsum("ijk,ijk->ij", diff, diff)
    if np.min(r2) < mesh.weights.max() ** 2:
        raise ValueError("near-singular evaluation: target too close to boundary")
    return (0.25 / np.pi) * np.log(r2) * mesh.weights[None, :]


def zero_mean_projector(mesh: BoundaryMesh) -> np.ndarray:
    """Projector onto the weight-zero-mean subspace {phi : w.phi = 0}."""
    w = mesh.weights
    return np.eye(mesh.size) - np.outer(np.ones(mesh.size), w) / w.sum()


def spectral_decomposition(single_layer: BoundaryOperator,
                           neumann_poincare: BoundaryOperator) -> SpectralData:
    """Calderon-symmetrized eigendecomposition of K* on zero-mean densities.

    Solves the generalized symmetric problem (Q^T G K* Q) v = mu (Q^T G Q) v
    where G = -W S and Q spans the complement of the weight vector.  The
    continuous Calderon identity S K* = K S makes G K* symmetric; the small
    quadrature asymmetry is split off before calling the symmetric solver.
    """
    if single_layer.mesh is not neumann_poincare.mesh:
        raise ValueError("operators must be assembled on the same mesh")
    mesh = single_layer.mesh
    w = mesh.weights
    G = -(w[:, None] * single_layer.matrix)
    G = 0.5 * (G + G.T)

    # orthonormal basis of {phi : w.phi = 0}
    M = mesh.size
    e = w / np.linalg.norm(w)
    H = np.eye(M) - 2.0 * np.outer(e + np.eye(M)[:, 0],
                                   e + np.eye(M)[:, 0]) / (2.0 + 2.0 * e[0])
    Q = H[:, 1:]  # Householder reflector mapping e_0 -> -e, rest orthonormal to w

    B = Q.T @ G @ Q
    B = 0.5 * (B + B.T)
    bmin = np.linalg.eigvalsh(B).min()
    if bmin <= 0:
        raise ValueError(
            f"spectral decomposition failed: Gram matrix not positive definite "
            f"(min eigenvalue {bmin:.3e}); refine the mesh")
    A = Q.T @ G @ neumann_poincare.matrix @ Q
    A = 0.5 * (A + A.T)
    mu, V = eigh(A, B)
    vecs = Q @ V
    # normalize in G (eigh already returns B-orthonormal vectors)
    return SpectralData(mu, vecs, G, mesh)

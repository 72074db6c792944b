import numpy as np
import pytest

from electrosense.geometry import RigidMotion, apply_motion, make_shape
from electrosense.potentials import (assemble_neumann_poincare,
                                     assemble_single_layer, eval_single_layer,
                                     spectral_decomposition,
                                     zero_mean_projector)


def zero_mean(mesh, seed=0):
    phi = np.random.default_rng(seed).standard_normal(mesh.size)
    return phi - (mesh.weights @ phi) / mesh.weights.sum()


# ---------------------------------------------------------------------------
# single layer
# ---------------------------------------------------------------------------

def test_single_layer_weighted_symmetry(disk512, disk_ops):
    S, _ = disk_ops
    WS = disk512.weights[:, None] * S.matrix
    assert np.abs(WS - WS.T).max() < 1e-12 * np.abs(WS).max()


def test_mean_value_property_on_circle(disk512):
    # S[1](x) = log|x| outside the unit circle
    for radius in (2.0, 3.0):
        val = eval_single_layer(disk512, np.ones(512), np.array([[radius, 0.0]]))
        assert abs(val[0] - np.log(radius)) < 1e-6


def test_zero_density_zero_potential(disk512):
    val = eval_single_layer(disk512, np.zeros(512), np.array([[2.0, 1.0]]))
    assert val[0] == 0.0


def test_single_layer_negative_definite_on_zero_mean(disk_ops, disk512):
    S, _ = disk_ops
    for seed in range(5):
        phi = zero_mean(disk512, seed)
        quad = phi @ (disk512.weights * (S.matrix @ phi))
        assert quad < 0


def test_multipole_decay_of_zero_mean_density(disk512):
    phi = zero_mean(disk512, 3)
    v100 = eval_single_layer(disk512, phi, np.array([[100.0, 0.0]]))[0]
    v200 = eval_single_layer(disk512, phi, np.array([[200.0, 0.0]]))[0]
    slope = np.log(abs(v100) / abs(v200)) / np.log(2.0)
    assert slope > 0.9  # O(1/|x|) decay or faster
    assert abs(v100) < 0.05 * np.linalg.norm(phi)


def test_near_singular_evaluation_rejected(disk512):
    with pytest.raises(ValueError, match="near-singular"):
        eval_single_layer(disk512, np.ones(512), np.array([[1.0 + 1e-5, 0.0]]))


# ---------------------------------------------------------------------------
# Neumann-Poincare operator
# ---------------------------------------------------------------------------

def test_disk_kstar_vanishes_on_zero_mean(disk_ops, disk512):
    _, K = disk_ops
    phi = zero_mean(disk512, 1)
    assert np.linalg.norm(K.matrix @ phi) < 1e-3 * np.linalg.norm(phi)


def test_kstar_preserves_zero_mean(disk512, ellipse512):
    for mesh in (disk512, ellipse512, make_shape("square", 256)):
        K = assemble_neumann_poincare(mesh)
        phi = zero_mean(mesh, 2)
        leak = abs(mesh.weights @ (K.matrix @ phi))
        assert leak < 1e-8 * np.linalg.norm(phi)


def test_symmetrized_spectrum_range_includes_polygon():
    mesh = make_shape("square", 256)
    sd = spectral_decomposition(assemble_single_layer(mesh),
                                assemble_neumann_poincare(mesh))
    assert sd.eigenvalues.min() > -0.5 - 1e-6
    assert sd.eigenvalues.max() < 0.5 + 1e-6


def test_eigenvalues_in_half_open_interval(disk512, ellipse512):
    for mesh in (disk512, ellipse512):
        K = assemble_neumann_poincare(mesh)
        ev = np.linalg.eigvals(K.matrix)
        assert ev.real.min() > -0.5 - 1e-6
        assert ev.real.max() < 0.5 + 1e-6


# ---------------------------------------------------------------------------
# spectral decomposition
# ---------------------------------------------------------------------------

def test_disk_spectrum_near_zero(disk_ops):
    sd = spectral_decomposition(*disk_ops)
    assert np.abs(sd.eigenvalues).max() < 1e-3


def test_ellipse_leading_eigenvalues(ellipse_spectral):
    # semi-axes (1, 0.5): +/- ((a-b)/(a+b))^n / 2 -> +/- 1/6, +/- 1/18, ...
    mu = np.sort(ellipse_spectral.eigenvalues)
    assert abs(mu[-1] - 1.0 / 6.0) < 1e-3
    assert abs(mu[0] + 1.0 / 6.0) < 1e-3
    assert abs(mu[-2] - 1.0 / 18.0) < 1e-3


def test_eigenvectors_orthonormal_in_sl_inner_product(ellipse_spectral):
    U, G = ellipse_spectral.eigenvectors, ellipse_spectral.gram
    gram = U.T @ G @ U
    assert np.abs(gram - np.eye(U.shape[1])).max() < 1e-8


def test_energy_identity(ellipse_spectral, ellipse512):
    for seed in range(10):
        phi = zero_mean(ellipse512, seed)
        coeff = ellipse_spectral.project(phi)
        energy = ellipse_spectral.energy(phi)
        assert abs(np.sum(coeff**2) - energy) < 1e-6 * energy


def test_resolvent_uniformly_invertible(ellipse512, mat10):
    # lam(omega) I - K* is well conditioned on zero-mean over a wide omega grid
    K = assemble_neumann_poincare(ellipse512).matrix
    P = zero_mean_projector(ellipse512)
    conds = []
    for omega in [0.0, 1e-3, 1e-1, 1e1, 1e3]:
        lam = mat10.lam_omega(omega)
        A = lam * np.eye(ellipse512.size) - K
        s = np.linalg.svd(P @ A @ P, compute_uv=False)
        conds.append(s[0] / s[ellipse512.size - 2])
    assert max(conds) < 1e3


def test_spectrum_rigid_motion_invariant(ellipse512, ellipse_ops):
    sd = spectral_decomposition(*ellipse_ops)
    for motion in (RigidMotion(np.array([1.0, -2.0]), 1.0, 1.1),
                   RigidMotion(np.zeros(2), 2.5, 0.0)):
        moved = apply_motion(ellipse512, motion)
        sd2 = spectral_decomposition(assemble_single_layer(moved),
                                     assemble_neumann_poincare(moved))
        a = np.sort(sd.eigenvalues)
        b = np.sort(sd2.eigenvalues)
        assert np.abs(a - b).max() < 1e-6


def test_mismatched_meshes_rejected(disk_ops, ellipse_ops):
    with pytest.raises(ValueError):
        spectral_decomposition(disk_ops[0], ellipse_ops[1])

"""Time-domain simulation of multi-static response data.

The boundary density phi(t) solves, per source,

    (lam I - K*)[phi] + alpha (1/2 I - K*)[phi'] = (1 + alpha d/dt) dU/dnu

which after backward-Euler differencing becomes the one-step recursion

    (lam~ I - K*) phi^n = b^n + alpha/(dt + alpha) ((1/2 I - K*) phi^{n-1} - b^{n-1})

with lam~ = (eps/dt + sigma + 1) / (2 (eps/dt + sigma - 1)) and
b^n = h(n dt) dU~/dnu.  One LU factorization serves all steps and all
sources (the step is solved for the whole source block at once).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .acquisition import AcquisitionConfig, source_normal_derivative
from .geometry import BoundaryMesh, Material
from .potentials import assemble_neumann_poincare, evaluation_matrix
from .pulse import Pulse


@dataclass(frozen=True)
class DensityHistory:
    """Boundary density phi at every time step, shape (N, M); phi[0] = 0."""

    values: np.ndarray
    dt: float
    mesh: BoundaryMesh

    @property
    def steps(self) -> int:
        return self.values.shape[0]

    def mean_leakage(self) -> float:
        """Largest weighted mean of phi^n relative to its norm."""
        w = self.mesh.weights
        means = np.abs(self.values @ w)
        norms = np.linalg.norm(self.values, axis=1)
        norms[norms == 0.0] = 1.0
        return float(np.max(means / norms))


@dataclass(frozen=True)
class MSRDataset:
    """Multi-static response tensor V[s, r, n] on the scale-j grid."""

    j: int
    data: np.ndarray            # (N_s, N_r, N)
    window: float               # 2^{-j} T
    config: AcquisitionConfig
    noise_level: float = 0.0
    seed: int | None = None
    fingerprint: str = ""

    @property
    def n_times(self) -> int:
        return self.data.shape[2]

    @property
    def dt(self) -> float:
        return self.window / self.n_times

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n_times) * self.dt

    def rms(self) -> float:
        """Per-entry root mean square, the noise calibration scale."""
        return float(np.sqrt(np.mean(self.data**2)))

    def save(self, path) -> None:
        """Write <path>.json header + <path>.npy row-major tensor."""
        path = Path(path)
        header = {
            "j": self.j, "ns": int(self.data.shape[0]),
            "nr": int(self.data.shape[1]), "n": int(self.data.shape[2]),
            "window": self.window, "noise": self.noise_level,
            "seed": self.seed, "fingerprint": self.fingerprint,
            "acquisition": json.loads(self.config.to_json()),
        }
        path.with_suffix(".json").write_text(
            json.dumps(header, sort_keys=True, indent=1))
        np.save(path.with_suffix(".npy"), self.data)


def load_msr(path, config: AcquisitionConfig | None = None) -> MSRDataset:
    """Read a dataset written by MSRDataset.save."""
    path = Path(path)
    header = json.loads(path.with_suffix(".json").read_text())
    data = np.load(path.with_suffix(".npy"))
    if data.shape != (header["ns"], header["nr"], header["n"]):
        raise ValueError("MSR payload does not match its header")
    if config is None:
        from .acquisition import build_array
        acq = header["acquisition"]
        config = build_array(acq["radius"], acq["ns"], acq["aperture"],
                             acq["dipole_sep"], acq["z"])
    return MSRDataset(header["j"], data, header["window"], config,
                      header["noise"], header["seed"], header["fingerprint"])


def time_step_constant(material: Material, dt: float) -> float:
    """lam~ of the implicit scheme."""
    r = material.eps / dt + material.sigma
    return (r + 1.0) / (2.0 * (r - 1.0))


def solve_density(mesh: BoundaryMesh, material: Material,
                  config: AcquisitionConfig, pulse: Pulse,
                  source_index: int = 0, kstar=None) -> DensityHistory:
    """March the implicit scheme for a single source."""
    hist = _march(mesh, material, config, pulse, kstar=kstar,
                  sources=[source_index], collect="density")
    return DensityHistory(hist, pulse.dt, mesh)


def simulate_msr(mesh: BoundaryMesh, material: Material,
                 config: AcquisitionConfig, pulse: Pulse,
                 kstar=None, fingerprint: str = "",
                 substeps: int = 1) -> MSRDataset:
    """Clean MSR tensor: V_sr(n dt) = S_D[phi_s^n](x_r) for every source.

    `substeps` refines the march to dt/substeps (pulse values linearly
    interpolated between samples) while the output stays on the pulse grid;
    the scheme is first order, so substeps=2 halves the marching bias.
    """
    V = _march(mesh, material, config, pulse, kstar=kstar,
               sources=range(config.n_sources), collect="msr",
               substeps=substeps)
    return MSRDataset(pulse.j, V, pulse.window_length, config,
                      0.0, None, fingerprint or pulse.fingerprint)


def _march(mesh, material, config, pulse, kstar, sources, collect,
           substeps: int = 1):
    if material.eps <= 0:
        raise ValueError("time stepping requires eps > 0")
    if substeps < 1:
        raise ValueError("substeps must be >= 1")
    if kstar is None:
        kstar = assemble_neumann_poincare(mesh).matrix
    M = mesh.size
    w = mesh.weights
    dt = pulse.dt / substeps
    N = pulse.N
    if substeps == 1:
        h = pulse.samples
    else:
        fine_t = np.arange((N - 1) * substeps + 1) * dt
        h = np.interp(fine_t, pulse.times, pulse.samples)
    lam_t = time_step_constant(material, dt)
    lhs = lam_t * np.eye(M) - kstar
    lu = lu_factor(lhs)
    k_half = 0.5 * np.eye(M) - kstar
    cf = material.alpha / (dt + material.alpha)

    g_all = source_normal_derivative(config, mesh)
    g = g_all[:, list(sources)]                      # (M, S)
    S = g.shape[1]

    if collect == "msr":
        E = evaluation_matrix(mesh, config.receivers)  # (N_r, M)
        out = np.zeros((S, config.n_receivers, N))
    else:
        out = np.zeros((N, M))

    phi = np.zeros((M, S))
    b_prev = h[0] * g
    for m in range(1, len(h)):
        b = h[m] * g
        phi = lu_solve(lu, b + cf * (k_half @ phi - b_prev))
        # continuous solution is zero-mean; kill the quadrature drift
        phi -= np.outer(np.ones(M), w @ phi) / w.sum()
        b_prev = b
        if m % substeps == 0:
            n = m // substeps
            if collect == "msr":
                out[:, :, n] = (E @ phi).T
            else:
                out[n] = phi[:, 0]
    return out


def noise_sigma(data: MSRDataset, level: float) -> float:
    """Standard deviation: level times the per-entry RMS amplitude."""
    return level * data.rms()


def add_noise(data: MSRDataset, level: float, seed: int) -> MSRDataset:
    """White Gaussian noise calibrated to the dataset's own RMS; seeded."""
    if level < 0:
        raise ValueError("noise level must be non-negative")
    if level == 0.0:
        return data
    rng = np.random.default_rng(seed)
    noisy = data.data + noise_sigma(data, level) * rng.standard_normal(data.data.shape)
    return replace(data, data=noisy, noise_level=float(level), seed=int(seed))


def simulate_dipole_response(mesh: BoundaryMesh, material: Material,
                             config: AcquisitionConfig, pulse: Pulse,
                             kstar=None) -> np.ndarray:
    """R[s, r, n]: perturbation received as a dipole difference, R ~ R^T.

    Sampling the perturbation with the same +/- stencil at the receiver as
    at the source yields a source/receiver-symmetric quantity (reciprocity);
    a physics check, not part of the inversion.
    """
    if kstar is None:
        kstar = assemble_neumann_poincare(mesh).matrix
    feet = config.sources.reshape(-1, 2)              # (2 N_s, 2)
    E = evaluation_matrix(mesh, feet)
    charges = np.tile(config.charges, config.n_sources)
    Ed = (charges[:, None] * E).reshape(config.n_sources, 2, -1).sum(axis=1)
    M = mesh.size
    w = mesh.weights
    dt = pulse.dt
    h = pulse.samples
    lam_t = time_step_constant(material, dt)
    lu = lu_factor(lam_t * np.eye(M) - kstar)
    k_half = 0.5 * np.eye(M) - kstar
    cf = material.alpha / (dt + material.alpha)
    g = source_normal_derivative(config, mesh)
    out = np.zeros((config.n_sources, config.n_sources, pulse.N))
    phi = np.zeros((M, config.n_sources))
    b_prev = h[0] * g
    for n in range(1, pulse.N):
        b = h[n] * g
        phi = lu_solve(lu, b + cf * (k_half @ phi - b_prev))
        phi -= np.outer(np.ones(M), w @ phi) / w.sum()
        b_prev = b
        out[:, :, n] = (Ed @ phi).T
    return out

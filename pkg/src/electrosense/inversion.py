"""Least-squares reconstruction of the filtered PT from MSR data.

Each time sample is inverted independently: the symmetric unknown
u = (N11, N12, N22) solves  min || L u - vec(V(t_n)) ||_2  through the
pseudo-inverse of the forward operator.  Symmetry is built into the
3-parameter basis, which is the constraint that stabilizes the limited
view problem.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .acquisition import ForwardOperator
from .forward import MSRDataset
from .gpt import PTSeries


@dataclass(frozen=True)
class ReconstructionResult:
    series: PTSeries
    residuals: np.ndarray       # (N,) per-sample residual norms
    condition_number: float


def reconstruct_pt(data: MSRDataset, operator: ForwardOperator,
                   rank_tol: float = 1e-10) -> ReconstructionResult:
    """Per-sample SVD least squares; raises if the geometry cannot resolve a PT."""
    ns, nr, nt = data.data.shape
    L = operator.matrix
    if L.shape[0] != ns * nr:
        raise ValueError("forward operator does not match the dataset layout")
    if ns * nr < 3:
        raise ValueError("acquisition geometry does not resolve the PT")
    U, s, Vt = np.linalg.svd(L, full_matrices=False)
    if s[2] <= rank_tol * s[0]:
        raise ValueError("acquisition geometry does not resolve the PT")
    rhs = data.data.reshape(ns * nr, nt)
    coeff = Vt.T @ ((U.T @ rhs) / s[:, None])      # (3, N)
    resid = np.linalg.norm(rhs - L @ coeff, axis=0)
    values = np.zeros((nt, 2, 2))
    values[:, 0, 0] = coeff[0]
    values[:, 0, 1] = coeff[1]
    values[:, 1, 0] = coeff[1]
    values[:, 1, 1] = coeff[2]
    series = PTSeries(data.j, data.times, values, data.fingerprint)
    return ReconstructionResult(series, resid, float(s[0] / s[2]))


def export_reconstruction_csv(result: ReconstructionResult, path) -> None:
    """CSV columns: t, N11, N12, N22, residual."""
    t = result.series.times
    v = result.series.values
    rows = ["t,N11,N12,N22,residual"]
    for n in range(len(t)):
        rows.append(f"{t[n]:.17g},{v[n,0,0]:.17g},{v[n,0,1]:.17g},"
                    f"{v[n,1,1]:.17g},{result.residuals[n]:.17g}")
    with open(path, "w") as fh:
        fh.write("\n".join(rows) + "\n")

import numpy as np
import pytest

from electrosense.geometry import Material, RigidMotion, apply_motion, make_shape
from electrosense.gpt import (PTComputer, decay_rates, filtered_pt_series,
                              filtered_pt_spectral_oracle, gpt_freq)
from electrosense.potentials import (assemble_neumann_poincare,
                                     assemble_single_layer,
                                     spectral_decomposition)
from electrosense.pulse import base_pulse, dilate, pulse_bank


def disk_pt_exact(sigma, area=np.pi):
    return 2.0 * area * (sigma - 1.0) / (sigma + 1.0)


def ellipse_pt_exact(a, b, lam):
    # closed form: eigenvalues |D| / (lam -+ mu) with mu = (a-b)/(2(a+b))
    mu = (a - b) / (2.0 * (a + b))
    area = np.pi * a * b
    return np.array([area / (lam - mu), area / (lam + mu)])


# ---------------------------------------------------------------------------
# frequency-domain tensors
# ---------------------------------------------------------------------------

def test_disk_pt_static(disk256, mat10):
    g = gpt_freq(disk256, mat10, 0.0)
    exact = disk_pt_exact(10.0)
    assert abs(g.matrix[0, 0].real - exact) < 1e-4 * exact
    assert abs(g.matrix[1, 1].real - exact) < 1e-4 * exact
    assert abs(g.matrix[0, 1]) < 1e-10 * exact


def test_disk_pt_conducting_limit(disk256, mat10):
    g = gpt_freq(disk256, mat10, np.inf)
    assert abs(g.matrix[0, 0].real - 2.0 * np.pi) < 1e-4 * 2 * np.pi


def test_ellipse_pt_closed_form(ellipse512, mat10):
    g = gpt_freq(ellipse512, mat10, 0.0)
    exact = ellipse_pt_exact(1.0, 0.5, mat10.lam)
    got = np.sort(np.linalg.eigvalsh(g.matrix.real))[::-1]
    assert np.abs(got - exact).max() < 1e-4 * exact.max()


def test_ellipse_pt_closed_form_complex_frequency(ellipse512, mat10):
    omega = 7.0
    lam = mat10.lam_omega(omega)
    g = gpt_freq(ellipse512, mat10, omega)
    mu = 1.0 / 6.0   # (a-b)/(2(a+b))
    area = np.pi * 0.5
    exact = np.diag([area / (lam - mu), area / (lam + mu)])
    # ellipse axes align with coordinates: matrix should be diagonal
    assert np.abs(g.matrix - exact).max() < 1e-4 * np.abs(exact).max()


def test_gpt_bounded_and_high_frequency_limit(disk256, mat10):
    values = [gpt_freq(disk256, mat10, w).matrix for w in (0.0, 0.1, 10.0, 1e3)]
    limit = gpt_freq(disk256, mat10, np.inf).matrix
    assert all(np.isfinite(v).all() for v in values)
    assert np.abs(values[-1] - limit).max() < 1e-2 * np.abs(limit).max()


def test_gpt_symmetry_for_equal_orders(mat10):
    mesh = make_shape("square", 256)
    g = gpt_freq(mesh, mat10, 3.0)
    assert np.abs(g.matrix - g.matrix.T).max() < 1e-8 * np.abs(g.matrix).max()
    assert g.asymmetry < 1e-3   # raw quadrature asymmetry, diagnostic


def test_gpt_rejects_bad_orders(disk256, mat10):
    with pytest.raises(ValueError):
        gpt_freq(disk256, mat10, 0.0, m=0)


# ---------------------------------------------------------------------------
# filtered series
# ---------------------------------------------------------------------------

def test_zero_pulse_gives_zero_series(disk256, mat10, pulse0):
    from dataclasses import replace
    zero = replace(pulse0, samples=np.zeros_like(pulse0.samples))
    series = filtered_pt_series(disk256, mat10, zero)
    assert np.all(series.values == 0.0)


@pytest.mark.parametrize("j", [-1, 0, 1, 2])
def test_causality_residual_disk(disk256, mat10, pulse0, j):
    series = filtered_pt_series(disk256, mat10, dilate(pulse0, j))
    assert series.causality_residual() < 1e-6


def test_disk_series_isotropic(disk256, mat10, pulse0):
    series = filtered_pt_series(disk256, mat10, pulse0)
    trace_half = 0.5 * (series.values[:, 0, 0] + series.values[:, 1, 1])
    iso = series.values - trace_half[:, None, None] * np.eye(2)[None]
    assert (np.linalg.norm(iso) <
            1e-3 * np.linalg.norm(series.values))


def test_series_symmetric(pulse0, mat10):
    mesh = make_shape("letterL", 128)
    series = filtered_pt_series(mesh, mat10, pulse0)
    assert np.abs(series.values - series.values.transpose(0, 2, 1)).max() < 1e-10


def test_transformation_law(ellipse512, mat10, pulse0):
    # N(t; z + s R D) = s^2 R N(t; D) R^T
    series = filtered_pt_series(ellipse512, mat10, pulse0)
    g = RigidMotion(np.array([0.1, 0.1]), 1.5, np.pi / 3)
    moved = apply_motion(ellipse512, g)
    series_moved = filtered_pt_series(moved, mat10, pulse0)
    R = g.rotation
    expected = g.s**2 * np.einsum("ab,nbc,dc->nad", R, series.values, R)
    err = np.linalg.norm(series_moved.values - expected)
    assert err < 1e-3 * np.linalg.norm(expected)


def test_singular_value_transformation(ellipse512, mat10, pulse0):
    series = filtered_pt_series(ellipse512, mat10, pulse0)
    g = RigidMotion(np.zeros(2), 2.0, 0.4)
    series_moved = filtered_pt_series(apply_motion(ellipse512, g), mat10, pulse0)
    tau = series.singular_values()
    tau_moved = series_moved.singular_values()
    assert np.abs(tau_moved - g.s**2 * tau).max() < 1e-3 * tau.max() * g.s**2


# ---------------------------------------------------------------------------
# spectral oracle (independent route)
# ---------------------------------------------------------------------------

def test_decay_rates_positive(ellipse_spectral, mat10):
    assert np.all(decay_rates(ellipse_spectral, mat10) > 0)


def test_decay_rates_positive_all_dictionary_shapes(mat10):
    for name in ("circle", "flower", "square", "letterA"):
        mesh = make_shape(name, 128)
        sd = spectral_decomposition(assemble_single_layer(mesh),
                                    assemble_neumann_poincare(mesh))
        assert np.all(decay_rates(sd, mat10) > 0)


def test_oracle_matches_direct_route_on_disk(disk_ops, disk512, mat10, pulse0):
    sd = spectral_decomposition(*disk_ops)
    direct = filtered_pt_series(disk512, mat10, pulse0)
    oracle = filtered_pt_spectral_oracle(sd, disk512, mat10, pulse0)
    err = np.linalg.norm(direct.values - oracle.values)
    assert err < 1e-3 * np.linalg.norm(direct.values)


def test_oracle_energy_truncation(disk_ops, disk512, mat10, pulse0):
    sd = spectral_decomposition(*disk_ops)
    full = filtered_pt_spectral_oracle(sd, disk512, mat10, pulse0)
    cut = filtered_pt_spectral_oracle(sd, disk512, mat10, pulse0,
                                      energy_cut=0.9999)
    err = np.linalg.norm(full.values - cut.values)
    assert err < 1e-3 * np.linalg.norm(full.values)


def test_oracle_requires_matching_mesh(disk_ops, disk512, ellipse512, mat10,
                                       pulse0):
    sd = spectral_decomposition(*disk_ops)
    with pytest.raises(ValueError):
        filtered_pt_spectral_oracle(sd, ellipse512, mat10, pulse0)


def test_export_pt_csv(tmp_path, disk256, mat10):
    from electrosense.gpt import export_pt_csv
    from electrosense.pulse import base_pulse
    series = filtered_pt_series(disk256, mat10, base_pulse(5.0, 64))
    path = tmp_path / "pt.csv"
    export_pt_csv(series, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "t,N11,N12,N22"
    assert len(lines) == 65

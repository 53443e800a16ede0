import numpy as np
import pytest

from mbep.perturb import qubit_critical_drives, qutrit_critical_drives
from mbep.qgt import (
    EPProximityError,
    biorthonormal_modes,
    drive_family,
    metric_scan,
    qgt_tensor,
)

GRID = np.arange(0.0005, 0.5, 1e-3)


@pytest.fixture(scope="module")
def qubit_scan():
    return metric_scan(drive_family("qubit_ii", 0.3, gamma_i=0.1, gamma_e=0.9), GRID, jobs=2)


@pytest.fixture(scope="module")
def qubit_scan_no_jumps():
    return metric_scan(drive_family("qubit_ii", 0.0, gamma_i=0.1, gamma_e=0.9), GRID, jobs=2)


def test_hermitian_modes():
    h = np.array([[1.0, 0.5], [0.5, -1.0]])
    es = biorthonormal_modes(h)
    np.testing.assert_allclose(es.left, es.right, atol=1e-12)
    assert es.condition == pytest.approx(1.0)


def test_biorthonormal_away_from_ep():
    es = biorthonormal_modes(drive_family("qubit_i", 0.0, gamma_i=0.2, gamma_e=0.9)(0.4))
    np.testing.assert_allclose(es.left.conj().T @ es.right, np.eye(4), atol=1e-12)
    np.testing.assert_allclose(np.linalg.norm(es.right, axis=0), 1.0)


def test_ep_proximity_error():
    fam = drive_family("qubit_i", 0.0, gamma_i=0.2, gamma_e=0.9)
    with pytest.raises(EPProximityError) as err:
        biorthonormal_modes(fam(0.175))
    assert err.value.condition > 1e6


def test_constant_family_has_zero_metric():
    m = np.diag([-1.0, -2.0, -3.0 + 1j])
    np.testing.assert_allclose(qgt_tensor(lambda om: m, 0.3), 0.0, atol=1e-12)


def test_gauge_independence():
    fam = drive_family("qubit_ii", 0.3, gamma_i=0.1, gamma_e=0.9)
    a = qgt_tensor(fam, 0.12, seed=1)
    b = qgt_tensor(fam, 0.12, seed=2)
    np.testing.assert_allclose(a, b, rtol=1e-6)
    assert qgt_tensor(fam, 0.12, mode=0) == a[0]


def test_richardson_agrees_with_central():
    fam = drive_family("qutrit_ii", 0.3, gamma_h=0.8, gamma_e=0.2)
    a = qgt_tensor(fam, 0.3)
    b = qgt_tensor(fam, 0.3, richardson=True)
    np.testing.assert_allclose(a.real, b.real, rtol=1e-4, atol=1e-6)


def test_qubit_critical_points(qubit_scan):
    found = qubit_scan.critical_omegas()
    expected = qubit_critical_drives(0.1, 0.9, 0.3)
    assert len(found) == 2
    np.testing.assert_allclose(sorted(found), expected, atol=2e-3)
    for cp in qubit_scan.critical_points:
        assert cp.power > 0.5 and abs(cp.peak_metric) > 1e4


def test_single_point_without_jumps(qubit_scan_no_jumps):
    [cp] = qubit_scan_no_jumps.critical_points
    assert cp.omega == pytest.approx(0.2, abs=2e-3)
    assert len(cp.modes) >= 2


def test_qutrit_critical_points():
    fam = drive_family("qutrit_ii", 0.3, gamma_h=0.8, gamma_e=0.2)
    scan = metric_scan(fam, GRID, jobs=2)
    np.testing.assert_allclose(sorted(scan.critical_omegas()), qutrit_critical_drives(0.8, 0.2, 0.3), atol=2e-3)


def test_ep_on_grid_is_flagged():
    fam = drive_family("qubit_ii", 0.3, gamma_i=0.1, gamma_e=0.9)
    grid = np.round(np.arange(0.15, 0.3005, 1e-3), 12)
    scan = metric_scan(fam, grid)
    assert "ep" in scan.flags
    np.testing.assert_allclose(sorted(scan.critical_omegas()), [0.2, 0.25], atol=2e-3)


def test_conjugate_modes_share_metric(qubit_scan):
    lam, g = qubit_scan.eigenvalues, qubit_scan.metric
    row = 50
    for n in range(lam.shape[1]):
        if abs(lam[row, n].imag) < 1e-9:
            continue
        partner = int(np.argmin(np.abs(lam[row] - lam[row, n].conj())))
        np.testing.assert_allclose(g[row, n], g[row, partner], rtol=1e-6)


def test_smooth_away_from_critical_points(qubit_scan):
    om, g = qubit_scan.omegas, qubit_scan.metric
    far = np.all(np.abs(om[:, None] - np.array([0.2, 0.25])[None, :]) > 0.02, axis=1)
    second = np.abs(g[2:] - 2 * g[1:-1] + g[:-2])
    keep = far[2:] & far[1:-1] & far[:-2]
    assert np.all(np.isfinite(second[keep]))
    assert second[keep].max() < 1e3


def test_metric_finite_below_threshold(qubit_scan):
    ok = np.array([f == "" for f in qubit_scan.flags])
    assert np.all(np.isfinite(qubit_scan.metric[ok]))


def test_csv_layout(qubit_scan):
    lines = qubit_scan.to_csv().splitlines()
    assert lines[0] == "omega,mode,re_lambda,im_lambda,metric,cond,flag"
    assert len(lines) == 1 + len(GRID) * 4


def test_grid_validation():
    fam = drive_family("qubit_ii", 0.3, gamma_i=0.1, gamma_e=0.9)
    with pytest.raises(ValueError):
        metric_scan(fam, [0.1, 0.2])
    with pytest.raises(ValueError):
        metric_scan(fam, [0.3, 0.2, 0.1])

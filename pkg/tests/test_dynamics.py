import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mbep.acceptance import _random_spec, _random_state
from mbep.dynamics import (
    DEFAULT_TIMES,
    PrefactorFitError,
    TrajectoryTable,
    dominant_rate,
    evolve,
    jordan_evolve,
    prefactor_degree,
    projector_state,
    time_scale_for,
)
from mbep.jordan import JordanChainSet, jordan_basis
from mbep.linalg import NumericalError
from mbep.model import build_parts, preset

LATE = np.linspace(0.0, 60.0, 400)


def run(name, times=LATE, level=0, **kw):
    spec = preset(name, **kw)
    gen = build_parts(spec).lindbladian_eff
    rho0 = projector_state(spec.dim, level)
    ts = time_scale_for(spec)
    return gen, rho0, ts, evolve(gen, rho0, times, time_scale=ts, labels=spec.level_labels()[1:])


def test_time_scales():
    assert time_scale_for(preset("qubit_i", gamma_i=0.2, gamma_e=0.9)) == pytest.approx(0.55)
    assert time_scale_for(preset("qutrit_i", gamma_h=0.4, gamma_e=0.2)) == pytest.approx(0.3)


def test_zero_generator_is_constant():
    rho = np.diag([0.25, 0.75]).astype(complex)
    table = evolve(np.zeros((4, 4)), rho, DEFAULT_TIMES)
    np.testing.assert_allclose(table.populations, np.tile([0.25, 0.75], (400, 1)))
    assert table.rate == 0.0


def test_dominant_rate_at_ep():
    gen = build_parts(preset("qutrit_i", gamma_h=0.4, gamma_e=0.2)).liouvillian_eff
    assert dominant_rate(gen) == pytest.approx(0.3, abs=1e-9)


def test_qubit_prefactor_is_quadratic():
    _, _, _, table = run("qubit_i", gamma_i=0.2, gamma_e=0.9)
    assert table.rate == pytest.approx(1.0)
    fit = prefactor_degree(table, 0)
    assert fit.degree == 2
    degree, residual = fit
    assert residual < 1e-6
    assert fit.coefficients[0] == pytest.approx(1.0, abs=1e-9)


def test_qubit_jumps_lower_degree():
    _, _, _, table = run("qubit_ii", gamma_i=0.2, gamma_e=0.9, jump_rate=0.3)
    assert prefactor_degree(table, 0).degree == 1


def test_qutrit_quadratic_term_small_with_jumps():
    _, _, _, table = run("qutrit_ii", gamma_h=0.4, gamma_e=0.2, jump_rate=0.3)
    fit = prefactor_degree(table, 0)
    assert fit.degree == 2
    assert abs(fit.coefficients[2] / fit.coefficients[1]) < 0.05


def test_qutrit_prefactor_degree_without_jumps():
    _, _, _, table = run("qutrit_ii", gamma_h=0.4, gamma_e=0.2)
    fit = prefactor_degree(table, 0)
    assert fit.degree == 4
    np.testing.assert_allclose(fit.coefficients[:3], [1, -1 / 3, 1 / 24], atol=1e-6)


def test_diagonalizable_degree_zero():
    gen = np.diag([-1.0, -2.0, -2.0, -3.0]).astype(complex)
    table = evolve(gen, np.diag([0.5, 0.5]).astype(complex), DEFAULT_TIMES)
    assert prefactor_degree(table, 0).degree == 0


def test_oscillating_prefactor_reports_residuals():
    _, _, _, table = run("qubit_i", times=np.linspace(0, 12, 400), gamma_i=0.2, gamma_e=0.9, omega=0.6)
    with pytest.raises(PrefactorFitError) as err:
        prefactor_degree(table, 0, max_degree=3)
    assert len(err.value.residuals) == 4


def test_prefactor_requires_series():
    table = TrajectoryTable(np.zeros(3), np.zeros((3, 1)), None, 0.0)
    with pytest.raises(ValueError):
        prefactor_degree(table, 0)


@pytest.mark.parametrize(
    "name, kw",
    [
        ("qubit_i", dict(gamma_i=0.2, gamma_e=0.9)),
        ("qubit_i", dict(gamma_i=0.2, gamma_e=0.9, omega=0.3, jump_rate=0.1)),
        ("qutrit_ii", dict(gamma_h=0.4, gamma_e=0.2)),
        ("qutrit_ii", dict(gamma_h=0.4, gamma_e=0.2, jump_rate=0.3)),
    ],
)
def test_jordan_evolve_agrees(name, kw):
    gen, rho0, ts, table = run(name, **kw)
    other = jordan_evolve(jordan_basis(gen), rho0, LATE, time_scale=ts)
    assert np.abs(table.states - other.states).max() < 1e-9
    np.testing.assert_allclose(table.prefactor, other.prefactor, atol=1e-8)


def test_jordan_evolve_single_block():
    cs = JordanChainSet(-0.7, [[np.array([1.0, 0, 0, 0])], [np.array([0, 1.0, 0, 0])],
                               [np.array([0, 0, 1.0, 0])], [np.array([0, 0, 0, 1.0])]])
    table = jordan_evolve([cs], np.diag([1.0, 0.0]).astype(complex), DEFAULT_TIMES)
    np.testing.assert_allclose(table.populations[:, 0], np.exp(-0.7 * DEFAULT_TIMES))


def test_jordan_evolve_needs_full_basis():
    cs = JordanChainSet(-1.0, [[np.array([1.0, 0, 0, 0])]])
    with pytest.raises(NumericalError):
        jordan_evolve([cs], np.diag([1.0, 0.0]).astype(complex))


@pytest.mark.parametrize(
    "rho",
    [
        np.array([[1, 1j], [0, 0]]),
        np.diag([0.8, 0.8]),
        np.diag([1.2, -0.2]),
        np.eye(3) / 3,
    ],
)
def test_evolve_validates_state(rho):
    with pytest.raises(ValueError):
        evolve(np.zeros((4, 4)), rho.astype(complex))


def test_evolve_rejects_bad_time_scale():
    with pytest.raises(ValueError):
        evolve(np.zeros((4, 4)), np.diag([1.0, 0]).astype(complex), time_scale=0)


def test_csv_format():
    _, _, _, table = run("qubit_i", times=np.linspace(0, 1, 3), gamma_i=0.2, gamma_e=0.9)
    lines = table.to_csv().splitlines()
    assert lines[0] == "tau,rho_i,rho_e,prefactor_i,prefactor_e"
    assert len(lines) == 4
    assert lines[1].split(",")[:3] == ["0", "1", "0"]


def test_jobs_do_not_change_result():
    gen, rho0, ts, table = run("qutrit_ii", times=np.linspace(0, 5, 40), gamma_h=0.4, gamma_e=0.2)
    again = evolve(gen, rho0, np.linspace(0, 5, 40), time_scale=ts, jobs=4)
    np.testing.assert_array_equal(table.states, again.states)


TIMES = np.linspace(0.0, 8.0, 33)


@given(st.integers(0, 2**32 - 1))
def test_full_evolution_is_physical(seed):
    rng = np.random.default_rng(seed)
    spec = _random_spec(rng)
    full = build_parts(spec).full_lindbladian
    table = evolve(full, _random_state(spec.n_levels, rng), TIMES, rate=0.0)
    s = table.states
    assert np.abs(s - s.conj().transpose(0, 2, 1)).max() <= 1e-10
    assert np.linalg.eigvalsh((s + s.conj().transpose(0, 2, 1)) / 2).min() >= -1e-9
    np.testing.assert_allclose(np.trace(s, axis1=1, axis2=2).real, 1.0, atol=1e-10)
    assert table.populations.min() >= -1e-9 and table.populations.max() <= 1 + 1e-9


@given(st.integers(0, 2**32 - 1))
def test_effective_evolution_decays(seed):
    rng = np.random.default_rng(seed)
    spec = _random_spec(rng)
    gen = build_parts(spec).lindbladian_eff
    table = evolve(gen, _random_state(spec.dim, rng), TIMES, rate=0.0)
    total = table.populations.sum(axis=1)
    assert np.all(np.diff(total) <= 1e-12)
    assert table.populations.min() >= -1e-9

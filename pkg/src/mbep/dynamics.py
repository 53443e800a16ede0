"""Time evolution of vectorized density matrices and EP polynomial prefactors.

Times are dimensionless, ``τ = t * time_scale``.  Besides the populations
every trajectory carries the prefactor ``e^{λ0 τ / time_scale} ρ_jj``, with
``-λ0`` the slowest decay rate of the generator, which isolates the
polynomial growth produced by Jordan blocks.
"""

from __future__ import annotations

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from math import factorial

import numpy as np
from numpy.polynomial import Polynomial

from .jordan import JordanChainSet, detect_structure
from .linalg import NumericalError, matrix_exp
from .model import OpenSystemSpec

__all__ = [
    "DEFAULT_TIMES",
    "TrajectoryTable",
    "PrefactorFit",
    "PrefactorFitError",
    "time_scale_for",
    "projector_state",
    "dominant_rate",
    "evolve",
    "jordan_evolve",
    "prefactor_degree",
]

DEFAULT_TIMES = np.linspace(0.0, 12.0, 400)

_STATE_TOL = 1e-10


@dataclass(frozen=True)
class TrajectoryTable:
    """Populations (and prefactors) sampled on a time grid.

    Attributes
    ----------
    times : (T,) array
        Dimensionless times τ.
    populations : (T, d) array
        Diagonal of ρ(τ).
    prefactor : (T, d) array or None
        ``e^{rate * τ} * populations``.
    rate : float
        Slowest decay rate in τ units (the exponent removed from the prefactor).
    states : (T, d, d) array or None
        Full density matrices, kept for physicality checks.
    labels : tuple of str
    """

    times: np.ndarray
    populations: np.ndarray
    prefactor: np.ndarray | None
    rate: float
    states: np.ndarray | None = None
    labels: tuple = ()

    def level_labels(self) -> tuple:
        if self.labels:
            return tuple(self.labels)
        return tuple(str(k) for k in range(self.populations.shape[1]))

    def to_csv(self) -> str:
        """CSV text with 17 significant digits and a ``tau,rho_*,prefactor_*`` header."""
        labels = self.level_labels()
        header = ["tau"] + [f"rho_{x}" for x in labels]
        if self.prefactor is not None:
            header += [f"prefactor_{x}" for x in labels]
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        for k, tau in enumerate(self.times):
            row = [tau, *self.populations[k]]
            if self.prefactor is not None:
                row += list(self.prefactor[k])
            writer.writerow([f"{float(x):.17g}" for x in row])
        return buf.getvalue()


def time_scale_for(spec: OpenSystemSpec) -> float:
    """Rate that makes time dimensionless for the model families.

    Two excited levels: the mean sink rate.  Three excited levels: the
    middle level's sink rate.  Otherwise 1.
    """
    rates = [float(g) for g in spec.sink_rates]
    if spec.n_levels == 3:
        return sum(rates) / 2 or 1.0
    if spec.n_levels == 4:
        return rates[1] or 1.0
    return 1.0


def projector_state(dim: int, level: int = 0) -> np.ndarray:
    """``|level><level|`` on a ``dim``-dimensional space."""
    rho = np.zeros((dim, dim), dtype=complex)
    rho[level, level] = 1.0
    return rho


def dominant_rate(generator) -> float:
    """Minus the largest real part in the spectrum of ``generator``.

    Eigenvalues of a defective cluster scatter like ``ε^(1/k)``; their mean
    does not, so the rate is read from the cluster means of
    :func:`mbep.jordan.detect_structure`.
    """
    clusters = detect_structure(np.asarray(generator, dtype=complex))
    return float(-max(complex(c.eigenvalue).real for c in clusters))


def _check_inputs(generator, rho0):
    gen = np.asarray(generator, dtype=complex)
    rho = np.asarray(rho0, dtype=complex)
    if gen.ndim != 2 or gen.shape[0] != gen.shape[1]:
        raise ValueError("generator must be square")
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1] or rho.shape[0] ** 2 != gen.shape[0]:
        raise ValueError(f"rho0 of shape {rho.shape} does not match generator {gen.shape}")
    scale = max(1.0, float(np.abs(rho).max()))
    if np.abs(rho - rho.conj().T).max() > _STATE_TOL * scale:
        raise ValueError("rho0 must be Hermitian")
    if np.trace(rho).real > 1 + _STATE_TOL:
        raise ValueError("rho0 must have trace <= 1")
    if np.linalg.eigvalsh((rho + rho.conj().T) / 2).min() < -_STATE_TOL * scale:
        raise ValueError("rho0 must be positive semidefinite")
    return gen, rho


def _populations(states):
    if not np.all(np.isfinite(states)):
        raise NumericalError("evolution overflowed; check rate and time range")
    diag = np.diagonal(states, axis1=1, axis2=2)
    scale = max(1.0, float(np.abs(states).max()))
    if np.abs(diag.imag).max(initial=0.0) > _STATE_TOL * scale:
        raise NumericalError("populations acquired an imaginary part")
    return diag.real.copy()


def evolve(
    generator,
    rho0,
    times=DEFAULT_TIMES,
    *,
    time_scale: float = 1.0,
    rate: float | None = None,
    labels=(),
    jobs: int = 1,
) -> TrajectoryTable:
    """Propagate ``vec(ρ)`` with ``exp(L t)``, ``t = τ / time_scale``.

    Each time point uses a fresh matrix exponential of the shifted generator
    ``L + rate_t``, so the prefactor is computed directly rather than by
    multiplying a tiny number by a huge one.  ``rate`` (τ units) defaults to
    the slowest decay rate of ``generator``.
    """
    gen, rho = _check_inputs(generator, rho0)
    if time_scale <= 0:
        raise ValueError("time_scale must be positive")
    times = np.asarray(times, dtype=float)
    d = rho.shape[0]
    rate_t = dominant_rate(gen) if rate is None else rate * time_scale
    shifted = gen + rate_t * np.eye(gen.shape[0])
    vec0 = rho.reshape(-1)

    def step(tau):
        return matrix_exp(shifted, tau / time_scale) @ vec0

    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        pref_vecs = np.array(list(pool.map(step, times)))
    pref_states = pref_vecs.reshape(len(times), d, d)
    with np.errstate(over="ignore", invalid="ignore"):
        decay = np.exp(-rate_t * times / time_scale)
        states = pref_states * decay[:, None, None]
    return TrajectoryTable(
        times=times,
        populations=_populations(states),
        prefactor=_populations(pref_states),
        rate=rate_t / time_scale,
        states=states,
        labels=tuple(labels),
    )


def jordan_evolve(
    chain_sets,
    rho0,
    times=DEFAULT_TIMES,
    *,
    time_scale: float = 1.0,
    rate: float | None = None,
    labels=(),
    cond_limit: float = 1e12,
) -> TrajectoryTable:
    """Propagate in a Jordan basis with the ``t^k / k!`` Toeplitz kernel.

    ``chain_sets`` must jointly form a basis of the vectorized space, e.g.
    the output of :func:`mbep.jordan.jordan_basis`.  ``rate`` defaults to
    minus the largest real part among the chain eigenvalues.
    """
    chain_sets = list(chain_sets)
    rho = np.asarray(rho0, dtype=complex)
    d = rho.shape[0]
    columns, owners = [], []
    for cs in chain_sets:
        if not isinstance(cs, JordanChainSet):
            raise TypeError("expected JordanChainSet entries")
        for chain in cs.chains:
            for grade, v in enumerate(chain):
                columns.append(np.asarray(v, dtype=complex))
                owners.append((complex(cs.eigenvalue), len(columns) - 1 - grade, grade))
    if len(columns) != d * d:
        raise NumericalError(f"Jordan basis has {len(columns)} vectors, need {d * d}")
    basis = np.column_stack(columns)
    cond = float(np.linalg.cond(basis))
    if not np.isfinite(cond) or cond > cond_limit:
        raise NumericalError(f"Jordan basis is ill-conditioned (cond = {cond:.3e})")
    coeffs = np.linalg.solve(basis, rho.reshape(-1))
    rate_t = (
        -max(complex(cs.eigenvalue).real for cs in chain_sets) if rate is None else rate * time_scale
    )
    times = np.asarray(times, dtype=float)
    t = times / time_scale
    pref_vecs = np.zeros((len(t), d * d), dtype=complex)
    # column j with grade g feeds the columns below it in its chain
    for j, (lam, start, grade) in enumerate(owners):
        if coeffs[j] == 0:
            continue
        expo = np.exp((lam + rate_t) * t)
        for shift in range(grade + 1):
            weight = coeffs[j] * expo * t**shift / factorial(shift)
            pref_vecs += weight[:, None] * basis[:, start + grade - shift][None, :]
    pref_states = pref_vecs.reshape(len(t), d, d)
    states = pref_states * np.exp(-rate_t * t)[:, None, None]
    return TrajectoryTable(
        times=times,
        populations=_populations(states),
        prefactor=_populations(pref_states),
        rate=rate_t / time_scale,
        states=states,
        labels=tuple(labels),
    )


class PrefactorFitError(ValueError):
    """No polynomial of admissible degree fits the prefactor window.

    ``residuals`` lists the relative residual per degree; a floor that stays
    well above the tolerance indicates subdominant exponentials in the
    window, which a later or wider window removes.
    """

    def __init__(self, message, residuals):
        super().__init__(message)
        self.residuals = residuals


@dataclass(frozen=True)
class PrefactorFit:
    degree: int
    residual: float
    coefficients: np.ndarray  # ascending powers of τ

    def __iter__(self):
        yield self.degree
        yield self.residual


def prefactor_degree(
    table: TrajectoryTable,
    level: int,
    *,
    window: float = 0.5,
    rtol: float = 1e-6,
    max_degree: int = 8,
) -> PrefactorFit:
    """Smallest polynomial degree describing the late-time prefactor.

    The fit uses the last ``window`` fraction of the time grid; the chosen
    degree is the smallest whose relative residual ``‖fit - y‖ / ‖y‖``
    drops below ``rtol``.
    """
    if table.prefactor is None:
        raise ValueError("trajectory has no prefactor series")
    if not 0 < window <= 1:
        raise ValueError("window must lie in (0, 1]")
    n = len(table.times)
    start = int(np.floor(n * (1 - window)))
    x = table.times[start:]
    y = table.prefactor[start:, level]
    norm = np.linalg.norm(y)
    if norm == 0:
        return PrefactorFit(0, 0.0, np.zeros(1))
    residuals = []
    for deg in range(0, min(max_degree, len(x) - 1) + 1):
        poly = Polynomial.fit(x, y, deg)
        res = float(np.linalg.norm(poly(x) - y) / norm)
        residuals.append(res)
        if res < rtol:
            return PrefactorFit(deg, res, poly.convert().coef)
    raise PrefactorFitError(
        f"no polynomial of degree <= {max_degree} fits the window "
        f"(best relative residual {min(residuals):.2e}); widen or shift the window to later times",
        residuals,
    )

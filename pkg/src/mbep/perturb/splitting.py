"""Branch tracking and log-log fits of eigenvalue splitting against Γ."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

__all__ = ["BranchFit", "SplittingFit", "track_branches", "splitting_exponent_fit"]

# a step is accepted when every branch moves less than this fraction of its
# distance to the nearest other branch
_STEP_RATIO = 0.25
_MAX_DEPTH = 12


@dataclass(frozen=True)
class BranchFit:
    exponent: float
    coefficient: complex
    r2: float

    def to_dict(self) -> dict:
        return {
            "exponent": self.exponent,
            "coefficient": [self.coefficient.real, self.coefficient.imag],
            "r2": self.r2,
        }


@dataclass(frozen=True)
class SplittingFit:
    """Per-branch fits ``|λ_k(Γ) - λ_0| ≈ |c_k| Γ^p_k``.

    ``branches`` holds the tracked eigenvalues, one column per branch, on
    ``gammas``.  ``ambiguous`` is set when tracking met two branches too
    close to tell apart.
    """

    gammas: np.ndarray
    branches: np.ndarray
    center: complex
    fits: tuple
    ambiguous: bool

    def exponents(self) -> np.ndarray:
        return np.array([f.exponent for f in self.fits])


def _eigvals(family, gamma):
    return np.linalg.eigvals(np.asarray(family(gamma), dtype=complex))


def _match(prev: np.ndarray, new: np.ndarray) -> np.ndarray:
    cost = np.abs(prev[:, None] - new[None, :])
    _, cols = linear_sum_assignment(cost)
    return new[cols]


def _step_ok(prev: np.ndarray, new: np.ndarray, floor: float) -> bool:
    gaps = np.abs(prev[:, None] - prev[None, :])
    np.fill_diagonal(gaps, np.inf)
    nearest = gaps.min(axis=1)
    moved = np.abs(new - prev)
    resolvable = nearest > floor
    return bool(np.all(moved[resolvable] < _STEP_RATIO * nearest[resolvable]))


def track_branches(family, gammas, jobs: int = 1) -> tuple[np.ndarray, bool]:
    """Continue eigenvalues of ``family(Γ)`` across ``gammas`` (ascending).

    Between grid points the step is bisected geometrically until every
    branch moves by much less than its distance to its neighbours.
    Branches closer than a rounding floor are treated as interchangeable
    and reported through the returned ``ambiguous`` flag.
    """
    gammas = np.asarray(gammas, dtype=float)
    if np.any(np.diff(gammas) <= 0) or gammas[0] <= 0:
        raise ValueError("gammas must be positive and strictly increasing")
    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        grid_vals = list(pool.map(lambda g: _eigvals(family, g), gammas))
    scale = max(1.0, float(np.max(np.abs(grid_vals[0]))))
    floor = 1e-12 * scale
    ambiguous = False
    rows = [np.sort_complex(grid_vals[0])]

    def advance(prev, g0, g1, target, depth):
        nonlocal ambiguous
        new = _match(prev, target)
        if _step_ok(prev, new, floor):
            return new
        if depth >= _MAX_DEPTH:
            ambiguous = True
            return new
        mid = np.sqrt(g0 * g1)
        half = advance(prev, g0, mid, _eigvals(family, mid), depth + 1)
        return advance(half, mid, g1, target, depth + 1)

    for g0, g1, vals in zip(gammas[:-1], gammas[1:], grid_vals[1:]):
        rows.append(advance(rows[-1], g0, g1, vals, 0))
    table = np.array(rows)
    gaps = np.abs(table[:, :, None] - table[:, None, :])
    for row in gaps:
        np.fill_diagonal(row, np.inf)
    if np.any(gaps.min(axis=(1, 2)) <= floor):
        ambiguous = True
    return table, ambiguous


def _fit(gammas, deviation) -> BranchFit:
    x = np.log(gammas)
    mag = np.abs(deviation)
    if np.any(mag == 0):
        return BranchFit(float("nan"), 0j, float("nan"))
    y = np.log(mag)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    phase = np.sum(deviation / mag)
    phase = phase / abs(phase) if abs(phase) > 0 else 1.0
    return BranchFit(float(slope), complex(np.exp(intercept) * phase), r2)


def splitting_exponent_fit(family, gammas, center, jobs: int = 1) -> SplittingFit:
    """Leading exponents of ``λ_k(Γ) - center`` for every eigenvalue branch.

    Parameters
    ----------
    family
        ``family(gamma) -> complex matrix``.
    gammas
        Positive, increasing, ideally log-spaced rates inside the
        asymptotic regime (``max Γ <= 1e-3`` is a safe default).
    center
        Unperturbed degenerate eigenvalue the branches emanate from.
    """
    table, ambiguous = track_branches(family, gammas, jobs)
    center = complex(center)
    fits = tuple(_fit(np.asarray(gammas), table[:, k] - center) for k in range(table.shape[1]))
    return SplittingFit(np.asarray(gammas, dtype=float), table, center, fits, ambiguous)

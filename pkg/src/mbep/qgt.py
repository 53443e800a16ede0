"""Biorthonormal quantum geometric tensor of Lindbladian eigenmodes.

For a right/left eigenvector pair ``(r_n, l_n)`` with ``<l_m|r_n> = δ_mn``
the tensor component along one parameter Ω is

    Q_n = <∂l_n|∂r_n> - <∂l_n|r_n><l_n|∂r_n>,

and the quantum metric is ``g_n = Re Q_n``.  Derivatives are central finite
differences taken in a parallel-transport gauge: vectors at ``Ω ± h`` are the
spectral projections of the vectors at Ω, which keeps them smooth even
inside exactly degenerate eigenspaces.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares, linear_sum_assignment

from .linalg import EigenSystem, NumericalError
from .model import build_parts, preset

__all__ = [
    "EPProximityError",
    "DEFAULT_COND_LIMIT",
    "DIVERGENCE_THRESHOLD",
    "biorthonormal_modes",
    "qgt_tensor",
    "drive_family",
    "CriticalPoint",
    "QgtScan",
    "metric_scan",
]

DEFAULT_COND_LIMIT = 1e6
DIVERGENCE_THRESHOLD = 1e4
MIN_DIVERGENCE_POWER = 0.5
_GAUGE_RTOL = 1e-6


class EPProximityError(NumericalError):
    """The eigenbasis is too close to defective to define biorthonormal modes."""

    def __init__(self, message, condition):
        super().__init__(message)
        self.condition = condition


def _degenerate_groups(w: np.ndarray, tol: float) -> list[list[int]]:
    groups: list[list[int]] = []
    for k in np.argsort(w.real + 1e-3 * w.imag):
        for g in groups:
            if abs(w[k] - w[g[0]]) <= tol:
                g.append(int(k))
                break
        else:
            groups.append([int(k)])
    return groups


def biorthonormal_modes(m, cond_limit: float = DEFAULT_COND_LIMIT) -> EigenSystem:
    """Right and left eigenvectors with ``<l_m|r_n> = δ_mn``.

    Right vectors have unit norm and their largest component real and
    positive; inside (numerically) degenerate eigenvalue groups they are
    orthonormalized first.  ``condition`` is the largest per-mode
    eigenvalue condition number ``‖l_n‖ ‖r_n‖``.

    Raises
    ------
    EPProximityError
        When some mode condition number exceeds ``cond_limit``.
    """
    m = np.asarray(m, dtype=complex)
    w, v = np.linalg.eig(m)
    scale = max(1.0, float(np.linalg.norm(m, 2)))
    for group in _degenerate_groups(w, 1e-10 * scale):
        if len(group) > 1:
            q, _ = np.linalg.qr(v[:, group])
            v[:, group] = q
    v = v / np.linalg.norm(v, axis=0)
    idx = np.argmax(np.abs(v), axis=0)
    phase = v[idx, np.arange(v.shape[1])]
    v = v * (np.abs(phase) / phase)
    try:
        left = np.linalg.inv(v).conj().T
    except np.linalg.LinAlgError:
        raise EPProximityError("eigenbasis is singular", np.inf) from None
    kappa = np.linalg.norm(left, axis=0)
    cond = float(kappa.max())
    if not np.isfinite(cond) or cond > cond_limit:
        raise EPProximityError(f"mode condition number {cond:.3e} exceeds {cond_limit:.1e}", cond)
    resid = np.linalg.norm(m @ v - v * w, axis=0).max() / scale
    return EigenSystem(w, v, left, float(resid), cond)


def _assign(w_ref: np.ndarray, w_new: np.ndarray) -> np.ndarray:
    """Permutation ``p`` so that ``w_new[p[k]]`` continues ``w_ref[k]``."""
    _, cols = linear_sum_assignment(np.abs(w_ref[:, None] - w_new[None, :]))
    return cols


def _transport(base: EigenSystem, other: EigenSystem, groups) -> tuple[np.ndarray, np.ndarray]:
    """Project the base vectors onto the matching eigenspaces of ``other``."""
    perm = _assign(base.eigenvalues, other.eigenvalues)
    right = np.empty_like(base.right)
    left = np.empty_like(base.left)
    for g in groups:
        cols = perm[g]
        r_other = other.right[:, cols]
        l_other = other.left[:, cols]
        t = l_other.conj().T @ base.right[:, g]
        right[:, g] = r_other @ t
        left[:, g] = l_other @ np.linalg.inv(t).conj().T
    return right, left


def _q_from(dr: np.ndarray, dl: np.ndarray, r: np.ndarray, l: np.ndarray) -> np.ndarray:
    return (
        np.einsum("in,in->n", dl.conj(), dr)
        - np.einsum("in,in->n", dl.conj(), r) * np.einsum("in,in->n", l.conj(), dr)
    )


@dataclass
class _PointResult:
    omega: float
    eigenvalues: np.ndarray
    right: np.ndarray
    q: np.ndarray
    cond: np.ndarray
    flags: list = field(default_factory=list)


def _central(family, omega, h, base, groups, cond_limit):
    plus = biorthonormal_modes(family(omega + h), cond_limit * 10)
    minus = biorthonormal_modes(family(omega - h), cond_limit * 10)
    rp, lp = _transport(base, plus, groups)
    rm, lm = _transport(base, minus, groups)
    return (rp - rm) / (2 * h), (lp - lm) / (2 * h), (rp, lp, rm, lm)


def _point(family, omega, step, richardson, cond_limit, rng) -> _PointResult:
    base = biorthonormal_modes(family(omega), cond_limit)
    scale = max(1.0, float(np.max(np.abs(base.eigenvalues))))
    groups = _degenerate_groups(base.eigenvalues, 1e-8 * scale)
    h = step if step is not None else 1e-6 * max(1.0, abs(omega))
    if h <= 0 or omega + h == omega:
        raise NumericalError(f"finite-difference step {h!r} underflows at omega={omega!r}")
    dr, dl, (rp, lp, rm, lm) = _central(family, omega, h, base, groups, cond_limit)
    if richardson:
        dr2, dl2, _ = _central(family, omega, h / 2, base, groups, cond_limit)
        dr, dl = (4 * dr2 - dr) / 3, (4 * dl2 - dl) / 3
    r, l = base.right, base.left
    q = _q_from(dr, dl, r, l)

    # gauge check: r -> e^χ r, l -> e^{-χ*} l with χ smooth in Ω
    a = rng.normal(size=r.shape[1]) + 1j * rng.normal(size=r.shape[1])
    b = rng.normal(size=r.shape[1]) + 1j * rng.normal(size=r.shape[1])

    def gauge(x):
        return np.exp(0.1 * a + b * x)

    gp, gm, g0 = gauge(h), gauge(-h), gauge(0.0)
    dr_g = (rp * gp - rm * gm) / (2 * h)
    dl_g = (lp / gp.conj() - lm / gm.conj()) / (2 * h)
    q_g = _q_from(dr_g, dl_g, r * g0, l / g0.conj())
    q_plain = _q_from((rp - rm) / (2 * h), (lp - lm) / (2 * h), r, l)
    flags = []
    if np.any(np.abs(q_g - q_plain) > _GAUGE_RTOL * np.maximum(1.0, np.abs(q_plain))):
        flags.append("gauge")
    cond = np.linalg.norm(l, axis=0)
    return _PointResult(omega, base.eigenvalues, r, q, cond, flags)


def qgt_tensor(
    family,
    omega: float,
    mode: int | None = None,
    step: float | None = None,
    *,
    richardson: bool = False,
    cond_limit: float = DEFAULT_COND_LIMIT,
    seed: int = 0,
):
    """Tensor component ``Q_n`` at drive ``omega`` for ``family(omega)``.

    Parameters
    ----------
    family
        ``family(omega) -> complex matrix``.
    mode
        Index into the eigenvalues returned by :func:`biorthonormal_modes`
        at ``omega``; ``None`` returns all modes.
    step
        Finite-difference step, default ``1e-6 * max(1, |omega|)``.
    richardson
        Combine steps ``h`` and ``h/2`` to cancel the ``O(h²)`` error.

    Raises
    ------
    NumericalError
        If the gauge-invariance self-check fails (derivatives unresolved).
    """
    res = _point(family, omega, step, richardson, cond_limit, np.random.default_rng(seed))
    if "gauge" in res.flags:
        raise NumericalError(f"gauge-invariance check failed at omega={omega}")
    return res.q if mode is None else complex(res.q[mode])


def drive_family(name: str, jump_rate: float = 0.0, **params):
    """``omega -> 𝓛_eff`` for one preset at a fixed jump rate."""

    def build(omega):
        spec = preset(name, omega=float(omega), jump_rate=jump_rate, **params)
        return build_parts(spec).lindbladian_eff

    return build


@dataclass(frozen=True)
class CriticalPoint:
    """A localized metric divergence shared by one or more modes."""

    omega: float
    power: float
    modes: tuple
    peak_metric: float

    def to_dict(self) -> dict:
        return {
            "omega": self.omega,
            "power": self.power,
            "modes": list(self.modes),
            "peak_metric": self.peak_metric,
        }


@dataclass(frozen=True)
class QgtScan:
    """Metric of every tracked mode along a drive grid.

    Arrays are indexed ``[grid point, mode]``.  ``flags`` holds per-point
    strings: ``"ep"`` for an EP-proximity failure (metric set to inf),
    ``"gauge"`` for a failed gauge self-check, ``""`` otherwise.
    """

    omegas: np.ndarray
    eigenvalues: np.ndarray
    metric: np.ndarray
    cond: np.ndarray
    flags: tuple
    critical_points: tuple

    def to_csv(self) -> str:
        lines = ["omega,mode,re_lambda,im_lambda,metric,cond,flag"]
        for k, om in enumerate(self.omegas):
            for n in range(self.metric.shape[1]):
                lam = self.eigenvalues[k, n]
                lines.append(
                    ",".join(
                        [f"{om:.17g}", str(n), f"{lam.real:.17g}", f"{lam.imag:.17g}",
                         f"{self.metric[k, n]:.17g}", f"{self.cond[k, n]:.17g}", self.flags[k]]
                    )
                )
        return "\n".join(lines) + "\n"

    def critical_omegas(self) -> list[float]:
        return [c.omega for c in self.critical_points]


def _power_fit(om, g, peak):
    """Fit ``log g = A - p log|Ω - Ω_c|`` around a peak; returns (Ω_c, p)."""
    x, y = om, np.log(g)
    spacing = np.min(np.diff(om))
    left = om[peak - 1] if peak > 0 else om[peak] - spacing
    right = om[peak + 1] if peak + 1 < len(om) else om[peak] + spacing

    def resid(theta):
        a, p, c = theta
        return a - p * np.log(np.abs(x - c) + 1e-300) - y

    best = None
    for c0 in (0.5 * (left + om[peak]), 0.5 * (right + om[peak])):
        sol = least_squares(
            resid,
            x0=[y.max(), 1.0, c0],
            bounds=([-np.inf, 0.0, left], [np.inf, 10.0, right]),
        )
        if best is None or sol.cost < best.cost:
            best = sol
    return float(best.x[2]), float(best.x[1])


def metric_scan(
    family,
    omega_grid,
    *,
    step: float | None = None,
    richardson: bool = False,
    threshold: float = DIVERGENCE_THRESHOLD,
    min_power: float = MIN_DIVERGENCE_POWER,
    cond_limit: float = DEFAULT_COND_LIMIT,
    jobs: int = 1,
    seed: int = 0,
) -> QgtScan:
    """Quantum metric of all modes on a grid and its divergence points.

    Grid points are evaluated independently (``jobs`` threads); modes are
    then labeled by a sequential sweep maximizing ``|<r_n(Ω)|r_m(Ω')>|``.
    A mode diverges where ``|g_n|`` has a local maximum above
    ``threshold`` and a local power-law fit ``g ∝ |Ω - Ω_c|^(-p)`` gives
    ``p > min_power``; EP-proximity failures count as divergences at the
    grid point itself.  Divergences of different modes within two grid
    spacings are merged into one :class:`CriticalPoint`.
    """
    om = np.asarray(omega_grid, dtype=float)
    if om.ndim != 1 or len(om) < 3 or np.any(np.diff(om) <= 0):
        raise ValueError("omega_grid must be increasing with at least 3 points")
    seeds = np.random.SeedSequence(seed).spawn(len(om))

    def work(k):
        try:
            return _point(family, om[k], step, richardson, cond_limit, np.random.default_rng(seeds[k]))
        except EPProximityError:
            w = np.linalg.eigvals(np.asarray(family(om[k]), dtype=complex))
            return _PointResult(om[k], w, None, np.full(len(w), np.inf), np.full(len(w), np.inf), ["ep"])

    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        points = list(pool.map(work, range(len(om))))

    n = len(points[0].eigenvalues)
    eig = np.empty((len(om), n), dtype=complex)
    metric = np.empty((len(om), n))
    cond = np.empty((len(om), n))
    prev = None
    for k, pt in enumerate(points):
        if prev is None:
            perm = np.argsort(pt.eigenvalues.real + 1e-3 * pt.eigenvalues.imag, kind="stable")
        elif pt.right is None or prev.right is None:
            perm = _assign(eig[k - 1], pt.eigenvalues)
        else:
            overlap = np.abs(prev.right.conj().T @ pt.right)
            # previous columns are already in label order
            _, perm = linear_sum_assignment(-overlap)
        eig[k] = pt.eigenvalues[perm]
        metric[k] = pt.q.real[perm]
        cond[k] = pt.cond[perm]
        if pt.right is not None:
            pt = _PointResult(pt.omega, pt.eigenvalues[perm], pt.right[:, perm], pt.q[perm], pt.cond[perm], pt.flags)
        prev = pt
    flags = tuple(",".join(p.flags) for p in points)

    # peaks are searched on the envelope max_n |g_n|, which is insensitive to
    # label swaps between coalescing modes; the metric is indefinite, hence |g|
    absg = np.abs(metric)
    env = absg.max(axis=1)
    hits = []
    for k in range(len(om)):
        if not np.isfinite(env[k]):
            hits.append((om[k], np.inf, k))
            continue
        if env[k] <= threshold or k in (0, len(om) - 1):
            continue
        if not (env[k] >= env[k - 1] and env[k] >= env[k + 1]):
            continue
        lo, hi = max(0, k - 2), min(len(om), k + 3)
        idx = [i for i in range(lo, hi) if np.isfinite(env[i]) and env[i] > 0]
        if len(idx) < 3:
            continue
        c, p = _power_fit(om[idx], env[idx], idx.index(k))
        if p > min_power:
            hits.append((c, p, k))

    spacing = float(np.min(np.diff(om)))
    groups: list[list] = []
    for h in sorted(hits):
        if groups and h[0] - groups[-1][-1][0] <= 2 * spacing:
            groups[-1].append(h)
        else:
            groups.append([h])
    critical = []
    for grp in groups:
        finite = [h for h in grp if np.isfinite(h[1])]
        omega_c = float(np.mean([h[0] for h in (finite or grp)]))
        power = float(np.median([h[1] for h in grp]))
        rows = sorted({i for h in grp for i in (h[2] - 1, h[2], h[2] + 1) if 0 <= i < len(om)})
        modes = set()
        for i in rows:
            modes.update(int(m) for m in np.nonzero(np.isfinite(absg[i]) & (absg[i] > threshold))[0])
        peak = float(max(env[h[2]] for h in grp))
        critical.append(CriticalPoint(omega_c, power, tuple(sorted(modes)), peak))
    return QgtScan(om, eig, metric, cond, flags, tuple(critical))

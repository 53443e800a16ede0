"""Acceptance suite: the reference results the package must reproduce.

Each ``criterion_N`` returns a :class:`CriterionResult`; :func:`run`
executes a selection and never raises (an exception inside a criterion is
reported as a failure).  ``mbep verify`` and ``tests/test_acceptance.py``
are thin wrappers around :func:`run`.
"""

from __future__ import annotations

import itertools
import time
import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.optimize import linear_sum_assignment

from .exact import GaussianRational, exact_array, exact_power_ranks, exact_rank
from .jordan import (
    JordanChainSet,
    _power_nullities,
    detect_structure,
    exact_structure,
    jordan_basis,
    kron_sum_jordan_basis,
    predict_kron_sum_blocks,
)
from .linalg import DEFAULT_RANK_TOL, jordan_block
from .model import OpenSystemSpec, build_parts, preset

__all__ = ["CriterionResult", "CRITERIA", "run", "random_unimodular", "planted_matrix"]


@dataclass(frozen=True)
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.number:>2} {self.title}: {self.detail}"

    def to_dict(self) -> dict:
        return {
            "number": self.number,
            "title": self.title,
            "passed": self.passed,
            "detail": self.detail,
        }


# ----------------------------------------------------------------------
# helpers
# ----------------------------------------------------------------------


def random_unimodular(n: int, rng: np.random.Generator, sweeps: int = 2) -> np.ndarray:
    """Integer matrix with determinant 1, built from elementary row operations."""
    s = np.eye(n, dtype=int)
    for _ in range(sweeps * n):
        i, j = rng.choice(n, size=2, replace=False) if n > 1 else (0, 0)
        if i == j:
            continue
        s[i] += int(rng.integers(-2, 3)) * s[j]
    return s


def _integer_inverse(s: np.ndarray) -> np.ndarray:
    inv = np.rint(np.linalg.inv(s.astype(float))).astype(int)
    if not np.array_equal(s @ inv, np.eye(len(s), dtype=int)):
        raise ArithmeticError("similarity is not unimodular")
    return inv


def planted_matrix(blocks, s: np.ndarray) -> np.ndarray:
    """Exact ``S J S^-1`` with ``J`` the direct sum of ``(size, eigenvalue)`` blocks."""
    n = sum(size for size, _ in blocks)
    j = np.zeros((n, n), dtype=complex)
    k = 0
    for size, lam in blocks:
        j[k:k + size, k:k + size] = jordan_block(size, lam)
        k += size
    s_ex = exact_array(s)
    return s_ex @ exact_array(j) @ exact_array(_integer_inverse(s))


def _random_partition(total: int, largest: int, rng) -> list[int]:
    parts = []
    while total:
        size = int(rng.integers(1, min(largest, total) + 1))
        parts.append(size)
        total -= size
    return parts


def _match_distance(a, b) -> float:
    a, b = np.asarray(a, dtype=complex), np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        return np.inf
    cost = np.abs(a[:, None] - b[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max(initial=0.0))


def _structure_map(structs) -> dict:
    return {complex(round(s.eigenvalue.real, 6), round(s.eigenvalue.imag, 6)): list(s.segre)
            for s in structs}


def _fmt_map(d: dict) -> str:
    return "{" + ", ".join(f"{k.real:+.4g}{k.imag:+.4g}j: {v}" for k, v in d.items()) + "}"


# ----------------------------------------------------------------------
# criteria
# ----------------------------------------------------------------------


def criterion_1() -> CriterionResult:
    title = "qubit multi-block EP"
    gi, ge, om = Fraction(1, 5), Fraction(9, 10), Fraction(7, 40)
    parts = build_parts(preset("qubit_i", gamma_i=float(gi), gamma_e=float(ge), omega=float(om)))
    structs = detect_structure(parts.liouvillian_eff)
    if len(structs) != 1:
        return CriterionResult(1, title, False, f"{len(structs)} clusters")
    s = structs[0]
    n = parts.liouvillian_eff.shape[0]
    numeric = _power_nullities(parts.liouvillian_eff - s.eigenvalue * np.eye(n), n, DEFAULT_RANK_TOL)
    exact_parts = build_parts(preset("qubit_i", gamma_i=gi, gamma_e=ge, omega=om), exact=True)
    lam = GaussianRational(-(gi + ge) / 2)
    exact = [n - r for r in exact_power_ranks(exact_parts.liouvillian_eff, lam, n)]
    err = abs(s.eigenvalue - complex(lam))
    ok = err <= 1e-9 and list(s.segre) == [3, 1] and numeric == exact
    return CriterionResult(
        1, title, ok,
        f"eigenvalue {s.eigenvalue:.10g} (err {err:.1e}), segre {list(s.segre)}, "
        f"nullities numeric {numeric} exact {exact}",
    )


def criterion_2() -> CriterionResult:
    title = "qutrit multi-block EP"
    parts = build_parts(preset("qutrit_i", gamma_h=0.4, gamma_e=0.2))
    structs = detect_structure(parts.liouvillian_eff)
    gamma_i = 0.3
    hits = [s for s in structs if abs(s.eigenvalue + gamma_i) <= 1e-7]
    ok = len(structs) == 1 and len(hits) == 1 and list(hits[0].segre) == [5, 3, 1]
    detail = ", ".join(f"{s.eigenvalue:.9g} segre {list(s.segre)}" for s in structs)
    return CriterionResult(2, title, ok, detail)


_EIGEN_POOL = [0, 1, -1, 1j, -1j, 1 + 1j, 2]


def criterion_3(cases: int = 200, seed: int = 3) -> CriterionResult:
    title = "Kronecker-sum block prediction"
    rng = np.random.default_rng(seed)
    mismatches = []
    for case in range(cases):
        hamiltonian = case % 2 == 1
        factors = []
        for _ in range(2):
            dim = int(rng.integers(1, 6))
            sizes = _random_partition(dim, 4, rng)
            blocks = [(k, _EIGEN_POOL[int(rng.integers(0, 3 if case % 3 == 0 else 7))]) for k in sizes]
            factors.append((blocks, random_unimodular(dim, rng)))
        (ba, sa), (bb, sb) = factors
        a, b = planted_matrix(ba, sa), planted_matrix(bb, sb)
        if hamiltonian:
            i = GaussianRational(0, 1)
            conj_b = np.vectorize(lambda x: x.conjugate(), otypes=[object])(b)
            left, right = -i * a, i * conj_b
        else:
            left, right = a, b
        eye_a = exact_array(np.eye(a.shape[0]))
        eye_b = exact_array(np.eye(b.shape[0]))
        total = np.kron(left, eye_b) + np.kron(eye_a, right)
        predicted = predict_kron_sum_blocks(ba, bb, hamiltonian=hamiltonian)
        found = [exact_structure(total, GaussianRational.coerce(p.eigenvalue)) for p in predicted]
        same = all(tuple(p.segre) == tuple(f.segre) for p, f in zip(predicted, found))
        full = sum(f.multiplicity for f in found) == total.shape[0]
        if not (same and full):
            mismatches.append(case)
    return CriterionResult(
        3, title, not mismatches,
        f"{cases} planted cases (half Hamiltonian mode), {len(mismatches)} mismatches"
        + (f" e.g. case {mismatches[0]}" if mismatches else ""),
    )


def _exact_chain_set(s: np.ndarray, lam) -> JordanChainSet:
    cols = exact_array(s)
    return JordanChainSet(lam, [[cols[:, k].copy() for k in range(s.shape[1])]])


def criterion_4(seed: int = 4) -> CriterionResult:
    title = "Kronecker-sum Jordan chains"
    rng = np.random.default_rng(seed)
    failures = []
    zero = GaussianRational(0)
    for m, n in itertools.product(range(1, 6), repeat=2):
        sa, sb = random_unimodular(m, rng), random_unimodular(n, rng)
        la, lb = GaussianRational(1, -1), GaussianRational(Fraction(1, 2))
        a = planted_matrix([(m, complex(la))], sa)
        b = planted_matrix([(n, complex(lb))], sb)
        total = np.kron(a, exact_array(np.eye(n))) + np.kron(exact_array(np.eye(m)), b)
        cs = kron_sum_jordan_basis(_exact_chain_set(sa, la), _exact_chain_set(sb, lb))
        shifted = total - cs.eigenvalue * exact_array(np.eye(m * n))
        ok = len(cs.chains) == min(m, n)
        for chain in cs.chains:
            prev = np.full(m * n, zero, dtype=object)
            for v in chain:
                ok &= all(x == y for x, y in zip(shifted @ v, prev))
                prev = v
        ok &= exact_rank(np.column_stack(cs.vectors())) == m * n
        if not ok:
            failures.append((m, n))
    return CriterionResult(
        4, title, not failures,
        f"25 (m, n) pairs, exact recursion and span m*n, failures {failures}",
    )


def criterion_5() -> CriterionResult:
    from .perturb import char_poly_in_gamma, newton_diagram, preset_family, qutrit_case_i_cubic_factor

    title = "Newton diagram of qutrit case (i)"
    gh, ge = Fraction(2, 5), Fraction(1, 5)
    gamma_i, gt = (gh + ge) / 2, (gh - ge) / 2
    p = char_poly_in_gamma(preset_family("qutrit_i", gamma_h=gh, gamma_e=ge),
                           omega_squared=(gh - ge) ** 2 / 32)
    quotient = p.shift(-gamma_i).exact_divide(qutrit_case_i_cubic_factor(gh, ge))
    diagram = newton_diagram(quotient)
    segs = [(s.slope, s.span) for s in diagram.segments]
    ok = segs == [(Fraction(1, 5), 5), (Fraction(1), 1)]
    detail = f"segments {[(str(a), b) for a, b in segs]}"
    if ok:
        target = (15 / 32) ** 0.2 * float(gt) ** 0.8
        moduli = [abs(complex(r)) for r in diagram.segments[0].roots()]
        err = max(abs(x - target) for x in moduli)
        linear = diagram.segments[1].roots()
        exact_ok = len(linear) == 1 and linear[0] == GaussianRational(Fraction(-16, 15))
        ok = err <= 1e-12 and exact_ok
        detail += f", |root| err {err:.1e}, linear root {linear[0]}"
    return CriterionResult(5, title, ok, detail)


def criterion_6(jobs: int = 1) -> CriterionResult:
    from .perturb import preset_family, splitting_exponent_fit

    title = "splitting exponents"
    gammas = np.logspace(-8, -4, 12)
    cases = [
        ("qubit_i", dict(gamma_i=0.2, gamma_e=0.9, omega=0.175), -0.55, [1 / 3] * 3 + [1.0]),
        ("qutrit_i", dict(gamma_h=0.4, gamma_e=0.2), -0.3, [0.2] * 5 + [0.5] * 2 + [1.0] * 2),
    ]
    ok, parts = True, []
    for name, params, center, expected in cases:
        fit = splitting_exponent_fit(preset_family(name, exact=False, **params), gammas, center, jobs)
        got = np.sort(fit.exponents())
        err = float(np.max(np.abs(got - np.sort(expected))))
        ok &= err <= 0.02
        parts.append(f"{name} {np.round(got, 3).tolist()} (max err {err:.3f})")
    return CriterionResult(6, title, ok, "; ".join(parts))


def criterion_7(draws: int = 100, seed: int = 7) -> CriterionResult:
    from .perturb import qubit_case_i_eigenvalues, qubit_case_ii_eigenvalues, qutrit_case_ii_eigenvalues

    title = "closed forms vs eig"
    rng = np.random.default_rng(seed)
    cases = [
        ("qubit_i", "gamma_i", qubit_case_i_eigenvalues),
        ("qubit_ii", "gamma_i", qubit_case_ii_eigenvalues),
        ("qutrit_ii", "gamma_h", qutrit_case_ii_eigenvalues),
    ]
    worst = {name: 0.0 for name, _, _ in cases}
    for _ in range(draws):
        r1, r2 = rng.uniform(0, 1, 2)
        om, gam = rng.uniform(0, 0.5, 2)
        for name, first, formula in cases:
            spec = preset(name, **{first: r1}, gamma_e=r2, omega=om, jump_rate=gam)
            numeric = np.linalg.eigvals(build_parts(spec).lindbladian_eff)
            worst[name] = max(worst[name], _match_distance(formula(r1, r2, om, gam), numeric))
    ok = max(worst.values()) <= 1e-9
    return CriterionResult(
        7, title, ok,
        f"{draws} draws, worst " + ", ".join(f"{k} {v:.1e}" for k, v in worst.items()),
    )


def criterion_8() -> CriterionResult:
    title = "Jordan structure under jumps"
    cases = [
        ("qubit_ii", dict(gamma_i=0.1, gamma_e=0.9), {-0.5: [2], -1.1: [1, 1]}),
        ("qutrit_ii", dict(gamma_h=0.8, gamma_e=0.2), {-0.5: [3, 1, 1], -1.1: [2, 2]}),
    ]
    ok, parts = True, []
    for name, params, expected in cases:
        structs = detect_structure(build_parts(preset(name, jump_rate=0.3, **params)).lindbladian_eff)
        got = _structure_map(structs)
        for lam, segre in expected.items():
            match = [v for k, v in got.items() if abs(k - lam) <= 1e-6]
            ok &= len(match) == 1 and sorted(match[0], reverse=True) == segre
        parts.append(f"{name} {_fmt_map(got)}")
    return CriterionResult(8, title, ok, "; ".join(parts))


def criterion_9() -> CriterionResult:
    from .dynamics import evolve, jordan_evolve, prefactor_degree, projector_state, time_scale_for

    title = "dynamics consistency"
    times = np.linspace(0.0, 60.0, 400)
    cases = [
        ("qubit_i", dict(gamma_i=0.2, gamma_e=0.9)),
        ("qubit_i", dict(gamma_i=0.2, gamma_e=0.9, omega=0.3, jump_rate=0.1)),
        ("qubit_ii", dict(gamma_i=0.2, gamma_e=0.9, jump_rate=0.3)),
        ("qutrit_ii", dict(gamma_h=0.4, gamma_e=0.2)),
        ("qutrit_ii", dict(gamma_h=0.4, gamma_e=0.2, jump_rate=0.3)),
        ("qutrit_ii", dict(gamma_h=0.4, gamma_e=0.2, omega=0.1)),
    ]
    tables, worst = {}, 0.0
    for k, (name, params) in enumerate(cases):
        spec = preset(name, **params)
        gen = build_parts(spec).lindbladian_eff
        d = spec.n_levels - 1
        rho0 = projector_state(d, 0)
        ts = time_scale_for(spec)
        a = evolve(gen, rho0, times, time_scale=ts)
        b = jordan_evolve(jordan_basis(gen), rho0, times, time_scale=ts)
        worst = max(worst, float(np.abs(a.states - b.states).max()))
        tables[k] = a
    deg_qubit = prefactor_degree(tables[0], 0)
    deg_qubit_ii = prefactor_degree(tables[2], 0)
    qutrit_0 = prefactor_degree(tables[3], 0)
    qutrit_3 = prefactor_degree(tables[4], 0)
    ratio_0 = abs(qutrit_0.coefficients[2] / qutrit_0.coefficients[1])
    ratio_3 = abs(qutrit_3.coefficients[2] / qutrit_3.coefficients[1])
    ok = (
        worst <= 1e-9
        and deg_qubit.degree == 2
        and deg_qubit_ii.degree == 1
        and qutrit_0.degree <= 4
        and ratio_3 <= 0.05
    )
    return CriterionResult(
        9, title, ok,
        f"max |evolve - jordan_evolve| {worst:.1e}; degrees qubit {deg_qubit.degree}, "
        f"qubit (ii) {deg_qubit_ii.degree}, qutrit {qutrit_0.degree} (tau^2/tau {ratio_0:.3f}), "
        f"qutrit jump 0.3 {qutrit_3.degree} (tau^2/tau {ratio_3:.4f})",
    )


def criterion_10(jobs: int = 1) -> CriterionResult:
    from .perturb import qubit_critical_drives, qutrit_critical_drives
    from .qgt import drive_family, metric_scan

    title = "QGT critical points"
    grid = np.arange(0.0005, 0.5, 1e-3)
    cases = [
        ("qubit_ii", dict(gamma_i=0.1, gamma_e=0.9), 0.3, qubit_critical_drives(0.1, 0.9, 0.3)),
        ("qutrit_ii", dict(gamma_h=0.8, gamma_e=0.2), 0.3, qutrit_critical_drives(0.8, 0.2, 0.3)),
        ("qubit_ii", dict(gamma_i=0.1, gamma_e=0.9), 0.0, None),
        ("qutrit_ii", dict(gamma_h=0.8, gamma_e=0.2), 0.0, None),
    ]
    ok, parts = True, []
    for name, params, gamma, expected in cases:
        scan = metric_scan(drive_family(name, gamma, **params), grid, richardson=True, jobs=jobs)
        found = scan.critical_omegas()
        if expected is None:
            ok &= len(found) == 1
        else:
            ok &= len(found) == len(expected) and all(
                abs(f - e) <= 2e-3 for f, e in zip(sorted(found), sorted(expected))
            )
        parts.append(f"{name} jump {gamma}: {[round(x, 5) for x in found]}")
    return CriterionResult(10, title, ok, "; ".join(parts))


def _random_spec(rng: np.random.Generator) -> OpenSystemSpec:
    n = int(rng.choice([2, 3, 4]))
    drives = {(i, j): float(rng.uniform(-1, 1))
              for i in range(2, n + 1) for j in range(i + 1, n + 1) if rng.random() < 0.7}
    jumps = []
    for _ in range(int(rng.integers(0, 3))):
        mat = rng.normal(size=(n - 1, n - 1)) + 1j * rng.normal(size=(n - 1, n - 1))
        jumps.append((mat, float(rng.uniform(0, 0.5))))
    return OpenSystemSpec(
        n_levels=n,
        detunings=tuple(rng.uniform(-1, 1, n - 1)),
        drives=drives,
        sink_rates=tuple(rng.uniform(0, 1, n - 1)),
        intra_jumps=tuple(jumps),
    )


def _random_state(d: int, rng) -> np.ndarray:
    x = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = x @ x.conj().T
    return rho / np.trace(rho).real


def _conjugate_closed(w: np.ndarray) -> float:
    scale = max(1.0, float(np.abs(w).max()))
    return _match_distance(w, w.conj()) / scale


def criterion_11(specs: int = 50, seed: int = 11) -> CriterionResult:
    from .dynamics import evolve

    title = "physicality fuzz"
    rng = np.random.default_rng(seed)
    times = np.linspace(0.0, 10.0, 41)
    worst = dict(trace=0.0, herm=0.0, pos=np.inf, conj=0.0, mono=0.0)
    for _ in range(specs):
        spec = _random_spec(rng)
        parts = build_parts(spec)
        n = spec.n_levels
        full = parts.full_lindbladian
        worst["trace"] = max(worst["trace"], float(np.abs(np.eye(n).reshape(-1) @ full).max()))
        traj = evolve(full, _random_state(n, rng), times, rate=0.0)
        states = traj.states
        worst["herm"] = max(worst["herm"], float(np.abs(states - states.conj().transpose(0, 2, 1)).max()))
        herm = (states + states.conj().transpose(0, 2, 1)) / 2
        worst["pos"] = min(worst["pos"], float(np.linalg.eigvalsh(herm).min()))
        for m in (full, parts.lindbladian_eff, parts.liouvillian_eff):
            worst["conj"] = max(worst["conj"], _conjugate_closed(np.linalg.eigvals(m)))
        eff = evolve(parts.lindbladian_eff, _random_state(n - 1, rng), times, rate=0.0)
        total = eff.populations.sum(axis=1)
        worst["mono"] = max(worst["mono"], float(np.max(np.diff(total), initial=0.0)))
    ok = (
        worst["trace"] <= 1e-10
        and worst["herm"] <= 1e-10
        and worst["pos"] >= -1e-9
        and worst["conj"] <= 1e-6
        and worst["mono"] <= 1e-12
    )
    return CriterionResult(
        11, title, ok,
        f"{specs} specs: trace {worst['trace']:.1e}, hermiticity {worst['herm']:.1e}, "
        f"min eig {worst['pos']:.1e}, conjugate pairing {worst['conj']:.1e}, "
        f"max population increase {worst['mono']:.1e}",
    )


def criterion_12() -> CriterionResult:
    title = "coupled-block fixture"
    got = {}
    for t in (0.0, 1.0):
        m = jordan_block(9, -0.3)
        m[4, 5] = t
        m[7, 8] = 0.0
        structs = detect_structure(m)
        got[t] = [list(s.segre) for s in structs]
        exact = exact_structure(exact_array(m), Fraction(-3, 10))
        got[t].append(list(exact.segre))
    ok = got[1.0] == [[8, 1], [8, 1]] and got[0.0] == [[5, 3, 1], [5, 3, 1]]
    return CriterionResult(
        12, title, ok,
        f"coupling 1 -> {got[1.0][0]} (exact {got[1.0][1]}), coupling 0 -> {got[0.0][0]} (exact {got[0.0][1]})",
    )


CRITERIA = {
    1: criterion_1,
    2: criterion_2,
    3: criterion_3,
    4: criterion_4,
    5: criterion_5,
    6: criterion_6,
    7: criterion_7,
    8: criterion_8,
    9: criterion_9,
    10: criterion_10,
    11: criterion_11,
    12: criterion_12,
}

_TAKES_JOBS = {6, 10}


def run(numbers=None, jobs: int = 1) -> list[CriterionResult]:
    """Run the selected criteria (all by default) in order."""
    out = []
    for k in numbers or sorted(CRITERIA):
        fn = CRITERIA[k]
        start = time.perf_counter()
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                res = fn(jobs=jobs) if k in _TAKES_JOBS else fn()
        except Exception as exc:  # reported, not raised
            res = CriterionResult(k, fn.__name__, False, f"{type(exc).__name__}: {exc}")
        elapsed = time.perf_counter() - start
        out.append(CriterionResult(res.number, res.title, bool(res.passed), res.detail, elapsed))
    return out

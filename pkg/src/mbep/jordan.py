"""Jordan structure: detection, Kronecker-sum prediction and chain construction."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from math import comb, factorial

import numpy as np
from scipy.cluster.hierarchy import linkage
from scipy.spatial.distance import pdist

from .exact import GaussianRational, exact_power_ranks
from .linalg import DEFAULT_RANK_TOL, numeric_rank

__all__ = [
    "DEFAULT_CLUSTER_TOL",
    "AmbiguousClusteringWarning",
    "JordanStructure",
    "JordanChainSet",
    "conjugate_partition",
    "detect_structure",
    "exact_structure",
    "predict_kron_sum_blocks",
    "jordan_chains",
    "jordan_basis",
    "kron_sum_jordan_basis",
    "liouvillian_chains",
    "chain_residual",
]

DEFAULT_CLUSTER_TOL = 1e-7


class AmbiguousClusteringWarning(UserWarning):
    """Two eigenvalue clusters sit close enough that the split is tolerance-dependent."""


def conjugate_partition(parts) -> list[int]:
    parts = [p for p in parts if p > 0]
    if not parts:
        return []
    return [sum(1 for p in parts if p >= k) for k in range(1, max(parts) + 1)]


@dataclass(frozen=True)
class JordanStructure:
    """Jordan data of one eigenvalue cluster.

    ``segre`` lists block sizes in descending order, ``weyr`` the
    increments of ``dim ker (M - λ)^k``; the two are conjugate partitions.
    """

    eigenvalue: complex
    segre: tuple
    weyr: tuple = ()
    cluster_radius: float = 0.0

    def __post_init__(self):
        segre = tuple(sorted((int(s) for s in self.segre), reverse=True))
        object.__setattr__(self, "segre", segre)
        if not self.weyr:
            object.__setattr__(self, "weyr", tuple(conjugate_partition(segre)))

    @property
    def multiplicity(self) -> int:
        return sum(self.segre)

    def to_dict(self) -> dict:
        lam = complex(self.eigenvalue)
        return {
            "eigenvalue": [lam.real, lam.imag],
            "segre": list(self.segre),
            "weyr": list(self.weyr),
        }


@dataclass
class JordanChainSet:
    """Jordan chains sharing one eigenvalue.

    ``chains[u][k]`` is the grade ``k+1`` vector of chain ``u``, so
    ``(M - λ) chains[u][0] = 0`` and ``(M - λ) chains[u][k] = chains[u][k-1]``.
    Vectors are complex arrays or exact object arrays.
    """

    eigenvalue: complex
    chains: list = field(default_factory=list)

    @property
    def lengths(self) -> list[int]:
        return [len(c) for c in self.chains]

    def vectors(self) -> list:
        return [v for chain in self.chains for v in chain]


# ----------------------------------------------------------------------
# Detection
# ----------------------------------------------------------------------


def _weyr_from_nullities(nullities) -> list[int]:
    weyr = []
    prev = 0
    for nu in nullities:
        if nu == prev:
            break
        weyr.append(nu - prev)
        prev = nu
    return weyr


def _power_nullities(a: np.ndarray, kmax: int, rank_tol: float) -> list[int]:
    n = a.shape[0]
    norm = np.linalg.norm(a, 2)
    if norm == 0:
        return [n] * kmax
    out = []
    power = np.eye(n, dtype=complex)
    for k in range(1, kmax + 1):
        power = power @ a
        out.append(n - numeric_rank(power, rank_tol, reference=norm**k))
    return out


def _cluster_tree(points: np.ndarray):
    """Single-linkage dendrogram as nested (height, members, left, right)."""
    n = len(points)
    nodes = [(0.0, [i], None, None) for i in range(n)]
    if n == 1:
        return nodes[0]
    z = linkage(pdist(np.column_stack([points.real, points.imag])), method="single")
    for a, b, height, _ in z:
        left, right = nodes[int(a)], nodes[int(b)]
        nodes.append((float(height), left[1] + right[1], left, right))
    return nodes[-1]


def detect_structure(
    m,
    cluster_tol: float = DEFAULT_CLUSTER_TOL,
    rank_tol: float = DEFAULT_RANK_TOL,
) -> list[JordanStructure]:
    """Numerical Jordan structure of every eigenvalue cluster of ``m``.

    Eigenvalues closer than ``cluster_tol`` always share a cluster.  Beyond
    that, a single-linkage group of ``k`` eigenvalues is accepted as one
    cluster when ``(M - λ̄)^k`` has nullity exactly ``k`` at the group mean
    λ̄; this collects the ``ε^(1/k)`` spray that rounding produces around a
    defective eigenvalue.  The Weyr characteristic comes from ranks of the
    powers of ``M - λ̄``.  An :class:`AmbiguousClusteringWarning` is issued
    when two accepted clusters come within ``2 * cluster_tol`` of each other.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("matrix must be square")
    n = m.shape[0]
    if n == 0:
        return []
    w = np.linalg.eigvals(m)
    eye = np.eye(n)

    accepted: list[tuple[list[int], complex, list[int]]] = []

    def verify(members):
        k = len(members)
        lam = complex(np.mean(w[members]))
        nullities = _power_nullities(m - lam * eye, k, rank_tol)
        return (nullities[-1] == k), lam, nullities

    def visit(node):
        height, members, left, right = node
        if left is None or height <= cluster_tol:
            _, lam, nullities = verify(members)
            accepted.append((members, lam, nullities))
            return
        ok, lam, nullities = verify(members)
        if ok:
            accepted.append((members, lam, nullities))
        else:
            visit(left)
            visit(right)

    visit(_cluster_tree(w))

    out = []
    for members, lam, nullities in accepted:
        weyr = _weyr_from_nullities(nullities)
        if sum(weyr) != len(members):
            # rank test disagrees with the eigenvalue count: trust the count
            weyr = [len(members)]
        segre = conjugate_partition(weyr)
        radius = float(np.max(np.abs(w[members] - lam)))
        out.append(JordanStructure(lam, tuple(segre), tuple(weyr), radius))

    for i in range(len(accepted)):
        for j in range(i + 1, len(accepted)):
            gap = np.min(np.abs(w[accepted[i][0]][:, None] - w[accepted[j][0]][None, :]))
            if gap <= 2 * cluster_tol:
                warnings.warn(
                    f"clusters at {out[i].eigenvalue:.6g} and {out[j].eigenvalue:.6g} "
                    f"are {gap:.2e} apart (cluster_tol={cluster_tol:g})",
                    AmbiguousClusteringWarning,
                    stacklevel=2,
                )
    out.sort(key=lambda s: (round(s.eigenvalue.real, 9), round(s.eigenvalue.imag, 9)))
    return out


def exact_structure(m, eigenvalue) -> JordanStructure:
    """Jordan structure at an exactly known eigenvalue of an exact matrix."""
    m = np.asarray(m)
    n = m.shape[0]
    lam = GaussianRational.coerce(eigenvalue)
    ranks = exact_power_ranks(m, lam, n)
    weyr = _weyr_from_nullities([n - r for r in ranks])
    return JordanStructure(complex(lam), tuple(conjugate_partition(weyr)), tuple(weyr))


# ----------------------------------------------------------------------
# Kronecker sums
# ----------------------------------------------------------------------


def predict_kron_sum_blocks(
    blocks_a,
    blocks_b,
    *,
    hamiltonian: bool = True,
    cluster_tol: float = DEFAULT_CLUSTER_TOL,
) -> list[JordanStructure]:
    """Jordan blocks of a Kronecker sum from the blocks of its factors.

    Each block pair ``(n_i, ε_i)``, ``(n_j, ε_j)`` contributes
    ``J_{n_i+n_j-(2k-1)}`` for ``k = 1..min(n_i, n_j)``.  With
    ``hamiltonian=True`` the inputs are Ĥ_eff blocks and the eigenvalue is
    ``i (ε_j* - ε_i)`` (factors ``-iĤ`` and ``iĤ*``); otherwise the inputs
    are the factors' own blocks and the eigenvalue is ``ε_i + ε_j``.
    Coinciding eigenvalues are merged.
    """
    raw: list[tuple[complex, list[int]]] = []
    for na, ea in blocks_a:
        for nb, eb in blocks_b:
            if na < 1 or nb < 1:
                raise ValueError("block sizes must be >= 1")
            ea, eb = complex(ea), complex(eb)
            lam = 1j * (eb.conjugate() - ea) if hamiltonian else ea + eb
            sizes = [na + nb - (2 * k - 1) for k in range(1, min(na, nb) + 1)]
            raw.append((lam, sizes))
    merged: list[tuple[list[complex], list[int]]] = []
    for lam, sizes in raw:
        for group in merged:
            if min(abs(lam - x) for x in group[0]) <= cluster_tol:
                group[0].append(lam)
                group[1].extend(sizes)
                break
        else:
            merged.append(([lam], list(sizes)))
    out = [JordanStructure(complex(np.mean(lams)), tuple(sizes)) for lams, sizes in merged]
    out.sort(key=lambda s: (round(s.eigenvalue.real, 9), round(s.eigenvalue.imag, 9)))
    return out


def _top_coefficients(m: int, n: int, u: int) -> list[tuple[int, int, int]]:
    """Integer coefficients of the top vector of chain ``u`` (1-based grades)."""
    out = []
    for i in range(u):
        c = (
            (-1) ** i
            * comb(u - 1, i)
            * (factorial(m - 1 - i) // factorial(m - u))
            * (factorial(n - u + i) // factorial(n - u))
        )
        out.append((m - i, n - u + 1 + i, c))
    return out


def _lower(coeffs: dict) -> dict:
    """Apply ``A_- ⊗ 1 + 1 ⊗ B_-`` in the ``v_i ⊗ w_j`` coefficient basis."""
    out: dict = {}
    for (i, j), c in coeffs.items():
        if i > 1:
            out[(i - 1, j)] = out.get((i - 1, j), 0) + c
        if j > 1:
            out[(i, j - 1)] = out.get((i, j - 1), 0) + c
    return {k: c for k, c in out.items() if c != 0}


def _materialize(coeffs: dict, va, wb):
    terms = [c * np.kron(va[i - 1], wb[j - 1]) for (i, j), c in sorted(coeffs.items())]
    total = terms[0]
    for t in terms[1:]:
        total = total + t
    return total


def _pair_chains(va, wb) -> list[list]:
    m, n = len(va), len(wb)
    chains = []
    for u in range(1, min(m, n) + 1):
        length = m + n + 1 - 2 * u
        top = {(i, j): c for i, j, c in _top_coefficients(m, n, u)}
        grades = [top]
        for _ in range(length - 1):
            grades.append(_lower(grades[-1]))
        if _lower(grades[-1]):
            raise ArithmeticError("chain top vector does not terminate at its length")
        chains.append([_materialize(c, va, wb) for c in reversed(grades)])
    return chains


def kron_sum_jordan_basis(chains_a: JordanChainSet, chains_b: JordanChainSet) -> JordanChainSet:
    """Jordan chains of ``A ⊗ 1 + 1 ⊗ B`` from chains of ``A`` and ``B``.

    For every pair of input chains of lengths ``m`` and ``n`` this yields
    ``min(m, n)`` chains of lengths ``m + n + 1 - 2u``.  The top vector of
    chain ``u`` is the binomial/factorial combination of ``v_{m-i} ⊗
    w_{n-u+1+i}`` that is annihilated at exactly that grade; lower grades
    follow by applying ``A_- ⊗ 1 + 1 ⊗ B_-``, carried out on integer
    coefficients so exact inputs give exact outputs.
    """
    lam = chains_a.eigenvalue + chains_b.eigenvalue
    out = JordanChainSet(lam)
    for va in chains_a.chains:
        for wb in chains_b.chains:
            if not va or not wb:
                raise ValueError("empty Jordan chain")
            out.chains.extend(_pair_chains(va, wb))
    return out


def liouvillian_chains(h_chains) -> list[JordanChainSet]:
    """Jordan chains of ``(-iĤ) ⊗ 1 + 1 ⊗ (iĤ*)`` from chains of Ĥ.

    A grade-``l`` vector ``h_l`` of Ĥ becomes ``i^l h_l`` for ``-iĤ`` and
    its complex conjugate for ``iĤ*``.  Sets landing on the same
    eigenvalue are merged.
    """
    a_sets, b_sets = [], []
    for cs in h_chains:
        a = JordanChainSet(-1j * complex(cs.eigenvalue))
        b = JordanChainSet(1j * complex(cs.eigenvalue).conjugate())
        for chain in cs.chains:
            a_chain = [_phase(v, l) for l, v in enumerate(chain, start=1)]
            a.chains.append(a_chain)
            b.chains.append([_conj(v) for v in a_chain])
        a_sets.append(a)
        b_sets.append(b)
    merged: list[JordanChainSet] = []
    for a in a_sets:
        for b in b_sets:
            cs = kron_sum_jordan_basis(a, b)
            for other in merged:
                if abs(other.eigenvalue - cs.eigenvalue) <= DEFAULT_CLUSTER_TOL:
                    other.chains.extend(cs.chains)
                    break
            else:
                merged.append(cs)
    return merged


def _phase(v, l):
    factor = 1j**l
    if np.asarray(v).dtype == object:
        return GaussianRational.coerce(complex(round(factor.real), round(factor.imag))) * v
    return factor * v


def _conj(v):
    v = np.asarray(v)
    if v.dtype == object:
        return np.array([x.conjugate() for x in v], dtype=object)
    return v.conj()


# ----------------------------------------------------------------------
# Numerical chains
# ----------------------------------------------------------------------


def _orth(vectors: np.ndarray, tol: float) -> np.ndarray:
    if vectors.size == 0 or vectors.shape[1] == 0:
        return vectors.reshape(vectors.shape[0], 0)
    u, s, _ = np.linalg.svd(vectors, full_matrices=False)
    keep = s > tol * max(s[0], 1e-300)
    return u[:, keep]


def jordan_chains(
    m, structure: JordanStructure, rank_tol: float = DEFAULT_RANK_TOL
) -> JordanChainSet:
    """Numerical Jordan chains for one cluster found by :func:`detect_structure`.

    Works top-down: for each block size ``j`` new top vectors are drawn
    from ``ker A^j`` outside ``ker A^(j-1)`` and the images of longer
    chains, then pushed down with ``A = M - λ̄``.
    """
    m = np.asarray(m, dtype=complex)
    n = m.shape[0]
    lam = complex(structure.eigenvalue)
    a = m - lam * np.eye(n)
    p = structure.segre[0]
    kernels = [np.zeros((n, 0), dtype=complex)]
    power = np.eye(n, dtype=complex)
    nullity = 0
    for j in range(1, p + 1):
        power = power @ a
        nullity += structure.weyr[j - 1]
        _, _, vh = np.linalg.svd(power)
        kernels.append(vh[n - nullity:].conj().T)
    chains: list[list[np.ndarray]] = []
    for j in range(p, 0, -1):
        count = sum(1 for s in structure.segre if s == j)
        if count == 0:
            continue
        images = [np.linalg.matrix_power(a, len(c) - j) @ c[-1] for c in chains if len(c) > j]
        span = kernels[j - 1]
        if images:
            span = np.column_stack([span] + images)
        q = _orth(span, 1e-8)
        resid = kernels[j] - q @ (q.conj().T @ kernels[j])
        u, _, _ = np.linalg.svd(resid, full_matrices=False)
        for top in u[:, :count].T:
            chain = [top]
            for _ in range(j - 1):
                chain.append(a @ chain[-1])
            chains.append(chain[::-1])
    chains.sort(key=len, reverse=True)
    return JordanChainSet(lam, chains)


def jordan_basis(
    m,
    cluster_tol: float = DEFAULT_CLUSTER_TOL,
    rank_tol: float = DEFAULT_RANK_TOL,
) -> list[JordanChainSet]:
    """Full numerical Jordan basis, one chain set per eigenvalue cluster."""
    return [jordan_chains(m, s, rank_tol) for s in detect_structure(m, cluster_tol, rank_tol)]


def chain_residual(m, chain_set: JordanChainSet) -> float:
    """Largest violation of the chain recursion, relative to ``‖M‖`` and the vectors."""
    m = np.asarray(m, dtype=complex)
    a = m - chain_set.eigenvalue * np.eye(m.shape[0])
    scale = max(np.linalg.norm(m, 2), 1.0)
    worst = 0.0
    for chain in chain_set.chains:
        prev = np.zeros(m.shape[0], dtype=complex)
        for v in chain:
            v = np.asarray(v, dtype=complex)
            r = np.linalg.norm(a @ v - prev) / (scale * max(np.linalg.norm(v), 1e-300))
            worst = max(worst, r)
            prev = v
    return worst

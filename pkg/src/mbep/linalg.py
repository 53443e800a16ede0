"""Dense complex linear algebra used throughout the package.

Thin, contract-checked wrappers around LAPACK (via numpy/scipy): Kronecker
products and sums, tolerance-controlled rank, an eigensolver that also
returns biorthonormal left vectors, and the matrix exponential.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

__all__ = [
    "DEFAULT_RANK_TOL",
    "NumericalError",
    "EigenSystem",
    "kron_product",
    "kron_sum",
    "numeric_rank",
    "eig",
    "matrix_exp",
    "jordan_block",
]

DEFAULT_RANK_TOL = 1e-10

# right-basis condition number beyond which left vectors are not formed
_LEFT_VECTOR_COND_LIMIT = 1e12


class NumericalError(ArithmeticError):
    """A numerical routine failed to produce a trustworthy answer."""


@dataclass(frozen=True)
class EigenSystem:
    """Eigenvalues with right and (when available) left eigenvectors.

    Columns of ``right`` and ``left`` are the vectors; when ``left`` is set,
    ``left.conj().T @ right`` is the identity to working precision.
    ``ill_conditioned`` signals a nearly defective matrix (an EP nearby),
    in which case ``left`` is ``None``.
    """

    eigenvalues: np.ndarray
    right: np.ndarray
    left: np.ndarray | None
    residual_bound: float
    condition: float
    ill_conditioned: bool = False

    def __len__(self):
        return len(self.eigenvalues)


def _square(m: np.ndarray, name: str = "matrix") -> np.ndarray:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be square, got shape {m.shape}")
    return m


def kron_product(a, b) -> np.ndarray:
    """Kronecker product, ``out[i*rb + k, j*cb + l] = a[i, j] * b[k, l]``."""
    return np.kron(np.asarray(a), np.asarray(b))


def kron_sum(a, b) -> np.ndarray:
    """Kronecker sum ``a ⊗ 1 + 1 ⊗ b`` of two square matrices."""
    a = _square(a, "a")
    b = _square(b, "b")
    if a.dtype == object or b.dtype == object:
        from .exact import exact_eye

        return np.kron(a, exact_eye(b.shape[0])) + np.kron(exact_eye(a.shape[0]), b)
    return np.kron(a, np.eye(b.shape[0])) + np.kron(np.eye(a.shape[0]), b)


def jordan_block(size: int, eigenvalue: complex = 0.0) -> np.ndarray:
    """Upper-triangular Jordan block with ones on the first superdiagonal."""
    return np.diag(np.full(size, eigenvalue, dtype=complex)) + np.diag(
        np.ones(size - 1, dtype=complex), 1
    )


def numeric_rank(m, tol: float = DEFAULT_RANK_TOL, reference: float | None = None) -> int:
    """Number of singular values above ``tol * reference * max(rows, cols)``.

    ``reference`` defaults to the largest singular value.  Passing an
    external scale (e.g. ``‖A‖**k`` when ranking ``A**k``) keeps a matrix
    that is zero up to rounding from being read as full rank.
    """
    if tol < 0:
        raise ValueError("tol must be non-negative")
    m = np.asarray(m, dtype=complex)
    if m.size == 0:
        return 0
    s = np.linalg.svd(m, compute_uv=False)
    smax = s[0] if reference is None else reference
    if smax == 0:
        return 0
    return int(np.count_nonzero(s > tol * smax * max(m.shape)))


def eig(m) -> EigenSystem:
    """Eigen-decomposition with residual bound and left vectors.

    Right vectors are unit-norm columns.  Left vectors are the conjugate
    transpose of the inverse right basis, so biorthonormality holds by
    construction; they are omitted (and ``ill_conditioned`` set) when the
    right basis is too close to singular.
    """
    m = _square(np.asarray(m, dtype=complex))
    if not np.all(np.isfinite(m)):
        raise NumericalError("matrix has non-finite entries")
    try:
        w, v = sla.eig(m)
    except np.linalg.LinAlgError as exc:  # QR iteration did not converge
        raise NumericalError(f"eigensolver failed: {exc}") from exc
    v = v / np.linalg.norm(v, axis=0)
    fro = np.linalg.norm(m)
    resid = np.linalg.norm(m @ v - v * w, axis=0)
    bound = float(resid.max() / fro) if fro > 0 and len(w) else 0.0
    cond = float(np.linalg.cond(v)) if len(w) else 1.0
    if not np.isfinite(cond) or cond > _LEFT_VECTOR_COND_LIMIT:
        return EigenSystem(w, v, None, bound, cond, ill_conditioned=True)
    left = np.linalg.inv(v).conj().T
    return EigenSystem(w, v, left, bound, cond)


def matrix_exp(m, t: float = 1.0) -> np.ndarray:
    """``exp(m * t)`` by scaling and squaring with a Padé kernel."""
    m = _square(np.asarray(m, dtype=complex))
    with np.errstate(over="raise", invalid="raise"):
        try:
            out = sla.expm(m * t)
        except FloatingPointError as exc:
            raise OverflowError(f"exp(m t) overflows for t={t}") from exc
    if not np.all(np.isfinite(out)):
        raise OverflowError(f"exp(m t) overflows for t={t}")
    return out

"""Exact complex-rational arithmetic.

Exact matrices are numpy ``object`` arrays whose entries are
:class:`GaussianRational` scalars, so the usual numpy operators (``@``,
``np.kron``, slicing) work on them unchanged.  Rank computations clear
denominators and run fraction-free (Bareiss) elimination over the
Gaussian integers.
"""

from __future__ import annotations

from fractions import Fraction
from functools import reduce
from math import lcm
from numbers import Rational

import numpy as np

__all__ = [
    "GaussianRational",
    "as_rational",
    "exact_array",
    "exact_eye",
    "lift",
    "to_complex",
    "exact_rank",
    "exact_power_ranks",
    "exact_nullity",
]


def as_rational(x) -> Fraction:
    """Read a real scalar as a Fraction.

    Floats are read through their shortest decimal ``repr`` so that ``0.2``
    becomes ``1/5``; use :func:`lift` for the exact binary value instead.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, Rational):
        return Fraction(x.numerator, x.denominator)
    if isinstance(x, (float, np.floating)):
        if not np.isfinite(x):
            raise ValueError(f"cannot represent {x!r} exactly")
        return Fraction(repr(float(x)))
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot convert {type(x).__name__} to a rational")


class GaussianRational:
    """Complex number with rational real and imaginary parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = as_rational(re)
        self.im = as_rational(im)

    @classmethod
    def coerce(cls, x) -> "GaussianRational":
        if isinstance(x, GaussianRational):
            return x
        if isinstance(x, (complex, np.complexfloating)):
            return cls(as_rational(x.real), as_rational(x.imag))
        return cls(x)

    @classmethod
    def from_float(cls, x) -> "GaussianRational":
        """Exact binary value of a float or complex."""
        x = complex(x)
        return cls(Fraction(x.real), Fraction(x.imag))

    # arithmetic -------------------------------------------------------
    def __add__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return GaussianRational(o.re - self.re, o.im - self.im)

    def __mul__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return GaussianRational(
            self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        den = o.re * o.re + o.im * o.im
        if den == 0:
            raise ZeroDivisionError("division by exact zero")
        return GaussianRational(
            (self.re * o.re + self.im * o.im) / den,
            (self.im * o.re - self.re * o.im) / den,
        )

    def __rtruediv__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return o / self

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __pos__(self):
        return self

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return GaussianRational(1) / self ** (-n)
        out = GaussianRational(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def conjugate(self):
        return GaussianRational(self.re, -self.im)

    @property
    def real(self):
        return self.re

    @property
    def imag(self):
        return self.im

    def __abs__(self):
        return abs(complex(self))

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def __bool__(self):
        return not self.is_zero()

    def __eq__(self, other):
        o = _coerce_or_none(other)
        if o is None:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        if self.im == 0:
            return f"GaussianRational({self.re})"
        return f"GaussianRational({self.re}, {self.im})"

    def __str__(self):
        if self.im == 0:
            return str(self.re)
        if self.re == 0:
            return f"{self.im}i"
        sign = "+" if self.im > 0 else "-"
        return f"{self.re}{sign}{abs(self.im)}i"


def _coerce_or_none(x):
    if isinstance(x, GaussianRational):
        return x
    try:
        return GaussianRational.coerce(x)
    except TypeError:
        return None


_ZERO = GaussianRational(0)
_ONE = GaussianRational(1)


def exact_array(data) -> np.ndarray:
    """Build an exact object array from nested numbers (decimal reading)."""
    arr = np.asarray(data, dtype=object)
    out = np.empty(arr.shape, dtype=object)
    for idx, x in np.ndenumerate(arr):
        out[idx] = GaussianRational.coerce(x)
    return out


def exact_eye(n: int) -> np.ndarray:
    out = np.full((n, n), _ZERO, dtype=object)
    for i in range(n):
        out[i, i] = _ONE
    return out


def lift(m) -> np.ndarray:
    """Exact image of a floating matrix (binary values, no rounding)."""
    arr = np.asarray(m)
    out = np.empty(arr.shape, dtype=object)
    for idx, x in np.ndenumerate(arr):
        out[idx] = GaussianRational.from_float(x)
    return out


def to_complex(m) -> np.ndarray:
    arr = np.asarray(m, dtype=object)
    out = np.empty(arr.shape, dtype=complex)
    for idx, x in np.ndenumerate(arr):
        out[idx] = complex(x)
    return out


# ----------------------------------------------------------------------
# Fraction-free elimination over Gaussian integers
# ----------------------------------------------------------------------


def _integer_parts(m) -> tuple[np.ndarray, np.ndarray]:
    """Scale ``m`` by the lcm of all denominators; return (real, imag) int arrays."""
    m = exact_array(m) if np.asarray(m).dtype != object else np.asarray(m)
    dens = [x.re.denominator for x in m.flat] + [x.im.denominator for x in m.flat]
    scale = reduce(lcm, dens, 1)
    re = np.empty(m.shape, dtype=object)
    im = np.empty(m.shape, dtype=object)
    for idx, x in np.ndenumerate(m):
        re[idx] = int(x.re * scale)
        im[idx] = int(x.im * scale)
    return re, im


def _gauss_matmul(a, b):
    ar, ai = a
    br, bi = b
    return ar @ br - ai @ bi, ar @ bi + ai @ br


def _bareiss_rank(re: np.ndarray, im: np.ndarray) -> int:
    re = re.copy()
    im = im.copy()
    rows, cols = re.shape
    prev_r, prev_i = 1, 0
    rank = 0
    for c in range(cols):
        if rank == rows:
            break
        pivot = None
        for r in range(rank, rows):
            if re[r, c] != 0 or im[r, c] != 0:
                pivot = r
                break
        if pivot is None:
            continue
        if pivot != rank:
            re[[rank, pivot]] = re[[pivot, rank]]
            im[[rank, pivot]] = im[[pivot, rank]]
        pr, pi = re[rank, c], im[rank, c]
        below = slice(rank + 1, rows)
        right = slice(c + 1, cols)
        # m[i,j] <- (p*m[i,j] - m[i,c]*m[k,j]) / prev, exact in Z[i]
        cr, ci = re[below, c][:, None], im[below, c][:, None]
        kr, ki = re[rank, right][None, :], im[rank, right][None, :]
        sr, si = re[below, right], im[below, right]
        nr = pr * sr - pi * si - (cr * kr - ci * ki)
        ni = pr * si + pi * sr - (cr * ki + ci * kr)
        den = prev_r * prev_r + prev_i * prev_i
        # multiply by conj(prev) then divide by |prev|^2
        tr = nr * prev_r + ni * prev_i
        ti = ni * prev_r - nr * prev_i
        if den != 1:
            tr = tr // den
            ti = ti // den
        re[below, right] = tr
        im[below, right] = ti
        re[below, c] = 0
        im[below, c] = 0
        prev_r, prev_i = pr, pi
        rank += 1
    return rank


def exact_rank(m) -> int:
    """Exact rank of a Gaussian-rational matrix."""
    arr = np.asarray(m)
    if arr.size == 0:
        return 0
    re, im = _integer_parts(arr)
    return _bareiss_rank(re, im)


def exact_power_ranks(m, eigenvalue, max_power: int) -> list[int]:
    """Ranks of ``(m - eigenvalue*I)**k`` for ``k = 1..max_power``.

    Stops early once two consecutive ranks agree (the sequence is then
    constant); the returned list is padded with the stable value.
    """
    arr = np.asarray(m)
    n = arr.shape[0]
    lam = GaussianRational.coerce(eigenvalue)
    shifted = arr - lam * exact_eye(n)
    base = _integer_parts(shifted)
    power = base
    ranks: list[int] = []
    for k in range(1, max_power + 1):
        if k > 1:
            power = _gauss_matmul(power, base)
        ranks.append(_bareiss_rank(*power))
        if len(ranks) >= 2 and ranks[-1] == ranks[-2]:
            ranks.extend([ranks[-1]] * (max_power - k))
            break
    return ranks


def exact_nullity(m) -> int:
    arr = np.asarray(m)
    return arr.shape[1] - exact_rank(arr)

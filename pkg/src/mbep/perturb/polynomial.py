"""Exact characteristic polynomials whose coefficients are polynomials in Γ."""

from __future__ import annotations

from fractions import Fraction
from math import comb
from typing import Callable

import numpy as np

from ..exact import GaussianRational, _integer_parts, as_rational, exact_array
from ..model import build_parts, preset

__all__ = ["GammaPolynomial", "char_poly_in_gamma", "preset_family", "qutrit_case_i_cubic_factor"]

_ZERO = GaussianRational(0)


def _clean(poly: dict) -> dict:
    return {g: c for g, c in poly.items() if not c.is_zero()}


def _padd(a: dict, b: dict, scale=1) -> dict:
    out = dict(a)
    for g, c in b.items():
        out[g] = out.get(g, _ZERO) + c * scale
    return _clean(out)


def _pmul(a: dict, b: dict) -> dict:
    out: dict = {}
    for ga, ca in a.items():
        for gb, cb in b.items():
            out[ga + gb] = out.get(ga + gb, _ZERO) + ca * cb
    return _clean(out)


def _fmt_gamma_poly(poly: dict) -> str:
    if not poly:
        return "0"
    terms = []
    for g in sorted(poly):
        c = poly[g]
        mono = "" if g == 0 else ("Γ" if g == 1 else f"Γ^{g}")
        terms.append(f"({c}){mono}" if mono else f"({c})")
    return " + ".join(terms)


class GammaPolynomial:
    """Monic polynomial in λ whose coefficients are exact polynomials in Γ.

    ``coefficients[k]`` multiplies ``λ^(degree - k)`` and is a mapping
    ``{Γ-exponent: GaussianRational}``; ``coefficients[0]`` is the constant 1.

    Examples
    --------
    >>> p = GammaPolynomial([{0: 1}, {1: 1}])   # λ + Γ
    >>> p.degree
    1
    """

    def __init__(self, coefficients):
        coeffs = []
        for a in coefficients:
            if not isinstance(a, dict):
                a = {0: a}
            coeffs.append(_clean({int(g): GaussianRational.coerce(c) for g, c in a.items()}))
        if not coeffs or coeffs[0] != {0: GaussianRational(1)}:
            raise ValueError("polynomial must be monic in λ")
        self.coefficients = tuple(coeffs)

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __eq__(self, other):
        if not isinstance(other, GammaPolynomial):
            return NotImplemented
        return self.coefficients == other.coefficients

    def __repr__(self):
        parts = ", ".join(_fmt_gamma_poly(a) for a in self.coefficients)
        return f"GammaPolynomial([{parts}])"

    def __mul__(self, other: "GammaPolynomial") -> "GammaPolynomial":
        n, m = self.degree, other.degree
        out = [dict() for _ in range(n + m + 1)]
        for i, a in enumerate(self.coefficients):
            for j, b in enumerate(other.coefficients):
                out[i + j] = _padd(out[i + j], _pmul(a, b))
        return GammaPolynomial(out)

    def divmod(self, divisor: "GammaPolynomial") -> tuple["GammaPolynomial", list]:
        """Long division in λ by a monic divisor; returns (quotient, remainder)."""
        rem = [dict(a) for a in self.coefficients]
        m = divisor.degree
        q = []
        for i in range(self.degree - m + 1):
            lead = rem[i]
            q.append(lead)
            for j, b in enumerate(divisor.coefficients):
                rem[i + j] = _padd(rem[i + j], _pmul(lead, b), -1)
        return GammaPolynomial(q), rem[len(q):]

    def exact_divide(self, divisor: "GammaPolynomial") -> "GammaPolynomial":
        quotient, remainder = self.divmod(divisor)
        if any(remainder):
            raise ArithmeticError("polynomial is not exactly divisible")
        return quotient

    def shift(self, s) -> "GammaPolynomial":
        """Rewrite in ``x = λ - s``, i.e. substitute ``λ = x + s``."""
        s = GaussianRational.coerce(s)
        n = self.degree
        out = [dict() for _ in range(n + 1)]
        for k, a in enumerate(self.coefficients):
            power = n - k
            for j in range(power + 1):
                # (x + s)^power contributes C(power, j) s^(power-j) x^j
                factor = comb(power, j) * s ** (power - j)
                out[n - j] = _padd(out[n - j], a, factor)
        return GammaPolynomial(out)

    def deflate(self) -> tuple["GammaPolynomial", int]:
        """Strip identically vanishing trailing coefficients (roots at λ = 0)."""
        coeffs = list(self.coefficients)
        count = 0
        while len(coeffs) > 1 and not coeffs[-1]:
            coeffs.pop()
            count += 1
        return GammaPolynomial(coeffs), count

    def leading_terms(self) -> list[tuple[int, int, GaussianRational]]:
        """``(k, β_k, α̂_k)`` with ``a_k(Γ) = α̂_k Γ^β_k + o(Γ^β_k)``, nonzero a_k only."""
        out = []
        for k, a in enumerate(self.coefficients):
            if a:
                beta = min(a)
                out.append((k, beta, a[beta]))
        return out

    def evaluate(self, gamma) -> np.ndarray:
        """Numeric λ-coefficients (descending powers) at a given Γ."""
        gamma = complex(gamma)
        return np.array(
            [sum(complex(c) * gamma**g for g, c in a.items()) for a in self.coefficients]
        )

    def roots(self, gamma) -> np.ndarray:
        return np.roots(self.evaluate(gamma))


def _affine_parts(builder, omega):
    """Split ``builder(Γ, Ω)`` into constant, Γ and Ω parts, checking affinity."""
    def build(g, o):
        m = builder(Fraction(g), None if o is None else Fraction(o))
        m = np.asarray(m)
        return m if m.dtype == object else exact_array(m)

    if omega is None:
        base = build(0, 0)
        d_gamma = build(1, 0) - base
        d_omega = build(0, 1) - base
        probe = build(2, 3)
        expected = base + 2 * d_gamma + 3 * d_omega
    else:
        base = build(0, omega)
        d_gamma = build(1, omega) - base
        d_omega = None
        probe = build(3, omega)
        expected = base + 3 * d_gamma
    if any(a != b for a, b in zip(probe.flat, expected.flat)):
        raise ValueError("builder is not affine in the rate and drive parameters")
    return base, d_gamma, d_omega


def char_poly_in_gamma(
    builder: Callable,
    *,
    omega=None,
    omega_squared=None,
) -> GammaPolynomial:
    """Exact ``det(λ - M(Γ))`` by the Faddeev-LeVerrier recursion.

    Parameters
    ----------
    builder
        ``builder(gamma, omega) -> exact square matrix``, affine in both
        arguments.  Arguments are passed as :class:`fractions.Fraction`.
    omega
        Rational drive value.  Exactly one of ``omega`` and ``omega_squared``
        must be given.
    omega_squared
        Rational value of Ω² for drives that are themselves irrational.  Ω is
        then kept symbolic and reduced with ``Ω² = omega_squared``; the
        polynomial must be even in Ω, otherwise ``ValueError`` is raised.
    """
    if (omega is None) == (omega_squared is None):
        raise ValueError("give exactly one of omega and omega_squared")
    if omega is not None:
        base, d_gamma, d_omega = _affine_parts(builder, omega)
    else:
        base, d_gamma, d_omega = _affine_parts(builder, None)
    n = base.shape[0]
    parts = [base, d_gamma] + ([d_omega] if d_omega is not None else [])
    # one common denominator so the recursion runs over Gaussian integers
    re, im = _integer_parts(np.concatenate(parts))
    scale = _common_scale(parts)
    mats = [(re[i * n:(i + 1) * n], im[i * n:(i + 1) * n]) for i in range(len(parts))]
    steps = [(0, 0), (1, 0), (0, 1)][: len(mats)]

    eye = np.eye(n, dtype=int).astype(object)
    zero = np.zeros((n, n), dtype=int).astype(object)
    # M_k as {(Γ-exp, Ω-exp): (re, im)}; c[j] multiplies λ^j
    c: dict[int, dict] = {n: {(0, 0): (1, 0)}}
    m_k = {(0, 0): (eye.copy(), zero.copy())}
    for k in range(1, n + 1):
        prod: dict = {}
        for (g, o), (mr, mi) in m_k.items():
            for (dg, do), (ar, ai) in zip(steps, mats):
                key = (g + dg, o + do)
                pr, pi = ar @ mr - ai @ mi, ar @ mi + ai @ mr
                if key in prod:
                    prod[key] = (prod[key][0] + pr, prod[key][1] + pi)
                else:
                    prod[key] = (pr, pi)
        coeff = {}
        for key, (pr, pi) in prod.items():
            tr, ti = int(np.trace(pr)), int(np.trace(pi))
            if tr % k or ti % k:
                raise ArithmeticError("non-integral Faddeev-LeVerrier trace")
            if tr or ti:
                coeff[key] = (-(tr // k), -(ti // k))
        c[n - k] = coeff
        m_k = prod
        for key, (vr, vi) in coeff.items():
            mr, mi = m_k.get(key, (zero.copy(), zero.copy()))
            m_k[key] = (mr + vr * eye, mi + vi * eye)

    # undo the scaling: c_j(M) = ĉ_j / scale^(n - j), then reduce Ω
    omega_value = None if omega is None else GaussianRational.coerce(Fraction(omega))
    osq = None if omega_squared is None else GaussianRational.coerce(Fraction(omega_squared))
    out = []
    for j in range(n, -1, -1):
        poly: dict = {}
        odd: dict = {}
        denom = Fraction(scale) ** (n - j)
        for (g, o), (vr, vi) in c[j].items():
            value = GaussianRational(Fraction(vr) / denom, Fraction(vi) / denom)
            if osq is not None:
                value = value * osq ** (o // 2)
                target = odd if o % 2 else poly
            else:
                target = poly
            target[g] = target.get(g, _ZERO) + value
        odd = _clean(odd)
        if odd:
            raise ValueError("characteristic polynomial is odd in the drive; pass a rational omega")
        out.append(poly)
    return GammaPolynomial(out)


def _common_scale(parts) -> int:
    from functools import reduce
    from math import lcm

    dens = []
    for m in parts:
        for x in m.flat:
            dens.append(x.re.denominator)
            dens.append(x.im.denominator)
    return reduce(lcm, dens, 1)


def preset_family(name: str, *, exact: bool = True, **params) -> Callable:
    """Effective Lindbladian of a preset as a function of jump rate and drive.

    The returned callable takes ``(gamma, omega)`` when ``exact`` is true
    (for :func:`char_poly_in_gamma`) and ``gamma`` alone otherwise (for
    numerical scans).  ``params`` are the remaining preset parameters.
    """
    params = dict(params)
    if exact:
        params.pop("omega", None)
        # derived rates (e.g. a mean of two decays) must be formed in exact arithmetic
        params = {k: v if v is None else as_rational(v) for k, v in params.items()}

        def build(gamma, omega):
            spec = preset(name, jump_rate=gamma, omega=omega, **params)
            return build_parts(spec, exact=True).lindbladian_eff

        return build

    def build_numeric(gamma):
        return build_parts(preset(name, jump_rate=float(gamma), **params)).lindbladian_eff

    return build_numeric


def qutrit_case_i_cubic_factor(gamma_h, gamma_e) -> GammaPolynomial:
    """Exact cubic factor of the qutrit case (i) polynomial in ``λ̃ = λ + γ_i``.

    ``(Γ + λ̃)(λ̃² + 2Γλ̃ - γ̃Γ/2 + 3Γ²/4)`` with ``γ̃ = (γ_h - γ_e)/2``; its
    roots are the exactly known eigenvalues ``-Γ`` and
    ``-Γ ± sqrt(Γ(Γ + γ_h - γ_e))/2``.
    """
    gt = (as_rational(gamma_h) - as_rational(gamma_e)) / 2
    linear = GammaPolynomial([{0: 1}, {1: 1}])
    quadratic = GammaPolynomial([{0: 1}, {1: 2}, {1: -gt / 2, 2: Fraction(3, 4)}])
    return linear * quadratic

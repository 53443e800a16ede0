import cmath
import math
from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import linear_sum_assignment

from mbep.exact import GaussianRational, exact_array
from mbep.model import build_parts, preset
from mbep.perturb import (
    GammaPolynomial,
    char_poly_in_gamma,
    newton_diagram,
    preset_family,
    qubit_case_i_eigenvalues,
    qubit_case_ii_eigenvalues,
    qubit_critical_drives,
    qutrit_case_i_cubic_factor,
    qutrit_case_i_splitting,
    qutrit_case_ii_eigenvalues,
    qutrit_critical_drives,
    splitting_exponent_fit,
)

G = GaussianRational


def match(a, b):
    cost = np.abs(np.asarray(a)[:, None] - np.asarray(b)[None, :])
    r, c = linear_sum_assignment(cost)
    return cost[r, c].max()


def eff_eigs(name, **kw):
    return np.linalg.eigvals(build_parts(preset(name, **kw)).lindbladian_eff)


# closed forms


def test_qubit_i_collapses_at_ep():
    np.testing.assert_allclose(qubit_case_i_eigenvalues(0.2, 0.9, 0.175, 0.0), -0.55, atol=1e-12)


def test_qubit_i_cube_root_splitting():
    gam, om = 1e-9, 0.175
    lam = qubit_case_i_eigenvalues(0.2, 0.9, om, gam)
    ring = [-0.55 + (2 * om**2 * gam) ** (1 / 3) * cmath.exp(2j * math.pi * k / 3) for k in range(3)]
    dev = np.abs(lam[:, None] - np.array(ring)[None, :]).min(axis=0)
    assert dev.max() < 1e-2 * abs(ring[0] + 0.55)


def test_qubit_ii_example():
    lam = np.sort_complex(qubit_case_ii_eigenvalues(0.1, 0.9, 0.2, 0.3))
    np.testing.assert_allclose(lam, np.sort_complex([-1.1, -0.8 - 0.3, -0.8 + 0.3, -0.5]), atol=1e-12)


def test_qubit_ii_zero_rate():
    np.testing.assert_allclose(qubit_case_ii_eigenvalues(0.1, 0.9, 0.2, 0.0), -0.5, atol=1e-12)


def test_qutrit_ii_zero_rate_ninefold():
    np.testing.assert_allclose(qutrit_case_ii_eigenvalues(0.8, 0.2, 0.6 / (4 * math.sqrt(2)), 0.0), -0.5, atol=1e-7)


def test_critical_drives():
    assert qubit_critical_drives(0.1, 0.9, 0.3) == pytest.approx((0.2, 0.25))
    np.testing.assert_allclose(qutrit_critical_drives(0.8, 0.2, 0.3), [0.1060660, 0.15, 0.2371708], atol=1e-7)


def test_qutrit_i_splitting_report():
    rep = qutrit_case_i_splitting(0.4, 0.2, 1e-5)
    radius = (15 * 0.2**4 / 512) ** 0.2 * 1e-5**0.2
    np.testing.assert_allclose(np.abs(rep.ring - rep.center), radius)
    assert rep.exact[0] == pytest.approx(-0.3 - 1e-5)
    assert len(rep.eigenvalues()) == 9
    np.testing.assert_allclose(qutrit_case_i_splitting(0.4, 0.2, 0.0).eigenvalues(), -0.3)
    with pytest.raises(ValueError):
        qutrit_case_i_splitting(0.4, 0.2, -1.0)


rates = st.floats(0, 1)
drives = st.floats(0, 0.5)


@given(rates, rates, drives, drives)
def test_closed_forms_match_eig(r1, r2, om, gam):
    assert match(qubit_case_i_eigenvalues(r1, r2, om, gam), eff_eigs("qubit_i", gamma_i=r1, gamma_e=r2, omega=om, jump_rate=gam)) < 1e-9
    assert match(qubit_case_ii_eigenvalues(r1, r2, om, gam), eff_eigs("qubit_ii", gamma_i=r1, gamma_e=r2, omega=om, jump_rate=gam)) < 1e-9
    assert match(qutrit_case_ii_eigenvalues(r1, r2, om, gam), eff_eigs("qutrit_ii", gamma_h=r1, gamma_e=r2, omega=om, jump_rate=gam)) < 1e-9


# polynomials


def test_scalar_family():
    p = char_poly_in_gamma(lambda g, o: exact_array([[-g]]), omega=0)
    assert p == GammaPolynomial([{0: 1}, {1: 1}])


def test_gamma_polynomial_algebra():
    a = GammaPolynomial([1, {1: 1}])
    b = GammaPolynomial([1, {0: 2}])
    prod = a * b
    assert prod == GammaPolynomial([1, {0: 2, 1: 1}, {1: 2}])
    assert prod.exact_divide(a) == b
    with pytest.raises(ArithmeticError):
        prod.exact_divide(GammaPolynomial([1, 3]))
    shifted = GammaPolynomial([1, 0, 0]).shift(2)  # (x + 2)^2
    assert shifted == GammaPolynomial([1, 4, 4])
    deflated, k = GammaPolynomial([1, {1: 1}, 0]).deflate()
    assert k == 1 and deflated.degree == 1
    np.testing.assert_allclose(prod.evaluate(0.5), [1, 2.5, 1])
    np.testing.assert_allclose(np.sort(prod.roots(0.5).real), [-2, -0.5])
    with pytest.raises(ValueError):
        GammaPolynomial([2, 1])


def test_char_poly_argument_checks():
    fam = preset_family("qubit_i", gamma_i=Fraction(1, 5), gamma_e=Fraction(9, 10))
    with pytest.raises(ValueError):
        char_poly_in_gamma(fam)
    with pytest.raises(ValueError):
        char_poly_in_gamma(lambda g, o: exact_array([[g * g]]), omega=0)


def _sympy_char_poly(family, omega):
    lam, gam = sympy.symbols("lam gam")
    base, step = family(Fraction(0), omega), family(Fraction(1), omega)

    def sym(x):
        return sympy.Rational(x.re.numerator, x.re.denominator) + sympy.I * sympy.Rational(
            x.im.numerator, x.im.denominator
        )

    n = base.shape[0]
    m = sympy.Matrix(n, n, lambda i, j: sym(base[i, j]) + gam * (sym(step[i, j]) - sym(base[i, j])))
    return sympy.Poly(sympy.expand((lam * sympy.eye(n) - m).det(method="berkowitz")), lam, gam)


@pytest.mark.parametrize(
    "name, params, omega",
    [
        ("qubit_i", dict(gamma_i=Fraction(1, 5), gamma_e=Fraction(9, 10)), Fraction(7, 40)),
        ("qubit_ii", dict(gamma_i=Fraction(1, 10), gamma_e=Fraction(9, 10)), Fraction(1, 3)),
    ],
)
def test_char_poly_matches_sympy(name, params, omega):
    family = preset_family(name, **params)
    ours = char_poly_in_gamma(family, omega=omega)
    oracle = _sympy_char_poly(family, omega)
    n = ours.degree
    for k, coeff in enumerate(ours.coefficients):
        for g in range(n + 1):
            c = coeff.get(g, G(0))
            expected = complex(oracle.coeff_monomial(sympy.Symbol("lam") ** (n - k) * sympy.Symbol("gam") ** g))
            assert complex(c) == pytest.approx(expected, abs=1e-15)


def test_qubit_i_divisible_by_linear_root():
    gi, ge = Fraction(1, 5), Fraction(9, 10)
    p = char_poly_in_gamma(preset_family("qubit_i", gamma_i=gi, gamma_e=ge), omega=Fraction(7, 40))
    factor = GammaPolynomial([1, {0: (gi + ge) / 2, 1: Fraction(1, 2)}])
    assert p.exact_divide(factor).degree == 3


def test_irrational_drive_must_be_even():
    fam = preset_family("qubit_i", gamma_i=Fraction(1, 5), gamma_e=Fraction(9, 10))
    char_poly_in_gamma(fam, omega_squared=Fraction(49, 1600))

    def odd(g, o):
        return exact_array([[o, 0], [0, g]])

    with pytest.raises(ValueError):
        char_poly_in_gamma(odd, omega_squared=Fraction(2))


@pytest.fixture(scope="module")
def qutrit_quotient():
    gh, ge = Fraction(2, 5), Fraction(1, 5)
    p = char_poly_in_gamma(preset_family("qutrit_i", gamma_h=gh, gamma_e=ge), omega_squared=Fraction(1, 800))
    return p.shift(Fraction(-3, 10)).exact_divide(qutrit_case_i_cubic_factor(gh, ge))


def test_leading_terms_table(qutrit_quotient):
    gt = Fraction(1, 10)
    expected = [
        (1, 1, 6),
        (2, 1, -5 * gt / 2),
        (3, 1, -gt**2 / 2),
        (4, 2, -gt**2 / 2),
        (5, 1, -15 * gt**4 / 32),
        (6, 2, -gt**4 / 2),
    ]
    assert qutrit_quotient.leading_terms()[1:] == [(k, b, G(a)) for k, b, a in expected]


def test_newton_diagram_qutrit(qutrit_quotient):
    d = newton_diagram(qutrit_quotient)
    assert [(s.slope, s.span) for s in d.segments] == [(Fraction(1, 5), 5), (Fraction(1), 1)]
    ring = d.segments[0].roots()
    target = (15 / 32) ** 0.2 * 0.1**0.8
    np.testing.assert_allclose(np.abs(ring), target, rtol=1e-12)
    angles = np.sort(np.mod(np.angle(ring), 2 * np.pi))
    np.testing.assert_allclose(np.diff(angles), 2 * np.pi / 5, atol=1e-9)
    assert d.segments[1].roots() == [G(Fraction(-16, 15))]
    assert d.to_dict()["segments"][0]["slope"] == [1, 5]


def test_newton_roots_predict_branches(qutrit_quotient):
    gam = 1e-8
    lam = eff_eigs("qutrit_i", gamma_h=0.4, gamma_e=0.2, jump_rate=gam) + 0.3
    d = newton_diagram(qutrit_quotient)
    for seg in d.segments:
        for mu in seg.roots():
            mu = complex(mu)
            scaled = lam / gam ** float(seg.slope)
            assert np.min(np.abs(scaled - mu)) < 1e-2 * abs(mu)


def test_newton_rejects_zero_root():
    with pytest.raises(ValueError):
        newton_diagram(GammaPolynomial([1, {1: 1}, 0]))


@st.composite
def gamma_polys(draw):
    n = draw(st.integers(1, 6))
    coeffs = [{0: 1}]
    for k in range(n):
        beta = draw(st.integers(0, 4))
        value = draw(st.integers(-5, 5).filter(bool))
        coeffs.append({beta: value})
    return GammaPolynomial(coeffs)


@given(gamma_polys())
def test_newton_hull_invariants(p):
    d = newton_diagram(p)
    slopes = [s.slope for s in d.segments]
    assert all(a < b for a, b in zip(slopes, slopes[1:]))
    assert sum(s.span for s in d.segments) == p.degree
    for s in d.segments:
        assert len(s.roots()) == s.span


# splitting fits


GAMMAS = np.logspace(-8, -4, 12)


def test_qubit_splitting_exponents():
    fit = splitting_exponent_fit(
        preset_family("qubit_i", exact=False, gamma_i=0.2, gamma_e=0.9, omega=0.175), GAMMAS, -0.55
    )
    exps = np.sort(fit.exponents())
    np.testing.assert_allclose(exps[:3], 1 / 3, atol=0.02)
    assert exps[3] >= 0.98
    assert fit.branches.shape == (12, 4)
    assert all(f.r2 > 0.99 for f in fit.fits)


def test_diagonal_family_linear():
    base = np.diag([-1.0, -2.0, -3.0])

    def family(g):
        return base + g * np.array([[1.0, 2, 0], [0, 1, 1], [3, 0, 2]])

    fit = splitting_exponent_fit(family, GAMMAS, -2.0)
    exps = fit.exponents()
    assert np.sum(np.abs(exps - 1) < 0.02) == 1  # the branch leaving -2
    assert not fit.ambiguous


@pytest.mark.slow
def test_qutrit_splitting_exponents():
    fit = splitting_exponent_fit(
        preset_family("qutrit_i", exact=False, gamma_h=0.4, gamma_e=0.2), GAMMAS, -0.3
    )
    exps = np.sort(fit.exponents())
    np.testing.assert_allclose(exps, [0.2] * 5 + [0.5] * 2 + [1.0] * 2, atol=0.02)

"""Newton diagrams of polynomials in (λ, Γ) and their leading-order roots."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ..exact import GaussianRational
from .polynomial import GammaPolynomial

__all__ = ["NewtonSegment", "NewtonDiagram", "newton_diagram"]


@dataclass(frozen=True)
class NewtonSegment:
    """One edge of the lower convex hull.

    Roots near zero with ``λ ≈ μ Γ^slope`` come in a family of ``span``
    members; ``μ`` solves ``Σ α̂_k μ^(end - k) = 0`` over the points on the
    edge.  ``coefficients`` lists that polynomial in descending powers.
    """

    slope: Fraction
    span: int
    start: int
    coefficients: tuple

    def roots(self) -> list:
        """Nonzero roots μ; exact when the edge spans a single step."""
        if self.span == 1:
            a, b = self.coefficients
            return [-b / a]
        return list(np.roots([complex(c) for c in self.coefficients]))

    def to_dict(self) -> dict:
        return {
            "slope": [self.slope.numerator, self.slope.denominator],
            "span": self.span,
            "start": self.start,
            "coefficients": [[float(c.re), float(c.im)] for c in self.coefficients],
        }


@dataclass(frozen=True)
class NewtonDiagram:
    points: tuple
    segments: tuple

    @property
    def exponents(self) -> list[Fraction]:
        return [s.slope for s in self.segments]

    def to_dict(self) -> dict:
        return {
            "points": [[k, b] for k, b in self.points],
            "segments": [s.to_dict() for s in self.segments],
        }


def _cross(o, a, b) -> Fraction:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def newton_diagram(p: GammaPolynomial) -> NewtonDiagram:
    """Lower convex hull of the points ``(k, β_k)`` of a monic polynomial.

    Raises ``ValueError`` when the constant coefficient vanishes
    identically; use :meth:`GammaPolynomial.deflate` first.
    """
    if not p.coefficients[-1]:
        raise ValueError("trailing coefficient vanishes identically; deflate the polynomial first")
    terms = p.leading_terms()
    alpha = {k: a for k, _, a in terms}
    points = [(k, beta) for k, beta, _ in terms]
    hull: list = []
    for pt in points:
        # collinear points are dropped so slopes increase strictly
        while len(hull) >= 2 and _cross(hull[-2], hull[-1], pt) <= 0:
            hull.pop()
        hull.append(pt)
    beta_of = dict(points)
    segments = []
    for (k1, b1), (k2, b2) in zip(hull, hull[1:]):
        slope = Fraction(b2 - b1, k2 - k1)
        coeffs = []
        for k in range(k1, k2 + 1):
            on_edge = k in beta_of and beta_of[k] == b1 + slope * (k - k1)
            coeffs.append(alpha[k] if on_edge else GaussianRational(0))
        segments.append(NewtonSegment(slope, k2 - k1, k1, tuple(coeffs)))
    return NewtonDiagram(tuple(points), tuple(segments))

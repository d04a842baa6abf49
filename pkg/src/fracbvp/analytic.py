"""Closed-form fractional calculus on sums of power functions.

Right-hand sides and exact solutions of the manufactured problems are all
representable as finite sums of terms ``c * (x - a)**p * (b - x)**q``
(:class:`PowerSum`).  This module evaluates such sums and applies the
left- and right-sided fractional derivative operators to them exactly,
which keeps every rhs bit-reproducible.

The key scalar identity is the derivative of a pure power,

    D_left**beta (x - a)**xi = Gamma(xi+1)/Gamma(xi+1-beta) * (x-a)**(xi-beta),

which degenerates to the zero function when ``xi + 1 - beta`` hits a pole
of the Gamma function (a non-positive integer).  The symmetric product
``(x-a)**(beta/2) * (b-x)**(beta/2)`` is handled through its constant
two-sided derivative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.special import gammaln, gammasgn

#: Distance below which an exponent is treated as an exact integer when
#: testing for Gamma poles.  Orders arrive as floats (often built as
#: ``beta - 1``), so exact integer tests would be too brittle.
POLE_TOL = 1e-9

_GAMMA_SMALL = 170.0


def gamma_value(x: float) -> float:
    """Gamma(x) for non-pole arguments, exact for small integers."""
    if abs(x) <= _GAMMA_SMALL:
        return math.gamma(x)
    return gammasgn(x) * math.exp(gammaln(x))


def gamma_ratio(p: float, q: float) -> float:
    """Gamma(p)/Gamma(q) with overflow-safe evaluation for large arguments."""
    if abs(p) <= _GAMMA_SMALL and abs(q) <= _GAMMA_SMALL:
        return math.gamma(p) / math.gamma(q)
    sign = gammasgn(p) * gammasgn(q)
    return sign * math.exp(gammaln(p) - gammaln(q))


def _near_int(x: float) -> int | None:
    k = round(x)
    return k if abs(x - k) <= POLE_TOL else None


@dataclass(frozen=True)
class PowerTerm:
    """One summand ``coef * (x - a)**left * (b - x)**right``."""

    coef: float
    left: float
    right: float


@dataclass(frozen=True)
class PowerSum:
    """Finite sum of two-sided power terms on a fixed interval [a, b].

    Instances are immutable, support ``+``, ``-`` and scalar ``*``, and
    are callable on scalars or arrays.
    """

    a: float
    b: float
    terms: tuple[PowerTerm, ...]

    # -- construction -------------------------------------------------

    @classmethod
    def left_anchored(cls, pairs: Iterable[tuple[float, float]],
                      a: float = 0.0, b: float = 1.0) -> "PowerSum":
        """Sum of ``c * (x - a)**xi`` terms from ``(c, xi)`` pairs."""
        return cls(a, b, tuple(PowerTerm(c, xi, 0.0) for c, xi in pairs))

    @classmethod
    def right_anchored(cls, pairs: Iterable[tuple[float, float]],
                       a: float = 0.0, b: float = 1.0) -> "PowerSum":
        """Sum of ``c * (b - x)**eta`` terms from ``(c, eta)`` pairs."""
        return cls(a, b, tuple(PowerTerm(c, 0.0, eta) for c, eta in pairs))

    @classmethod
    def constant(cls, value: float, a: float = 0.0, b: float = 1.0) -> "PowerSum":
        return cls(a, b, (PowerTerm(value, 0.0, 0.0),))

    @classmethod
    def zero(cls, a: float = 0.0, b: float = 1.0) -> "PowerSum":
        return cls(a, b, ())

    # -- algebra -------------------------------------------------------

    def __add__(self, other: "PowerSum") -> "PowerSum":
        if not isinstance(other, PowerSum):
            return NotImplemented
        if (self.a, self.b) != (other.a, other.b):
            raise ValueError("cannot add power sums on different intervals")
        return PowerSum(self.a, self.b, self.terms + other.terms)

    def __sub__(self, other: "PowerSum") -> "PowerSum":
        return self + (-other)

    def __neg__(self) -> "PowerSum":
        return self * -1.0

    def __mul__(self, scalar: float) -> "PowerSum":
        if not isinstance(scalar, (int, float)):
            return NotImplemented
        return PowerSum(self.a, self.b, tuple(
            PowerTerm(t.coef * scalar, t.left, t.right) for t in self.terms))

    __rmul__ = __mul__

    def drop_zeros(self) -> "PowerSum":
        return PowerSum(self.a, self.b,
                        tuple(t for t in self.terms if t.coef != 0.0))

    # -- queries -------------------------------------------------------

    @property
    def orientation(self) -> str:
        """'left', 'right', 'constant' or 'mixed' anchoring of the terms."""
        has_l = any(t.left != 0.0 for t in self.terms)
        has_r = any(t.right != 0.0 for t in self.terms)
        if has_l and has_r:
            return "mixed"
        if has_l:
            return "left"
        if has_r:
            return "right"
        return "constant"

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for t in self.terms:
            val = np.full_like(x, t.coef)
            if t.left != 0.0:
                val = val * (x - self.a) ** t.left
            if t.right != 0.0:
                val = val * (self.b - x) ** t.right
            out += val
        return out


# -- polynomial re-expansion ------------------------------------------


def expand_polynomial(coeffs: Sequence[float], orientation: str,
                      a: float = 0.0, b: float = 1.0) -> PowerSum:
    """Re-expand a polynomial ``sum coeffs[k] * x**k`` in anchored powers.

    ``orientation='left'`` produces powers of ``(x - a)``,
    ``orientation='right'`` powers of ``(b - x)``.  The binomial
    re-expansion is exact.
    """
    if orientation not in ("left", "right"):
        raise ValueError(f"orientation must be 'left' or 'right', got {orientation!r}")
    deg = len(coeffs) - 1
    out = [0.0] * (deg + 1)
    for k, c in enumerate(coeffs):
        if c == 0.0:
            continue
        for j in range(k + 1):
            binom = math.comb(k, j)
            if orientation == "left":
                # x**k = sum_j C(k,j) a**(k-j) (x-a)**j
                out[j] += c * binom * a ** (k - j)
            else:
                # x**k = sum_j C(k,j) b**(k-j) (-1)**j (b-x)**j
                out[j] += c * binom * b ** (k - j) * (-1) ** j
    pairs = [(cj, float(j)) for j, cj in enumerate(out)]
    if orientation == "left":
        return PowerSum.left_anchored(pairs, a, b)
    return PowerSum.right_anchored(pairs, a, b)


def _reanchor(ps: PowerSum, orientation: str) -> PowerSum:
    """Rewrite every term with pure ``orientation`` anchoring.

    A term can change sides only when the exponent on the side being
    eliminated is a nonnegative integer (binomial expansion); otherwise a
    ``ValueError`` is raised.
    """
    width = ps.b - ps.a
    terms: list[PowerTerm] = []
    for t in ps.terms:
        keep, drop = (t.left, t.right) if orientation == "left" else (t.right, t.left)
        if drop == 0.0:
            terms.append(PowerTerm(t.coef, keep, 0.0) if orientation == "left"
                         else PowerTerm(t.coef, 0.0, keep))
            continue
        q = _near_int(drop)
        if q is None or q < 0:
            raise ValueError(
                f"term with exponents ({t.left}, {t.right}) cannot be "
                f"re-anchored to the {orientation} endpoint")
        # (b-x)**q = ((b-a) - (x-a))**q and mirror for (x-a)**q
        for j in range(q + 1):
            c = t.coef * math.comb(q, j) * width ** (q - j) * (-1) ** j
            if orientation == "left":
                terms.append(PowerTerm(c, keep + j, 0.0))
            else:
                terms.append(PowerTerm(c, 0.0, keep + j))
    return PowerSum(ps.a, ps.b, tuple(terms)).drop_zeros()


# -- fractional derivatives of powers ----------------------------------


def power_derivative_factor(beta: float, xi: float) -> float:
    """Scalar factor ``Gamma(xi+1)/Gamma(xi+1-beta)``; 0.0 on a Gamma pole."""
    if xi <= -1.0:
        raise ValueError(f"exponent must exceed -1, got {xi!r}")
    d = xi + 1.0 - beta
    k = _near_int(d)
    if k is not None and k <= 0:
        return 0.0
    return gamma_ratio(xi + 1.0, d)


def left_rl_derivative_power(beta: float, xi: float,
                             a: float = 0.0, b: float = 1.0) -> PowerSum:
    """Left-sided derivative of order ``beta`` of ``(x - a)**xi``.

    Returns ``Gamma(xi+1)/Gamma(xi+1-beta) * (x - a)**(xi - beta)`` as a
    :class:`PowerSum`, or the zero sum when the Gamma pole annihilates
    the term (e.g. ``xi = beta - 1``).
    """
    fac = power_derivative_factor(beta, xi)
    if fac == 0.0:
        return PowerSum.zero(a, b)
    return PowerSum(a, b, (PowerTerm(fac, xi - beta, 0.0),))


def right_rl_derivative_power(beta: float, eta: float,
                              b: float = 1.0, a: float = 0.0) -> PowerSum:
    """Right-sided derivative of order ``beta`` of ``(b - x)**eta``."""
    fac = power_derivative_factor(beta, eta)
    if fac == 0.0:
        return PowerSum.zero(a, b)
    return PowerSum(a, b, (PowerTerm(fac, 0.0, eta - beta),))


def left_derivative(ps: PowerSum, beta: float) -> PowerSum:
    """Left-sided derivative of a power sum, term by term.

    Terms carrying a ``(b - x)`` factor are first re-anchored to the left
    endpoint, which requires that factor's exponent to be an integer.
    """
    anchored = _reanchor(ps, "left")
    out = PowerSum.zero(ps.a, ps.b)
    for t in anchored.terms:
        out = out + t.coef * left_rl_derivative_power(beta, t.left, ps.a, ps.b)
    return out.drop_zeros()


def right_derivative(ps: PowerSum, beta: float) -> PowerSum:
    """Right-sided derivative of a power sum, term by term."""
    anchored = _reanchor(ps, "right")
    out = PowerSum.zero(ps.a, ps.b)
    for t in anchored.terms:
        out = out + t.coef * right_rl_derivative_power(beta, t.right, ps.b, ps.a)
    return out.drop_zeros()


def riesz_symmetric_constant(beta: float) -> float:
    """Riesz derivative of ``(x-a)**(beta/2) * (b-x)**(beta/2)``: the
    constant ``-Gamma(beta + 1)``, independent of the interval."""
    return -gamma_value(beta + 1.0)


def _is_symmetric_singular(t: PowerTerm, beta: float) -> bool:
    return (abs(t.left - 0.5 * beta) <= POLE_TOL
            and abs(t.right - 0.5 * beta) <= POLE_TOL)


def elliptic_rhs(u: PowerSum, alpha: float, beta: float, theta: float) -> PowerSum:
    """Right-hand side ``alpha*u - theta*D_left u - (1-theta)*D_right u``.

    Every closed form needed by the problem catalog is covered:

    * integer-exponent (polynomial) terms, any ``theta``;
    * one-sided fractional terms when only that side's derivative enters
      (``theta = 1`` or ``theta = 0``), or re-anchorable terms;
    * the symmetric product ``(x-a)**(beta/2) (b-x)**(beta/2)`` for
      ``theta = 1/2``, via its constant Riesz derivative.

    Raises ``ValueError`` when no closed form is available (for example a
    one-sided fractional power under ``theta`` strictly between 0 and 1).
    """
    rhs = alpha * u
    pending: list[PowerTerm] = []
    for t in u.drop_zeros().terms:
        int_l = _near_int(t.left)
        int_r = _near_int(t.right)
        if (int_l is not None and int_r is not None
                and int_l >= 0 and int_r >= 0):
            pending.append(t)  # polynomial term, both derivatives exist
            continue
        if _is_symmetric_singular(t, beta) and abs(theta - 0.5) <= 1e-14:
            # -(1/2)(D_left + D_right) v = cos(beta pi/2) * Riesz(v)
            const = math.cos(0.5 * beta * math.pi) * riesz_symmetric_constant(beta)
            rhs = rhs + PowerSum.constant(t.coef * const, u.a, u.b)
            continue
        pending.append(t)
    if pending:
        rest = PowerSum(u.a, u.b, tuple(pending))
        if theta > 0.0:
            rhs = rhs - theta * left_derivative(rest, beta)
        if theta < 1.0:
            rhs = rhs - (1.0 - theta) * right_derivative(rest, beta)
    return rhs.drop_zeros()

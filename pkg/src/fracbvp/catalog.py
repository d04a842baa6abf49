"""Manufactured problems, their singular terms, and the named catalog.

Every stationary problem couples :class:`~fracbvp.solver.FracParams` with a
closed-form right-hand side (a :class:`~fracbvp.analytic.PowerSum`), an
optional exact solution and an optional leading singular term.  The five
named entries cover one-sided and symmetric two-sided derivatives, with
and without a known exact solution, plus one time-dependent problem.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .analytic import PowerSum, PowerTerm, elliptic_rhs, left_derivative
from .solver import FracParams

CATALOG_NAMES = ("ex1-case1", "ex1-case2", "ex2-case1", "ex2-case2", "ex3")


@dataclass(frozen=True)
class SingularTermSpec:
    """Leading boundary singular term and its exact right-hand side.

    ``us`` is the singular profile ``(x-a)**rho_left * (b-x)**rho_right``
    (possibly scaled) and ``fs`` the exact image of ``us`` under the
    problem operator, so the pair feeds the two-grid strength estimate.
    """

    us: PowerSum
    fs: PowerSum
    rho_left: float
    rho_right: float


@dataclass(frozen=True)
class ProblemSpec:
    """A stationary fractional boundary-value problem on [a, b]."""

    name: str
    params: FracParams
    domain: tuple[float, float]
    rhs: PowerSum
    exact: Optional[PowerSum] = None
    singular: Optional[SingularTermSpec] = None


@dataclass(frozen=True)
class TimeDependentProblem:
    """A space-fractional diffusion problem ``u_t = D u + f`` on [a, b].

    Only the one-sided case ``theta = 1`` is covered by the time stepper;
    ``params.alpha`` plays no role here (there is no reaction term).
    """

    name: str
    params: FracParams
    domain: tuple[float, float]
    final_time: float
    rhs: Callable[[np.ndarray, float], np.ndarray]
    initial: Callable[[np.ndarray], np.ndarray]
    exact: Optional[Callable[[np.ndarray, float], np.ndarray]] = None
    singular: Optional[SingularTermSpec] = None


def singular_term(params: FracParams, a: float = 0.0, b: float = 1.0,
                  rho: Optional[float] = None) -> SingularTermSpec:
    """Leading singular term for theta in {0, 1/2, 1}.

    The boundary exponents are ``beta - 1`` on the derivative's anchored
    side (linear on the other), or ``beta/2`` on both sides in the
    symmetric case.  ``rho`` overrides the anchored exponent for the
    one-sided cases; for ``theta = 1/2`` only the ``beta/2`` product has a
    closed-form image, so overrides are rejected there.
    """
    beta, theta = params.beta, params.theta
    if abs(theta - 1.0) <= 1e-14:
        rl = beta - 1.0 if rho is None else rho
        us = PowerSum(a, b, (PowerTerm(1.0, rl, 1.0),))
        rr = 1.0
    elif abs(theta) <= 1e-14:
        rr = beta - 1.0 if rho is None else rho
        us = PowerSum(a, b, (PowerTerm(1.0, 1.0, rr),))
        rl = 1.0
    elif abs(theta - 0.5) <= 1e-14:
        if rho is not None and abs(rho - 0.5 * beta) > 1e-12:
            raise ValueError(
                "the symmetric case only admits the exponent beta/2")
        rl = rr = 0.5 * beta
        us = PowerSum(a, b, (PowerTerm(1.0, rl, rr),))
    else:
        raise ValueError(
            f"no closed-form singular term for theta={theta}; supply a "
            "SingularTermSpec explicitly")
    fs = elliptic_rhs(us, params.alpha, beta, theta)
    return SingularTermSpec(us=us, fs=fs, rho_left=rl, rho_right=rr)


def manufactured(name: str, params: FracParams, exact: PowerSum,
                 with_singular: bool = True) -> ProblemSpec:
    """Problem with a prescribed exact solution; rhs built in closed form."""
    rhs = elliptic_rhs(exact, params.alpha, params.beta, params.theta)
    sing = None
    if with_singular:
        sing = singular_term(params, exact.a, exact.b)
    return ProblemSpec(name=name, params=params, domain=(exact.a, exact.b),
                       rhs=rhs, exact=exact, singular=sing)


def _ex1_profile(beta: float) -> PowerSum:
    """(x**2 + x**(beta+1) + x**(beta-1)) * (1 - x) as anchored powers."""
    return PowerSum(0.0, 1.0, (
        PowerTerm(1.0, 2.0, 1.0),
        PowerTerm(1.0, beta + 1.0, 1.0),
        PowerTerm(1.0, beta - 1.0, 1.0),
    ))


def _ex3(beta: float) -> TimeDependentProblem:
    params = FracParams(alpha=0.0, beta=beta, theta=1.0)
    profile = _ex1_profile(beta)
    d_profile = left_derivative(profile, beta)
    sing = singular_term(params)

    def rhs(x, t):
        return 3.0 * t * t * profile(x) - t ** 3 * d_profile(x)

    def exact(x, t):
        return t ** 3 * profile(x)

    def initial(x):
        return np.zeros_like(np.asarray(x, dtype=float))

    return TimeDependentProblem(
        name="ex3", params=params, domain=(0.0, 1.0), final_time=1.0,
        rhs=rhs, initial=initial, exact=exact, singular=sing)


def catalog(name: str, beta: float):
    """Build a named problem for the given order.

    Stationary names return a :class:`ProblemSpec`; ``'ex3'`` returns a
    :class:`TimeDependentProblem`.
    """
    if not 1.0 < beta < 2.0:
        raise ValueError(f"catalog problems require beta in (1, 2), got {beta}")
    if name == "ex1-case1":
        params = FracParams(alpha=1.0, beta=beta, theta=1.0)
        return manufactured("ex1-case1", params, _ex1_profile(beta))
    if name == "ex1-case2":
        params = FracParams(alpha=1.0, beta=beta, theta=1.0)
        rhs = PowerSum.left_anchored([(1.0, 1.0), (1.0, 0.0)])  # x + 1
        return ProblemSpec(name=name, params=params, domain=(0.0, 1.0),
                           rhs=rhs, exact=None, singular=singular_term(params))
    if name == "ex2-case1":
        params = FracParams(alpha=1.0, beta=beta, theta=0.5)
        exact = PowerSum(0.0, 1.0, (
            PowerTerm(1.0, 2.0, 2.0),
            PowerTerm(2.0, 0.5 * beta, 0.5 * beta),
        ))
        return manufactured("ex2-case1", params, exact)
    if name == "ex2-case2":
        params = FracParams(alpha=1.0, beta=beta, theta=0.5)
        rhs = PowerSum.constant(1.0)
        return ProblemSpec(name=name, params=params, domain=(0.0, 1.0),
                           rhs=rhs, exact=None, singular=singular_term(params))
    if name == "ex3":
        return _ex3(beta)
    raise KeyError(f"unknown problem name {name!r}; choose from {CATALOG_NAMES}")


def with_overrides(spec: ProblemSpec, alpha: Optional[float] = None,
                   theta: Optional[float] = None,
                   rho: Optional[float] = None) -> ProblemSpec:
    """Rebuild a catalog problem with modified parameters.

    When the problem carries an exact solution its rhs is re-derived for
    the new parameters, so the exact solution stays valid.  The singular
    term is rebuilt when the new theta admits one (otherwise dropped,
    leaving an uncorrected problem).
    """
    params = FracParams(
        alpha=spec.params.alpha if alpha is None else alpha,
        beta=spec.params.beta,
        theta=spec.params.theta if theta is None else theta,
    )
    if params == spec.params and rho is None:
        return spec
    a, b = spec.domain
    rhs = spec.rhs
    if spec.exact is not None:
        rhs = elliptic_rhs(spec.exact, params.alpha, params.beta, params.theta)
    try:
        sing = singular_term(params, a, b, rho=rho)
    except ValueError:
        sing = None
    return replace(spec, params=params, rhs=rhs, singular=sing)

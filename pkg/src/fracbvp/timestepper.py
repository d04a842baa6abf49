"""Crank-Nicolson time stepping for the one-sided diffusion problem.

Each step solves ``(I - tau/2 D) u^n = (I + tau/2 D) u^{n-1} + tau f^{n-1/2}``
with ``D`` the theta-weighted spatial operator and ``f`` sampled at the
half node.  The implicit matrix is time-independent, so one factorization
(or preconditioner) serves the whole march.

The corrected variant marches the coarse and fine grids together, applies
the two-grid strength correction after every step and carries the
corrected fields into the next step.  The singular solves against the
per-step operator ``I - tau/2 D`` are precomputed once: its exact
singular right-hand side is ``us - (tau/2) * D us``, available in closed
form from the singular term's stationary image.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional

import numpy as np

from .correction import GUARD_SCALE, _guarded_ratio, _midpoint_strengths
from .grids import Grid, GridFunction
from .solver import (
    DEFAULT_MAXITER,
    DEFAULT_TOL,
    FracParams,
    SchemeKind,
    ToeplitzSolver,
    resolve_method,
    scheme_toeplitz,
)
from .operators import toeplitz_matvec

if TYPE_CHECKING:  # pragma: no cover
    from .catalog import TimeDependentProblem


@dataclass(frozen=True)
class TimeGrid:
    """Uniform time mesh: N steps of size tau = T / N."""

    T: float
    N: int

    def __post_init__(self):
        if self.N < 1:
            raise ValueError(f"need at least one time step, got N={self.N}")
        if not self.T > 0.0:
            raise ValueError(f"final time must be positive, got T={self.T}")

    @property
    def tau(self) -> float:
        return self.T / self.N

    def node(self, n: int) -> float:
        return n * self.tau

    def half_node(self, n: int) -> float:
        """t_{n-1/2} for step n >= 1."""
        return (n - 0.5) * self.tau


class _CNSystem:
    """Implicit/explicit operator pair of one CN grid."""

    def __init__(self, params: FracParams, grid: Grid, tau: float,
                 method: str, tol: float, maxiter: int):
        half = 0.5 * tau
        stepping = FracParams(alpha=1.0, beta=params.beta, theta=params.theta)
        icol, irow = scheme_toeplitz(stepping, grid, SchemeKind.WSGD,
                                     frac_scale=half)
        self.solver = ToeplitzSolver(icol, irow, method=resolve_method(method, grid.M),
                                     tol=tol, maxiter=maxiter)
        self.ecol, self.erow = scheme_toeplitz(stepping, grid, SchemeKind.WSGD,
                                               frac_scale=-half)
        self.grid = grid

    def step(self, u_int: np.ndarray, f_half: np.ndarray, tau: float) -> np.ndarray:
        rhs = toeplitz_matvec(self.ecol, self.erow, u_int) + tau * f_half
        return self.solver.solve(rhs)


def cn_wsgd_solve(problem: "TimeDependentProblem", M: int, time_grid: TimeGrid,
                  corrected: bool = False, method: str = "auto",
                  tol: float = DEFAULT_TOL, maxiter: int = DEFAULT_MAXITER,
                  diagnostics: Optional[dict] = None) -> GridFunction:
    """March the CN scheme to the final time; returns the field on grid M.

    With ``corrected=True`` the two-grid correction runs inside every
    step and the returned coarse-grid field is the corrected one (it
    coincides with the corrected fine field at coarse nodes).  A
    ``diagnostics`` dict, when given, receives guard activation counts.
    """
    if abs(problem.params.theta - 1.0) > 1e-14:
        raise ValueError("time stepping covers the one-sided case theta = 1 only")
    if corrected and problem.singular is None:
        raise ValueError("corrected time stepping needs the problem's singular term")
    if corrected and M % 2:
        raise ValueError("corrected time stepping needs an even interval count")
    a, b = problem.domain
    tau = time_grid.tau
    grid_c = Grid(a, b, M)
    sys_c = _CNSystem(problem.params, grid_c, tau, method, tol, maxiter)
    xc = grid_c.interior_nodes()
    u_c = np.asarray(problem.initial(xc), dtype=float)

    if not corrected:
        for n in range(1, time_grid.N + 1):
            u_c = sys_c.step(u_c, problem.rhs(xc, time_grid.half_node(n)), tau)
        return GridFunction.from_interior(grid_c, u_c)

    grid_f = grid_c.refined()
    sys_f = _CNSystem(problem.params, grid_f, tau, method, tol, maxiter)
    xf = grid_f.interior_nodes()
    u_f = np.asarray(problem.initial(xf), dtype=float)

    sing = problem.singular
    # singular problem under the per-step operator I - tau/2 D:
    # rhs = us - (tau/2) D us = (1 - tau/2*alpha0)*us + (tau/2)*(fs_alpha0),
    # where fs was built as alpha*us - D us for the problem's alpha.
    alpha0 = problem.params.alpha
    fs_tau = (1.0 - 0.5 * tau * alpha0) * sing.us + (0.5 * tau) * sing.fs
    us_c_solve = sys_c.solver.solve(np.asarray(fs_tau(xc), dtype=float))
    us_f_solve = sys_f.solver.solve(np.asarray(fs_tau(xf), dtype=float))
    us_c_exact = np.asarray(sing.us(xc), dtype=float)
    us_f_exact = np.asarray(sing.us(xf), dtype=float)
    den = us_f_solve[1::2] - us_c_solve
    guard_eps = GUARD_SCALE * float(np.max(np.abs(us_c_solve)))
    gap_c = us_c_exact - us_c_solve
    gap_f = us_f_exact - us_f_solve
    gap_mid = gap_f[::2]
    guards = 0

    for n in range(1, time_grid.N + 1):
        t_half = time_grid.half_node(n)
        u_c = sys_c.step(u_c, problem.rhs(xc, t_half), tau)
        u_f = sys_f.step(u_f, problem.rhs(xf, t_half), tau)
        xi, g = _guarded_ratio(u_f[1::2] - u_c, den, guard_eps)
        guards += g
        u_c = u_c + xi * gap_c
        u_f = u_f.copy()
        u_f[1::2] += xi * gap_f[1::2]
        u_f[::2] += _midpoint_strengths(xi) * gap_mid
    if diagnostics is not None:
        diagnostics["guard_activations"] = guards
    return GridFunction.from_interior(grid_c, u_c)


def estimate_spatial_rate(problem: "TimeDependentProblem", M_list, time_grid: TimeGrid,
                          corrected: bool = False, method: str = "auto",
                          tol: float = DEFAULT_TOL,
                          maxiter: int = DEFAULT_MAXITER):
    """Final-time errors and spatial rates over a list of interval counts.

    Requires the problem's exact solution.  The temporal step must be
    small enough that the spatial error dominates (the tables use
    tau = 1e-3).  Returns a :class:`~fracbvp.report.ConvergenceReport`.
    """
    from time import perf_counter

    from .report import ConvergenceReport

    if problem.exact is None:
        raise ValueError("spatial rate estimation needs an exact solution")
    rows = []
    guards_total = 0
    for M in M_list:
        diag: dict = {}
        t0 = perf_counter()
        u = cn_wsgd_solve(problem, M, time_grid, corrected=corrected,
                          method=method, tol=tol, maxiter=maxiter,
                          diagnostics=diag)
        seconds = perf_counter() - t0
        guards_total += diag.get("guard_activations", 0)
        exact = GridFunction(u.grid, problem.exact(u.grid.nodes(), time_grid.T))
        err = GridFunction(u.grid, u.values - exact.values)
        rows.append((M, err.max_norm(), err.l2_norm(), seconds))
    meta = {
        "problem": problem.name,
        "beta": problem.params.beta,
        "theta": problem.params.theta,
        "scheme": "cn-wsgd",
        "corrected": corrected,
        "tau": time_grid.tau,
        "steps": time_grid.N,
        "final_time": time_grid.T,
        "method": method,
        "guard_activations": guards_total,
    }
    return ConvergenceReport.from_rows(rows, meta)

"""Assembly and solution of the stationary WSGD and FCD schemes.

The interior system for ``alpha*u - theta*D_left u - (1-theta)*D_right u = f``
with zero Dirichlet data is Toeplitz:

* WSGD:  ``A = alpha*I - theta*S - (1-theta)*S.T``  with ``S`` the left
  operator matrix,
* FCD:   ``A = alpha*I + cos(beta*pi/2) * C``       with ``C`` the centered
  operator matrix (requires ``theta = 1/2``).

Systems are solved either by dense LU (default up to ``DENSE_LIMIT``) or
matrix-free by restarted GMRES with a Strang circulant preconditioner.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
import scipy.linalg
import scipy.sparse.linalg

from .grids import Grid, GridFunction
from .operators import fcd_toeplitz, left_wsgd_toeplitz, toeplitz_matvec
from .weights import WeightTable, weight_table

if TYPE_CHECKING:  # pragma: no cover
    from .catalog import ProblemSpec

#: Largest interval count solved with a dense factorization by default.
DENSE_LIMIT = 4096

#: Default relative residual target and total inner-iteration cap for GMRES.
DEFAULT_TOL = 1e-12
DEFAULT_MAXITER = 2000
_GMRES_RESTART = 60


class SchemeKind(enum.Enum):
    WSGD = "wsgd"
    FCD = "fcd"


@dataclass(frozen=True)
class FracParams:
    """Problem parameters: reaction alpha >= 0, order beta in (1,2],
    derivative weight theta in [0,1]."""

    alpha: float
    beta: float
    theta: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and self.alpha >= 0.0):
            raise ValueError(f"alpha must be finite and nonnegative, got {self.alpha!r}")
        if not (math.isfinite(self.beta) and 1.0 < self.beta <= 2.0):
            raise ValueError(f"beta must lie in (1, 2], got {self.beta!r}")
        if not (math.isfinite(self.theta) and 0.0 <= self.theta <= 1.0):
            raise ValueError(f"theta must lie in [0, 1], got {self.theta!r}")


class SolverError(RuntimeError):
    """Linear solve failed or produced an untrustworthy solution."""


class KrylovError(SolverError):
    """GMRES did not reach the requested tolerance within the iteration cap."""

    def __init__(self, message: str, residual: float, iterations: int):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


def _check_scheme(params: FracParams, scheme: SchemeKind) -> None:
    if scheme is SchemeKind.FCD and abs(params.theta - 0.5) > 1e-14:
        raise ValueError(f"FCD scheme requires theta = 1/2, got theta={params.theta}")


def scheme_toeplitz(params: FracParams, grid: Grid, scheme: SchemeKind,
                    frac_scale: float = 1.0,
                    table: WeightTable | None = None) -> tuple[np.ndarray, np.ndarray]:
    """First column and row of the interior system matrix.

    ``frac_scale`` multiplies the fractional part only, giving
    ``alpha*I - frac_scale * (theta*S + (1-theta)*S.T)``; time steppers use
    it to build ``I -+ (tau/2) * D`` operators from the same machinery.
    """
    _check_scheme(params, scheme)
    m = grid.M - 1
    if scheme is SchemeKind.FCD:
        ccol, _ = fcd_toeplitz(grid, params.beta, table)
        coeff = frac_scale * math.cos(0.5 * params.beta * math.pi)
        col = coeff * ccol
        col[0] += params.alpha
        return col, col.copy()
    scol, srow = left_wsgd_toeplitz(grid, params.beta, table)
    th = params.theta
    col = -frac_scale * (th * scol + (1.0 - th) * srow)
    row = -frac_scale * (th * srow + (1.0 - th) * scol)
    col[0] += params.alpha
    row[0] = col[0]
    return col, row


def assemble(params: FracParams, grid: Grid, scheme: SchemeKind,
             frac_scale: float = 1.0) -> np.ndarray:
    """Dense interior system matrix, ``(M-1) x (M-1)``."""
    col, row = scheme_toeplitz(params, grid, scheme, frac_scale)
    return scipy.linalg.toeplitz(col, row)


# -- Toeplitz linear solver ---------------------------------------------


def strang_circulant_eigenvalues(col: np.ndarray, row: np.ndarray) -> np.ndarray:
    """Eigenvalues (FFT) of the Strang circulant built from a Toeplitz matrix.

    The circulant copies the central diagonals: ``c_k = t_k`` for
    ``k <= m/2`` and ``c_k = t_{k-m}`` for ``k > m/2``.
    """
    m = len(col)
    s = np.zeros(m)
    half = m // 2
    s[:half + 1] = col[:half + 1]
    k = np.arange(half + 1, m)
    s[k] = row[m - k]
    return np.fft.fft(s)


class ToeplitzSolver:
    """Repeated solves against one fixed Toeplitz system.

    ``method`` is ``'dense'`` (LU factorization, held for reuse) or
    ``'krylov'`` (matrix-free preconditioned GMRES).  The last solve's
    iteration count is kept in ``last_iterations``.
    """

    def __init__(self, col: np.ndarray, row: np.ndarray, method: str = "dense",
                 tol: float = DEFAULT_TOL, maxiter: int = DEFAULT_MAXITER):
        self.col = np.asarray(col, dtype=float)
        self.row = np.asarray(row, dtype=float)
        self.m = len(self.col)
        self.method = method
        self.tol = tol
        self.maxiter = maxiter
        self.last_iterations = 0
        if method == "dense":
            dense = scipy.linalg.toeplitz(self.col, self.row)
            self._norm1 = float(np.max(np.sum(np.abs(dense), axis=0)))
            self._lu = scipy.linalg.lu_factor(dense)
        elif method == "krylov":
            self._norm1 = float(np.sum(np.abs(self.col)) + np.sum(np.abs(self.row[1:])))
            lam = strang_circulant_eigenvalues(self.col, self.row)
            if np.min(np.abs(lam)) == 0.0:
                raise SolverError("Strang preconditioner is singular")
            self._lam = lam
        else:
            raise ValueError(f"unknown method {method!r}")

    def matvec(self, x: np.ndarray) -> np.ndarray:
        return toeplitz_matvec(self.col, self.row, x)

    def _precondition(self, x: np.ndarray) -> np.ndarray:
        return np.real(np.fft.ifft(np.fft.fft(x) / self._lam))

    def residual(self, x: np.ndarray, rhs: np.ndarray) -> float:
        return float(np.max(np.abs(self.matvec(x) - rhs)))

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        rhs = np.asarray(rhs, dtype=float)
        if self.method == "dense":
            x = scipy.linalg.lu_solve(self._lu, rhs)
            self.last_iterations = 0
            self._verify_dense(x, rhs)
            return x
        return self._solve_krylov(rhs)

    def _verify_dense(self, x: np.ndarray, rhs: np.ndarray) -> None:
        # LU with partial pivoting cannot beat the backward-stable floor
        # eps*||A||*||x||, which for large M * h**-beta exceeds a fixed
        # relative target; the check accepts whichever bound is larger.
        fnorm = float(np.max(np.abs(rhs)))
        if fnorm == 0.0:
            if np.any(x):
                raise SolverError("nonzero solution returned for a zero rhs")
            return
        floor = 64.0 * np.finfo(float).eps * self._norm1 * float(np.max(np.abs(x)))
        bound = max(1e-11 * fnorm, floor)
        res = self.residual(x, rhs)
        if not res <= bound:
            raise SolverError(
                f"dense solve residual {res:.3e} exceeds bound {bound:.3e}")

    def _solve_krylov(self, rhs: np.ndarray) -> np.ndarray:
        m = self.m
        A = scipy.sparse.linalg.LinearOperator((m, m), matvec=self.matvec)
        P = scipy.sparse.linalg.LinearOperator((m, m), matvec=self._precondition)
        count = [0]

        def _cb(_):
            count[0] += 1

        outer = max(1, -(-self.maxiter // _GMRES_RESTART))
        x, info = scipy.sparse.linalg.gmres(
            A, rhs, rtol=self.tol, atol=0.0, restart=_GMRES_RESTART,
            maxiter=outer, M=P, callback=_cb, callback_type="pr_norm")
        self.last_iterations = count[0]
        fnorm = float(np.max(np.abs(rhs)))
        res = self.residual(x, rhs)
        if info != 0:
            raise KrylovError(
                f"GMRES stopped after {count[0]} iterations with relative "
                f"residual {res / fnorm if fnorm else res:.3e} (target {self.tol:.1e})",
                residual=res, iterations=count[0])
        return x


def solve_system(params: FracParams, grid: Grid, scheme: SchemeKind,
                 rhs_interior: np.ndarray, method: str = "auto",
                 tol: float = DEFAULT_TOL, maxiter: int = DEFAULT_MAXITER,
                 frac_scale: float = 1.0) -> np.ndarray:
    """Solve the interior scheme system for one right-hand side."""
    solver = make_solver(params, grid, scheme, method, tol, maxiter, frac_scale)
    return solver.solve(rhs_interior)


def make_solver(params: FracParams, grid: Grid, scheme: SchemeKind,
                method: str = "auto", tol: float = DEFAULT_TOL,
                maxiter: int = DEFAULT_MAXITER,
                frac_scale: float = 1.0) -> ToeplitzSolver:
    method = resolve_method(method, grid.M)
    col, row = scheme_toeplitz(params, grid, scheme, frac_scale)
    return ToeplitzSolver(col, row, method=method, tol=tol, maxiter=maxiter)


def resolve_method(method: str, M: int) -> str:
    """Map a user-facing method name to 'dense' or 'krylov'."""
    if method in ("auto", None):
        return "dense" if M <= DENSE_LIMIT else "krylov"
    if method in ("dense", "dense-lu", "lu"):
        return "dense"
    if method == "krylov":
        return "krylov"
    raise ValueError(f"unknown solve method {method!r}")


def solve_bvp(problem: "ProblemSpec", M: int, scheme: SchemeKind,
              method: str = "auto", tol: float = DEFAULT_TOL,
              maxiter: int = DEFAULT_MAXITER) -> GridFunction:
    """Solve a stationary boundary-value problem on M intervals.

    Returns the grid function with zero boundary entries.  The dense and
    Krylov paths agree to machine-level accuracy; ``method='auto'`` picks
    dense LU for ``M <= DENSE_LIMIT`` and GMRES beyond.
    """
    if M < 4:
        raise ValueError(f"need at least 4 intervals, got M={M}")
    a, b = problem.domain
    grid = Grid(a, b, M)
    f_int = np.asarray(problem.rhs(grid.interior_nodes()), dtype=float)
    u_int = solve_system(problem.params, grid, scheme, f_int,
                         method=method, tol=tol, maxiter=maxiter)
    return GridFunction.from_interior(grid, u_int)

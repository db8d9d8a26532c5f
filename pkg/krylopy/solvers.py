#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Krylopy module for solving linear systems with weighted GMRES.

The solver runs Arnoldi in the inner product of the weight W on the
operator ``H_L P_D A H_R``, where ``P_D`` is an optional deflation
projector. The weight is applied through its Cholesky factor, so the
Arnoldi process itself works with Euclidean operations.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
import scipy.linalg as sla
import xarray as xr
from tqdm import tqdm

from krylopy.common import (
    Breakdown,
    DimensionMismatch,
    LuckyBreakdown,
    SingularProjector,
    as_matrix,
    as_vector,
)
from krylopy.io import to_csv

logger = logging.getLogger(__name__)

breakdown_tol = 1e-14
reorth_factor = 1 / np.sqrt(2)


@dataclass(frozen=True)
class GmresConfig:
    """
    Settings of a GMRES run.

    Parameters
    ----------
    tol : float
        Relative residual threshold.
    max_it : int
        Maximal number of iterations, GMRES is never restarted.
    x0 : array_like, optional
        Initial guess. The default None is the zero vector.
    """

    tol: float = 1e-10
    max_it: int = 200
    x0: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}.")
        if int(self.max_it) != self.max_it or self.max_it < 1:
            raise ValueError(f"max_it must be a positive integer, got {self.max_it}.")


@dataclass(frozen=True)
class GmresTrace:
    """
    Residual history and final iterate of a GMRES run.

    ``residual_norms[k]`` is the weighted residual norm after k iterations.
    ``iterations_to_tol`` is None if the run did not converge.
    """

    residual_norms: np.ndarray
    iterations_to_tol: int
    solution: np.ndarray = field(repr=False)
    threshold: float = np.nan

    @property
    def converged(self):
        return self.iterations_to_tol is not None

    @property
    def iterations(self):
        return len(self.residual_norms) - 1

    @property
    def relative_residuals(self):
        r0 = self.residual_norms[0]
        if r0 == 0:
            return np.zeros_like(self.residual_norms)
        return self.residual_norms / r0

    def to_dataarray(self):
        k = np.arange(len(self.residual_norms))
        return xr.DataArray(
            self.residual_norms,
            coords={"k": k},
            dims="k",
            name="residual_norm",
            attrs={"iterations_to_tol": self.iterations_to_tol or -1},
        )

    def to_dataframe(self):
        return pd.DataFrame(
            {
                "k": np.arange(len(self.residual_norms)),
                "residual_norm": self.residual_norms,
                "relative_residual": self.relative_residuals,
            }
        )

    def to_csv(self, path):
        return to_csv(self.to_dataframe(), path)


class _PreconditionedOperator:
    """
    The operator ``L* H_L P_D A H_R L^-*`` with ``W = L L*``.
    """

    def __init__(self, A, setup, defl=None):
        self.A = A
        self.setup = setup
        self.defl = defl
        self.weight = setup.weight

    def project(self, v):
        return v if self.defl is None else self.defl.apply_p(v)

    def residual(self, r):
        """
        Map an unpreconditioned residual r to ``L* H_L P_D r``.
        """
        return self.weight.to_euclidean(self.setup.H_L @ self.project(r))

    def correction(self, u):
        """
        Map Euclidean Krylov coordinates to a correction of the iterate.
        """
        return self.setup.H_R @ self.weight.from_euclidean(u)

    def __call__(self, v):
        return self.residual(self.A @ self.correction(v))


def _givens(a, b):
    """
    Get a rotation (c, s) with ``-conj(s) a + c b = 0`` and real c.
    """
    if b == 0:
        return 1.0, 0.0
    if a == 0:
        return 0.0, np.conj(b) / abs(b)
    r = np.hypot(abs(a), abs(b))
    return abs(a) / r, (a / abs(a)) * np.conj(b) / r


def _check_inputs(A, b, setup, defl):
    A = as_matrix(A, square=True, name="A")
    b = as_vector(b, n=A.shape[0], name="b")
    if setup.n != A.shape[0]:
        raise DimensionMismatch(
            f"Preconditioner of size {setup.n} does not match A of size {A.shape[0]}."
        )
    if defl is not None:
        if defl.n != A.shape[0]:
            raise DimensionMismatch("Deflation operator does not match A.")
        if not defl.satisfies_conditions:
            raise SingularProjector(
                "Deflation operator violates the invertibility conditions "
                f"(rcond = {defl.core_rcond:.3e})."
            )
    return A, b


def gmres_solve(A, b, setup, defl=None, cfg=None, log=False):
    """
    Solve ``A x = b`` with weighted, preconditioned and deflated GMRES.

    The k-th iterate minimizes ``||H_L P_D (b - A x)||_W`` over
    ``x0 + K_k(H P_D A, H P_D r0)``. The run stops once this norm drops
    below ``tol * ||H_L P_D b||_W``.

    Parameters
    ----------
    A : array_like
        Nonsingular square matrix.
    b : array_like
    setup : krylopy.problem.PreconditionerSetup
    defl : krylopy.deflation.DeflationOperator, optional
    cfg : GmresConfig, optional
    log : bool, optional
        Whether to show a progress bar. The default is False.

    Returns
    -------
    GmresTrace
        For deflated runs, the solution is the minimizer of the deflated
        residual; use :func:`full_solution` to recover the solution of the
        original system.

    Raises
    ------
    Breakdown
        If the Krylov space becomes invariant before the tolerance is met.
    SingularProjector
        If the deflation operator is invalid or the deflated operator turns
        out singular during the run.
    """
    cfg = GmresConfig() if cfg is None else cfg
    A, b = _check_inputs(A, b, setup, defl)
    n = A.shape[0]
    op = _PreconditionedOperator(A, setup, defl)

    x0 = np.zeros(n) if cfg.x0 is None else as_vector(cfg.x0, n=n, name="x0")
    r0 = op.residual(b - A @ x0)
    beta = np.linalg.norm(r0)
    threshold = cfg.tol * np.linalg.norm(op.residual(b))

    dtype = np.result_type(A, b, setup.H, r0, 1.0)
    max_it = min(cfg.max_it, n)
    V = np.zeros((n, max_it + 1), dtype=dtype)
    R = np.zeros((max_it + 1, max_it), dtype=dtype)
    g = np.zeros(max_it + 1, dtype=dtype)
    cs = np.zeros(max_it)
    sn = np.zeros(max_it, dtype=dtype)
    residual_norms = [beta]

    if beta <= threshold:
        logger.info(" GMRES: initial guess satisfies the tolerance.")
        return GmresTrace(np.array(residual_norms), 0, x0, threshold)

    V[:, 0] = r0 / beta
    g[0] = beta
    iterations_to_tol = None
    k = 0
    iterate = range(max_it)
    if log:
        iterate = tqdm(iterate, "GMRES iterations")
    for j in iterate:
        w = op(V[:, j])
        norm0 = np.linalg.norm(w)
        h = np.zeros(j + 2, dtype=dtype)
        for _ in range(2):
            for i in range(j + 1):
                hi = np.vdot(V[:, i], w)
                h[i] += hi
                w = w - hi * V[:, i]
            h[j + 1] = np.linalg.norm(w)
            if h[j + 1] > reorth_factor * norm0:
                break
            norm0 = h[j + 1]
        lucky = abs(h[j + 1]) < breakdown_tol * beta
        if not lucky:
            V[:, j + 1] = w / h[j + 1]

        for i in range(j):
            tmp = cs[i] * h[i] + sn[i] * h[i + 1]
            h[i + 1] = -np.conj(sn[i]) * h[i] + cs[i] * h[i + 1]
            h[i] = tmp
        cs[j], sn[j] = _givens(h[j], h[j + 1])
        h[j] = cs[j] * h[j] + sn[j] * h[j + 1]
        h[j + 1] = 0
        g[j + 1] = -np.conj(sn[j]) * g[j]
        g[j] = cs[j] * g[j]
        R[: j + 1, j] = h[: j + 1]

        res = abs(g[j + 1])
        residual_norms.append(res)
        k = j + 1
        logger.debug(f" GMRES iteration {k}: residual {res:.3e}")
        if res <= threshold:
            iterations_to_tol = k
            break
        if lucky:
            msg = (
                f"Krylov space became invariant at step {k} with residual "
                f"{res:.3e} above the threshold {threshold:.3e}."
            )
            if defl is not None:
                raise SingularProjector(msg)
            raise Breakdown(msg)

    y = sla.solve_triangular(R[:k, :k], g[:k])
    x = x0 + op.correction(V[:, :k] @ y)

    if iterations_to_tol is None:
        logger.warning(
            f" GMRES did not converge in {k} iterations "
            f"(relative residual {residual_norms[-1] / beta:.3e})."
        )
    else:
        logger.info(f" GMRES converged in {iterations_to_tol} iterations.")
    return GmresTrace(np.array(residual_norms), iterations_to_tol, x, threshold)


def krylov_ls_oracle(A, b, setup, defl=None, k=0, x0=None):
    """
    Compute the minimal GMRES residual norm at step k by brute force.

    The Krylov space ``K_k(H P_D A, H P_D r0)`` is built explicitly and the
    weighted least-squares problem is solved densely.

    Parameters
    ----------
    A, b, setup, defl
        As for :func:`gmres_solve`.
    k : int
        Dimension of the Krylov space.
    x0 : array_like, optional

    Returns
    -------
    float
        ``min ||H_L P_D (b - A x)||_W`` over ``x0 + K_k``.

    Raises
    ------
    LuckyBreakdown
        If the Krylov space stops growing before dimension k. The exception
        carries the step and the residual of the exact solution in that space.
    """
    A, b = _check_inputs(A, b, setup, defl)
    n = A.shape[0]
    if not 0 <= k <= n:
        raise ValueError(f"k must lie in [0, {n}], got {k}.")
    op = _PreconditionedOperator(A, setup, defl)
    x0 = np.zeros(n) if x0 is None else as_vector(x0, n=n, name="x0")
    r0 = b - A @ x0
    target = op.residual(r0)

    def solve(Q):
        if Q.shape[1] == 0:
            return float(np.linalg.norm(target))
        G = op.residual(A @ Q)
        c = np.linalg.lstsq(G, target, rcond=None)[0]
        return float(np.linalg.norm(target - G @ c))

    def step(v):
        return setup.H @ op.project(A @ v)

    start = setup.H @ op.project(r0)
    if k == 0 or np.linalg.norm(start) == 0:
        return solve(np.zeros((n, 0)))
    Q = (start / np.linalg.norm(start))[:, None]
    for j in range(1, k):
        nxt = step(Q[:, -1])
        w = nxt - Q @ (Q.conj().T @ nxt)
        w = w - Q @ (Q.conj().T @ w)
        if np.linalg.norm(w) < 1e-12 * np.linalg.norm(nxt):
            res = solve(Q)
            raise LuckyBreakdown(
                f"Krylov basis is rank deficient at dimension {j}.", j, res
            )
        Q, _ = np.linalg.qr(np.column_stack([Q, w]))
    return solve(Q)


def full_solution(trace, defl, A, b):
    """
    Recover the solution of ``A x = b`` from a deflated GMRES run.

    Returns ``Q_D x + Z (Y* A Z)^-1 Y* b`` for the deflated iterate x.
    """
    if defl is None:
        return trace.solution
    x = defl.apply_q(trace.solution) + defl.coarse_solve(b)
    logger.info(
        f" Recovered full solution with residual norm {np.linalg.norm(b - A @ x):.3e}."
    )
    return x

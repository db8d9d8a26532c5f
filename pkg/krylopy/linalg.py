#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Krylopy linalg module.

This module contains the dense linear algebra used throughout the package:
the Hermitian/skew-Hermitian splitting, Cholesky factorizations, Hermitian
and skew-Hermitian generalized eigensolvers and weighted inner products.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from krylopy.common import (
    DimensionMismatch,
    NotHermitian,
    NotPositiveDefinite,
    NotSkew,
    as_matrix,
    as_vector,
    is_hermitian,
    is_skew,
    square_matrix_args,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class HermitianSplit:
    """
    Hermitian part `M` and skew-Hermitian part `N` of a square matrix.
    """

    M: np.ndarray
    N: np.ndarray

    @property
    def A(self):
        return self.M + self.N


@dataclass(frozen=True)
class EigenPairs:
    """
    Eigenvalues and eigenvectors ordered by non-increasing modulus.

    The vectors are stored as columns.
    """

    values: np.ndarray
    vectors: np.ndarray

    def __len__(self):
        return len(self.values)

    @property
    def moduli(self):
        return np.abs(self.values)

    def residuals(self, N, B):
        """
        Get the relative residual of each pair for the pencil N x = lambda B x.
        """
        X = self.vectors
        R = N @ X - (B @ X) * self.values
        scale = np.linalg.norm(N, 2) + np.abs(self.values) * np.linalg.norm(B, 2)
        return np.linalg.norm(R, axis=0) / np.where(scale > 0, scale, 1)


@dataclass(frozen=True)
class InnerProduct:
    """
    Inner product induced by a Hermitian positive definite weight.

    The weight is applied through its lower Cholesky factor ``W = L L*``, so
    that ``<x, y>_W = (L* y)* (L* x)``.
    """

    W: np.ndarray
    chol: np.ndarray = field(repr=False)
    is_identity: bool = False

    @classmethod
    def from_matrix(cls, W):
        W = as_matrix(W, square=True, name="W")
        unit = np.array_equal(W, np.eye(W.shape[0]))
        return cls(W, cholesky_hpd(W), unit)

    @classmethod
    def identity(cls, n):
        eye = np.eye(n)
        return cls(eye, eye.copy(), True)

    @property
    def n(self):
        return self.W.shape[0]

    def to_euclidean(self, x):
        """
        Map x to L* x, isometrically from the W-norm to the 2-norm.
        """
        if self.is_identity:
            return np.asarray(x)
        return self.chol.conj().T @ x

    def from_euclidean(self, y):
        """
        Inverse of :meth:`to_euclidean`.
        """
        if self.is_identity:
            return np.asarray(y)
        return sla.solve_triangular(self.chol, y, lower=True, trans="C")

    def inner(self, x, y):
        return w_inner(x, y, self)

    def norm(self, x):
        return w_norm(x, self)


@square_matrix_args("A")
def split_hermitian_skew(A):
    """
    Split a square matrix into its Hermitian and skew-Hermitian parts.

    Parameters
    ----------
    A : array_like
        Square matrix.

    Returns
    -------
    HermitianSplit
        With ``M = (A + A*)/2`` and ``N = (A - A*)/2``.

    Examples
    --------
    >>> split = split_hermitian_skew([[0.0, 1.0], [-1.0, 0.0]])
    >>> split.M
    array([[0., 0.],
           [0., 0.]])
    """
    A = as_matrix(A, square=True, name="A")
    At = A.conj().T
    return HermitianSplit(M=(A + At) / 2, N=(A - At) / 2)


@square_matrix_args("B")
def cholesky_hpd(B):
    """
    Compute the lower Cholesky factor of a Hermitian positive definite matrix.

    Parameters
    ----------
    B : array_like
        Hermitian matrix.

    Returns
    -------
    L : numpy.ndarray
        Lower triangular matrix with ``L @ L.conj().T == B``.

    Raises
    ------
    NotPositiveDefinite
        If the factorization encounters a non-positive pivot.
    """
    B = as_matrix(B, square=True, name="B")
    if not is_hermitian(B):
        raise NotHermitian("Cholesky factorization requires a Hermitian matrix.")
    try:
        L = sla.cholesky(B, lower=True, check_finite=False)
    except np.linalg.LinAlgError as err:
        raise NotPositiveDefinite(f"Matrix is not positive definite ({err}).")
    if not np.all(np.real(np.diag(L)) > 0):
        raise NotPositiveDefinite("Cholesky factor has non-positive pivots.")
    return L


def _sort_order(values, rtol=1e-12):
    """
    Get the permutation sorting by non-increasing modulus.

    Moduli equal to a relative tolerance are sorted by descending imaginary
    part.
    """
    moduli = np.abs(values)
    scale = moduli.max() if len(moduli) and moduli.max() > 0 else 1.0
    quantized = np.round(moduli / (scale * rtol))
    return np.lexsort((-np.imag(values), -quantized))


def _fix_phase(X, rtol=1e-12):
    """
    Rotate each column such that its first significant entry is real positive.
    """
    X = X.copy()
    for j in range(X.shape[1]):
        x = X[:, j]
        nrm = np.linalg.norm(x)
        if nrm == 0:
            continue
        i = np.argmax(np.abs(x) > rtol * nrm)
        X[:, j] = x * (np.conj(x[i]) / np.abs(x[i]))
    return X


def hermitian_gen_eig(M, B):
    """
    Solve the Hermitian-definite pencil ``M x = lambda B x``.

    With ``B = H^{-1}`` the eigenvalues are those of ``H M``.

    Parameters
    ----------
    M : array_like
        Hermitian matrix.
    B : array_like
        Hermitian positive definite matrix.

    Returns
    -------
    EigenPairs
        Real eigenvalues and B-orthonormal eigenvectors.
    """
    M = as_matrix(M, square=True, name="M")
    B = as_matrix(B, square=True, name="B")
    if M.shape != B.shape:
        raise DimensionMismatch(f"Shapes {M.shape} and {B.shape} do not match.")
    if not is_hermitian(M):
        raise NotHermitian("M must be Hermitian.")
    cholesky_hpd(B)
    values, vectors = sla.eigh(M, B, check_finite=False)
    order = np.argsort(-np.abs(values), kind="stable")
    return EigenPairs(values[order], vectors[:, order])


def skew_gen_eig(N, B, m="all"):
    """
    Solve the pencil ``N x = lambda B x`` for skew-Hermitian N and hpd B.

    The pencil is reduced to the Hermitian eigenproblem of
    ``i R^{-1} N R^{-*}`` where ``B = R R*``.

    Parameters
    ----------
    N : array_like
        Skew-Hermitian matrix.
    B : array_like
        Hermitian positive definite matrix.
    m : int or "all", optional
        Number of eigenpairs of largest modulus to return. The default
        returns all pairs.

    Returns
    -------
    EigenPairs
        Purely imaginary eigenvalues ordered by non-increasing modulus, ties
        broken by descending imaginary part, with B-orthonormal eigenvectors.
    """
    N = as_matrix(N, square=True, name="N")
    B = as_matrix(B, square=True, name="B")
    n = N.shape[0]
    if N.shape != B.shape:
        raise DimensionMismatch(f"Shapes {N.shape} and {B.shape} do not match.")
    if not is_skew(N):
        raise NotSkew("N is not skew-Hermitian to the requested tolerance.")
    if m == "all":
        m = n
    if not 0 <= m <= n:
        raise ValueError(f"m must lie in [0, {n}], got {m}.")

    R = cholesky_hpd(B)
    T = sla.solve_triangular(R, N, lower=True)
    K = sla.solve_triangular(R, T.conj().T, lower=True).conj().T
    iK = 1j * K
    iK = (iK + iK.conj().T) / 2
    mu, Yv = sla.eigh(iK, check_finite=False)

    values = -1j * mu
    order = _sort_order(values)[:m]
    X = sla.solve_triangular(R, Yv[:, order], lower=True, trans="C")
    return EigenPairs(values[order], _fix_phase(X))


def w_inner(x, y, ip):
    """
    Weighted inner product ``<x, y>_W = y* W x``.
    """
    x = as_vector(x, name="x")
    y = as_vector(y, name="y")
    if not x.shape[0] == y.shape[0] == ip.n:
        raise DimensionMismatch(
            f"Vector lengths {x.shape[0]}, {y.shape[0]} do not match weight "
            f"of size {ip.n}."
        )
    return np.vdot(ip.to_euclidean(y), ip.to_euclidean(x))


def w_norm(x, ip):
    """
    Weighted norm ``sqrt(<x, x>_W)``.
    """
    x = as_vector(x, n=ip.n, name="x")
    return float(np.linalg.norm(ip.to_euclidean(x)))


def numerical_radius_power(K, maxiter=5000, tol=1e-13, seed=0):
    """
    Estimate the spectral radius of a Hermitian matrix by power iteration.

    Parameters
    ----------
    K : array_like
        Hermitian matrix.
    maxiter : int, optional
    tol : float, optional
        Relative change of the estimate at which to stop.
    seed : int, optional
        Seed of the random start vector.

    Returns
    -------
    float
    """
    K = as_matrix(K, square=True, name="K")
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(K.shape[0]) + 0j
    x /= np.linalg.norm(x)
    est = 0.0
    # iterate with K^2 so that the eigenvalues +r and -r do not cancel
    for it in range(maxiter):
        y = K @ (K @ x)
        nrm = np.linalg.norm(y)
        if nrm == 0:
            return 0.0
        x = y / nrm
        new = np.linalg.norm(K @ x)
        if abs(new - est) <= tol * new:
            est = new
            break
        est = new
    logger.debug(f" Power iteration finished after {it + 1} steps.")
    return float(est)

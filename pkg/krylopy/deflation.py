#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Krylopy deflation module.

This module contains the deflation projectors

    P_D = I - A Z (Y* A Z)^-1 Y*,    Q_D = I - Z (Y* A Z)^-1 Y* A,

and the spectral deflation spaces built from the pencils ``N x = l H^-1 x``
("hn") and ``N x = l M x`` ("minv-n").
"""

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from krylopy.common import (
    DimensionMismatch,
    MismatchedOperators,
    OddRequest,
    RankLoss,
    SingularCore,
    as_matrix,
    fingerprint,
)
from krylopy.io import read_matrix, write_matrix
from krylopy.linalg import skew_gen_eig

logger = logging.getLogger(__name__)

gevp_kinds = ["hn", "minv-n"]
variants = {"hn": ["y-haz", "z-equals-y", "z-equals-ny"], "minv-n": ["y-haz"]}

rcond_tol = 1e-12
rank_tol = 1e-10


def _rcond(C):
    if C.size == 0:
        return 1.0
    s = np.linalg.svd(C, compute_uv=False)
    return s[-1] / s[0] if s[0] > 0 else 0.0


class DeflationOperator:
    """
    Deflation projectors for a pair of bases Y, Z.

    The operator is immutable after construction. With ``m = 0`` both
    projectors are the identity.
    """

    __slots__ = (
        "A",
        "Y",
        "Z",
        "AZ",
        "core",
        "_lu",
        "core_rcond",
        "h_core_rcond",
        "variant",
        "exact_pairing",
    )

    def __init__(self, A, Y, Z, H_inv=None, variant=None, exact_pairing=False):
        self.A = A
        self.Y = Y
        self.Z = Z
        self.AZ = A @ Z
        self.core = Y.conj().T @ self.AZ
        self.core_rcond = _rcond(self.core)
        self.h_core_rcond = None
        if H_inv is not None:
            self.h_core_rcond = _rcond(Y.conj().T @ H_inv @ Z)
        self._lu = sla.lu_factor(self.core) if self.m else None
        self.variant = variant
        self.exact_pairing = exact_pairing

    @property
    def m(self):
        return self.Z.shape[1]

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def satisfies_conditions(self):
        """
        Whether Y* A Z and, if known, Y* H^-1 Z are numerically invertible.
        """
        ok = self.core_rcond >= rcond_tol
        if self.h_core_rcond is not None:
            ok = ok and self.h_core_rcond >= rcond_tol
        return ok

    def _core_solve(self, rhs):
        return sla.lu_solve(self._lu, rhs)

    def apply_p(self, v):
        if not self.m:
            return v
        return v - self.AZ @ self._core_solve(self.Y.conj().T @ v)

    def apply_q(self, v):
        if not self.m:
            return v
        return v - self.Z @ self._core_solve(self.Y.conj().T @ (self.A @ v))

    def coarse_solve(self, b):
        """
        Get ``Z (Y* A Z)^-1 Y* b``.
        """
        if not self.m:
            return np.zeros_like(b)
        return self.Z @ self._core_solve(self.Y.conj().T @ b)

    @property
    def P(self):
        return self.apply_p(np.eye(self.n, dtype=self.AZ.dtype))

    @property
    def Q(self):
        return self.apply_q(np.eye(self.n, dtype=self.AZ.dtype))

    def is_h_self_adjoint(self, H, rtol=1e-10):
        """
        Check ``H P_D = P_D* H``.
        """
        HP = H @ self.P
        return np.abs(HP - HP.conj().T).max() <= rtol * np.abs(H).max()

    def __repr__(self):
        return (
            f"DeflationOperator(n={self.n}, m={self.m}, variant={self.variant}, "
            f"rcond={self.core_rcond:.3e})"
        )


def build_projectors(A, Y, Z, H_inv=None, variant=None, exact_pairing=False):
    """
    Build and validate deflation projectors.

    Parameters
    ----------
    A : array_like
    Y, Z : array_like
        Bases of shape (n, m) with full column rank.
    H_inv : array_like, optional
        Inverse of the preconditioner. If given, invertibility of
        ``Y* H^-1 Z`` is checked as well.
    variant : str, optional
        Name of the pairing that produced Y and Z.
    exact_pairing : bool, optional
        Whether ``Y = H A Z`` holds by construction.

    Returns
    -------
    DeflationOperator

    Raises
    ------
    SingularCore
        If the reciprocal condition number of ``Y* A Z`` is below 1e-12.
    """
    A = as_matrix(A, square=True, name="A")
    n = A.shape[0]
    Y = np.asarray(Y).reshape(n, -1)
    Z = np.asarray(Z).reshape(n, -1)
    if Y.shape != Z.shape:
        raise DimensionMismatch(f"Y {Y.shape} and Z {Z.shape} differ in shape.")
    m = Y.shape[1]
    if m:
        for name, basis in [("Y", Y), ("Z", Z)]:
            if np.linalg.matrix_rank(basis) < m:
                raise RankLoss(f"{name} does not have full column rank {m}.")

    defl = DeflationOperator(A, Y, Z, H_inv, variant, exact_pairing)
    logger.info(
        f" Deflation with m = {m} ({variant}): rcond(Y*AZ) = {defl.core_rcond:.3e}"
    )
    if defl.core_rcond < rcond_tol:
        raise SingularCore(
            f"Y*AZ is numerically singular (rcond = {defl.core_rcond:.3e})."
        )
    if defl.h_core_rcond is not None and defl.h_core_rcond < rcond_tol:
        logger.warning(
            f" Y*H^-1Z is numerically singular (rcond = {defl.h_core_rcond:.3e})."
        )
    return defl


@dataclass(frozen=True)
class SpectralDeflationSpace:
    """
    Real basis of the eigenvectors belonging to the m largest eigenvalues.

    ``tau`` is the modulus of the largest eigenvalue left out and
    ``eigenvalues`` keeps the whole ordered spectrum of the pencil.
    """

    gevp_kind: str
    m: int
    tau: float
    basis: np.ndarray = field(repr=False)
    eigenvalues: np.ndarray = field(repr=False)
    fingerprint: tuple = field(default=None, repr=False)

    def save(self, path):
        return write_matrix(
            path, self.basis, sparse=False, comment=f"{self.gevp_kind} m={self.m}"
        )


def load_basis(path):
    return read_matrix(path)


def pencil_matrix(problem, setup, gevp_kind):
    """
    Get the right-hand matrix of the pencil: H^-1 for "hn" and M for "minv-n".
    """
    if gevp_kind == "hn":
        return setup.H_inv
    if gevp_kind == "minv-n":
        return problem.M
    raise ValueError(f"gevp_kind must be one of {gevp_kinds}, got '{gevp_kind}'.")


def _realify(values, vectors, m, is_real):
    """
    Select at most m independent real columns from eigenvectors.

    Conjugate pairs contribute the real and imaginary part of the
    representative with positive imaginary part. Columns that are nearly
    dependent on the previous ones are skipped and further eigenvectors are
    pulled in.

    Returns
    -------
    basis : numpy.ndarray
    consumed : numpy.ndarray
        Boolean mask of the eigenvalues represented by the basis.
    """
    n = vectors.shape[0]
    scale = np.abs(values).max() if len(values) else 0.0
    consumed = np.zeros(len(values), dtype=bool)
    columns, ortho = [], np.zeros((n, 0), dtype=vectors.dtype if not is_real else float)

    def accept(c):
        nonlocal ortho
        nrm = np.linalg.norm(c)
        if nrm == 0:
            return False
        w = c - ortho @ (ortho.conj().T @ c)
        w = w - ortho @ (ortho.conj().T @ w)
        if np.linalg.norm(w) < rank_tol * nrm:
            logger.warning(" Skipping a nearly dependent eigenvector column.")
            return False
        ortho = np.column_stack([ortho, w / np.linalg.norm(w)])
        columns.append(c)
        return True

    for i in range(len(values)):
        if len(columns) >= m:
            break
        if consumed[i]:
            continue
        lam, x = values[i], vectors[:, i]
        consumed[i] = True
        if not is_real:
            accept(x)
            continue
        if abs(lam) > 1e-12 * scale:
            # mark the conjugate partner
            partner = np.flatnonzero(~consumed)
            if len(partner):
                j = partner[np.argmin(np.abs(values[partner] - np.conj(lam)))]
                consumed[j] = True
            if lam.imag < 0:
                x = x.conj()
        for c in (x.real, x.imag):
            if len(columns) < m:
                accept(c)

    if len(columns) < m:
        raise RankLoss(f"Realified basis has rank {len(columns)} < {m}.")
    basis = np.column_stack(columns) if columns else np.zeros((n, 0))
    return basis, consumed


def build_spectral_space(problem, setup, gevp_kind="hn", m=0):
    """
    Build a spectral deflation space from a skew-Hermitian pencil.

    Solves ``N x = l H^-1 x`` ("hn") or ``N x = l M x`` ("minv-n"), takes the
    eigenvectors of the m eigenvalues of largest modulus and realifies
    conjugate pairs as ``[Re x | Im x]``. Complex problems keep complex
    eigenvectors.

    Parameters
    ----------
    problem : krylopy.problem.AssembledProblem
    setup : krylopy.problem.PreconditionerSetup
    gevp_kind : str, optional
        "hn" or "minv-n".
    m : int, optional
        Even number of deflation vectors.

    Returns
    -------
    SpectralDeflationSpace
    """
    if m % 2:
        raise OddRequest(f"The deflation dimension must be even, got {m}.")
    if not 0 <= m < problem.n:
        raise ValueError(f"m must lie in [0, {problem.n}), got {m}.")
    B = pencil_matrix(problem, setup, gevp_kind)
    pairs = skew_gen_eig(problem.N, B)
    is_real = not (np.iscomplexobj(problem.N) or np.iscomplexobj(B))
    basis, consumed = _realify(pairs.values, pairs.vectors, m, is_real)
    rest = np.flatnonzero(~consumed)
    tau = float(np.abs(pairs.values[rest[0]])) if len(rest) else 0.0
    logger.info(f" Spectral deflation space ({gevp_kind}) with m = {m}: tau = {tau:.6e}")
    return SpectralDeflationSpace(
        gevp_kind,
        m,
        tau,
        basis,
        pairs.values,
        fingerprint(problem.M, problem.N, setup.H_inv),
    )


@dataclass(frozen=True)
class DeflationPairing:
    """
    Bases Y, Z derived from a spectral space.

    ``exact_pairing`` records whether ``Y = H A Z`` holds, the hypothesis
    under which the deflated enclosures are guaranteed.
    """

    Y: np.ndarray = field(repr=False)
    Z: np.ndarray = field(repr=False)
    variant: str
    exact_pairing: bool


def check_space(space, problem, setup):
    if space.fingerprint != fingerprint(problem.M, problem.N, setup.H_inv):
        raise MismatchedOperators(
            "Deflation space was built for different operators M, N or H."
        )


def make_pairing(space, problem, setup, variant="y-haz"):
    """
    Derive the deflation bases Y, Z from a spectral space.

    For "hn" spaces, "y-haz" sets ``Z = A^-1 N X`` and ``Y = H A Z``
    (requires a dense solve with A and spans the same space as X),
    "z-equals-y" sets ``Y = Z = X`` and "z-equals-ny" sets ``Y = X`` and
    ``Z = N X``. For "minv-n" spaces ``Z = X`` and ``Y = H A Z``.

    Returns
    -------
    DeflationPairing
    """
    check_space(space, problem, setup)
    allowed = variants[space.gevp_kind]
    if variant not in allowed:
        raise ValueError(
            f"variant must be one of {allowed} for {space.gevp_kind}, got '{variant}'."
        )
    X, A, H = space.basis, problem.A, setup.H
    if space.gevp_kind == "minv-n":
        Z = X
    elif variant == "y-haz":
        Z = np.linalg.solve(A, problem.N @ X) if space.m else X
    elif variant == "z-equals-y":
        return DeflationPairing(X, X, variant, False)
    else:
        return DeflationPairing(X, problem.N @ X, variant, False)
    return DeflationPairing(H @ (A @ Z), Z, variant, True)


def deflate(problem, setup, space, variant="y-haz"):
    """
    Build the deflation operator of a spectral space in one call.
    """
    pairing = make_pairing(space, problem, setup, variant)
    return build_projectors(
        problem.A,
        pairing.Y,
        pairing.Z,
        H_inv=setup.H_inv,
        variant=variant,
        exact_pairing=pairing.exact_pairing,
    )


def sample_restricted_quotients(problem, setup, defl, gevp_kind, n_samples=200, rng=None):
    """
    Sample Rayleigh quotients of N on the range of ``H P_D``.

    Returns ``<N x, x> / <B x, x>`` with B = H^-1 ("hn") or B = M ("minv-n")
    for random complex ``x = H P_D v``. Real x would give zero quotients
    for a real skew N.
    """
    rng = np.random.default_rng(rng)
    B = pencil_matrix(problem, setup, gevp_kind)
    shape = (problem.n, n_samples)
    V = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    X = setup.H @ (V if defl is None else defl.apply_p(V))
    num = np.einsum("ij,ij->j", X.conj(), problem.N @ X)
    den = np.einsum("ij,ij->j", X.conj(), B @ X).real
    return num / den

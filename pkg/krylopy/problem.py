#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Krylopy problem module.

This module contains the convection-diffusion-reaction test problem, its
finite element assembly and the Hermitian positive definite preconditioners.
"""

import logging
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.linalg as sla
import scipy.sparse

from krylopy.common import (
    DimensionMismatch,
    NotPositiveDefinite,
    as_matrix,
    as_vector,
    fingerprint,
)
from krylopy.io import read_matrix, read_vector, write_matrix, write_vector
from krylopy.linalg import InnerProduct, cholesky_hpd, split_hermitian_skew

logger = logging.getLogger(__name__)

preconditioner_kinds = ["exact-m", "jacobi-m", "block-jacobi-m"]
placements = ["left", "right", "split"]

_block_kind = re.compile(r"^block-jacobi-m\((\d+)\)$")
_spec_comment = re.compile(r"cdr nx=(\d+) c0=(\S+) nu=(\S+) eta=(\S+)")


@dataclass(frozen=True)
class CdrProblemSpec:
    """
    Parameters of the convection-diffusion-reaction problem on [-1, 1]^2.

    Parameters
    ----------
    nx : int
        Number of interior grid points per dimension.
    c0 : float
        Reaction coefficient.
    nu : float
        Viscosity.
    eta : float
        Convection strength.
    """

    nx: int = 16
    c0: float = 1.0
    nu: float = 0.01
    eta: float = 100.0

    def __post_init__(self):
        if int(self.nx) != self.nx or self.nx < 3:
            raise ValueError(f"nx must be an integer >= 3, got {self.nx}.")
        if not self.c0 > 0:
            raise ValueError(f"c0 must be positive, got {self.c0}.")
        if not self.nu > 0:
            raise ValueError(f"nu must be positive, got {self.nu}.")
        if not np.isfinite(self.eta):
            raise ValueError(f"eta must be finite, got {self.eta}.")

    @property
    def h(self):
        return 2.0 / (self.nx + 1)

    def to_comment(self):
        return f"cdr nx={self.nx} c0={self.c0!r} nu={self.nu!r} eta={self.eta!r}"

    @classmethod
    def from_comment(cls, text):
        match = _spec_comment.search(text)
        if match is None:
            return None
        nx, c0, nu, eta = match.groups()
        return cls(int(nx), float(c0), float(nu), float(eta))


@dataclass(frozen=True)
class AssembledProblem:
    """
    Linear system ``A x = b`` with ``A = M + N``, M Hermitian and N skew.
    """

    A: np.ndarray
    M: np.ndarray
    N: np.ndarray
    b: np.ndarray
    spec: CdrProblemSpec = None
    dof_coords: np.ndarray = field(default=None, repr=False)

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def fingerprint(self):
        return fingerprint(self.M, self.N)

    def save(self, directory):
        """
        Write A.mtx, M.mtx, N.mtx and b.vec to `directory`.

        Returns
        -------
        list of pathlib.Path
        """
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        comment = "" if self.spec is None else self.spec.to_comment()
        paths = [
            write_matrix(directory / f"{name}.mtx", getattr(self, name), comment=comment)
            for name in ["A", "M", "N"]
        ]
        paths.append(write_vector(directory / "b.vec", self.b))
        logger.info(f" Wrote problem of dimension {self.n} to {directory}.")
        return paths


def problem_from_matrix(A, b, spec=None):
    """
    Create an AssembledProblem from a square matrix and a right-hand side.
    """
    A = as_matrix(A, square=True, name="A")
    b = as_vector(b, n=A.shape[0], name="b")
    split = split_hermitian_skew(A)
    return AssembledProblem(A=A, M=split.M, N=split.N, b=b, spec=spec)


def load_problem(directory):
    """
    Read a problem written by :meth:`AssembledProblem.save`.

    M.mtx and N.mtx are optional; missing parts are recomputed from A.
    """
    directory = Path(directory)
    A = read_matrix(directory / "A.mtx")
    b = read_vector(directory / "b.vec")
    with open(directory / "A.mtx") as f:
        spec = CdrProblemSpec.from_comment(f.readline() + f.readline())
    if (directory / "M.mtx").exists() and (directory / "N.mtx").exists():
        M = read_matrix(directory / "M.mtx")
        N = read_matrix(directory / "N.mtx")
        if M.shape != A.shape or N.shape != A.shape:
            raise DimensionMismatch("Shapes of A, M and N do not match.")
        return AssembledProblem(A=A, M=M, N=N, b=as_vector(b, n=A.shape[0]), spec=spec)
    return problem_from_matrix(A, b, spec=spec)


def permute(problem, perm):
    """
    Apply a symmetric permutation of unknowns to a problem.
    """
    perm = np.asarray(perm)
    if sorted(perm.tolist()) != list(range(problem.n)):
        raise ValueError("perm is not a permutation of the unknowns.")
    ix = np.ix_(perm, perm)
    coords = None if problem.dof_coords is None else problem.dof_coords[perm]
    return AssembledProblem(
        A=problem.A[ix],
        M=problem.M[ix],
        N=problem.N[ix],
        b=problem.b[perm],
        spec=problem.spec,
        dof_coords=coords,
    )


def convection_field(x, y, eta):
    """
    Divergence free convection field ``eta pi (-y - 0.8, x)``.
    """
    return eta * np.pi * np.stack([-y - 0.8, x], axis=-1)


def source_term(x, y):
    return np.exp(-2.5 * (x**2 + (y + 0.8) ** 2))


def _triangles(nx):
    """
    Get vertex indices of the uniform right triangulation with (nx+2)^2 nodes.
    """
    n1 = nx + 2
    i, j = np.meshgrid(np.arange(n1 - 1), np.arange(n1 - 1), indexing="ij")
    i, j = i.ravel(), j.ravel()
    node = i * n1 + j
    lower = np.stack([node, node + n1, node + 1], axis=1)
    upper = np.stack([node + n1 + 1, node + 1, node + n1], axis=1)
    return np.concatenate([lower, upper])


def _local_matrices(p, eta):
    """
    Get local mass, stiffness, convection and load integrals of P1 elements.

    Parameters
    ----------
    p : numpy.ndarray
        Vertex coordinates of shape (n_triangles, 3, 2).

    Returns
    -------
    mass, stiff, conv : numpy.ndarray
        Arrays of shape (n_triangles, 3, 3). ``conv[t, a, b]`` holds the
        integral of ``(a . grad phi_b) phi_a``.
    area : numpy.ndarray
    """
    ones = np.ones(p.shape[:2] + (1,))
    Bmat = np.concatenate([ones, p], axis=2)
    area = np.abs(np.linalg.det(Bmat)) / 2
    # rows 1, 2 of the inverse are the gradients of the barycentric coordinates
    grads = np.linalg.inv(Bmat)[:, 1:, :].transpose(0, 2, 1)

    stiff = area[:, None, None] * np.einsum("tad,tbd->tab", grads, grads)
    mass = area[:, None, None] / 12 * (np.ones((3, 3)) + np.eye(3))

    # edge midpoint rule, exact for quadratic integrands
    conv = np.zeros_like(stiff)
    for a0, a1 in [(0, 1), (1, 2), (2, 0)]:
        mid = (p[:, a0] + p[:, a1]) / 2
        vel = convection_field(mid[:, 0], mid[:, 1], eta)
        adv = np.einsum("td,tbd->tb", vel, grads)
        lam = np.zeros((len(p), 3))
        lam[:, [a0, a1]] = 0.5
        conv += (area / 3)[:, None, None] * lam[:, :, None] * adv[:, None, :]
    return mass, stiff, conv, area


def build_cdr(spec):
    """
    Assemble the convection-diffusion-reaction problem.

    Uses P1 finite elements on a uniform right triangulation of [-1, 1]^2
    with homogeneous Dirichlet conditions. The Hermitian part is
    ``c0 (u, v) + nu (grad u, grad v)`` and the skew part is
    ``1/2 (a . grad u, v) - 1/2 (a . grad v, u)``.

    Parameters
    ----------
    spec : CdrProblemSpec

    Returns
    -------
    AssembledProblem
        Real problem of dimension ``spec.nx**2``.

    Examples
    --------
    >>> problem = build_cdr(CdrProblemSpec(nx=8))
    >>> problem.n
    64
    """
    if not isinstance(spec, CdrProblemSpec):
        raise TypeError(f"spec must be a CdrProblemSpec, got {type(spec)}.")
    nx, h = spec.nx, spec.h
    n1 = nx + 2
    grid = -1 + h * np.arange(n1)
    X, Y = np.meshgrid(grid, grid, indexing="ij")
    coords = np.stack([X.ravel(), Y.ravel()], axis=1)

    tri = _triangles(nx)
    mass, stiff, conv, area = _local_matrices(coords[tri], spec.eta)
    loc_M = spec.c0 * mass + spec.nu * stiff

    rows = np.repeat(tri, 3, axis=1).ravel()
    cols = np.tile(tri, (1, 3)).ravel()
    shape = (n1 * n1, n1 * n1)
    M_full = scipy.sparse.coo_matrix((loc_M.ravel(), (rows, cols)), shape).tocsr()
    C_full = scipy.sparse.coo_matrix((conv.ravel(), (rows, cols)), shape).tocsr()

    load = (area / 3)[:, None] * source_term(coords[tri, 0], coords[tri, 1])
    b_full = np.bincount(tri.ravel(), weights=load.ravel(), minlength=n1 * n1)

    on_boundary = (
        np.isclose(np.abs(coords[:, 0]), 1) | np.isclose(np.abs(coords[:, 1]), 1)
    )
    interior = np.flatnonzero(~on_boundary)

    M = M_full[interior][:, interior].toarray()
    C = C_full[interior][:, interior].toarray()
    M = (M + M.T) / 2
    N = (C - C.T) / 2
    A = M + N
    logger.info(
        f" Assembled CDR problem with n = {len(interior)} (nx = {nx}, "
        f"c0 = {spec.c0}, nu = {spec.nu}, eta = {spec.eta})."
    )
    return AssembledProblem(
        A=A, M=M, N=N, b=b_full[interior], spec=spec, dof_coords=coords[interior]
    )


@dataclass(frozen=True)
class PreconditionerSetup:
    """
    Hermitian positive definite preconditioner H with its placement.

    ``H_inv`` is the approximation of M whose inverse is H. The placement
    determines ``H_L``, ``H_R`` with ``H = H_R H_L`` and the weight W with
    ``H = H_L* W H_L``.
    """

    kind: str
    placement: str
    H_inv: np.ndarray = field(repr=False)
    H: np.ndarray = field(repr=False)
    H_L: np.ndarray = field(repr=False)
    H_R: np.ndarray = field(repr=False)
    weight: InnerProduct = field(repr=False)
    blocks: int = None

    @property
    def n(self):
        return self.H.shape[0]

    @property
    def fingerprint(self):
        return fingerprint(self.H_inv)

    def norm(self, r):
        """
        H-norm of a residual, equal to the W-norm of ``H_L r``.
        """
        return self.weight.norm(self.H_L @ r)

    def equivalent(self, placement):
        """
        Get the setup with the same H and a different placement.
        """
        return _place(self.kind, self.H_inv, self.H, placement, self.blocks)


def _place(kind, H_inv, H, placement, blocks=None):
    n = H.shape[0]
    eye = np.eye(n)
    if placement == "left":
        H_L, H_R, weight = H, eye, InnerProduct.from_matrix(H_inv)
    elif placement == "right":
        H_L, H_R, weight = eye, H, InnerProduct.from_matrix(H)
    elif placement == "split":
        L = cholesky_hpd(H)
        H_L, H_R, weight = L.conj().T, L, InnerProduct.identity(n)
    else:
        raise ValueError(f"placement must be one of {placements}, got '{placement}'.")
    return PreconditionerSetup(kind, placement, H_inv, H, H_L, H_R, weight, blocks)


def _block_slices(n, blocks):
    bounds = np.linspace(0, n, blocks + 1).round().astype(int)
    return [slice(lo, hi) for lo, hi in zip(bounds[:-1], bounds[1:])]


def build_preconditioner(problem, kind="jacobi-m", placement="right", blocks=4):
    """
    Build a Hermitian positive definite preconditioner from the Hermitian part.

    Parameters
    ----------
    problem : AssembledProblem
    kind : str, optional
        One of "exact-m" (H = M^-1), "jacobi-m" (H = diag(M)^-1) and
        "block-jacobi-m" (H is the inverse of the block diagonal of M with
        `blocks` contiguous blocks). The form "block-jacobi-m(nb)" sets the
        number of blocks inline.
    placement : str, optional
        One of "left", "right" and "split".
    blocks : int, optional
        Number of blocks for "block-jacobi-m".

    Returns
    -------
    PreconditionerSetup
    """
    match = _block_kind.match(kind)
    if match:
        kind, blocks = "block-jacobi-m", int(match.group(1))
    if kind not in preconditioner_kinds:
        raise ValueError(f"kind must be one of {preconditioner_kinds}, got '{kind}'.")

    M = problem.M
    n = problem.n
    if kind == "exact-m":
        H_inv = M.copy()
        blocks = None
    elif kind == "jacobi-m":
        d = np.real(np.diag(M))
        if not np.all(d > 0):
            raise NotPositiveDefinite("Diagonal of M has non-positive entries.")
        H_inv = np.diag(np.diag(M))
        blocks = None
    else:
        if not 1 <= blocks <= n:
            raise ValueError(f"blocks must lie in [1, {n}], got {blocks}.")
        H_inv = np.zeros_like(M)
        for s in _block_slices(n, blocks):
            H_inv[s, s] = M[s, s]

    L = cholesky_hpd(H_inv)
    H = sla.cho_solve((L, True), np.eye(n, dtype=H_inv.dtype))
    H = (H + H.conj().T) / 2
    logger.info(f" Built {kind} preconditioner with {placement} placement.")
    return _place(kind, H_inv, H, placement, blocks)

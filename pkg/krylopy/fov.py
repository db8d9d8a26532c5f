#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Krylopy field of values module.

This module contains the computation of weighted fields of values and the
rectangles enclosing the field of values of the preconditioned operator.
"""

import logging
from dataclasses import dataclass, field

import dask
import numpy as np
import pandas as pd
import scipy.linalg as sla
from tqdm import tqdm

from krylopy.common import NonPositiveRealPart, NotPd, as_matrix
from krylopy.deflation import check_space
from krylopy.linalg import InnerProduct, hermitian_gen_eig, skew_gen_eig

logger = logging.getLogger(__name__)

pd_tol = 1e-12


@dataclass(frozen=True)
class Rectangle:
    """
    Rectangle ``[re_min, re_max] + i[-im_half, im_half]``.
    """

    re_min: float
    re_max: float
    im_half: float

    def __post_init__(self):
        if not self.re_min > 0:
            raise NonPositiveRealPart(
                f"Rectangle must lie right of the origin, got re_min = {self.re_min}."
            )
        if not self.re_min <= self.re_max:
            raise ValueError(
                f"re_min must not exceed re_max, got {self.re_min} > {self.re_max}."
            )
        if not self.im_half >= 0:
            raise ValueError(f"im_half must be non-negative, got {self.im_half}.")

    @property
    def corners(self):
        return np.array(
            [
                self.re_max + 1j * self.im_half,
                self.re_min + 1j * self.im_half,
                self.re_min - 1j * self.im_half,
                self.re_max - 1j * self.im_half,
            ]
        )

    def scale(self, a):
        if not a > 0:
            raise ValueError(f"Scaling factor must be positive, got {a}.")
        return Rectangle(a * self.re_min, a * self.re_max, a * self.im_half)

    def contains(self, z, slack=1e-8):
        """
        Check membership of points with a slack relative to the extent.
        """
        z = np.asarray(z)
        s = slack * max(abs(self.re_min), abs(self.re_max), self.im_half, 1e-300)
        return (
            (z.real >= self.re_min - s)
            & (z.real <= self.re_max + s)
            & (np.abs(z.imag) <= self.im_half + s)
        )

    def to_series(self):
        return pd.Series(
            {"re_min": self.re_min, "re_max": self.re_max, "im_half": self.im_half}
        )


@dataclass(frozen=True)
class NormalizedRectangle:
    """
    Rectangle ``scale * ([1, mu] + i[-rho, rho])``.
    """

    mu: float
    rho: float
    scale: float = 1.0

    def to_rectangle(self):
        return Rectangle(self.scale, self.scale * self.mu, self.scale * self.rho)


def normalize(rect):
    """
    Normalize a rectangle such that its left side lies at ``Re z = 1``.

    Parameters
    ----------
    rect : Rectangle

    Returns
    -------
    NormalizedRectangle

    Examples
    --------
    >>> normalize(Rectangle(0.21, 3.00, 48.9)).mu
    14.285714285714285
    """
    return NormalizedRectangle(
        mu=rect.re_max / rect.re_min,
        rho=rect.im_half / rect.re_min,
        scale=rect.re_min,
    )


@dataclass(frozen=True)
class FovSample:
    """
    Boundary points of a field of values from the support function method.

    For each angle ``theta`` the field of values lies in the half plane
    ``Re(exp(i theta) z) <= support``, with the boundary point attaining it.
    """

    theta: np.ndarray
    boundary_points: np.ndarray
    support: np.ndarray
    weight: str = "euclidean"

    def contains(self, z, slack=1e-8):
        """
        Check whether points lie within all sampled support lines.
        """
        z = np.atleast_1d(np.asarray(z))
        s = slack * max(np.abs(self.boundary_points).max(), 1e-300)
        proj = np.real(np.exp(1j * self.theta)[:, None] * z[None, :])
        return (proj <= self.support[:, None] + s).all(axis=0)

    def to_dataframe(self):
        return pd.DataFrame(
            {
                "theta": self.theta,
                "re": self.boundary_points.real,
                "im": self.boundary_points.imag,
            }
        )


def _transformed(B, ip):
    """
    Get ``L* B L^-*``, whose Euclidean field of values is FOV^W(B).
    """
    B = as_matrix(B, square=True, name="B")
    if ip is None or ip.is_identity:
        return B
    return ip.to_euclidean(B @ ip.from_euclidean(np.eye(B.shape[0])))


def _support_point(Bt, theta):
    R = np.exp(1j * theta) * Bt
    Hpart = (R + R.conj().T) / 2
    n = Bt.shape[0]
    value, vec = sla.eigh(Hpart, subset_by_index=[n - 1, n - 1])
    v = vec[:, 0]
    return np.vdot(v, Bt @ v) / np.vdot(v, v), value[0]


def fov_boundary(B, ip=None, n_angles=360, log=False):
    """
    Compute boundary points of the field of values of B in the W-inner product.

    For each angle on a uniform grid, the maximal eigenpair of the
    W-Hermitian part of ``exp(i theta) B`` gives a support line and a
    boundary point.

    Parameters
    ----------
    B : array_like
        Square matrix.
    ip : krylopy.linalg.InnerProduct, optional
        Inner product. The default is the Euclidean one.
    n_angles : int, optional
        Number of angles, at least 8. The default is 360.
    log : bool, optional
        Whether to show a progress bar. Without it, the independent angles
        are evaluated in parallel threads with dask.

    Returns
    -------
    FovSample
    """
    if n_angles < 8:
        raise ValueError(f"n_angles must be at least 8, got {n_angles}.")
    Bt = _transformed(B, ip)
    theta = 2 * np.pi * np.arange(n_angles) / n_angles
    if log:
        res = [_support_point(Bt, t) for t in tqdm(theta, "Sampling field of values")]
    else:
        tasks = [dask.delayed(_support_point)(Bt, t) for t in theta]
        res = dask.compute(*tasks, scheduler="threads")
    points = np.array([r[0] for r in res])
    support = np.array([r[1] for r in res])
    weight = "euclidean" if ip is None or ip.is_identity else "weighted"
    return FovSample(theta, points, support, weight)


def sample_fov(B, ip=None, n_samples=500, rng=None):
    """
    Sample random Rayleigh quotients ``<B x, x>_W / <x, x>_W``.
    """
    rng = np.random.default_rng(rng)
    Bt = _transformed(B, ip)
    n = Bt.shape[0]
    X = rng.standard_normal((n, n_samples)) + 1j * rng.standard_normal((n, n_samples))
    num = np.einsum("ij,ij->j", X.conj(), Bt @ X)
    den = np.einsum("ij,ij->j", X.conj(), X).real
    return num / den


def preconditioned_fov(problem, setup, n_angles=360, log=False):
    """
    Get the field of values of ``A H`` in the H-inner product.
    """
    return fov_boundary(
        problem.A @ setup.H, InnerProduct.from_matrix(setup.H), n_angles, log
    )


@dataclass(frozen=True)
class SpectralData:
    """
    Spectral quantities entering the enclosures.
    """

    lambda_min: float
    lambda_max: float
    rho_nh: float
    rho_minv_n: float = field(default=np.nan)

    def to_series(self):
        return pd.Series(self.__dict__)


def _real_extent(problem, setup):
    values = hermitian_gen_eig(problem.M, setup.H_inv).values.real
    lo, hi = values.min(), values.max()
    if not lo > pd_tol * hi:
        raise NotPd(
            f"lambda_min(HM) = {lo:.3e} is not positive: A is not positive definite."
        )
    return lo, hi


def _radius(N, B):
    values = skew_gen_eig(N, B, m=1).values
    return float(np.abs(values[0])) if len(values) else 0.0


def spectral_data(problem, setup):
    """
    Compute lambda_min(HM), lambda_max(HM), rho(NH) and rho(M^-1 N).
    """
    lo, hi = _real_extent(problem, setup)
    data = SpectralData(
        float(lo),
        float(hi),
        _radius(problem.N, setup.H_inv),
        _radius(problem.N, problem.M),
    )
    logger.info(
        f" lambda(HM) in [{data.lambda_min:.6e}, {data.lambda_max:.6e}], "
        f"rho(NH) = {data.rho_nh:.6e}, rho(M^-1 N) = {data.rho_minv_n:.6e}"
    )
    return data


def enclosure_omega1(problem, setup):
    """
    Get ``[lambda_min(HM), lambda_max(HM)] + i[-rho(NH), rho(NH)]``.

    Parameters
    ----------
    problem : krylopy.problem.AssembledProblem
    setup : krylopy.problem.PreconditionerSetup

    Returns
    -------
    Rectangle
    """
    lo, hi = _real_extent(problem, setup)
    rect = Rectangle(float(lo), float(hi), _radius(problem.N, setup.H_inv))
    logger.info(f" Omega_1 = {rect}")
    return rect


def enclosure_omega2(problem, setup):
    """
    Get ``[lambda_min(HM), lambda_max(HM)] + i lambda_max(HM) [-r, r]`` with
    ``r = rho(M^-1 N)``.
    """
    lo, hi = _real_extent(problem, setup)
    rect = Rectangle(float(lo), float(hi), float(hi) * _radius(problem.N, problem.M))
    logger.info(f" Omega_2 = {rect}")
    return rect


def enclosure_tau(problem, setup, space):
    """
    Get the enclosure of the deflated operator for a spectral space.

    For "hn" spaces the half height is ``tau``, for "minv-n" spaces it is
    ``lambda_max(HM) tau``.
    """
    check_space(space, problem, setup)
    lo, hi = _real_extent(problem, setup)
    im_half = space.tau if space.gevp_kind == "hn" else hi * space.tau
    return Rectangle(float(lo), float(hi), float(im_half))

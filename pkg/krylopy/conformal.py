#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Krylopy conformal module.

This module contains the exterior Schwarz-Christoffel map of a rectangle,
the logarithmic capacity and the Faber polynomials derived from its Laurent
expansion at infinity.

The normalized rectangle is ``[1, mu] + i[-rho, rho]``. Its exterior map
``psi`` from the exterior of the unit disk has the derivative

    psi'(w) = C prod_k (1 - w_k / w)^(1/2)

with prevertices ``w_1 = exp(i a)``, ``w_2 = exp(i (pi - a))``,
``w_3 = -exp(i a)`` and ``w_4 = exp(-i a)`` mapped onto the corners
``mu + i rho``, ``1 + i rho``, ``1 - i rho`` and ``mu - i rho``.
"""

import logging
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np
import pandas as pd
import scipy.optimize
import scipy.special as sp

from krylopy.common import (
    DegenerateRectangle,
    InsideDisk,
    NewtonDivergence,
    TruncationTooShort,
)

logger = logging.getLogger(__name__)

n_nodes = 24
grading = 0.15
n_graded = 8
truncation_margin = 16
degenerate_rtol = 1e-10


@lru_cache(maxsize=None)
def _rule(alpha, beta):
    """
    Gauss-Jacobi rule for the weight ``(1 - x)^alpha (1 + x)^beta``.
    """
    if alpha == 0 and beta == 0:
        return sp.roots_legendre(n_nodes)
    return sp.roots_jacobi(n_nodes, alpha, beta)


def _panel(f, a, b, sing_a=False, sing_b=False):
    """
    Integrate f over [a, b] with one Gauss rule.

    Endpoints flagged singular carry a square root zero of the integrand,
    which is divided out and integrated exactly by the Jacobi weight.
    """
    alpha, beta = (0.5 if sing_b else 0), (0.5 if sing_a else 0)
    x, wts = _rule(alpha, beta)
    t = (a + b) / 2 + (b - a) / 2 * x
    vals = f(t) / ((1 - x) ** alpha * (1 + x) ** beta)
    return (b - a) / 2 * np.dot(wts, vals)


def _graded_breaks(left=True, right=True):
    """
    Breakpoints in [0, 1], geometrically refined toward the flagged ends.
    """
    g = grading ** np.arange(n_graded, 0, -1)
    parts = [np.array([0.0])]
    if left:
        parts.append(0.5 * g)
    parts.append(np.array([0.5]))
    if right:
        parts.append(1 - 0.5 * g[::-1])
    parts.append(np.array([1.0]))
    return np.unique(np.concatenate(parts))


def _integrate(f, a, b, sing_a=False, sing_b=False, left=True, right=True):
    """
    Composite Gauss integration of f over [a, b].
    """
    if a == b:
        return 0j
    t = a + (b - a) * _graded_breaks(left, right)
    res = 0j
    last = len(t) - 2
    for i in range(len(t) - 1):
        res += _panel(f, t[i], t[i + 1], sing_a and i == 0, sing_b and i == last)
    return res


def _side_integral(m, mc):
    """
    Get ``E(m) - (1 - m) K(m)``, the quarter side integral for ``m = sin^2 a``.

    The complementary parameter ``mc = 1 - m`` is passed separately to keep
    its relative accuracy near ``m = 1``.
    """
    if m < 1e-4:
        return np.pi / 4 * m * (1 + m / 8 + 3 * m**2 / 64)
    if mc <= 0:
        return 1.0
    return sp.ellipe(m) - mc * sp.ellipkm1(mc)


def _parameters(alpha):
    return np.sin(alpha) ** 2, np.cos(alpha) ** 2


def side_ratio(alpha):
    """
    Ratio of the horizontal to the vertical side length of the rectangle
    whose exterior map has the prevertex angle `alpha`.

    The ratio decreases strictly from infinity to zero on (0, pi/2).
    """
    m, mc = _parameters(alpha)
    return _side_integral(mc, m) / _side_integral(m, mc)


def side_lengths(alpha, scale):
    """
    Get the (horizontal, vertical) side lengths for a prevertex angle and the
    leading Laurent coefficient.
    """
    m, mc = _parameters(alpha)
    return 4 * scale * _side_integral(mc, m), 4 * scale * _side_integral(m, mc)


def solve_parameter(mu, rho):
    """
    Find the prevertex angle of the exterior map of ``[1, mu] + i[-rho, rho]``.

    Parameters
    ----------
    mu : float
        Real extent, greater than 1.
    rho : float
        Half height, positive.

    Returns
    -------
    float
        Angle in (0, pi/2) solving ``side_ratio(alpha) = (mu - 1) / (2 rho)``.

    Examples
    --------
    >>> round(solve_parameter(3, 1) / np.pi, 12)
    0.25
    """
    if not mu > 1 or not rho > 0:
        raise DegenerateRectangle(
            f"Rectangle with mu = {mu}, rho = {rho} is a segment or a point."
        )
    target = np.log((mu - 1) / (2 * rho))

    def f(a):
        return np.log(side_ratio(a)) - target

    lo, hi = 1e-12, np.pi / 2 - 1e-7
    if not f(lo) > 0 > f(hi):
        raise DegenerateRectangle(
            f"Aspect ratio {(mu - 1) / (2 * rho):.3e} is out of the solvable range."
        )
    return scipy.optimize.brentq(f, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=200)


def _laurent_rectangle(mu, rho, alpha, scale, truncation):
    """
    Laurent coefficients ``[c_1, c_0, c_-1, ..., c_-J]`` from the binomial
    series of the factors of psi'.
    """
    prevertices = np.exp(1j * np.array([alpha, np.pi - alpha, np.pi + alpha, -alpha]))
    j = np.arange(truncation + 2)
    binom = sp.binom(0.5, j)
    series = np.array([1.0 + 0j])
    for wk in prevertices:
        series = np.convolve(series, binom * (-wk) ** j)[: truncation + 2]
    p = series.real
    coeffs = np.empty(truncation + 2)
    coeffs[0] = scale
    coeffs[1] = (mu + 1) / 2
    jj = np.arange(1, truncation + 1)
    coeffs[2:] = scale * p[jj + 1] / (-jj)
    return coeffs


@dataclass(frozen=True)
class ExteriorMapRectangle:
    """
    Exterior conformal map ``psi`` of a normalized rectangle or a degenerate
    limit of it.

    Parameters
    ----------
    mu, rho : float
        Normalized rectangle ``[1, mu] + i[-rho, rho]``.
    kind : str
        "rectangle" (Schwarz-Christoffel quadrature), or one of "segment",
        "vertical-segment", "disk", "ellipse" and "point" whose maps have
        finite Laurent expansions.
    laurent : numpy.ndarray
        Coefficients ``[c_1, c_0, c_-1, ..., c_-J]``.
    alpha_pre : float
        Prevertex angle, only meaningful for rectangles.
    phi0, gamma : float
        ``|phi(0)|`` and ``1/|phi(0)|``.
    """

    mu: float
    rho: float
    kind: str
    laurent: np.ndarray = field(repr=False)
    alpha_pre: float = np.nan
    phi0: float = np.nan
    gamma: float = np.nan

    @property
    def scale_c1(self):
        return self.laurent[0]

    @property
    def center(self):
        return self.laurent[1]

    @property
    def truncation(self):
        """
        Number of negative Laurent coefficients known, infinite if exact.
        """
        if self.kind == "rectangle":
            return len(self.laurent) - 2
        return np.inf

    @property
    def prevertices(self):
        a = self.alpha_pre
        return np.exp(1j * np.array([a, np.pi - a, np.pi + a, -a]))

    @property
    def corners(self):
        mu, rho = self.mu, self.rho
        return np.array([mu + 1j * rho, 1 + 1j * rho, 1 - 1j * rho, mu - 1j * rho])

    @classmethod
    def from_laurent(cls, laurent, kind="disk", mu=np.nan, rho=np.nan):
        """
        Create a map from a finite Laurent expansion.
        """
        laurent = np.asarray(laurent, dtype=complex)
        if np.allclose(laurent.imag, 0):
            laurent = laurent.real
        m = cls(mu, rho, kind, laurent)
        phi0, gamma = gamma_phi0(m)
        return replace(m, phi0=phi0, gamma=gamma)

    def laurent_dataframe(self):
        return pd.DataFrame(
            {
                "power": 1 - np.arange(len(self.laurent)),
                "coefficient": np.real(self.laurent),
            }
        )


def snap_rectangle(mu, rho, rtol=degenerate_rtol):
    """
    Round nearly degenerate rectangles onto the segment limits.

    A real extent ``mu - 1`` or a half height `rho` below
    ``rtol * max(mu, rho)`` is set to zero. Enclosures of exactly
    preconditioned problems land there up to rounding.

    Examples
    --------
    >>> snap_rectangle(1 + 5e-15, 2000.0)
    (1.0, 2000.0)
    """
    scale = max(mu, rho)
    if mu - 1 <= rtol * scale:
        mu = 1.0
    if rho <= rtol * scale:
        rho = 0.0
    return mu, rho


def exterior_map(mu, rho, truncation=200):
    """
    Build the exterior map of the normalized rectangle ``[1, mu] + i[-rho, rho]``.

    Segments and points use the analytic maps, nearly degenerate rectangles
    are snapped onto them with `snap_rectangle`.

    Parameters
    ----------
    mu : float
        At least 1.
    rho : float
        At least 0.
    truncation : int, optional
        Number of negative Laurent coefficients. The default is 200.

    Returns
    -------
    ExteriorMapRectangle
    """
    if not mu >= 1 or not rho >= 0:
        raise ValueError(f"Expected mu >= 1 and rho >= 0, got mu = {mu}, rho = {rho}.")
    mu, rho = snap_rectangle(mu, rho)
    c = (mu + 1) / 2
    half = (mu - 1) / 2
    if mu == 1 and rho == 0:
        return ExteriorMapRectangle(
            mu, rho, "point", np.array([0.0, 1.0]), np.nan, np.inf, 0.0
        )
    if rho == 0:
        return ExteriorMapRectangle.from_laurent(
            [half / 2, c, half / 2], "segment", mu, rho
        )
    if mu == 1:
        return ExteriorMapRectangle.from_laurent(
            [rho / 2, 1.0, -rho / 2], "vertical-segment", mu, rho
        )
    alpha = solve_parameter(mu, rho)
    scale = rho / (2 * _side_integral(*_parameters(alpha)))
    laurent = _laurent_rectangle(mu, rho, alpha, scale, truncation)
    m = ExteriorMapRectangle(mu, rho, "rectangle", laurent, alpha)
    phi0, gamma = gamma_phi0(m)
    logger.debug(
        f" Exterior map of [1, {mu}] x i[-{rho}, {rho}]: alpha = {alpha:.12f}, "
        f"c1 = {scale:.12f}, gamma = {gamma:.12f}"
    )
    return replace(m, phi0=phi0, gamma=gamma)


def disk_map(center, radius):
    """
    Map ``psi(w) = center + radius w`` onto the exterior of a disk.
    """
    return ExteriorMapRectangle.from_laurent([radius, center], "disk")


def ellipse_map(center, focal, sigma):
    """
    Map ``psi(w) = c + d/2 (sigma w + 1/(sigma w))`` onto the exterior of an
    ellipse with foci ``c +- d``.
    """
    return ExteriorMapRectangle.from_laurent(
        [focal * sigma / 2, center, focal / (2 * sigma)], "ellipse"
    )


def psi_prime(emap, w):
    """
    Evaluate the derivative of the exterior map.
    """
    w = np.asarray(w, dtype=complex)
    if emap.kind == "rectangle":
        res = emap.scale_c1 * np.ones_like(w)
        for wk in emap.prevertices:
            res = res * np.sqrt(1 - wk / w)
        return res
    c = emap.laurent
    j = np.arange(1, len(c) - 1)
    return c[0] - np.sum(
        (j * c[2:])[:, None] * w.ravel()[None, :] ** (-j[:, None] - 1), axis=0
    ).reshape(w.shape)


def _laurent_eval(emap, w):
    c = emap.laurent
    w = np.asarray(w, dtype=complex)
    res = c[0] * w + c[1]
    for j in range(1, len(c) - 1):
        res = res + c[j + 1] * w ** (-j)
    return res


def _references(emap):
    """
    Angles on the unit circle with known images: the midpoints of the sides.
    """
    mu, rho, c = emap.mu, emap.rho, emap.center
    return {
        0.0: mu + 0j,
        np.pi / 2: c + 1j * rho,
        np.pi: 1 + 0j,
        3 * np.pi / 2: c - 1j * rho,
        2 * np.pi: mu + 0j,
    }


def _arc_integral(emap, ta, tb):
    """
    Integrate psi' along the unit circle from angle ta to tb.

    The path is split at prevertices, where the Jacobi weight absorbs the
    square root zeros of the integrand.
    """
    pre = np.mod(np.angle(emap.prevertices), 2 * np.pi)
    lo, hi = min(ta, tb), max(ta, tb)
    inner = sorted(p for p in pre if lo + 1e-14 < p < hi - 1e-14)
    points = [ta] + (inner if tb > ta else inner[::-1]) + [tb]

    def is_pre(t):
        return np.any(np.abs(np.exp(1j * t) - emap.prevertices) < 1e-13)

    def f(t):
        z = np.exp(1j * t)
        return psi_prime(emap, z) * 1j * z

    res = 0j
    for a, b in zip(points[:-1], points[1:]):
        res += _integrate(f, a, b, is_pre(a), is_pre(b))
    return res


def _radial_integral(emap, theta, r):
    """
    Integrate psi' along the ray from ``exp(i theta)`` to ``r exp(i theta)``.
    """
    e = np.exp(1j * theta)
    singular = np.any(np.abs(e - emap.prevertices) < 1e-13)

    def f(s):
        return psi_prime(emap, s * e) * e

    return _integrate(f, 1.0, r, sing_a=singular, right=False)


def _psi_scalar(emap, w):
    r = abs(w)
    theta = np.mod(np.angle(w), 2 * np.pi)
    refs = _references(emap)
    t_ref = min(refs, key=lambda t: abs(t - theta))
    value = refs[t_ref] + _arc_integral(emap, t_ref, theta)
    if r > 1:
        value += _radial_integral(emap, theta, r)
    return value


def psi_eval(emap, w):
    """
    Evaluate the exterior map at points on or outside the unit circle.

    For rectangles, the Schwarz-Christoffel integral is evaluated by
    composite Gauss-Jacobi quadrature along an arc of the unit circle from
    the nearest side midpoint, followed by a radial segment.

    Parameters
    ----------
    emap : ExteriorMapRectangle
    w : complex or array_like
        Points with ``|w| >= 1``.

    Returns
    -------
    complex or numpy.ndarray
    """
    w_arr = np.asarray(w, dtype=complex)
    if np.any(np.abs(w_arr) < 1 - 1e-14):
        raise InsideDisk("The exterior map is defined for |w| >= 1 only.")
    if emap.kind != "rectangle":
        res = _laurent_eval(emap, w_arr)
    else:
        res = np.array([_psi_scalar(emap, x) for x in w_arr.ravel()]).reshape(
            w_arr.shape
        )
    return res if w_arr.ndim else complex(res)


def corner_errors(emap):
    """
    Get the distances of the images of the prevertices to the exact corners,
    relative to the rectangle diameter.
    """
    images = psi_eval(emap, emap.prevertices)
    diam = np.hypot(emap.mu - 1, 2 * emap.rho)
    return np.abs(images - emap.corners) / diam


def gamma_phi0(emap):
    """
    Compute ``|phi(0)|`` and ``gamma = 1/|phi(0)|``.

    The preimage of the origin lies on the negative real axis. For
    rectangles ``psi(-r) = 0`` is solved by Newton's method with a
    bisection fallback, finite Laurent maps use polynomial roots.

    Returns
    -------
    phi0, gamma : float
    """
    if emap.kind == "point":
        return np.inf, 0.0
    if emap.kind != "rectangle":
        c = np.asarray(emap.laurent, dtype=complex)
        # w^J psi(w) is a polynomial with coefficients c in descending powers
        roots = np.roots(c)
        outside = roots[np.abs(roots) > 1 + 1e-12]
        if not len(outside):
            raise NewtonDivergence("The origin is not exterior to the set.")
        phi0 = float(np.abs(outside).max())
        return phi0, 1 / phi0

    def f(r):
        return (psi_eval(emap, -r)).real

    def fprime(r):
        return -(psi_prime(emap, -r)).real

    r0 = max(emap.center / emap.scale_c1, 1 + 1e-3)
    root = None
    try:
        root = scipy.optimize.newton(f, r0, fprime=fprime, tol=1e-14, maxiter=50)
        if not root > 1 or not abs(f(root)) <= 1e-10 * emap.mu:
            root = None
    except (RuntimeError, OverflowError):
        root = None
    if root is None:
        logger.warning(" Newton iteration for phi(0) failed, falling back to bisection.")
        hi = 2 * r0
        for _ in range(60):
            if f(hi) < 0:
                break
            hi *= 2
        else:
            raise NewtonDivergence("Could not bracket the preimage of the origin.")
        root = scipy.optimize.brentq(f, 1.0, hi, xtol=1e-14)
    return float(root), float(1 / root)


@dataclass(frozen=True)
class FaberSet:
    """
    Faber polynomials ``F_0, ..., F_k_max`` of an exterior map.

    ``polynomials[k]`` holds the coefficients of ``F_k`` in ascending powers
    of z and ``at_zero[k]`` the modulus ``|F_k(0)|``.
    """

    k_max: int
    polynomials: np.ndarray = field(repr=False)
    at_zero: np.ndarray = field(repr=False)
    laurent: np.ndarray = field(repr=False)

    def evaluate(self, z, k):
        """
        Evaluate ``F_k`` at z by the Faber recurrence.
        """
        return _faber_values(self.laurent, np.asarray(z, dtype=complex), k)[k]


def _negative_coefficients(c, k_max):
    cneg = np.zeros(k_max + 1, dtype=complex)
    avail = min(len(c) - 2, k_max)
    cneg[1 : avail + 1] = c[2 : avail + 2]
    return cneg


def _faber_values(c, z, k_max):
    c1, c0 = c[0], c[1]
    cneg = _negative_coefficients(c, k_max)
    F = [np.ones_like(z, dtype=complex)]
    for n in range(k_max):
        acc = (z - c0) * F[n] - n * cneg[n]
        for j in range(1, n + 1):
            if cneg[j] != 0:
                acc = acc - cneg[j] * F[n - j]
        F.append(acc / c1)
    return F


def faber_polys(emap, k_max):
    """
    Compute the Faber polynomials of an exterior map.

    Uses the recurrence generated by
    ``psi'(w) / (psi(w) - z) = sum_k F_k(z) w^(-k-1)``:

        c_1 F_{n+1} = (z - c_0) F_n - sum_{j=1}^n c_{-j} F_{n-j} - n c_{-n}.

    The values at zero are computed by the same recurrence on scalars, the
    coefficient arrays may overflow for large degrees.

    Parameters
    ----------
    emap : ExteriorMapRectangle
    k_max : int

    Returns
    -------
    FaberSet
    """
    if emap.kind == "point":
        raise DegenerateRectangle("Faber polynomials of a point are undefined.")
    if emap.truncation < k_max + 5:
        raise TruncationTooShort(
            f"Laurent expansion has {emap.truncation} terms, "
            f"need at least {k_max + 5} for k_max = {k_max}."
        )
    c = np.asarray(emap.laurent, dtype=complex)
    c1, c0 = c[0], c[1]
    cneg = _negative_coefficients(c, k_max)

    P = np.zeros((k_max + 1, k_max + 1), dtype=complex)
    P[0, 0] = 1
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(k_max):
            acc = np.zeros(k_max + 1, dtype=complex)
            acc[1:] = P[n, :-1]
            acc -= c0 * P[n]
            acc[0] -= n * cneg[n]
            for j in range(1, n + 1):
                acc -= cneg[j] * P[n - j]
            P[n + 1] = acc / c1
    if np.allclose(P.imag, 0, equal_nan=True):
        P = P.real
    with np.errstate(over="ignore"):
        at_zero = np.abs(np.array(_faber_values(c, np.complex128(0), k_max)))
    return FaberSet(k_max, P, at_zero, c)

#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Krylopy bounds module.

This module contains upper bounds for the min-max problem

    K_k = min_{q in P_k, q(0) = 1} max_{z in Omega} |q(z)|

on normalized rectangles ``Omega = [1, mu] + i[-rho, rho]``, the composite
best bound and a linear programming oracle for small k.
"""

import logging
from dataclasses import dataclass, field

import dask
import numpy as np
import pandas as pd
import scipy.optimize
import xarray as xr

from krylopy.common import DegenerateRectangle
from krylopy.conformal import (
    exterior_map,
    faber_polys,
    snap_rectangle,
    truncation_margin,
)

logger = logging.getLogger(__name__)

methods = ["elman", "disk", "disk-segment", "ellipse", "conformal", "faber"]
crouzeix_palencia = 1 + np.sqrt(2)


def _check(mu, rho):
    if not mu >= 1 or not rho >= 0:
        raise ValueError(f"Expected mu >= 1 and rho >= 0, got mu = {mu}, rho = {rho}.")


def _k(k):
    k = np.asarray(k)
    if np.any(k < 0):
        raise ValueError("Polynomial degrees must be non-negative.")
    return k


def elman_bound(mu, rho, k):
    """
    Bound ``(1 - 1/(4 (mu^2 + rho^2)))^(k/2)``.

    Examples
    --------
    >>> round(elman_bound(2, 4, 1), 4)
    0.9937
    """
    _check(mu, rho)
    return (1 - 1 / (4 * (mu**2 + rho**2))) ** (_k(k) / 2)


def disk_params(mu, rho):
    """
    Get the center and radius of the optimal disk through the corners and
    whether the disk bound applies.
    """
    return {
        "a": 1 + rho**2,
        "r": rho * np.sqrt(rho**2 + 1),
        "applicable": bool(mu <= 2 * rho**2 + 1),
    }


def disk_bound(mu, rho, k):
    """
    Bound ``(rho / sqrt(1 + rho^2))^k`` from the enclosing disk.

    Returns NaN where the disk does not contain the rectangle, that is for
    ``mu > 2 rho^2 + 1``.
    """
    _check(mu, rho)
    k = _k(k)
    if not disk_params(mu, rho)["applicable"]:
        return np.full(np.shape(k), np.nan) if np.ndim(k) else np.nan
    return (rho / np.sqrt(1 + rho**2)) ** k


def disk_segment_params(mu, rho):
    beta = np.arccos(1 / np.sqrt(mu**2 + rho**2))
    gamma = 2 * np.sin(beta / (4 - 2 * beta / np.pi))
    return {"beta": beta, "gamma_beta": gamma}


def _capacity_bound(gamma, k):
    with np.errstate(divide="ignore"):
        factor = np.minimum(2 + gamma, 2 / (1 - gamma ** (k + 1)))
    return factor * gamma**k


def disk_segment_bound(mu, rho, k):
    """
    Bound ``min{2 + g, 2/(1 - g^(k+1))} g^k`` from the enclosing disk segment
    with ``g = 2 sin(beta / (4 - 2 beta/pi))`` and
    ``cos(beta) = 1/sqrt(mu^2 + rho^2)``.
    """
    _check(mu, rho)
    return _capacity_bound(disk_segment_params(mu, rho)["gamma_beta"], _k(k))


@dataclass(frozen=True)
class EllipseParams:
    """
    Ellipse with center c through the corners of the rectangle.

    The ellipse has horizontal semi-axis `alpha` and vertical semi-axis
    `beta_ell`. Its semi-major axis `a_ell` and focal distance `d` are
    imaginary for vertical ellipses, so that ``a_ell / d`` is real.
    """

    c: float
    alpha: float
    beta_ell: float
    a_ell: complex
    d: complex
    orientation: str
    rate: float

    def boundary_residual(self, z):
        """
        Residual of the Cartesian equation of the ellipse at points z.
        """
        z = np.asarray(z)
        with np.errstate(divide="ignore", invalid="ignore"):
            yy = np.where(self.beta_ell > 0, (z.imag / self.beta_ell) ** 2, 0)
        return ((z.real - self.c) / self.alpha) ** 2 + yy - 1

    def to_dict(self):
        return {
            "c": self.c,
            "alpha": self.alpha,
            "beta_ell": self.beta_ell,
            "a_ell": self.a_ell,
            "d": self.d,
            "orientation": self.orientation,
            "rate": self.rate,
        }


def ellipse_through_corners(mu, rho, alpha):
    """
    Get the ellipse centered at ``(mu + 1)/2`` with horizontal semi-axis
    `alpha` passing through the corners of the rectangle.
    """
    c = (mu + 1) / 2
    half = (mu - 1) / 2
    if rho == 0:
        beta = 0.0
    else:
        beta = rho / np.sqrt(1 - half**2 / alpha**2)
    if beta > alpha:
        a_ell = 1j * beta
        d = 1j * np.sqrt(beta**2 - alpha**2)
        orientation = "vertical"
    else:
        a_ell = alpha + 0j
        d = np.sqrt(alpha**2 - beta**2) + 0j
        orientation = "horizontal"
    rate = (alpha + beta) / (c + np.sqrt(c**2 - alpha**2 + beta**2))
    return EllipseParams(c, alpha, beta, a_ell, d, orientation, rate)


def alpha_grid(mu, n_grid=100):
    """
    Horizontal semi-axes ``(mu - 1)/2 + j/n_grid`` for ``j = 1, ..., n_grid``
    that keep the origin outside of the ellipse.
    """
    lo, hi = (mu - 1) / 2, (mu + 1) / 2
    grid = lo + (hi - lo) * np.arange(1, n_grid + 1) / n_grid
    return grid[grid < hi]


def optimal_ellipse(mu, rho, n_grid=100):
    """
    Find the circumscribing ellipse with the best asymptotic rate.

    Parameters
    ----------
    mu : float
        Greater than 1.
    rho : float
    n_grid : int, optional
        Number of grid values for the horizontal semi-axis.

    Returns
    -------
    EllipseParams
    """
    _check(mu, rho)
    mu, rho = snap_rectangle(mu, rho)
    if not mu > 1:
        raise DegenerateRectangle(
            "The rectangle is a vertical segment, use the disk bound instead."
        )
    if rho == 0:
        return ellipse_through_corners(mu, rho, (mu - 1) / 2)
    candidates = [ellipse_through_corners(mu, rho, a) for a in alpha_grid(mu, n_grid)]
    best = min(candidates, key=lambda e: e.rate)
    logger.debug(f" Optimal ellipse for mu = {mu}, rho = {rho}: {best}")
    return best


def _log_chebyshev(t, k):
    """
    Get ``log|C_k(t)|`` for the Chebyshev polynomial C_k via ``v = t + sqrt(t^2 - 1)``.
    """
    t = complex(t)
    s = np.sqrt(t * t - 1)
    v = t + s if abs(t + s) >= abs(t - s) else t - s
    logv = np.log(v)
    k = np.asarray(k, dtype=float)
    with np.errstate(over="ignore", under="ignore"):
        tail = np.log(np.abs(1 + np.exp(-2 * k * logv)))
    return k * logv.real + tail - np.log(2)


def ellipse_bound(mu, rho, k, params=None):
    """
    Bound ``|C_k(a/d)| / |C_k(c/d)|`` of the scaled Chebyshev polynomial on
    the ellipse `params`.

    The computation runs in log space, so large k does not overflow.
    """
    params = optimal_ellipse(mu, rho) if params is None else params
    k = _k(k)
    d = params.d
    if d == 0:
        # circle: the scaled Chebyshev polynomial is a monomial
        return (params.alpha / params.c) ** k
    return np.exp(
        _log_chebyshev(params.a_ell / d, k) - _log_chebyshev(params.c / d, k)
    )


def chebyshev_hat(z, params, k):
    """
    Evaluate the scaled Chebyshev polynomial ``C_k((c - z)/d) / C_k(c/d)``,
    normalized to 1 at the origin.
    """
    z = np.asarray(z, dtype=complex)
    d = params.d

    def cheb(t):
        s = np.sqrt(t * t - 1)
        v = np.where(np.abs(t + s) >= np.abs(t - s), t + s, t - s)
        return (v**k + v ** (-k)) / 2

    return cheb((params.c - z) / d) / cheb(np.asarray(params.c / d))


def ellipse_rates(mu, rho, n_grid=100):
    """
    Get the asymptotic rate of each grid ellipse against the distance
    ``c - alpha`` of the ellipse to the origin.
    """
    rows = [ellipse_through_corners(mu, rho, a).to_dict() for a in alpha_grid(mu, n_grid)]
    df = pd.DataFrame(rows)
    df.insert(0, "distance", df.c - df.alpha)
    return df


def conformal_bound(mu, rho, k, emap=None):
    """
    Bound ``min{2 + g, 2/(1 - g^(k+1))} g^k`` with the capacity ratio
    ``g = 1/|phi(0)|`` of the exterior map.
    """
    emap = exterior_map(mu, rho) if emap is None else emap
    return _capacity_bound(emap.gamma, _k(k))


def lower_bound(mu, rho, k, emap=None):
    """
    Lower bound ``g^k`` of the min-max value.
    """
    emap = exterior_map(mu, rho) if emap is None else emap
    return emap.gamma ** _k(k)


def faber_bound(mu, rho, k, emap=None, faber=None):
    """
    Bound ``2 / |F_k(0)|`` from the Faber polynomials of the rectangle.
    """
    k = _k(k)
    if faber is None:
        k_max = int(np.max(k))
        if emap is None:
            emap = exterior_map(mu, rho, truncation=k_max + truncation_margin)
        if emap.kind == "point":
            return np.where(k > 0, 0.0, 2.0)
        faber = faber_polys(emap, k_max)
    with np.errstate(divide="ignore"):
        return 2 / faber.at_zero[k]


@dataclass
class BoundCurve:
    """
    Bound values for polynomial degrees ``k = 0, ..., k_max``.

    ``raw`` keeps the values returned by the method, ``values`` are clipped
    at 1 and made non-increasing. Absent points are NaN.
    """

    method: str
    raw: np.ndarray
    values: np.ndarray = None
    params: dict = field(default_factory=dict)
    components: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.raw = np.asarray(self.raw, dtype=float)
        if self.values is None:
            self.values = postprocess(self.raw)

    @property
    def k_max(self):
        return len(self.raw) - 1

    @property
    def k(self):
        return np.arange(len(self.raw))

    def to_dataarray(self):
        return xr.DataArray(
            self.values, coords={"k": self.k}, dims="k", name=self.method
        )


def postprocess(raw):
    """
    Clip values at 1 and replace increases by the previous value.
    """
    values = np.minimum(np.asarray(raw, dtype=float), 1.0)
    if len(values) and np.isnan(values).all():
        return values
    values = np.fmin.accumulate(values)
    return values


def residual_bound(curve):
    """
    Get the GMRES residual bound ``(1 + sqrt 2) K_k`` for a bound curve.
    """
    return crouzeix_palencia * curve.values


def bound_curve(method, mu, rho, k_max, n_grid=100, emap=None):
    """
    Evaluate one bound for ``k = 0, ..., k_max``.

    Parameters
    ----------
    method : str
        One of "elman", "disk", "disk-segment", "ellipse", "conformal" and
        "faber".
    mu, rho : float
        Normalized rectangle.
    k_max : int
    n_grid : int, optional
        Grid size for the ellipse search.
    emap : krylopy.conformal.ExteriorMapRectangle, optional
        Precomputed exterior map with enough Laurent coefficients.

    Returns
    -------
    BoundCurve
    """
    _check(mu, rho)
    mu, rho = snap_rectangle(mu, rho)
    k = np.arange(k_max + 1)
    if method == "elman":
        return BoundCurve(method, elman_bound(mu, rho, k))
    if method == "disk":
        params = disk_params(mu, rho)
        if not params["applicable"]:
            logger.info(f" Disk bound not applicable for mu = {mu} > 2 rho^2 + 1.")
        return BoundCurve(method, disk_bound(mu, rho, k), params=params)
    if method == "disk-segment":
        return BoundCurve(
            method, disk_segment_bound(mu, rho, k), params=disk_segment_params(mu, rho)
        )
    if method == "ellipse":
        if mu == 1:
            logger.info(" Ellipse bound skipped for a vertical segment.")
            return BoundCurve(method, np.full(k_max + 1, np.nan))
        params = optimal_ellipse(mu, rho, n_grid)
        return BoundCurve(method, ellipse_bound(mu, rho, k, params), params=params.to_dict())
    if method in ["conformal", "faber"]:
        if emap is None:
            emap = exterior_map(mu, rho, truncation=k_max + truncation_margin)
        params = {"gamma": emap.gamma, "alpha_pre": emap.alpha_pre, "c1": emap.scale_c1}
        if method == "conformal":
            return BoundCurve(method, conformal_bound(mu, rho, k, emap), params=params)
        return BoundCurve(method, faber_bound(mu, rho, k, emap), params=params)
    raise ValueError(f"method must be one of {methods}, got '{method}'.")


def best_curve(mu, rho, k_max, methods=methods, n_grid=100):
    """
    Get the pointwise minimum of several post-processed bound curves.

    Parameters
    ----------
    mu, rho : float
        Normalized rectangle.
    k_max : int
    methods : list of str, optional
        The default uses all methods.
    n_grid : int, optional

    Returns
    -------
    BoundCurve
        Curve with method "best"; the individual curves are kept in
        ``components``.

    Examples
    --------
    >>> curve = best_curve(2, 4, 10, ["disk", "ellipse"])
    >>> round(curve.values[3], 4)
    0.9007
    """
    if not len(methods):
        raise ValueError("At least one method is required.")
    emap = None
    if "conformal" in methods or "faber" in methods:
        emap = exterior_map(mu, rho, truncation=k_max + truncation_margin)
    tasks = [dask.delayed(bound_curve)(m, mu, rho, k_max, n_grid, emap) for m in methods]
    curves = dask.compute(*tasks, scheduler="threads")
    components = {c.method: c for c in curves}
    with np.errstate(invalid="ignore"):
        values = np.fmin.reduce([c.values for c in curves])
        raw = np.fmin.reduce([c.raw for c in curves])
    params = {m: c.params for m, c in components.items()}
    return BoundCurve("best", raw, values, params, components)


def bound_dataset(curve):
    """
    Convert a best curve with components to a Dataset over (method, k).
    """
    curves = list(curve.components.values())
    if curve.method == "best":
        curves.append(curve)
    k = curve.k
    names = [c.method for c in curves]
    return xr.Dataset(
        {
            "raw": (("method", "k"), np.stack([c.raw for c in curves])),
            "clipped": (("method", "k"), np.stack([c.values for c in curves])),
        },
        coords={"method": names, "k": k},
    )


def bounds_dataframe(ds):
    """
    Get the columns k, method, raw and clipped ordered by method and k.
    """
    df = ds.to_dataframe().reset_index()
    order = {m: i for i, m in enumerate(ds.method.values)}
    df = df.sort_values(["method", "k"], key=lambda s: s.map(order) if s.name == "method" else s)
    return df[["k", "method", "raw", "clipped"]].reset_index(drop=True)


def enclosure_geometry(mu, rho, n_grid=100):
    """
    Get the disk, disk segment and optimal ellipse enclosing the rectangle.
    """
    geometry = {"disk": disk_params(mu, rho), "disk-segment": disk_segment_params(mu, rho)}
    if mu > 1:
        geometry["ellipse"] = optimal_ellipse(mu, rho, n_grid).to_dict()
    return geometry


def ellipse_family_curves(mu, rho, k_max, n_ellipses=5, n_grid=100):
    """
    Get ellipse bound curves for evenly chosen grid ellipses and the optimal one.

    Returns
    -------
    xarray.DataArray
        Dimensions ("alpha", "k").
    """
    grid = alpha_grid(mu, n_grid)
    pick = grid[np.linspace(0, len(grid) - 1, n_ellipses).round().astype(int)]
    best = optimal_ellipse(mu, rho, n_grid)
    alphas = np.unique(np.append(pick, best.alpha))
    k = np.arange(k_max + 1)
    data = [ellipse_bound(mu, rho, k, ellipse_through_corners(mu, rho, a)) for a in alphas]
    return xr.DataArray(
        np.stack(data),
        coords={"alpha": alphas, "k": k},
        dims=("alpha", "k"),
        attrs={"optimal_alpha": best.alpha},
    )


def _upper_boundary(mu, rho, n_boundary):
    """
    Sample the boundary of the rectangle in the closed upper half plane.
    """
    right, top = rho, mu - 1
    length = 2 * right + top
    s = np.linspace(0, length, n_boundary)
    s = np.unique(np.concatenate([s, [right, right + top]]))
    z = np.where(
        s <= right,
        mu + 1j * s,
        np.where(s <= right + top, mu - (s - right) + 1j * rho, 1 + 1j * (length - s)),
    )
    return z


def minmax_oracle(mu, rho, k, n_boundary=512, n_rot=64, real_coefficients=True, tol=1e-8):
    """
    Solve the min-max problem on sampled boundary points by linear programming.

    The modulus constraint ``|q(z)| <= t`` is replaced by cuts
    ``Re(exp(i theta) q(z)) <= t``. Starting from `n_rot` uniform angles, the
    angle of the largest violation is added for each point until the gap
    between t and the sampled maximum falls below `tol`.

    Parameters
    ----------
    mu, rho : float
        Normalized rectangle.
    k : int
        Polynomial degree, at most 8.
    n_boundary : int, optional
    n_rot : int, optional
    real_coefficients : bool, optional
        Whether q has real coefficients, which is optimal by the symmetry of
        the rectangle. The default is True.
    tol : float, optional

    Returns
    -------
    float
        The maximum of ``|q|`` over the samples for the computed q.
    """
    _check(mu, rho)
    if k == 0:
        return 1.0
    if k > 8:
        raise ValueError(f"The oracle supports k <= 8, got {k}.")
    mu, rho = snap_rectangle(mu, rho)
    if mu == 1 and rho == 0:
        return 0.0

    z = _upper_boundary(mu, rho, n_boundary)
    if not real_coefficients:
        z = np.concatenate([z, np.conj(z[z.imag > 0])])
    c, s = (mu + 1) / 2, max((mu - 1) / 2, rho)
    U = ((z - c) / s)[:, None] ** np.arange(k + 1)
    u0 = (-c / s) ** np.arange(k + 1)

    if real_coefficients:
        basis = U
        A_eq, b_eq = np.append(u0, 0)[None, :], [1.0]
    else:
        basis = np.hstack([U, 1j * U])
        u0c = np.concatenate([u0, 1j * u0])
        A_eq = np.vstack([np.append(u0c.real, 0), np.append(u0c.imag, 0)])
        b_eq = [1.0, 0.0]
    nvar = basis.shape[1]
    cost = np.zeros(nvar + 1)
    cost[-1] = 1

    def cuts(rows, theta):
        block = np.real(np.exp(1j * theta)[:, None] * basis[rows])
        return np.hstack([block, -np.ones((len(rows), 1))])

    theta0 = 2 * np.pi * np.arange(n_rot) / n_rot
    rows = np.repeat(np.arange(len(z)), n_rot)
    A_ub = cuts(rows, np.tile(theta0, len(z)))
    value = np.inf
    for it in range(100):
        res = scipy.optimize.linprog(
            cost,
            A_ub=A_ub,
            b_ub=np.zeros(len(A_ub)),
            A_eq=A_eq,
            b_eq=b_eq,
            bounds=[(None, None)] * (nvar + 1),
            method="highs",
        )
        if res.status != 0:
            raise RuntimeError(f"Oracle linear program failed: {res.message}")
        q = basis @ res.x[:-1]
        mod = np.abs(q)
        value, t = mod.max(), res.x[-1]
        if value - t <= tol * max(value, 1):
            break
        violated = np.flatnonzero(mod > t + tol * max(value, 1))
        A_ub = np.vstack([A_ub, cuts(violated, -np.angle(q[violated]))])
    logger.debug(f" Oracle for k = {k} finished after {it + 1} rounds: {value:.10f}")
    return float(value)

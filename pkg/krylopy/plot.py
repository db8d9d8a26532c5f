#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Krylopy plot module.

This module contains the static SVG charts written by the command line
interface.
"""

import logging
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

logger = logging.getLogger(__name__)


def _save(fig, path):
    path = Path(path)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    logger.info(f" Wrote figure {path}.")
    return path


def plot_bounds(ds, path, title=None):
    """
    Plot the clipped bound curves of a bound dataset with a log-scale y axis.

    Parameters
    ----------
    ds : xarray.Dataset
        As returned by :func:`krylopy.bounds.bound_dataset`.
    path : str or pathlib.Path
    title : str, optional
    """
    fig, ax = plt.subplots()
    for method in ds.method.values:
        values = ds.clipped.sel({"method": method})
        if values.isnull().all():
            continue
        style = "k-" if method == "best" else "-"
        ax.semilogy(ds.k, values.where(values > 0), style, label=str(method))
    ax.set_xlabel("k")
    ax.set_ylabel("bound for K_k")
    if title:
        ax.set_title(title)
    ax.legend()
    return _save(fig, path)


def _draw_rectangle(ax, rect, label, style):
    corners = rect.corners
    z = np.append(corners, corners[0])
    ax.plot(z.real, z.imag, style, label=label)


def plot_fov(sample, path, rectangles=None, points=None):
    """
    Plot a field of values boundary together with enclosing rectangles.

    Parameters
    ----------
    sample : krylopy.fov.FovSample
    path : str or pathlib.Path
    rectangles : dict, optional
        Mapping of labels to :class:`krylopy.fov.Rectangle`.
    points : array_like, optional
        Additional points, e.g. eigenvalues, drawn as markers.
    """
    fig, ax = plt.subplots()
    z = np.append(sample.boundary_points, sample.boundary_points[:1])
    ax.plot(z.real, z.imag, "k-", label="field of values")
    styles = iter(["r--", "b-.", "g:", "m--"])
    for label, rect in (rectangles or {}).items():
        _draw_rectangle(ax, rect, label, next(styles, "--"))
    if points is not None:
        points = np.asarray(points)
        ax.plot(points.real, points.imag, "x", ms=3, label="eigenvalues")
    ax.set_xlabel("Re z")
    ax.set_ylabel("Im z")
    ax.legend()
    return _save(fig, path)


def plot_convergence(traces, path, bounds=None):
    """
    Plot relative residual histories.

    Parameters
    ----------
    traces : dict
        Mapping of labels to :class:`krylopy.solvers.GmresTrace`.
    path : str or pathlib.Path
    bounds : dict, optional
        Mapping of labels to residual bound arrays over k, drawn dashed.
    """
    fig, ax = plt.subplots()
    for label, trace in traces.items():
        ax.semilogy(trace.relative_residuals, label=label)
    for label, values in (bounds or {}).items():
        values = np.asarray(values, dtype=float)
        ax.semilogy(np.where(values > 0, values, np.nan), "--", label=label)
    ax.set_xlabel("iteration k")
    ax.set_ylabel("relative residual")
    ax.legend()
    return _save(fig, path)


def plot_spectrum(spectra, path):
    """
    Plot the moduli ``|lambda_j|`` against j for several pencils.

    Parameters
    ----------
    spectra : dict
        Mapping of labels to eigenvalue arrays sorted by decreasing modulus.
    """
    fig, ax = plt.subplots()
    for label, values in spectra.items():
        moduli = np.abs(np.asarray(values))
        j = np.arange(1, len(moduli) + 1)
        ax.semilogy(j, np.where(moduli > 0, moduli, np.nan), ".", label=label)
    ax.set_xlabel("j")
    ax.set_ylabel("|lambda_j|")
    ax.legend()
    return _save(fig, path)

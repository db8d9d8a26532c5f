#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Created on Wed Oct 14 15:48:03 2026.

@author: fabian
"""

import numpy as np
import pandas as pd
import pytest
from numpy.testing import assert_allclose

from krylopy.common import NonPositiveRealPart, NotPd
from krylopy.deflation import build_spectral_space
from krylopy.fov import (
    NormalizedRectangle,
    Rectangle,
    enclosure_omega1,
    enclosure_omega2,
    enclosure_tau,
    fov_boundary,
    normalize,
    preconditioned_fov,
    sample_fov,
    spectral_data,
)
from krylopy.linalg import InnerProduct
from krylopy.problem import (
    CdrProblemSpec,
    build_cdr,
    build_preconditioner,
    problem_from_matrix,
)


@pytest.fixture(scope="module")
def cdr():
    problem = build_cdr(CdrProblemSpec(nx=8))
    return problem, build_preconditioner(problem, "jacobi-m")


def test_rectangle():
    rect = Rectangle(0.21, 3.0, 48.9)
    assert len(rect.corners) == 4
    assert rect.contains(1 + 10j)
    assert not rect.contains(0.1)
    assert not rect.contains(1 + 50j)
    assert_allclose(rect.scale(2).re_max, 6.0)
    assert list(rect.to_series().index) == ["re_min", "re_max", "im_half"]

    with pytest.raises(ValueError):
        Rectangle(2, 1, 0)

    with pytest.raises(ValueError):
        Rectangle(1, 2, -1)

    with pytest.raises(NonPositiveRealPart):
        Rectangle(-0.5, 2, 1)

    with pytest.raises(ValueError):
        rect.scale(0)


def test_normalize():
    shape = normalize(Rectangle(0.21, 3.0, 48.9))
    assert_allclose(shape.mu, 14.2857142857, rtol=1e-10)
    assert_allclose(shape.rho, 232.857142857, rtol=1e-10)
    back = shape.to_rectangle()
    assert_allclose([back.re_min, back.re_max, back.im_half], [0.21, 3.0, 48.9])
    assert NormalizedRectangle(2, 4).to_rectangle() == Rectangle(1, 2, 4)

    with pytest.raises(NonPositiveRealPart):
        normalize(Rectangle(0, 1, 1))


def test_normal_matrix_fov():
    values = np.array([1 + 1j, 3 - 2j, 2 + 2j, 1.5])
    sample = fov_boundary(np.diag(values), n_angles=64)
    assert sample.weight == "euclidean"
    assert len(sample.theta) == 64
    # boundary of the convex hull of the eigenvalues
    assert np.all(sample.contains(values))
    assert not sample.contains(4.0)[0]
    assert_allclose(sample.support.max(), np.abs(values).max(), rtol=1e-2)
    df = sample.to_dataframe()
    assert list(df.columns) == ["theta", "re", "im"]

    with pytest.raises(ValueError):
        fov_boundary(np.diag(values), n_angles=4)


def test_weighted_fov():
    rng = np.random.default_rng(1)
    n = 12
    B = rng.standard_normal((n, n))
    G = rng.standard_normal((n, n))
    W = G @ G.T + n * np.eye(n)
    ip = InnerProduct.from_matrix(W)
    sample = fov_boundary(B, ip, n_angles=180)
    assert sample.weight == "weighted"

    X = rng.standard_normal((n, 50)) + 1j * rng.standard_normal((n, 50))
    quotients = np.array(
        [np.vdot(x, W @ (B @ x)) / np.vdot(x, W @ x) for x in X.T]
    )
    # finite angle sampling only gives an outer polygon
    assert np.all(sample.contains(quotients))
    assert np.all(sample.contains(sample_fov(B, ip, n_samples=50, rng=2)))


def test_enclosures_contain_fov(cdr):
    problem, setup = cdr
    sample = preconditioned_fov(problem, setup, n_angles=90)
    omega1 = enclosure_omega1(problem, setup)
    omega2 = enclosure_omega2(problem, setup)
    assert np.all(omega1.contains(sample.boundary_points))
    assert np.all(omega2.contains(sample.boundary_points))

    data = spectral_data(problem, setup)
    assert 0 < data.lambda_min <= data.lambda_max
    assert_allclose(omega1.im_half, data.rho_nh)
    assert_allclose(omega2.im_half, data.lambda_max * data.rho_minv_n)
    assert isinstance(data.to_series(), pd.Series)


def test_enclosure_tau_without_deflation(cdr):
    problem, setup = cdr
    omega1 = enclosure_omega1(problem, setup)
    omega2 = enclosure_omega2(problem, setup)
    hn = enclosure_tau(problem, setup, build_spectral_space(problem, setup, "hn", 0))
    mn = enclosure_tau(problem, setup, build_spectral_space(problem, setup, "minv-n", 0))
    assert_allclose(hn.im_half, omega1.im_half, rtol=1e-10)
    assert_allclose(mn.im_half, omega2.im_half, rtol=1e-10)

    deflated = enclosure_tau(
        problem, setup, build_spectral_space(problem, setup, "hn", 6)
    )
    assert deflated.im_half <= omega1.im_half
    assert deflated.re_min == omega1.re_min


def test_not_pd():
    b = np.ones(3)
    setup = build_preconditioner(problem_from_matrix(np.diag([1.0, 2.0, 3.0]), b))
    indefinite = problem_from_matrix(np.diag([-1.0, 2.0, 3.0]), b)
    with pytest.raises(NotPd):
        enclosure_omega1(indefinite, setup)

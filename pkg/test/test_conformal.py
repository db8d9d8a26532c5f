#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Created on Thu Oct 15 10:21:56 2026.

@author: fabian
"""

import numpy as np
import pytest
from numpy.polynomial import chebyshev, polynomial
from numpy.testing import assert_allclose
from scipy.special import gamma

from krylopy.common import DegenerateRectangle, InsideDisk, TruncationTooShort
from krylopy.conformal import (
    corner_errors,
    disk_map,
    ellipse_map,
    exterior_map,
    faber_polys,
    psi_eval,
    side_lengths,
    side_ratio,
    snap_rectangle,
    solve_parameter,
)
from krylopy.fov import Rectangle, normalize


@pytest.fixture(scope="module")
def square():
    return exterior_map(3, 1)


def test_square_map(square):
    capacity = 2 * gamma(0.25) ** 2 / (4 * np.pi**1.5)
    assert_allclose(capacity, 1.18034, atol=1e-5)
    assert_allclose(square.scale_c1, capacity, atol=1e-6)
    assert_allclose(square.alpha_pre, np.pi / 4, atol=1e-12)
    assert square.kind == "rectangle"
    # symmetry of the square kills c_-1 and c_-2
    assert_allclose(square.laurent[1], 2.0)
    assert_allclose(square.laurent[2:4], 0, atol=1e-12)


def test_side_ratio():
    assert_allclose(side_ratio(np.pi / 4), 1.0, rtol=1e-12)
    alpha = np.linspace(0.05, 1.5, 30)
    ratios = np.array([side_ratio(a) for a in alpha])
    assert np.all(np.diff(ratios) < 0)
    assert_allclose(side_ratio(solve_parameter(2, 4)), 1 / 8, rtol=1e-10)

    with pytest.raises(DegenerateRectangle):
        solve_parameter(1, 4)

    with pytest.raises(DegenerateRectangle):
        solve_parameter(2, 0)


def test_corner_errors(square):
    assert np.all(corner_errors(square) < 1e-8)
    assert np.all(corner_errors(exterior_map(2, 4)) < 1e-8)


def test_psi_matches_laurent_series(square):
    w = 1.5 * np.exp(1j * np.array([0.3, 1.2, 2.5, 4.0]))
    powers = 1 - np.arange(len(square.laurent))
    series = np.array([np.sum(square.laurent * x**powers) for x in w])
    assert_allclose(psi_eval(square, w), series, atol=1e-8)
    assert_allclose(psi_eval(square, 1.0), 3.0, atol=1e-10)
    assert_allclose(psi_eval(square, -1.0), 1.0, atol=1e-10)

    with pytest.raises(InsideDisk):
        psi_eval(square, 0.5)


def test_degenerate_maps():
    segment = exterior_map(2, 0)
    assert segment.kind == "segment"
    assert_allclose(segment.gamma, 3 - 2 * np.sqrt(2), rtol=1e-12)
    assert_allclose(segment.gamma, 0.17157, atol=1e-5)

    vertical = exterior_map(1, 4)
    assert vertical.kind == "vertical-segment"
    assert_allclose(vertical.gamma, 0.78078, atol=1e-5)
    assert_allclose(psi_eval(vertical, 1j), 1 + 4j)

    point = exterior_map(1, 0)
    assert point.kind == "point"
    assert point.gamma == 0

    with pytest.raises(DegenerateRectangle):
        faber_polys(point, 3)

    with pytest.raises(ValueError):
        exterior_map(0.5, 1)


def test_gamma_limits():
    thin = exterior_map(2, 0.01)
    assert_allclose(thin.gamma, 0.17157, atol=1e-2)
    assert thin.gamma > exterior_map(2, 0).gamma

    alphas = [exterior_map(mu, 1).alpha_pre for mu in [3, 1.5, 1.1, 1.001]]
    assert np.all(np.diff(alphas) > 0)
    assert alphas[-1] > 1.5
    assert alphas[-1] < np.pi / 2

    gammas = [exterior_map(2, rho).gamma for rho in [0.5, 2, 8]]
    assert np.all(np.diff(gammas) > 0)
    assert np.all(np.array(gammas) < 1)


def test_faber_disk():
    faber = faber_polys(disk_map(3, 1), 6)
    z = np.array([0.0, 1 + 1j, 2.5])
    for k in range(7):
        assert_allclose(faber.evaluate(z, k), (z - 3) ** k, rtol=1e-12)
    assert_allclose(faber.at_zero, 3.0 ** np.arange(7), rtol=1e-12)


def test_faber_ellipse():
    c, d, sigma = 3.0, 2.0, 2.5
    faber = faber_polys(ellipse_map(c, d, sigma), 8)
    z = np.array([0.0, 1.0 + 0.5j, 4.0])
    for k in range(1, 9):
        expected = 2 * sigma ** (-k) * chebyshev.chebval((z - c) / d, [0] * k + [1])
        assert_allclose(faber.evaluate(z, k), expected, rtol=1e-10)
        assert_allclose(polynomial.polyval(z, faber.polynomials[k]), expected, rtol=1e-7)


def test_faber_rectangle(square):
    faber = faber_polys(square, 20)
    z = np.array([0.0, 4 + 1j])
    for k in [1, 5, 10]:
        assert_allclose(
            polynomial.polyval(z, faber.polynomials[k]),
            faber.evaluate(z, k),
            rtol=1e-9,
        )
    assert_allclose(faber.at_zero, np.abs([faber.evaluate(0.0, k) for k in range(21)]))

    with pytest.raises(TruncationTooShort):
        faber_polys(exterior_map(3, 1, truncation=10), 8)


def test_laurent_dataframe(square):
    df = square.laurent_dataframe()
    assert list(df.columns) == ["power", "coefficient"]
    assert df.power.iloc[0] == 1
    assert len(df) == square.truncation + 2


def test_solvable_range():
    assert np.isfinite(side_ratio(np.pi / 2 - 1e-7))
    assert side_ratio(np.pi / 2 - 1e-7) > 0
    assert exterior_map(3, 1).kind == "rectangle"
    emap = exterior_map(2, 4)
    assert_allclose(side_lengths(emap.alpha_pre, emap.scale_c1), [1, 8], rtol=1e-10)

    for mu, rho in [(1 + 1e-6, 1000.0), (500.0, 0.05)]:
        alpha = solve_parameter(mu, rho)
        assert 0 < alpha < np.pi / 2
        assert_allclose(side_ratio(alpha), (mu - 1) / (2 * rho), rtol=1e-6)


def test_snap_rectangle():
    assert snap_rectangle(1 + 5e-15, 2000.0) == (1.0, 2000.0)
    assert snap_rectangle(3.0, 1e-12) == (3.0, 0.0)
    assert snap_rectangle(1.001, 1.0) == (1.001, 1.0)
    assert exterior_map(1 + 5e-15, 2000.0).kind == "vertical-segment"
    assert exterior_map(3.0, 1e-12).kind == "segment"


def test_psi_symmetry_and_tail():
    emap = exterior_map(2, 4)
    w = 1.5 * np.exp(1j * np.array([0.3, 1.2, 2.5]))
    assert_allclose(psi_eval(emap, np.conj(w)), np.conj(psi_eval(emap, w)), atol=1e-10)

    c1, c0, cm1 = emap.laurent[:3]
    assert abs(cm1) > 0
    w = 1e3 * np.exp(1j * np.array([0.4, 2.0, 3.0]))
    tail = np.abs(psi_eval(emap, w) - (c1 * w + c0))
    assert np.all(tail <= abs(cm1) / 1e3 * 1.1)


def test_gamma_range():
    for mu in np.geomspace(1.1, 50, 10):
        for rho in np.geomspace(0.1, 50, 10):
            gamma = exterior_map(mu, rho, truncation=20).gamma
            assert 0 < gamma < 1


def test_gamma_dilation_invariance():
    reference = exterior_map(2, 4).gamma
    for a in [0.01, 3.7, 250.0]:
        shape = normalize(Rectangle(1, 2, 4).scale(a))
        assert_allclose(exterior_map(shape.mu, shape.rho).gamma, reference, rtol=1e-10)


def test_faber_leading_coefficient(square):
    faber = faber_polys(square, 20)
    assert_allclose(faber.polynomials[0], np.eye(21)[0])
    for k in range(1, 21):
        assert_allclose(faber.polynomials[k][k], square.scale_c1 ** (-k), rtol=1e-8)
        assert_allclose(faber.polynomials[k][k + 1 :], 0)


def test_faber_growth_rate():
    emap = exterior_map(2, 4, truncation=100)
    at_zero = faber_polys(emap, 80).at_zero
    r40, r80 = at_zero[40] ** (1 / 40), at_zero[80] ** (1 / 80)
    assert_allclose(r40, r80, rtol=0.05)
    assert_allclose(r80 * emap.gamma, 1, rtol=0.05)

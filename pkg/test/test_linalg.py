#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Created on Mon Oct 12 10:41:27 2026.

@author: fabian
"""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from krylopy.common import DimensionMismatch, NotHermitian, NotPositiveDefinite, NotSkew
from krylopy.linalg import (
    InnerProduct,
    cholesky_hpd,
    hermitian_gen_eig,
    numerical_radius_power,
    skew_gen_eig,
    split_hermitian_skew,
    w_inner,
)


@pytest.fixture
def rng():
    return np.random.default_rng(12)


def hpd(rng, n):
    G = rng.standard_normal((n, n))
    return G @ G.T + n * np.eye(n)


def skew(rng, n):
    G = rng.standard_normal((n, n))
    return G - G.T


def test_split_hermitian_skew(rng):
    A = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    split = split_hermitian_skew(A)
    assert_allclose(split.M, split.M.conj().T)
    assert_allclose(split.N, -split.N.conj().T)
    assert_allclose(split.A, A)


def test_cholesky_hpd(rng):
    B = hpd(rng, 5)
    L = cholesky_hpd(B)
    assert_allclose(L @ L.T, B)
    assert_allclose(L, np.tril(L))

    with pytest.raises(NotPositiveDefinite):
        cholesky_hpd([[1.0, 2.0], [2.0, 1.0]])

    with pytest.raises(NotHermitian):
        cholesky_hpd([[1.0, 2.0], [0.0, 1.0]])


def test_hermitian_gen_eig(rng):
    M, B = hpd(rng, 6), hpd(rng, 6)
    pairs = hermitian_gen_eig(M, B)
    expected = np.sort(np.linalg.eigvals(np.linalg.solve(B, M)).real)[::-1]
    assert_allclose(pairs.values, expected, rtol=1e-10)
    assert_allclose(pairs.vectors.T @ B @ pairs.vectors, np.eye(6), atol=1e-10)

    with pytest.raises(DimensionMismatch):
        hermitian_gen_eig(M, np.eye(5))


def test_skew_gen_eig(rng):
    N, B = skew(rng, 8), hpd(rng, 8)
    pairs = skew_gen_eig(N, B)
    assert len(pairs) == 8
    assert_allclose(pairs.values.real, 0, atol=1e-14)
    assert np.all(np.diff(pairs.moduli) <= 1e-12 * pairs.moduli.max())
    assert pairs.residuals(N, B).max() < 1e-12
    X = pairs.vectors
    assert_allclose(X.conj().T @ B @ X, np.eye(8), atol=1e-10)
    # real pencils have conjugate pairs, the positive imaginary part first
    assert pairs.values[0].imag > 0
    assert_allclose(pairs.values[1], np.conj(pairs.values[0]), rtol=1e-10)


def test_skew_gen_eig_partial(rng):
    N, B = skew(rng, 8), hpd(rng, 8)
    full = skew_gen_eig(N, B)
    part = skew_gen_eig(N, B, m=3)
    assert len(part) == 3
    assert_allclose(part.values, full.values[:3])


def test_skew_gen_eig_not_skew(rng):
    with pytest.raises(NotSkew):
        skew_gen_eig(hpd(rng, 4), np.eye(4))


def test_inner_product(rng):
    W = hpd(rng, 5)
    ip = InnerProduct.from_matrix(W)
    x = rng.standard_normal(5)
    y = rng.standard_normal(5)
    assert not ip.is_identity
    assert_allclose(ip.norm(x), np.sqrt(x @ W @ x))
    assert_allclose(ip.inner(x, y), y @ W @ x)
    assert_allclose(ip.from_euclidean(ip.to_euclidean(x)), x)
    assert_allclose(np.linalg.norm(ip.to_euclidean(x)), ip.norm(x))

    unit = InnerProduct.identity(5)
    assert unit.is_identity
    assert_allclose(unit.norm(x), np.linalg.norm(x))

    with pytest.raises(DimensionMismatch):
        w_inner(x, np.ones(4), ip)


def test_numerical_radius_power():
    Q = np.linalg.qr(np.random.default_rng(3).standard_normal((4, 4)))[0]
    K = Q @ np.diag([3.0, -3.0, 1.0, 0.5]) @ Q.T
    assert_allclose(numerical_radius_power(K), 3.0, rtol=1e-8)

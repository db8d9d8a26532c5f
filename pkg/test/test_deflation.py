#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Created on Wed Oct 14 11:02:17 2026.

@author: fabian
"""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from krylopy.bounds import best_curve, residual_bound
from krylopy.common import (
    DimensionMismatch,
    MismatchedOperators,
    OddRequest,
    RankLoss,
    SingularCore,
)
from krylopy.deflation import (
    build_projectors,
    build_spectral_space,
    deflate,
    load_basis,
    make_pairing,
    sample_restricted_quotients,
)
from krylopy.fov import enclosure_tau, normalize
from krylopy.problem import (
    CdrProblemSpec,
    build_cdr,
    build_preconditioner,
    problem_from_matrix,
)
from krylopy.solvers import GmresConfig, gmres_solve


@pytest.fixture(scope="module")
def small():
    problem = build_cdr(CdrProblemSpec(nx=8))
    return problem, build_preconditioner(problem, "jacobi-m")


@pytest.fixture(scope="module")
def medium():
    problem = build_cdr(CdrProblemSpec(nx=16))
    return problem, build_preconditioner(problem, "jacobi-m")


def test_projector_identities():
    rng = np.random.default_rng(11)
    n, m = 20, 4
    A = rng.standard_normal((n, n)) + n * np.eye(n)
    Y = rng.standard_normal((n, m))
    Z = rng.standard_normal((n, m))
    defl = build_projectors(A, Y, Z)
    P, Q = defl.P, defl.Q
    assert_allclose(P @ P, P, atol=1e-10)
    assert_allclose(Q @ Q, Q, atol=1e-10)
    assert_allclose(P @ A @ Z, 0, atol=1e-10)
    assert_allclose(Y.T @ P, 0, atol=1e-10)
    assert_allclose(Q @ Z, 0, atol=1e-10)
    assert_allclose(P @ A, A @ Q, atol=1e-10)
    assert defl.satisfies_conditions

    v = rng.standard_normal(n)
    assert_allclose(defl.apply_p(v), P @ v)
    assert_allclose(defl.apply_q(v), Q @ v)


def test_no_deflation_is_identity():
    A = np.diag([1.0, 2.0, 3.0])
    defl = build_projectors(A, np.zeros((3, 0)), np.zeros((3, 0)))
    assert defl.m == 0
    assert_allclose(defl.P, np.eye(3))
    assert_allclose(defl.Q, np.eye(3))
    assert_allclose(defl.coarse_solve(np.ones(3)), 0)


def test_projector_errors():
    A = np.eye(4)
    e = np.eye(4)
    with pytest.raises(SingularCore):
        build_projectors(A, e[:, :1], e[:, 1:2])

    with pytest.raises(RankLoss):
        build_projectors(A, e[:, [0, 0]], e[:, :2])

    with pytest.raises(DimensionMismatch):
        build_projectors(A, e[:, :1], e[:, :2])


def test_spectral_space(small, tmp_path):
    problem, setup = small
    with pytest.raises(OddRequest):
        build_spectral_space(problem, setup, "hn", 3)

    with pytest.raises(ValueError):
        build_spectral_space(problem, setup, "mn", 2)

    space = build_spectral_space(problem, setup, "hn", 6)
    assert space.basis.shape == (problem.n, 6)
    assert np.isrealobj(space.basis)
    assert_allclose(space.tau, abs(space.eigenvalues[6]), rtol=1e-8)
    assert space.tau <= abs(space.eigenvalues[0])

    path = space.save(tmp_path / "Z.mtx")
    assert_allclose(load_basis(path), space.basis, rtol=1e-15)

    empty = build_spectral_space(problem, setup, "hn", 0)
    assert empty.basis.shape == (problem.n, 0)
    assert_allclose(empty.tau, abs(empty.eigenvalues[0]))


def test_exact_pairing(small):
    problem, setup = small
    space = build_spectral_space(problem, setup, "hn", 4)
    pairing = make_pairing(space, problem, setup, "y-haz")
    assert pairing.exact_pairing
    assert_allclose(pairing.Y, setup.H @ (problem.A @ pairing.Z), rtol=1e-10, atol=1e-10)

    defl = deflate(problem, setup, space, "y-haz")
    assert defl.exact_pairing
    assert defl.is_h_self_adjoint(setup.H)

    other = make_pairing(space, problem, setup, "z-equals-y")
    assert not other.exact_pairing
    assert_allclose(other.Y, other.Z)

    with pytest.raises(ValueError):
        make_pairing(build_spectral_space(problem, setup, "minv-n", 4), problem, setup, "z-equals-y")


def test_mismatched_operators(small):
    problem, setup = small
    space = build_spectral_space(problem, setup, "hn", 2)
    other = build_preconditioner(problem, "exact-m")
    with pytest.raises(MismatchedOperators):
        deflate(problem, other, space)


@pytest.mark.parametrize("gevp_kind", ["hn", "minv-n"])
@pytest.mark.parametrize("m", [0, 6, 12])
def test_deflated_enclosure(medium, gevp_kind, m):
    problem, setup = medium
    space = build_spectral_space(problem, setup, gevp_kind, m)
    defl = deflate(problem, setup, space)
    rect = enclosure_tau(problem, setup, space)

    quotients = sample_restricted_quotients(problem, setup, defl, gevp_kind, rng=0)
    assert_allclose(quotients.real, 0, atol=1e-8 * space.tau)
    assert np.abs(quotients.imag).max() > 1e-3 * space.tau
    assert np.all(np.abs(quotients.imag) <= space.tau * (1 + 1e-8))

    trace = gmres_solve(problem.A, problem.b, setup, defl, GmresConfig(max_it=150))
    shape = normalize(rect)
    bound = residual_bound(best_curve(shape.mu, shape.rho, trace.iterations))
    assert np.all(trace.relative_residuals <= bound * (1 + 1e-10))


@pytest.fixture(scope="module")
def exact24():
    problem = build_cdr(CdrProblemSpec(nx=24))
    return problem, build_preconditioner(problem, "exact-m")


def test_deflation_reduces_iterations(exact24):
    problem, setup = exact24
    cfg = GmresConfig(tol=1e-10, max_it=problem.n)
    baseline = gmres_solve(problem.A, problem.b, setup, cfg=cfg)
    space = build_spectral_space(problem, setup, "hn", 40)
    counts = {}
    for variant in ["y-haz", "z-equals-y", "z-equals-ny"]:
        trace = gmres_solve(
            problem.A, problem.b, setup, deflate(problem, setup, space, variant), cfg
        )
        assert trace.converged
        counts[variant] = trace.iterations_to_tol
    assert baseline.converged
    assert counts["y-haz"] < baseline.iterations_to_tol


def test_tau_non_increasing(medium):
    problem, setup = medium
    taus = [
        build_spectral_space(problem, setup, "hn", m).tau for m in range(0, 22, 2)
    ]
    assert np.all(np.diff(taus) <= 0)
    assert taus[-1] < taus[0]


def test_realified_basis_spans_eigenvectors():
    rng = np.random.default_rng(5)
    Q, _ = np.linalg.qr(rng.standard_normal((4, 4)))
    rot = np.array([[0.0, 1.0], [-1.0, 0.0]])
    D = np.zeros((4, 4))
    D[:2, :2], D[2:, 2:] = 3 * rot, rot
    N = Q @ D @ Q.T
    problem = problem_from_matrix(np.eye(4) + N, np.ones(4))
    setup = build_preconditioner(problem, "exact-m")
    space = build_spectral_space(problem, setup, "hn", 2)
    assert_allclose(space.tau, 1, rtol=1e-10)

    values, vectors = np.linalg.eig(N)
    V = vectors[:, np.abs(values) > 2]
    assert V.shape == (4, 2)

    def projector(X):
        U, _ = np.linalg.qr(X)
        return U @ U.conj().T

    assert_allclose(projector(space.basis), projector(V), atol=1e-10)


@pytest.mark.parametrize("variant", ["y-haz", "z-equals-y", "z-equals-ny"])
def test_projector_rank(small, variant):
    problem, setup = small
    space = build_spectral_space(problem, setup, "hn", 6)
    P = deflate(problem, setup, space, variant).P
    rank = np.linalg.matrix_rank(P, tol=1e-10 * np.linalg.norm(P, 2))
    assert rank == problem.n - 6

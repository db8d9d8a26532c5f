#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Created on Tue Oct 13 09:36:44 2026.

@author: fabian
"""

import numpy as np
import pytest
import xarray as xr
from numpy.testing import assert_allclose

from krylopy.bounds import best_curve, residual_bound
from krylopy.common import DimensionMismatch, LuckyBreakdown, SingularProjector
from krylopy.deflation import DeflationOperator, build_spectral_space, deflate
from krylopy.fov import enclosure_omega1, normalize
from krylopy.io import read_csv
from krylopy.problem import (
    CdrProblemSpec,
    build_cdr,
    build_preconditioner,
    problem_from_matrix,
)
from krylopy.solvers import GmresConfig, full_solution, gmres_solve, krylov_ls_oracle


def random_system(rng, n):
    G = rng.standard_normal((n, n))
    M = G @ G.T / n + np.diag(rng.uniform(0.5, 2.0, n))
    S = rng.standard_normal((n, n))
    A = M + (S - S.T)
    return problem_from_matrix(A, rng.standard_normal(n))


def test_identity_converges_in_one_step():
    problem = problem_from_matrix(np.eye(6), np.arange(1.0, 7.0))
    setup = build_preconditioner(problem, "jacobi-m")
    trace = gmres_solve(problem.A, problem.b, setup)
    assert trace.iterations_to_tol == 1
    assert trace.converged
    assert_allclose(trace.solution, problem.b)


def test_zero_rhs():
    problem = problem_from_matrix(np.eye(3), np.zeros(3))
    setup = build_preconditioner(problem, "jacobi-m")
    trace = gmres_solve(problem.A, problem.b, setup)
    assert trace.iterations_to_tol == 0
    assert_allclose(trace.relative_residuals, 0)


def test_gmres_optimality():
    rng = np.random.default_rng(2024)
    placements = ["left", "right", "split"]
    for i in range(20):
        n = int(rng.integers(8, 31))
        problem = random_system(rng, n)
        setup = build_preconditioner(problem, "jacobi-m", placements[i % 3])
        cfg = GmresConfig(tol=1e-10, max_it=n)
        trace = gmres_solve(problem.A, problem.b, setup, cfg=cfg)
        r0 = trace.residual_norms[0]
        for k in range(trace.iterations + 1):
            try:
                best = krylov_ls_oracle(problem.A, problem.b, setup, k=k)
            except LuckyBreakdown as err:
                best = err.residual
            assert abs(trace.residual_norms[k] - best) <= 1e-9 * r0


def test_placements_agree():
    rng = np.random.default_rng(7)
    problem = random_system(rng, 40)
    cfg = GmresConfig(tol=1e-12, max_it=40)
    traces = {
        p: gmres_solve(
            problem.A, problem.b, build_preconditioner(problem, "jacobi-m", p), cfg=cfg
        )
        for p in ["left", "right", "split"]
    }
    right = traces["right"].relative_residuals
    for p in ["left", "split"]:
        other = traces[p].relative_residuals
        k = min(len(right), len(other))
        assert_allclose(other[:k], right[:k], atol=1e-10)


def test_trace_export(tmp_path):
    problem = random_system(np.random.default_rng(3), 10)
    setup = build_preconditioner(problem, "jacobi-m")
    trace = gmres_solve(problem.A, problem.b, setup)
    da = trace.to_dataarray()
    assert isinstance(da, xr.DataArray)
    assert da.dims == ("k",)
    assert len(da) == trace.iterations + 1
    df = read_csv(trace.to_csv(tmp_path / "trace.csv"))
    assert list(df.columns) == ["k", "residual_norm", "relative_residual"]
    assert df.relative_residual.iloc[0] == 1


def test_non_convergence():
    problem = random_system(np.random.default_rng(5), 30)
    setup = build_preconditioner(problem, "jacobi-m")
    trace = gmres_solve(problem.A, problem.b, setup, cfg=GmresConfig(max_it=3))
    assert not trace.converged
    assert trace.iterations_to_tol is None
    assert trace.iterations == 3


def test_invalid_inputs():
    problem = random_system(np.random.default_rng(6), 5)
    setup = build_preconditioner(problem, "jacobi-m")
    with pytest.raises(DimensionMismatch):
        gmres_solve(problem.A, np.ones(4), setup)

    with pytest.raises(ValueError):
        GmresConfig(tol=0)

    with pytest.raises(ValueError):
        GmresConfig(max_it=0)

    with pytest.raises(ValueError):
        krylov_ls_oracle(problem.A, problem.b, setup, k=6)


def test_singular_projector():
    A = np.eye(3)
    A[0, 1], A[1, 0] = 1.0, -1.0
    problem = problem_from_matrix(A, np.ones(3))
    setup = build_preconditioner(problem, "exact-m")
    e = np.eye(3)
    defl = DeflationOperator(A, e[:, :1], e[:, 1:2], H_inv=np.eye(3))
    assert not defl.satisfies_conditions
    with pytest.raises(SingularProjector):
        gmres_solve(A, problem.b, setup, defl)


@pytest.fixture(scope="module")
def cdr():
    return build_cdr(CdrProblemSpec(nx=8))


def test_deflated_full_solution(cdr):
    setup = build_preconditioner(cdr, "exact-m")
    space = build_spectral_space(cdr, setup, "hn", 6)
    defl = deflate(cdr, setup, space)
    trace = gmres_solve(cdr.A, cdr.b, setup, defl, GmresConfig(tol=1e-12))
    assert trace.converged
    x = full_solution(trace, defl, cdr.A, cdr.b)
    assert np.linalg.norm(cdr.b - cdr.A @ x) <= 1e-8 * np.linalg.norm(cdr.b)
    assert full_solution(trace, None, cdr.A, cdr.b) is trace.solution


def test_deflated_oracle(cdr):
    setup = build_preconditioner(cdr, "jacobi-m")
    defl = deflate(cdr, setup, build_spectral_space(cdr, setup, "hn", 4))
    trace = gmres_solve(cdr.A, cdr.b, setup, defl, GmresConfig(max_it=12))
    for k in [0, 3, trace.iterations]:
        best = krylov_ls_oracle(cdr.A, cdr.b, setup, defl, k=k)
        assert abs(trace.residual_norms[k] - best) <= 1e-9 * trace.residual_norms[0]


def test_residuals_below_field_of_values_bound():
    problem = build_cdr(CdrProblemSpec(nx=16))
    setup = build_preconditioner(problem, "jacobi-m", "right")
    trace = gmres_solve(problem.A, problem.b, setup, cfg=GmresConfig(max_it=120))
    rect = normalize(enclosure_omega1(problem, setup))
    curve = best_curve(rect.mu, rect.rho, 120)
    k = trace.iterations + 1
    bound = residual_bound(curve)[:k]
    assert np.all(trace.relative_residuals <= bound * (1 + 1e-10))


@pytest.mark.parametrize("placement", ["left", "right", "split"])
def test_residuals_non_increasing(cdr, placement):
    rng = np.random.default_rng(11)
    problems = [cdr, random_system(rng, 25)]
    for problem in problems:
        setup = build_preconditioner(problem, "jacobi-m", placement)
        trace = gmres_solve(problem.A, problem.b, setup, cfg=GmresConfig(max_it=40))
        r = trace.residual_norms
        assert np.all(r[1:] <= r[:-1] + 1e-13 * r[0])

    setup = build_preconditioner(cdr, "jacobi-m", placement)
    defl = deflate(cdr, setup, build_spectral_space(cdr, setup, "hn", 6))
    r = gmres_solve(cdr.A, cdr.b, setup, defl, GmresConfig(max_it=40)).residual_norms
    assert np.all(r[1:] <= r[:-1] + 1e-13 * r[0])

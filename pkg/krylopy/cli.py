#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Krylopy command line module.

This module contains the ``krylopy`` command with the subcommands problem,
solve, bounds, fov, spectrum and compare. All commands read a RunConfig and
write their results to the output directory.
"""

import argparse
import logging
import sys
from pathlib import Path

import numpy as np
import pandas as pd
import xarray as xr
from tqdm import tqdm

from krylopy import plot
from krylopy.bounds import (
    best_curve,
    bound_dataset,
    bounds_dataframe,
    crouzeix_palencia,
    residual_bound,
)
from krylopy.common import ConfigError, KrylopyError
from krylopy.config import load_config
from krylopy.deflation import build_spectral_space, deflate, pencil_matrix
from krylopy.fov import (
    NormalizedRectangle,
    enclosure_omega1,
    enclosure_omega2,
    enclosure_tau,
    normalize,
    preconditioned_fov,
    spectral_data,
)
from krylopy.io import to_csv
from krylopy.linalg import cholesky_hpd, numerical_radius_power, skew_gen_eig
from krylopy.problem import (
    CdrProblemSpec,
    build_cdr,
    build_preconditioner,
    load_problem,
)
from krylopy.solvers import GmresConfig, full_solution, gmres_solve

logger = logging.getLogger(__name__)


def _output(config):
    path = config.output_path
    path.mkdir(parents=True, exist_ok=True)
    return path


def get_problem(config):
    """
    Load the problem from ``input.dir`` or assemble the CDR problem.
    """
    if config.input_dir:
        return load_problem(config.input_dir)
    spec = CdrProblemSpec(
        config.problem_nx, config.problem_c0, config.problem_nu, config.problem_eta
    )
    return build_cdr(spec)


def get_setup(problem, config):
    return build_preconditioner(
        problem,
        config.preconditioner_kind,
        config.preconditioner_placement,
        config.preconditioner_blocks,
    )


def get_deflation(problem, setup, config, m=None):
    m = config.deflation_m if m is None else m
    space = build_spectral_space(problem, setup, config.deflation_gevp, m)
    return space, deflate(problem, setup, space, config.deflation_variant)


def cmd_problem(config, log=False):
    problem = get_problem(config)
    paths = problem.save(_output(config))
    print(f"problem of dimension {problem.n} written to {config.output_dir}")
    return paths


def cmd_solve(config, log=False):
    problem = get_problem(config)
    setup = get_setup(problem, config)
    defl = None
    if config.deflation_m > 0:
        _, defl = get_deflation(problem, setup, config)
    cfg = GmresConfig(tol=config.solver_tol, max_it=config.solver_max_it)
    trace = gmres_solve(problem.A, problem.b, setup, defl, cfg, log=log)
    path = trace.to_csv(_output(config) / "trace.csv")
    if defl is not None:
        x = full_solution(trace, defl, problem.A, problem.b)
        res = np.linalg.norm(problem.b - problem.A @ x) / np.linalg.norm(problem.b)
        print(f"full solution relative residual: {res:.6e}")
    print(f"iterations_to_tol: {trace.iterations_to_tol}")
    return trace, path


def get_rectangle(config, problem=None, setup=None):
    """
    Get the normalized rectangle selected by ``bounds.rectangle``.
    """
    if config.bounds_rectangle == "given":
        return NormalizedRectangle(config.bounds_mu, config.bounds_rho)
    if problem is None:
        problem = get_problem(config)
        setup = get_setup(problem, config)
    if config.bounds_rectangle == "omega1":
        return normalize(enclosure_omega1(problem, setup))
    return normalize(enclosure_omega2(problem, setup))


def cmd_bounds(config, log=False):
    rect = get_rectangle(config)
    logger.info(f" Bounds for mu = {rect.mu:.6e}, rho = {rect.rho:.6e}")
    curve = best_curve(
        rect.mu,
        rect.rho,
        config.bounds_k_max,
        list(config.bounds_methods),
        config.bounds_n_grid,
    )
    ds = bound_dataset(curve)
    out = _output(config)
    path = to_csv(bounds_dataframe(ds), out / "bounds.csv")
    plot.plot_bounds(ds, out / "bounds.svg", title=f"mu = {rect.mu:.4g}, rho = {rect.rho:.4g}")
    return curve, path


def cmd_fov(config, log=False):
    problem = get_problem(config)
    setup = get_setup(problem, config)
    sample = preconditioned_fov(problem, setup, config.fov_n_angles, log=log)
    rects = {
        "Omega_1": enclosure_omega1(problem, setup),
        "Omega_2": enclosure_omega2(problem, setup),
    }
    out = _output(config)
    path = to_csv(sample.to_dataframe(), out / "fov.csv")
    df = pd.DataFrame([r.to_series() for r in rects.values()], index=list(rects))
    norm = [normalize(r) for r in rects.values()]
    df["mu"] = [r.mu for r in norm]
    df["rho"] = [r.rho for r in norm]
    to_csv(df.rename_axis("name").reset_index(), out / "enclosures.csv")
    eigenvalues = np.linalg.eigvals(problem.A @ setup.H)
    plot.plot_fov(sample, out / "fov.svg", rects, eigenvalues)
    return sample, path


def cmd_spectrum(config, log=False):
    problem = get_problem(config)
    setup = get_setup(problem, config)
    frames = []
    spectra = {}
    for kind, label in [("hn", "N x = l H^-1 x"), ("minv-n", "N x = l M x")]:
        values = skew_gen_eig(problem.N, pencil_matrix(problem, setup, kind)).values
        spectra[label] = values
        frames.append(
            pd.DataFrame(
                {
                    "pencil": kind,
                    "j": np.arange(1, len(values) + 1),
                    "re": values.real,
                    "im": values.imag,
                    "modulus": np.abs(values),
                }
            )
        )
    data = spectral_data(problem, setup)
    L = cholesky_hpd(setup.H)
    check = numerical_radius_power(1j * (L.conj().T @ problem.N @ L))
    print(f"rho(NH) = {data.rho_nh:.6e} (power method: {check:.6e})")
    print(f"rho(M^-1 N) = {data.rho_minv_n:.6e}")
    out = _output(config)
    path = to_csv(pd.concat(frames, ignore_index=True), out / "spectrum.csv")
    plot.plot_spectrum(spectra, out / "spectrum.svg")
    return spectra, path


def comparison_report(problem, setup, config, log=False):
    """
    Compare bounds on the deflated enclosures with achieved GMRES residuals.

    For each m of ``deflation.m_list`` a spectral deflation space is built,
    GMRES is run and the best bound on the normalized enclosure
    ``Omega^tau`` is evaluated at the iterations ``compare.k_list``.

    Returns
    -------
    report : xarray.Dataset
        Variables ``bound``, ``residual_bound`` and ``achieved`` over
        (m, k), and ``tau``, ``iterations_to_tol`` and ``hypothesis`` over m.
    traces : dict
        GMRES traces by m.
    curves : dict
        Best bound curves by m.
    """
    k_list = np.array(config.compare_k_list)
    cfg = GmresConfig(tol=config.solver_tol, max_it=config.solver_max_it)
    m_list = list(config.deflation_m_list)
    traces, curves, rows = {}, {}, []
    iterate = tqdm(m_list, "Comparing deflation levels") if log else m_list
    for m in iterate:
        space, defl = get_deflation(problem, setup, config, m)
        trace = gmres_solve(problem.A, problem.b, setup, defl, cfg)
        rect = normalize(enclosure_tau(problem, setup, space))
        k_max = int(max(k_list.max(), trace.iterations))
        curve = best_curve(rect.mu, rect.rho, k_max, list(config.bounds_methods))
        rel = trace.relative_residuals
        # GMRES residuals do not increase after the run has stopped
        achieved = rel[np.minimum(k_list, trace.iterations)]
        traces[m], curves[m] = trace, curve
        rows.append(
            dict(
                bound=curve.values[k_list],
                achieved=achieved,
                tau=space.tau,
                iterations_to_tol=trace.iterations_to_tol or -1,
                hypothesis=bool(defl.exact_pairing or defl.m == 0),
            )
        )

    bound = np.stack([r["bound"] for r in rows])
    report = xr.Dataset(
        {
            "bound": (("m", "k"), bound),
            "residual_bound": (("m", "k"), crouzeix_palencia * bound),
            "achieved": (("m", "k"), np.stack([r["achieved"] for r in rows])),
            "tau": ("m", [r["tau"] for r in rows]),
            "iterations_to_tol": ("m", [r["iterations_to_tol"] for r in rows]),
            "hypothesis": ("m", [r["hypothesis"] for r in rows]),
        },
        coords={"m": m_list, "k": k_list},
    )
    violated = report.hypothesis & (report.achieved > report.residual_bound)
    if violated.any():
        logger.warning(
            " Achieved residuals exceed the bound although Y = HAZ holds for "
            f"m = {report.m.where(violated.any('k'), drop=True).values}."
        )
    return report, traces, curves


def report_dataframe(report):
    df = report[["bound", "residual_bound", "achieved"]].to_dataframe().reset_index()
    per_m = report[["tau", "iterations_to_tol", "hypothesis"]].to_dataframe()
    df = df.join(per_m, on="m")
    df["satisfied"] = df.achieved <= df.residual_bound
    columns = [
        "m",
        "k",
        "tau",
        "bound",
        "residual_bound",
        "achieved",
        "iterations_to_tol",
        "hypothesis",
        "satisfied",
    ]
    return df[columns]


def cmd_compare(config, log=False):
    problem = get_problem(config)
    setup = get_setup(problem, config)
    report, traces, curves = comparison_report(problem, setup, config, log)
    out = _output(config)
    path = to_csv(report_dataframe(report), out / "compare.csv")
    plot.plot_convergence(
        {f"m = {m}": t for m, t in traces.items()},
        out / "compare.svg",
        bounds={f"bound m = {m}": residual_bound(c) for m, c in curves.items()},
    )
    for m in report.m.values:
        print(f"m = {m}: iterations_to_tol = {int(report.iterations_to_tol.sel(m=m))}")
    return report, path


commands = {
    "problem": (cmd_problem, "assemble the CDR problem and write A, M, N and b"),
    "solve": (cmd_solve, "solve with preconditioned (deflated) GMRES"),
    "bounds": (cmd_bounds, "evaluate the min-max bounds on a rectangle"),
    "fov": (cmd_fov, "sample the field of values and its enclosures"),
    "spectrum": (cmd_spectrum, "compute the spectra of both skew pencils"),
    "compare": (cmd_compare, "compare bounds with GMRES across deflation levels"),
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-c", "--config", type=Path, help="configuration file")
    common.add_argument(
        "--set",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override a configuration key, may be repeated",
    )
    common.add_argument("-o", "--output-dir", help="shortcut for --set output.dir=...")
    common.add_argument("-v", "--verbose", action="count", default=0)
    common.add_argument("-q", "--quiet", action="store_true")

    parser = argparse.ArgumentParser(
        prog="krylopy",
        description="Weighted deflated GMRES and field of values convergence bounds.",
    )
    parser.add_argument("--version", action="version", version=_version())
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, text) in commands.items():
        sub.add_parser(name, parents=[common], help=text, description=text)
    return parser


def _version():
    try:
        from krylopy.version import version
    except ImportError:
        version = "unknown"
    return f"krylopy {version}"


def _log_level(args):
    if args.quiet:
        return logging.ERROR
    if args.verbose >= 2:
        return logging.DEBUG
    return logging.INFO if args.verbose else logging.WARNING


def main(argv=None):
    """
    Run the command line interface and return the exit status.

    Configuration errors give status 2, numerical and other krylopy errors
    give status 3.
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=_log_level(args), format="%(levelname)s:%(name)s:%(message)s"
    )
    overrides = list(args.set)
    if args.output_dir is not None:
        overrides.append(f"output.dir={args.output_dir}")
    func, _ = commands[args.command]
    try:
        config = load_config(args.config, overrides)
        func(config, log=args.verbose > 0 and not args.quiet)
    except ConfigError as err:
        print(f"error: {type(err).__name__}: {err}", file=sys.stderr)
        return 2
    except KrylopyError as err:
        print(f"error: {type(err).__name__}: {err}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())

#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Krylopy config module.

This module contains the run configuration of the command line interface.
Configurations are flat text files with dotted keys, e.g.

    # problem
    problem.nx = 16
    bounds.methods = elman, disk, ellipse
"""

import logging
import re
from dataclasses import dataclass, fields
from pathlib import Path

from krylopy.bounds import methods as bound_methods
from krylopy.common import ConfigError
from krylopy.deflation import gevp_kinds, variants
from krylopy.problem import placements, preconditioner_kinds

logger = logging.getLogger(__name__)

assignment = re.compile(r"^\s*([A-Za-z_][\w]*(?:\.[A-Za-z_]\w*)+)\s*=\s*(.*?)\s*$")
comment = re.compile(r"\s*#.*$")
list_separator = re.compile(r"\s*,\s*")
integer = re.compile(r"^[+-]?\d+$")
number = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")


def _kind(value):
    return value in preconditioner_kinds or bool(
        re.match(r"^block-jacobi-m\(\d+\)$", value)
    )


def _positive(value):
    return value > 0


def _non_negative(value):
    return value >= 0


def _non_negative_list(value):
    return len(value) > 0 and all(v >= 0 for v in value)


# key -> (type, default, validator)
schema = {
    "problem.nx": (int, 16, lambda v: v >= 3),
    "problem.c0": (float, 1.0, _positive),
    "problem.nu": (float, 0.01, _positive),
    "problem.eta": (float, 100.0, None),
    "preconditioner.kind": (str, "jacobi-m", _kind),
    "preconditioner.blocks": (int, 4, _positive),
    "preconditioner.placement": (str, "right", lambda v: v in placements),
    "deflation.gevp": (str, "hn", lambda v: v in gevp_kinds),
    "deflation.m": (int, 0, _non_negative),
    "deflation.m_list": ([int], [0], _non_negative_list),
    "deflation.variant": (str, "y-haz", None),
    "bounds.methods": (
        [str],
        list(bound_methods),
        lambda v: len(v) > 0 and set(v) <= set(bound_methods),
    ),
    "bounds.k_max": (int, 100, _non_negative),
    "bounds.mu": (float, 2.0, lambda v: v >= 1),
    "bounds.rho": (float, 4.0, _non_negative),
    "bounds.rectangle": (str, "omega1", lambda v: v in ["omega1", "omega2", "given"]),
    "bounds.n_grid": (int, 100, _positive),
    "solver.tol": (float, 1e-10, _positive),
    "solver.max_it": (int, 200, _positive),
    "fov.n_angles": (int, 360, lambda v: v >= 8),
    "compare.k_list": ([int], [10, 20, 50, 100], _non_negative_list),
    "output.dir": (str, ".", None),
    "input.dir": (str, "", None),
}


def attribute(key):
    return key.replace(".", "_")


def parse_value(key, text):
    """
    Convert the string `text` to the schema type of `key`.
    """
    if key not in schema:
        raise ConfigError(f"Unknown configuration key '{key}'.")
    kind, _, _ = schema[key]
    if isinstance(kind, list):
        items = [t for t in list_separator.split(text.strip()) if t != ""]
        return [_convert(key, kind[0], t) for t in items]
    return _convert(key, kind, text.strip())


def _convert(key, kind, text):
    if kind is int:
        if not integer.match(text):
            raise ConfigError(f"Value '{text}' of '{key}' is not an integer.")
        return int(text)
    if kind is float:
        if not number.match(text):
            raise ConfigError(f"Value '{text}' of '{key}' is not a number.")
        return float(text)
    if kind is bool:
        if text.lower() not in ["true", "false"]:
            raise ConfigError(f"Value '{text}' of '{key}' is not a boolean.")
        return text.lower() == "true"
    return text


def parse_lines(lines, source="<config>"):
    """
    Parse lines of ``key = value`` assignments to a dictionary of raw strings.
    """
    values = {}
    for i, line in enumerate(lines, start=1):
        line = comment.sub("", line)
        if not line.strip():
            continue
        match = assignment.match(line)
        if match is None:
            raise ConfigError(f"{source}:{i}: cannot parse '{line.strip()}'.")
        key, text = match.groups()
        if key not in schema:
            raise ConfigError(f"{source}:{i}: unknown configuration key '{key}'.")
        values[key] = text
    return values


@dataclass(frozen=True)
class RunConfig:
    """
    Validated configuration of a command line run.

    Attributes are the schema keys with dots replaced by underscores, e.g.
    ``problem.nx`` becomes ``problem_nx``.
    """

    problem_nx: int = 16
    problem_c0: float = 1.0
    problem_nu: float = 0.01
    problem_eta: float = 100.0
    preconditioner_kind: str = "jacobi-m"
    preconditioner_blocks: int = 4
    preconditioner_placement: str = "right"
    deflation_gevp: str = "hn"
    deflation_m: int = 0
    deflation_m_list: tuple = (0,)
    deflation_variant: str = "y-haz"
    bounds_methods: tuple = tuple(bound_methods)
    bounds_k_max: int = 100
    bounds_mu: float = 2.0
    bounds_rho: float = 4.0
    bounds_rectangle: str = "omega1"
    bounds_n_grid: int = 100
    solver_tol: float = 1e-10
    solver_max_it: int = 200
    fov_n_angles: int = 360
    compare_k_list: tuple = (10, 20, 50, 100)
    output_dir: str = "."
    input_dir: str = ""

    def __post_init__(self):
        for key, (_, _, validator) in schema.items():
            value = getattr(self, attribute(key))
            if validator is not None and not validator(value):
                raise ConfigError(f"Invalid value {value!r} for '{key}'.")
        allowed = variants[self.deflation_gevp]
        if self.deflation_variant not in allowed:
            raise ConfigError(
                f"deflation.variant must be one of {allowed} for "
                f"'{self.deflation_gevp}' spaces, got '{self.deflation_variant}'."
            )

    @classmethod
    def from_dict(cls, values):
        """
        Create a RunConfig from parsed values keyed by dotted names.
        """
        kwargs = {}
        for key, value in values.items():
            if key not in schema:
                raise ConfigError(f"Unknown configuration key '{key}'.")
            kwargs[attribute(key)] = tuple(value) if isinstance(value, list) else value
        return cls(**kwargs)

    def to_dict(self):
        res = {}
        for f in fields(self):
            value = getattr(self, f.name)
            res[f.name] = list(value) if isinstance(value, tuple) else value
        return res

    @property
    def output_path(self):
        return Path(self.output_dir)


def load_config(path=None, overrides=()):
    """
    Read a configuration file and apply ``key=value`` overrides.

    Parameters
    ----------
    path : str or pathlib.Path, optional
        Configuration file. The default None uses the schema defaults.
    overrides : iterable of str, optional
        Assignments as given to the ``--set`` flag.

    Returns
    -------
    RunConfig

    Raises
    ------
    ConfigError
        For unreadable files, unknown keys, unparsable values and values
        rejected by the schema.
    """
    raw = {}
    if path is not None:
        try:
            with open(path) as f:
                raw.update(parse_lines(f, source=str(path)))
        except OSError as err:
            raise ConfigError(f"Cannot read configuration file {path}: {err}") from err
    raw.update(parse_lines(overrides, source="--set"))
    values = {key: parse_value(key, text) for key, text in raw.items()}
    config = RunConfig.from_dict(values)
    logger.debug(f" Run configuration: {config}")
    return config

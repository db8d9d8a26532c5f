#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Krylopy: weighted deflated GMRES and field of values convergence bounds.
"""

from krylopy import bounds, conformal, deflation, fov
from krylopy.bounds import BoundCurve, best_curve, bound_curve, minmax_oracle
from krylopy.common import KrylopyError
from krylopy.conformal import exterior_map, faber_polys
from krylopy.deflation import build_projectors, build_spectral_space, deflate
from krylopy.fov import (
    Rectangle,
    enclosure_omega1,
    enclosure_omega2,
    enclosure_tau,
    fov_boundary,
    normalize,
)
from krylopy.linalg import InnerProduct, split_hermitian_skew
from krylopy.problem import CdrProblemSpec, build_cdr, build_preconditioner
from krylopy.solvers import GmresConfig, gmres_solve
from krylopy.version import version as __version__

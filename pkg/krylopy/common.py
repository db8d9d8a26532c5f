#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Krylopy common module.

This module contains the error classes and commonly used functions.
"""

import inspect
from functools import wraps

import numpy as np


class KrylopyError(Exception):
    """
    Base class of all errors raised by krylopy.
    """


class ContractError(KrylopyError, ValueError):
    """
    An argument violates a documented pre-condition.
    """


class NumericalError(KrylopyError, ArithmeticError):
    """
    A computation failed for numerical reasons.
    """


class NotSquare(ContractError):
    pass


class NotSkew(ContractError):
    pass


class NotHermitian(ContractError):
    pass


class DimensionMismatch(ContractError):
    pass


class OddRequest(ContractError):
    pass


class DegenerateRectangle(ContractError):
    pass


class NonPositiveRealPart(ContractError):
    pass


class InsideDisk(ContractError):
    pass


class TruncationTooShort(ContractError):
    pass


class MismatchedOperators(ContractError):
    pass


class ConfigError(ContractError):
    pass


class NotPositiveDefinite(NumericalError):
    pass


class NotPd(NumericalError):
    """
    The Hermitian part of an operator is not positive definite.
    """


class SingularCore(NumericalError):
    pass


class RankLoss(NumericalError):
    pass


class Breakdown(NumericalError):
    pass


class SingularProjector(NumericalError):
    pass


class NewtonDivergence(NumericalError):
    pass


class LuckyBreakdown(NumericalError):
    """
    The Krylov space became invariant before the requested dimension.

    Attributes
    ----------
    step : int
        Dimension at which the space stopped growing.
    residual : float
        Residual norm of the exact solution found in that space.
    """

    def __init__(self, message, step, residual):
        super().__init__(message)
        self.step = step
        self.residual = residual


HERMITIAN_RTOL = 1e-11


def relative_residual(a, b):
    """
    Frobenius norm of ``a - b`` relative to the norm of ``b``.

    Returns the absolute norm if ``b`` vanishes.
    """
    scale = np.linalg.norm(b)
    diff = np.linalg.norm(a - b)
    return diff / scale if scale > 0 else diff


def as_matrix(obj, square=False, name="matrix"):
    """
    Convert an object to a finite two-dimensional numpy array.

    Parameters
    ----------
    obj : array_like
    square : bool, optional
        Whether the matrix must be square. The default is False.
    name : str, optional
        Name used in error messages.

    Returns
    -------
    numpy.ndarray
    """
    arr = np.asarray(obj)
    if arr.ndim != 2 or min(arr.shape) < 1:
        raise ValueError(f"{name} must be a non-empty two-dimensional array.")
    if not np.issubdtype(arr.dtype, np.number):
        raise TypeError(f"{name} must have a numeric dtype, got {arr.dtype}.")
    if not np.isfinite(arr).all():
        raise ValueError(f"{name} contains non-finite entries.")
    if square and arr.shape[0] != arr.shape[1]:
        raise NotSquare(f"{name} must be square, got shape {arr.shape}.")
    if not np.iscomplexobj(arr):
        arr = arr.astype(float)
    return arr


def as_vector(obj, n=None, name="vector"):
    """
    Convert an object to a finite one-dimensional numpy array of length `n`.
    """
    arr = np.asarray(obj)
    if arr.ndim == 2 and 1 in arr.shape:
        arr = arr.ravel()
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional.")
    if n is not None and arr.shape[0] != n:
        raise DimensionMismatch(f"{name} has length {arr.shape[0]}, expected {n}.")
    if not np.isfinite(arr).all():
        raise ValueError(f"{name} contains non-finite entries.")
    return arr if np.iscomplexobj(arr) else arr.astype(float)


def is_hermitian(B, rtol=HERMITIAN_RTOL):
    """
    Check whether B equals its conjugate transpose to a relative tolerance.
    """
    return np.abs(B - B.conj().T).max() <= rtol * max(np.abs(B).max(), 1e-300)


def is_skew(B, rtol=HERMITIAN_RTOL):
    """
    Check whether B equals minus its conjugate transpose to a relative tolerance.
    """
    return np.abs(B + B.conj().T).max() <= rtol * max(np.abs(B).max(), 1e-300)


def fingerprint(*matrices):
    """
    Get a cheap identification tuple of one or more matrices.

    Two operator sets with equal fingerprints are treated as identical.
    """
    res = []
    for B in matrices:
        B = np.asarray(B)
        res.append((B.shape, float(np.abs(B).sum()), complex(B.trace())))
    return tuple(res)


def square_matrix_args(*names):
    """
    Check that the named arguments of the decorated function are square.
    """

    def decorator(func):
        @wraps(func)
        def wrapper(*args, **kwargs):
            bound = inspect.signature(func).bind(*args, **kwargs)
            for name in names:
                value = bound.arguments.get(name)
                if value is not None:
                    as_matrix(value, square=True, name=name)
            return func(*args, **kwargs)

        return wrapper

    return decorator

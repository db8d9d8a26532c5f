#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Module containing all import/export functionalities.
"""
import logging
from pathlib import Path

import numpy as np
import pandas as pd
import scipy.io
import scipy.sparse
from tqdm import tqdm

from krylopy.common import as_matrix, as_vector

logger = logging.getLogger(__name__)

float_format = "%.16e"


def float_to_str(arr):
    """
    Convert numpy array to str typed array with 17 significant digits.
    """
    convert = np.frompyfunc(lambda f: float_format % f, 1, 1)
    return convert(arr)


def complex_to_str(arr):
    """
    Convert complex numpy array to str typed array of "re im" pairs.
    """
    return float_to_str(np.real(arr)) + " " + float_to_str(np.imag(arr))


def write_matrix(path, A, sparse=True, comment=""):
    """
    Write a dense matrix to a Matrix Market file.

    Parameters
    ----------
    path : str or pathlib.Path
    A : array_like
    sparse : bool, optional
        Whether to use the coordinate format, otherwise the array format is
        used. The default is True.
    comment : str, optional

    Returns
    -------
    pathlib.Path
    """
    path = Path(path)
    A = as_matrix(A, name="A")
    data = scipy.sparse.coo_matrix(A) if sparse else A
    field = "complex" if np.iscomplexobj(A) else "real"
    scipy.io.mmwrite(
        str(path), data, comment=comment, field=field, precision=17, symmetry="general"
    )
    logger.debug(f" Wrote matrix of shape {A.shape} to {path}.")
    return path


def read_matrix(path):
    """
    Read a Matrix Market file into a dense numpy array.

    Symmetric, skew-symmetric and hermitian files are expanded to full
    storage. Real and integer fields are returned as float arrays.
    """
    data = scipy.io.mmread(str(path))
    if scipy.sparse.issparse(data):
        data = data.toarray()
    return as_matrix(data, name=str(path))


def write_vector(path, b, log=False):
    """
    Write a vector to a plain text file.

    The first line is the header ``%%vector n``, followed by one value per
    line. Complex values are written as real and imaginary part.
    """
    path = Path(path)
    b = as_vector(b, name="b")
    if np.iscomplexobj(b):
        lines = complex_to_str(b)
        header = f"%%vector {len(b)} complex"
    else:
        lines = float_to_str(b)
        header = f"%%vector {len(b)}"
    if log:
        lines = tqdm(lines, "Writing vector.", len(b))
    with open(path, "w") as f:
        f.write(header + "\n")
        f.write("\n".join(lines))
        f.write("\n")
    return path


def read_vector(path):
    """
    Read a vector written by :func:`write_vector`.
    """
    with open(path) as f:
        header = f.readline().split()
        if not header or header[0] != "%%vector":
            raise ValueError(f"File {path} lacks the '%%vector n' header.")
        n = int(header[1])
        is_complex = len(header) > 2 and header[2] == "complex"
        data = np.loadtxt(f, ndmin=2 if is_complex else 1)
    if is_complex:
        data = data[:, 0] + 1j * data[:, 1]
    if data.shape[0] != n:
        raise ValueError(f"File {path} announces {n} values, found {data.shape[0]}.")
    return data


def to_csv(df, path):
    """
    Write a DataFrame to csv with the fixed float format of the package.

    Identical frames give byte-identical files.
    """
    path = Path(path)
    df.to_csv(path, index=False, float_format=float_format, lineterminator="\n")
    logger.info(f" Wrote {len(df)} rows to {path}.")
    return path


def read_csv(path):
    return pd.read_csv(path)

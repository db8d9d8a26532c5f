#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Created on Wed Mar 10 11:04:43 2021.

@author: fabulous
"""


from codecs import open

from setuptools import find_packages, setup

with open("README.md", encoding="utf-8") as f:
    long_description = f.read()

setup(
    name="krylopy",
    author="Fabian Hofmann",
    author_email="hofmann@fias.uni-frankfurt.de",
    description="Weighted deflated GMRES and field of values convergence bounds",
    long_description=long_description,
    long_description_content_type="text/markdown",
    license="GPLv3",
    packages=find_packages(exclude=["doc", "test"]),
    include_package_data=True,
    python_requires=">=3.8",
    install_requires=[
        "numpy",
        "scipy>=1.6",
        "pandas>=1.5",
        "xarray",
        "dask>=0.18.0",
        "tqdm",
        "matplotlib",
    ],
    extras_require={
        "docs": [
            "ipython",
            "numpydoc",
            "sphinx",
            "sphinx_rtd_theme",
        ],
        "dev": [
            "pytest",
            "pytest-cov",
            "pre-commit",
        ],
    },
    entry_points={"console_scripts": ["krylopy=krylopy.cli:main"]},
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Environment :: Console",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: GNU General Public License v3 or later (GPLv3+)",
        "Natural Language :: English",
        "Operating System :: OS Independent",
    ],
)

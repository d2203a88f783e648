# pylint: disable=import-outside-toplevel
"""
Entrypoint for testing from the top-level namespace
# pattern is from https://github.com/pandas-dev/pandas/blob/master/pandas/util/_tester.py
"""
import os
import sys

import typing

PKG = os.path.dirname(os.path.dirname(__file__))

DEFAULT_ARGS = ["--cov-report=term-missing", "--cov=densfield", "-n=auto", "--mypy", "--pylint"]


def test(use_default_args: bool = True, extra_args: typing.Union[str, list, None] = None) -> None:
    """
    Run the test suite shipped with densfield, then exit with the pytest status

    Every sub-package test module runs. The doctests of every module run as well when the pytest.ini of the
    source tree is in effect, it adds --doctest-modules. With the default args the run also reports line coverage
    of densfield, spreads the tests over one xdist worker per core and type checks and lints each file.

    The numba kernels of the ground truth oracles start as many threads as NUMBA_NUM_THREADS allows in each
    worker. DENSFIELD_THREADS is read by the command line only, so cap a parallel run through NUMBA_NUM_THREADS.

    Args:
        use_default_args: add coverage, parallel workers, mypy and pylint to the run
        extra_args: additional args to pass to pytest, e.g. "-k kd" or ["-x", "-q"]

    Returns: None
    """
    try:
        import pytest
    except ImportError as err:
        raise ImportError("Need pytest to run tests") from err
    cmd = list(DEFAULT_ARGS) if use_default_args else []
    if extra_args:
        if not isinstance(extra_args, list):
            extra_args = [extra_args]
        cmd += extra_args
    cmd += [PKG]
    print("running: pytest {}".format(" ".join(cmd)))
    sys.exit(pytest.main(cmd))


__all__ = ["test"]

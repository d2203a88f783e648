# pylint: disable=missing-function-docstring
from importlib import metadata

import pytest

from densfield.core.cache import environment_versions, get_package_version


@pytest.mark.xfail(raises=metadata.PackageNotFoundError, strict=True)
def test_get_package_version_bad_package():
    get_package_version('not-a-real-densfield-dependency')


def test_get_package_version_numpy():
    assert tuple(map(int, get_package_version('numpy').split('.')[:2])) >= (1, 17)


def test_package_version_python():
    assert tuple(map(int, get_package_version('python').split('.'))) > (3, 6, 0)


def test_environment_versions_keys():
    assert set(environment_versions()) == {'densfield_version', 'numpy_version', 'python_version'}

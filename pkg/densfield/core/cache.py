"""Functions used throughout densfield that maintain a cache"""
import platform
import typing
from functools import lru_cache

from importlib import metadata

from densfield.core.constants import UNKNOWN_VERSION


# even in a large environment 128 packages that we care about the version of seems reasonable
@lru_cache(maxsize=128)
def get_package_version(package: str) -> str:
    """Extract version from an installed python package

    Args:
        package: name of the package, 'python' is special cased to the interpreter version

    Returns:
        version string

    Raises:
        importlib.metadata.PackageNotFoundError: when the package info can't be located
    """
    if package == 'python':
        return platform.python_version()

    return metadata.version(package)


# Used for calculating both __version__ and the resolved config snapshots
@lru_cache(maxsize=1)
def densfield_version() -> str:
    """Gets the version of densfield"""
    try:
        return metadata.version('densfield')
    except metadata.PackageNotFoundError:
        return UNKNOWN_VERSION


def environment_versions() -> typing.Dict[str, str]:
    """Versions recorded beside every artifact so a run can be reproduced"""
    return {
        'densfield_version': densfield_version(),
        'numpy_version': get_package_version('numpy'),
        'python_version': get_package_version('python'),
    }


def clear_caches():  # pragma: no cover
    """Clear all densfield caches"""
    get_package_version.cache_clear()
    densfield_version.cache_clear()

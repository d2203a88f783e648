"""Stratified depth sampling along rays"""
import typing
from dataclasses import dataclass

import numpy as np

from densfield.core.constants import FLOAT_DTYPE, DEFAULT_N_SAMPLES, DEFAULT_Z_NEAR, DEFAULT_Z_FAR, SAMPLING_MODES
from densfield.core.exceptions import DensFieldContractViolation
from densfield.geometry.camera import Ray


@dataclass(frozen=True)
class SamplerConfig:
    """How many points to place on each ray and where"""
    n_samples: int = DEFAULT_N_SAMPLES
    z_near: float = DEFAULT_Z_NEAR
    z_far: float = DEFAULT_Z_FAR
    mode: str = 'inverse'
    jitter: bool = False

    def __post_init__(self):
        if not 0.0 < self.z_near < self.z_far:
            raise DensFieldContractViolation("need 0 < z_near < z_far, got {} and {}".format(self.z_near, self.z_far))
        if self.n_samples < 2:
            raise DensFieldContractViolation("need at least 2 samples per ray, got {}".format(self.n_samples))
        if self.mode not in SAMPLING_MODES:
            raise DensFieldContractViolation("sampling mode must be one of {}, got '{}'".format(
                SAMPLING_MODES, self.mode))

    @classmethod
    def from_settings(cls, settings: typing.Mapping[str, typing.Any], jitter: bool = False) -> 'SamplerConfig':
        return cls(settings['n_samples'], settings['z_near'], settings['z_far'], settings['sampling_mode'], jitter)


class RaySamples(typing.NamedTuple):
    """depths (..., M) increasing, deltas (..., M) and points (..., M, 3)"""
    depths: np.ndarray
    deltas: np.ndarray
    points: np.ndarray


def sample_depths(config: SamplerConfig, n_rays: int = 1,
                  rng: typing.Optional[np.random.Generator] = None) -> np.ndarray:
    """(n_rays, M) depths, one per stratum

    Strata are equal intervals in depth (linear) or in inverse depth (inverse). Without jitter each sample sits at
    its stratum midpoint, with jitter it is uniform inside its stratum.

    >>> sample_depths(SamplerConfig(2, 1.0, 3.0, 'linear')).tolist()
    [[1.5, 2.5]]
    """
    count = config.n_samples
    if config.jitter:
        if rng is None:
            raise DensFieldContractViolation("jittered sampling needs a random generator")
        offsets = rng.uniform(size=(n_rays, count))
    else:
        offsets = np.full((n_rays, count), 0.5)
    fractions = (np.arange(count, dtype=FLOAT_DTYPE) + offsets) / count
    if config.mode == 'linear':
        return config.z_near + fractions * (config.z_far - config.z_near)
    inverse_near = 1.0 / config.z_near
    return 1.0 / (inverse_near + fractions * (1.0 / config.z_far - inverse_near))


def depth_deltas(depths: np.ndarray) -> np.ndarray:
    """Spacing to the next sample, the last spacing is the mean spacing of its ray"""
    depths = np.asarray(depths, dtype=FLOAT_DTYPE)
    gaps = np.diff(depths, axis=-1)
    return np.concatenate([gaps, gaps.mean(axis=-1, keepdims=True)], axis=-1)


def sample_rays_points(origins: np.ndarray, directions: np.ndarray, config: SamplerConfig,
                       rng: typing.Optional[np.random.Generator] = None) -> RaySamples:
    """Samples for N rays given as (N, 3) origins and unit directions"""
    origins = np.asarray(origins, dtype=FLOAT_DTYPE).reshape(-1, 3)
    directions = np.asarray(directions, dtype=FLOAT_DTYPE).reshape(-1, 3)
    depths = sample_depths(config, len(origins), rng)
    points = origins[:, None, :] + depths[..., None] * directions[:, None, :]
    return RaySamples(depths, depth_deltas(depths), points)


def sample_ray_points(ray: Ray, config: SamplerConfig,
                      rng: typing.Optional[np.random.Generator] = None) -> RaySamples:
    """Samples for one ray

    Args:
        ray: origin and unit direction
        config: count, range and stratification of the samples
        rng: required when config.jitter is set

    Returns:
        depths (M,), deltas (M,) and points (M, 3)
    """
    samples = sample_rays_points(ray.origin, ray.direction, config, rng)
    return RaySamples(samples.depths[0], samples.deltas[0], samples.points[0])

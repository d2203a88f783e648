"""Procedural desk scenes: axis aligned boxes and spheres resting on a ground plane

The world frame is the reference camera frame: x right, y down, z forward. Everything with y >= ground_height is
below ground and solid.
"""
import logging
import typing
from dataclasses import dataclass

import numpy as np

from densfield.core.constants import FLOAT_DTYPE, MAX_PLACEMENT_REJECTIONS, MAX_OVERLAP_FRACTION
from densfield.core.exceptions import DensFieldContractViolation, DensFieldGenerationError

logger = logging.getLogger(__name__)

Vector = typing.Tuple[float, float, float]


class Box(typing.NamedTuple):
    center: Vector
    size: Vector  # edge lengths
    albedo: Vector

    def aabb(self) -> typing.Tuple[np.ndarray, np.ndarray]:
        center, half = np.array(self.center), np.array(self.size) / 2.0
        return center - half, center + half


class Sphere(typing.NamedTuple):
    center: Vector
    radius: float
    albedo: Vector

    def aabb(self) -> typing.Tuple[np.ndarray, np.ndarray]:
        center = np.array(self.center)
        return center - self.radius, center + self.radius


Primitive = typing.Union[Box, Sphere]


@dataclass(frozen=True)
class SceneGenConfig:
    """Ranges the generator draws primitives from"""
    n_primitives: int = 6
    sigma_solid: float = 50.0
    ground_height: float = 1.5
    box_size_min: float = 1.0
    box_size_max: float = 4.0
    sphere_radius_min: float = 0.5
    sphere_radius_max: float = 1.5
    x_min: float = -9.0
    x_max: float = 9.0
    z_min: float = 3.0
    z_max: float = 23.0
    albedo_palette: typing.Tuple[Vector, ...] = ((0.85, 0.25, 0.2), (0.2, 0.55, 0.85), (0.95, 0.8, 0.25),
                                                 (0.3, 0.75, 0.35), (0.7, 0.4, 0.8), (0.9, 0.9, 0.9))
    ground_albedo: Vector = (0.35, 0.35, 0.35)

    @classmethod
    def from_settings(cls, settings: typing.Mapping[str, typing.Any]) -> 'SceneGenConfig':
        palette = tuple(settings['albedo_palette'])
        if len(palette) % 3 or not palette:
            raise DensFieldContractViolation("albedo_palette needs RGB triplets, got {} values".format(len(palette)))
        return cls(settings['n_primitives'], settings['sigma_solid'], settings['ground_height'],
                   settings['box_size_min'], settings['box_size_max'], settings['sphere_radius_min'],
                   settings['sphere_radius_max'], settings['scene_x_min'], settings['scene_x_max'],
                   settings['scene_z_min'], settings['scene_z_max'],
                   tuple(tuple(palette[i:i + 3]) for i in range(0, len(palette), 3)),
                   tuple(settings['ground_albedo']))


@dataclass(frozen=True)
class SceneGT:
    """Analytic ground truth of one scene"""
    boxes: typing.Tuple[Box, ...]
    spheres: typing.Tuple[Sphere, ...]
    ground_height: float
    ground_albedo: Vector
    sigma_solid: float
    bounds: typing.Tuple[Vector, Vector]
    seed: int

    @property
    def primitives(self) -> typing.List[Primitive]:
        return list(self.boxes) + list(self.spheres)

    def box_array(self) -> np.ndarray:
        """(n, 6) min and max corners"""
        rows = [np.concatenate(box.aabb()) for box in self.boxes]
        return np.array(rows, dtype=FLOAT_DTYPE).reshape(-1, 6)

    def box_albedo_array(self) -> np.ndarray:
        return np.array([box.albedo for box in self.boxes], dtype=FLOAT_DTYPE).reshape(-1, 3)

    def sphere_array(self) -> np.ndarray:
        """(n, 4) centers and radii"""
        rows = [tuple(sphere.center) + (sphere.radius,) for sphere in self.spheres]
        return np.array(rows, dtype=FLOAT_DTYPE).reshape(-1, 4)

    def sphere_albedo_array(self) -> np.ndarray:
        return np.array([sphere.albedo for sphere in self.spheres], dtype=FLOAT_DTYPE).reshape(-1, 3)


def empty_scene(ground_height: float = 1e6, sigma_solid: float = 50.0) -> SceneGT:
    """A scene without primitives, the ground pushed out of sight by default"""
    return SceneGT((), (), ground_height, (0.0, 0.0, 0.0), sigma_solid,
                   ((-1.0, -1.0, -1.0), (1.0, 1.0, 1.0)), 0)


def aabb_overlap_fraction(first: Primitive, second: Primitive) -> float:
    """Intersection volume of the two bounding boxes relative to the smaller box

    >>> aabb_overlap_fraction(Box((0, 0, 0), (2, 2, 2), (1, 1, 1)), Box((1, 0, 0), (2, 2, 2), (1, 1, 1)))
    0.5
    """
    low_a, high_a = first.aabb()
    low_b, high_b = second.aabb()
    overlap = np.clip(np.minimum(high_a, high_b) - np.maximum(low_a, low_b), 0.0, None)
    smaller = min(np.prod(high_a - low_a), np.prod(high_b - low_b))
    return float(np.prod(overlap) / smaller)


def _draw_primitive(rng: np.random.Generator, config: SceneGenConfig) -> Primitive:
    albedo = tuple(float(value) for value in config.albedo_palette[int(rng.integers(len(config.albedo_palette)))])
    if rng.uniform() < 0.5:
        size = rng.uniform(config.box_size_min, config.box_size_max, size=3)
        x = rng.uniform(config.x_min + size[0] / 2.0, config.x_max - size[0] / 2.0)
        z = rng.uniform(config.z_min + size[2] / 2.0, config.z_max - size[2] / 2.0)
        return Box((float(x), float(config.ground_height - size[1] / 2.0), float(z)), tuple(float(s) for s in size),
                   albedo)
    radius = rng.uniform(config.sphere_radius_min, config.sphere_radius_max)
    x = rng.uniform(config.x_min + radius, config.x_max - radius)
    z = rng.uniform(config.z_min + radius, config.z_max - radius)
    return Sphere((float(x), float(config.ground_height - radius), float(z)), float(radius), albedo)


def generate_scene(seed: int, config: SceneGenConfig = SceneGenConfig()) -> SceneGT:
    """Place n_primitives on the ground by rejection sampling

    Args:
        seed: the scene is a pure function of seed and config
        config: primitive count, size ranges, placement area and palette

    Returns:
        the scene ground truth

    Raises:
        DensFieldGenerationError: when MAX_PLACEMENT_REJECTIONS candidates were rejected
    """
    if config.n_primitives < 1:
        raise DensFieldContractViolation("a scene needs at least one primitive, got {}".format(config.n_primitives))
    if not config.sigma_solid > 0.0:
        raise DensFieldContractViolation("sigma_solid must be positive, got {}".format(config.sigma_solid))
    rng = np.random.default_rng(seed)
    placed = []  # type: typing.List[Primitive]
    rejections = 0
    while len(placed) < config.n_primitives:
        candidate = _draw_primitive(rng, config)
        if any(aabb_overlap_fraction(candidate, other) > MAX_OVERLAP_FRACTION for other in placed):
            rejections += 1
            if rejections >= MAX_PLACEMENT_REJECTIONS:
                raise DensFieldGenerationError("scene {}: gave up after {} rejected placements with {} of {} "
                                               "primitives placed".format(seed, rejections, len(placed),
                                                                          config.n_primitives))
            continue
        placed.append(candidate)
    tallest = max(config.box_size_max, 2.0 * config.sphere_radius_max)
    bounds = ((config.x_min, config.ground_height - tallest, config.z_min),
              (config.x_max, config.ground_height, config.z_max))
    logger.debug("scene %d placed %d primitives after %d rejections", seed, len(placed), rejections)
    return SceneGT(tuple(p for p in placed if isinstance(p, Box)), tuple(p for p in placed if isinstance(p, Sphere)),
                   config.ground_height, tuple(config.ground_albedo), config.sigma_solid, bounds, seed)


def audit_scene(scene: SceneGT, eval_low: Vector = (-9.0, 0.0, 3.0),
                eval_high: Vector = (9.0, 1.0, 23.0)) -> typing.List[str]:
    """Every broken scene invariant as a message, an empty list for a sound scene"""
    problems = []
    if not scene.sigma_solid > 0.0:
        problems.append("sigma_solid {} is not positive".format(scene.sigma_solid))
    if not scene.primitives:
        problems.append("scene has no primitives")
    for index, primitive in enumerate(scene.primitives):
        low, high = primitive.aabb()
        if not all(0.0 <= value <= 1.0 for value in primitive.albedo):
            problems.append("primitive {} albedo {} outside [0, 1]".format(index, primitive.albedo))
        if np.any(high <= np.asarray(eval_low)) or np.any(low >= np.asarray(eval_high)):
            problems.append("primitive {} misses the evaluation volume".format(index))
        if np.any(low < np.asarray(scene.bounds[0]) - 1e-9) or np.any(high > np.asarray(scene.bounds[1]) + 1e-9):
            problems.append("primitive {} leaves the scene bounds".format(index))
        for other_index, other in enumerate(scene.primitives[:index]):
            if aabb_overlap_fraction(primitive, other) > MAX_OVERLAP_FRACTION:
                problems.append("primitives {} and {} overlap".format(other_index, index))
    if not all(0.0 <= value <= 1.0 for value in scene.ground_albedo):
        problems.append("ground albedo {} outside [0, 1]".format(scene.ground_albedo))
    return problems

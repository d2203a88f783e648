# pylint: disable=missing-function-docstring
import numpy as np
import pytest

from densfield.core.exceptions import DensFieldContractViolation
from densfield.eval import profile_image, render_profile
from densfield.synthetic import Box, GridSpec, SceneGT, gt_density, read_ppm

GRID = GridSpec((4, 2, 5), (-2.0, 0.0, 3.0), (2.0, 1.0, 8.0))


def test_empty_grid_is_white(tmp_path):
    render_profile(np.zeros(GRID.resolution), GRID, tmp_path / 'empty.ppm')
    assert np.all(read_ppm(tmp_path / 'empty.ppm') == 1.0)


def test_solid_grid_is_black(tmp_path):
    render_profile(np.full(GRID.resolution, 50.0), GRID, tmp_path / 'solid.ppm')
    assert np.all(read_ppm(tmp_path / 'solid.ppm') <= 1.0 / 255.0)


def test_footprint_of_a_box():
    box = Box((0.5, 0.5, 5.5), (1.0, 2.0, 1.0), (1.0, 1.0, 1.0))
    scene = SceneGT((box,), (), 1.5, (0.5, 0.5, 0.5), 50.0, ((0.0, -0.5, 5.0), (1.0, 1.5, 6.0)), 0)
    sigma = gt_density(scene, GRID.cell_centers())
    dark = profile_image(sigma, GRID)[..., 0] < 0.5
    expected = np.zeros((5, 4), dtype=bool)
    # x cell 2 holds [0, 1], z cell 2 holds [5, 6], far rows on top
    expected[5 - 1 - 2, 2] = True
    assert np.array_equal(dark, expected)


def test_more_density_never_lightens():
    rng = np.random.default_rng(0)
    sigma = rng.uniform(0.0, 3.0, size=GRID.resolution)
    base = profile_image(sigma, GRID)
    for _ in range(20):
        raised = sigma.copy()
        raised[tuple(rng.integers(0, extent) for extent in GRID.resolution)] += rng.uniform(0.0, 5.0)
        assert np.all(profile_image(raised, GRID) <= base)


@pytest.mark.xfail(raises=DensFieldContractViolation, strict=True)
def test_grid_must_match():
    profile_image(np.zeros((4, 2, 4)), GRID)

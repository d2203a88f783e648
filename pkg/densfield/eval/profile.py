"""Top-down renderings of density grids"""
import logging

import numpy as np

from densfield.core.exceptions import DensFieldContractViolation
from densfield.synthetic.grids import GridSpec
from densfield.synthetic.ppm import write_ppm

logger = logging.getLogger(__name__)


def profile_image(sigma: np.ndarray, grid: GridSpec) -> np.ndarray:
    """(nz, nx, 3) grey image, transmittance through each vertical column of cells

    Rows run from the far end of the grid (top) to the near end, columns from left to right. Empty columns are
    white, columns holding optical depth t read exp(-t).

    >>> profile_image(np.zeros((2, 1, 3)), GridSpec((2, 1, 3), (0, 0, 0), (1, 1, 1))).shape
    (3, 2, 3)
    """
    sigma = np.asarray(sigma, dtype=np.float64)
    if sigma.shape != grid.resolution:
        raise DensFieldContractViolation("density grid {} does not match resolution {}".format(
            sigma.shape, grid.resolution))
    if np.any(sigma < 0.0) or not np.all(np.isfinite(sigma)):
        raise DensFieldContractViolation("densities must be finite and non negative")
    optical_depth = sigma.sum(axis=1) * grid.cell_size[1]
    transmittance = np.exp(-optical_depth).T[::-1]
    return np.repeat(transmittance[:, :, None], 3, axis=2)


def render_profile(sigma: np.ndarray, grid: GridSpec, path) -> np.ndarray:
    """Write profile_image as a PPM, returns the image"""
    image = profile_image(sigma, grid)
    write_ppm(path, image)
    logger.info("wrote profile %s", path)
    return image

from densfield.geometry.camera import CameraModel, Ray, project, project_points, ray_through_pixel, \
    rays_through_pixels, frustum_mask, frustum_masks, read_camera_file, write_camera_file
from densfield.geometry.sampling import SamplerConfig, RaySamples, sample_ray_points, sample_rays_points, \
    sample_depths

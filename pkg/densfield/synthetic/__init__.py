from densfield.synthetic.scene import SceneGT, SceneGenConfig, Box, Sphere, generate_scene, audit_scene, empty_scene
from densfield.synthetic.oracle import gt_density, render_gt_image, render_gt_depth, visibility, observed, occupancy
from densfield.synthetic.frames import RigConfig, Frame, FrameSet, build_frameset, augment_frameset
from densfield.synthetic.grids import GridSpec, read_grid_file, write_grid_file
from densfield.synthetic.ppm import read_ppm, write_ppm
from densfield.synthetic.dataset import SceneRecord, write_dataset, read_dataset, generate_split

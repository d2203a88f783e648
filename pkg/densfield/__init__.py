# import useful core modules to the top level package
from densfield.core import exceptions
from densfield.core.cache import densfield_version
from densfield.core.config import resolve_settings, write_snapshot, read_snapshot
# the pipeline stages most callers need
from densfield.synthetic import generate_split, write_dataset, read_dataset
from densfield.train import run_training, load_checkpoint, save_checkpoint
from densfield.eval import run_occupancy_evaluation, run_depth_evaluation, run_profiles
# it should always be easy to run tests, which are shipped with the densfield package
from densfield.util._tester import test

__version__ = densfield_version()

# pylint: disable=invalid-name

# BE REALLY CAREFUL WHAT YOU IMPORT HERE, constants should be lowest level module
import hashlib
import math
import typing

import numpy as np

# every array that takes part in a computation is stored with this dtype
FLOAT_DTYPE = np.float64

# additive mask applied to invalid logits, a finite stand-in for -inf
MASKED_LOGIT = -1e30  # type: float

# *** file formats ***
CHECKPOINT_MAGIC = b'DFLD1'  # type: bytes
GRID_MAGIC = b'OGRD1'  # type: bytes
PPM_MAGIC = b'P6'  # type: bytes
PPM_MAXVAL = 255  # type: int

# reserved path prefixes inside a checkpoint file
ADAM_FIRST_MOMENT_PREFIX = 'adam.m.'
ADAM_SECOND_MOMENT_PREFIX = 'adam.v.'
ADAM_STEP_PATH = 'adam.t'

# read 1mb of files at a time when computing digests, changing this never alters a digest
FILE_IO_CHUNK_SIZE = 1024 * 1024

DEFAULT_HASH_ALGO = hashlib.sha256

# hash algo can be a str of a method in hashlib or the callable itself
HashAlgoType = typing.Union[str, typing.Callable]

# *** geometry ***
DEFAULT_Z_NEAR = 3.0  # type: float
DEFAULT_Z_FAR = 23.0  # type: float
DEFAULT_N_SAMPLES = 64  # type: int
MIN_IMAGE_EXTENT = 8  # type: int
ROTATION_TOLERANCE = 1e-9  # type: float
SAMPLING_MODES = ('inverse', 'linear')

# *** networks ***
FEATURE_CHANNELS = 64  # type: int
PE_FREQUENCIES = 6  # type: int
PE_DIM = 3 + 3 * 2 * PE_FREQUENCIES  # type: int
HEAD_INPUT_DIM = FEATURE_CHANNELS + PE_DIM  # type: int

# (MLP_1 hidden, view feature size, MLP_2 hidden); small has no MLP_2 and a single density logit
HEAD_SIZES = {
    'small': (128, 1, 0),
    'middle': (128, 16, 16),
    'large': (256, 32, 32),
}  # type: typing.Dict[str, typing.Tuple[int, int, int]]
SV_HIDDEN = 64  # type: int

# *** scenes ***
DEFAULT_SIGMA_SOLID = 50.0  # type: float
VISIBILITY_OPTICAL_DEPTH = math.log(2.0)  # type: float
MAX_PLACEMENT_REJECTIONS = 1000  # type: int
MAX_OVERLAP_FRACTION = 0.5  # type: float

# *** training ***
STAGE_MV = 'mv'
STAGE_KD = 'kd'
STAGES = (STAGE_MV, STAGE_KD)

# parameter path prefixes, used to decide what is frozen in each stage
BACKBONE_PREFIX = 'backbone.'
MV_HEAD_PREFIX = 'heads.mv.'
SV_HEAD_PREFIX = 'heads.sv.'

# *** evaluation ***
EVAL_MODES = ('sv', 'mv-1view', 'mv-nview', 'kd', 'gt')
REPORT_COLUMNS = ('mode', 'O_acc', 'O_prec', 'O_rec', 'IE_acc', 'IE_prec', 'IE_rec', 'AbsRel', 'RMSE', 'delta125')

UNKNOWN_VERSION = "unknown"

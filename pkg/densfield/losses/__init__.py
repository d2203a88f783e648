from densfield.losses.photometric import LossConfig, PatchBatch, ssim_map, photometric_loss, edge_aware_smoothness, \
    total_loss
from densfield.losses.distillation import kd_loss

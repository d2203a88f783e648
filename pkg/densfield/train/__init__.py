"""Two stage training: self supervised multi view fitting, then distillation in to the single view head"""
from densfield.train.checkpoint import Checkpoint, new_checkpoint, start_distillation, save_checkpoint, \
    load_checkpoint
from densfield.train.steps import TrainConfig, learning_rate, view_dropout, train_step_mv, train_step_kd, \
    kd_validation_loss
from densfield.train.runner import TrainingResult, run_training, train_framesets

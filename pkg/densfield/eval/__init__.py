"""Occupancy and depth evaluation"""
from densfield.eval.metrics import Confusion, DepthMetrics, MetricsReport, confusion_counts, occupancy_metrics, \
    depth_metrics, write_report, occupancy_accuracy_by_depth
from densfield.eval.occupancy import EvalConfig, OccupancyEval, predict_occupancy_grid, evaluate_record, mode_label
from densfield.eval.depth import predict_depth_map, evaluate_depth
from densfield.eval.profile import profile_image, render_profile
from densfield.eval.runner import run_occupancy_evaluation, run_depth_evaluation, run_profiles

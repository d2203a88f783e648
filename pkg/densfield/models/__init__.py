"""Backbone, density heads and the fields built from them"""
import numpy as np

from densfield.tensor import ParamSet
from densfield.models.backbone import encode, sample_feature, sample_features, init_backbone
from densfield.models.heads import positional_encoding, density_sv, density_mv, masked_softmax, init_heads
from densfield.models.fields import MultiViewField, SingleViewField, ConstantField, evaluate_field


def build_params(head_size: str = 'middle', seed: int = 0) -> ParamSet:
    """Freshly initialised backbone and heads, deterministic in seed"""
    rng = np.random.default_rng(seed)
    params = ParamSet()
    init_backbone(params, rng)
    init_heads(params, rng, head_size)
    return params

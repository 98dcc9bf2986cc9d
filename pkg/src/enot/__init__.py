"""Elastic-net optimal transport with neural dual potentials.

A potential network ``phi`` is trained by stochastic ascent on the dual of the
optimal transport problem with ground cost ``c2 ||x - y||^2 + c1 ||x - y||_1``.
Its gradient gives a sparse map ``x -> x - ST_{c1}(grad phi(x)) / (2 c2)``
that only moves the coordinates where ``|grad phi(x)_i| > c1``.
"""

from .cost import EnCost, en_cost, pairwise_cost, soft_threshold
from .ctransform import CtResult, InnerConfig, c_transform, c_transform_batch
from .potential import DimensionError, NonFiniteError, PotentialNet, init_net, load_net, save_net
from .trainer import TrainConfig, TrainLog, dual_objective_estimate, train_potential
from .transport import (
    TransportReport,
    denoising_ratio,
    feature_mask,
    saliency_report,
    transport_batch,
    transport_map,
)

__all__ = [
    "CtResult",
    "DimensionError",
    "EnCost",
    "InnerConfig",
    "NonFiniteError",
    "PotentialNet",
    "TrainConfig",
    "TrainLog",
    "TransportReport",
    "c_transform",
    "c_transform_batch",
    "denoising_ratio",
    "dual_objective_estimate",
    "en_cost",
    "feature_mask",
    "init_net",
    "load_net",
    "pairwise_cost",
    "saliency_report",
    "save_net",
    "soft_threshold",
    "train_potential",
    "transport_batch",
    "transport_map",
]

from .base import (
    LossConfig,
    LossValue,
    Objective,
    OrdinalLoss,
    SpatialLossConfig,
    combined_loss,
)
from .pointwise import (
    CrossEntropyLoss,
    ExpectationLoss,
    MonotonicityLoss,
    QuasiUnimodalLoss,
    ce_loss,
    expmse_loss,
    o2_loss,
    ordinal_expectation,
    ordinal_variance,
    qul_loss,
    qul_sets,
)
from .spatial import (
    DistanceTransformLoss,
    NeighborPairLoss,
    NeighborSystem,
    SignedDistanceLoss,
    alpha_weight,
    csdt_loss,
    csnp_loss,
    cssdf_loss,
)

__all__ = [
    "CrossEntropyLoss",
    "DistanceTransformLoss",
    "ExpectationLoss",
    "LossConfig",
    "LossValue",
    "MonotonicityLoss",
    "NeighborPairLoss",
    "NeighborSystem",
    "Objective",
    "OrdinalLoss",
    "QuasiUnimodalLoss",
    "SignedDistanceLoss",
    "SpatialLossConfig",
    "alpha_weight",
    "ce_loss",
    "combined_loss",
    "csdt_loss",
    "csnp_loss",
    "cssdf_loss",
    "expmse_loss",
    "o2_loss",
    "ordinal_expectation",
    "ordinal_variance",
    "qul_loss",
    "qul_sets",
]

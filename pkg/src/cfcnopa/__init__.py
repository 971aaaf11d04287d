"""Coherent-feedback-controlled NOPA: multipartite entanglement variances."""

from .criteria import CriterionVerdict, vlf_check
from .errors import (
    CfcNopaError,
    EmptyResult,
    LoopUnstable,
    MismatchedContext,
    SingularSystem,
    ThresholdReached,
)
from .feedback import (
    LoopAmplitudes,
    cfc_variance,
    closed_loop_amplitudes,
    closed_loop_decay_rate,
    modified_threshold,
    network_oracle,
)
from .model import AnalysisPoint, LoopParams, NopaParams, TransferSet, VarianceReport
from .nopa import (
    coupling_from_beta,
    langevin_oracle,
    nopa_only_variances,
    stand_alone_threshold,
    transfer_coefficients,
)
from .sweep import SweepResult, SweepSpec, optimize_joint, run_sweep

__version__ = "0.1.0"

__all__ = [
    "AnalysisPoint",
    "CfcNopaError",
    "CriterionVerdict",
    "EmptyResult",
    "LoopAmplitudes",
    "LoopParams",
    "LoopUnstable",
    "MismatchedContext",
    "NopaParams",
    "SingularSystem",
    "SweepResult",
    "SweepSpec",
    "ThresholdReached",
    "TransferSet",
    "VarianceReport",
    "cfc_variance",
    "closed_loop_amplitudes",
    "closed_loop_decay_rate",
    "coupling_from_beta",
    "langevin_oracle",
    "modified_threshold",
    "network_oracle",
    "nopa_only_variances",
    "optimize_joint",
    "run_sweep",
    "stand_alone_threshold",
    "transfer_coefficients",
    "vlf_check",
]

"""Simulation and validation toolkit for (alpha, T) preferential-attachment graphs."""

from .core import (
    INF, ArrivalSchedule, LabelSequence, ModelParams, MultigraphView, StickWeights, TestReport,
    multigraph_from_labels, validate_schedule,
)
from .errors import (
    AtGraphError, BadParams, BadSchedule, CapExceeded, DegenerateSupport, EmptySample,
    Inconsistent, InsufficientData, InsufficientTail, LengthMismatch, MalformedSequence,
    ScheduleExhausted, ZeroSum,
)
from .likelihood import gibbs_v_marginal, log_prob_labels, log_prob_partition
from .partition import Partition, phi, phi_inverse
from .samplers import sample_db, sample_stick_breaking

__version__ = "0.1.0"

__all__ = [
    "INF", "ArrivalSchedule", "LabelSequence", "ModelParams", "MultigraphView", "StickWeights",
    "TestReport", "multigraph_from_labels", "validate_schedule",
    "AtGraphError", "BadParams", "BadSchedule", "CapExceeded", "DegenerateSupport",
    "EmptySample", "Inconsistent", "InsufficientData", "InsufficientTail", "LengthMismatch",
    "MalformedSequence", "ScheduleExhausted", "ZeroSum",
    "gibbs_v_marginal", "log_prob_labels", "log_prob_partition",
    "Partition", "phi", "phi_inverse", "sample_db", "sample_stick_breaking",
]

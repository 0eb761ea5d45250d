"""Agent-based simulation of recommendation-driven misinformation spread."""

from .domain import (
    ALGORITHMS,
    AgentKind,
    AgentProfile,
    ContentItem,
    EpidemicState,
    InteractionKind,
    InteractionLog,
    InteractionRecord,
    RandomSource,
    SimulationConfig,
    sample_unit_vector,
    validate_config,
)
from .engine import SimulationModel, run
from .metrics import RunSummary, StepMetricsRow

__version__ = "0.1.0"

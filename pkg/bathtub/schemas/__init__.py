"""
Pydantic schemas for observations, estimates, risk reports and run configuration.
"""

from bathtub.schemas.data import CensoredSample, EventLog, ObservedData, RegressionData, Sample
from bathtub.schemas.estimate import ModeSelection, ShapeEstimate
from bathtub.schemas.risk import EstimatorSpec, RiskBracket, RiskReport, TruthSpec
from bathtub.schemas.run import RunConfig

__all__ = [
    # Observations
    "Sample",
    "CensoredSample",
    "RegressionData",
    "EventLog",
    "ObservedData",
    # Estimates
    "ModeSelection",
    "ShapeEstimate",
    # Risk
    "RiskBracket",
    "TruthSpec",
    "EstimatorSpec",
    "RiskReport",
    # Runs
    "RunConfig",
]

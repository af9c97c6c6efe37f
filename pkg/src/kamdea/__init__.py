"""KAM efficiency scores and outlier detection under variable returns to scale."""

from .datagen import LabeledSample, ScenarioSpec, generate
from .errors import (ConfigurationError, DegenerateScoreError, GenerationError, IOFailure,
                     KamError, ParseError, SolverError, StructuralError)
from .kam import (EfficiencyClass, KamEvaluation, KamScores, KamSolution, KamTargets,
                  classify_efficiency, compute_scores, compute_targets, evaluate_dmu,
                  solve_linear_kam, solve_nonlinear_kam)
from .lp import LinearProgram, LpSolution, LpStatus, solve_lp
from .outliers import DetectorThresholds, DiagnosticSeries, OutlierReport, detect, evaluate_sample
from .types import DMU, EpsilonScheme, KamConfig, Sample, WeightScheme

__version__ = "0.1.0"

__all__ = [
    "DMU", "Sample", "EpsilonScheme", "WeightScheme", "KamConfig",
    "LinearProgram", "LpSolution", "LpStatus", "solve_lp",
    "KamSolution", "KamTargets", "KamScores", "EfficiencyClass", "KamEvaluation",
    "solve_linear_kam", "compute_targets", "compute_scores", "classify_efficiency",
    "solve_nonlinear_kam", "evaluate_dmu",
    "DetectorThresholds", "DiagnosticSeries", "OutlierReport", "evaluate_sample", "detect",
    "ScenarioSpec", "LabeledSample", "generate",
    "KamError", "ParseError", "ConfigurationError", "StructuralError", "SolverError",
    "DegenerateScoreError", "GenerationError", "IOFailure",
]

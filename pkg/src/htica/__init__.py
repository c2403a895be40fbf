"""Heavy-tailed independent component analysis.

The pipeline orthogonalizes the data (centroid-body scaling or the raw
second-moment matrix), optionally applies Gaussian damping, and runs
symmetric FastICA; the estimate is mapped back to the original coordinates.
"""

from .centroid import EmpiricalCentroidBody, LpSolution, OracleAnswer
from .damping import DampingParams, DampingReport, acceptance_fraction, choose_R, damp
from .errors import *  # noqa: F401,F403
from .evaluation import ColumnMatching, RecoveryReport, amari_index, evaluate, frobenius_error, match_columns
from .harness import ExperimentConfig, ResultRow, ResultTable, emit_csv, emit_plot_data, run_experiment
from .ica import ContrastFunction, IcaEstimate, PipelineConfig, PipelineResult, fastica, run_htica
from .orthogonalize import (
    Orthogonalizer,
    OrthogonalityDiagnostics,
    diagnostics,
    orthogonalize,
    orthogonalize_centroid,
    orthogonalize_covariance,
    scale_samples_centroid,
)
from .sampling import (
    IcaInstance,
    generate_ica_data,
    generate_mixing_matrix,
    sample_component,
    sample_components,
    symmetrize,
)

__version__ = "0.1.0"

"""Hot-span detection in asynchronous independent cascade diffusion."""

from .detect import (
    CandidateSet,
    DetectionError,
    DetectionReport,
    Span,
    collect_time_points,
    detect_naive,
    detect_proposed,
    gradient_prefix,
    max_interval,
    prob_error,
    span_error,
)
from .em import EMConfig, EmptyPartitionError, FitError, FitResult, fit_piecewise, fit_span, fit_uniform
from .experiment import ExperimentConfig, ExperimentReport, activity_series, run_experiment
from .graph import Graph, GraphFormatError, generate_random_graph, load_edge_list, mean_out_degree
from .likelihood import (
    DataConsistencyError,
    ParentCache,
    build_cache,
    link_gradient,
    log_likelihood_piecewise,
    log_likelihood_span,
    log_likelihood_uniform,
)
from .multispan import SegmentationState, description_length, detect_multispan
from .simulate import Dataset, Episode, PiecewiseSchedule, active_before, simulate_dataset, simulate_episode

__version__ = "0.1.0"

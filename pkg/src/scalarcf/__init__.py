"""Complementary filtering on SO(3) driven by sparse scalar measurements
of inertial reference vectors, with the classical vector-matching filter
as a special case."""

__version__ = "0.1.0"

from .so3 import (
    hat,
    vee,
    exp_so3,
    log_so3,
    rotation_angle,
    project_to_so3,
    euler_zyx,
    euler_zyx_angles,
)
from .sensors import (
    SensorChannel,
    SensorBank,
    scalar_bank,
    vector_bank,
    measure,
    output_error,
    gram,
    axes_factorization,
)
from .observer import (
    ObserverState,
    InnovationReport,
    innovation,
    classical_innovation,
    observer_step,
    truth_step,
)
from .analysis import (
    ErrorMetrics,
    error_metrics,
    ExcitationWindow,
    epsilon_two_refs,
    epsilon_two_axes,
    basin_margin,
    solve_theta_star,
    certify,
)
from .scenarios import ScenarioConfig, config_for, variants_for, sample
from .engine import RunRecord, RunManifest, run, timed_run, emit_csv, load_csv
from .chart import emit_chart

__all__ = [
    "__version__",
    "hat",
    "vee",
    "exp_so3",
    "log_so3",
    "rotation_angle",
    "project_to_so3",
    "euler_zyx",
    "euler_zyx_angles",
    "SensorChannel",
    "SensorBank",
    "scalar_bank",
    "vector_bank",
    "measure",
    "output_error",
    "gram",
    "axes_factorization",
    "ObserverState",
    "InnovationReport",
    "innovation",
    "classical_innovation",
    "observer_step",
    "truth_step",
    "ErrorMetrics",
    "error_metrics",
    "ExcitationWindow",
    "epsilon_two_refs",
    "epsilon_two_axes",
    "basin_margin",
    "solve_theta_star",
    "certify",
    "ScenarioConfig",
    "config_for",
    "variants_for",
    "sample",
    "RunRecord",
    "RunManifest",
    "run",
    "timed_run",
    "emit_csv",
    "load_csv",
    "emit_chart",
]

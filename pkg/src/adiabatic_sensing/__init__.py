"""Simulation toolkit for adiabatic parameter-amplification sensing."""
__version__ = "0.1.0"

from .adiabatic import SweepResult, SweepSchedule, adiabatic_time, make_schedule, sweep
from .dd import DDCycle, audit_cycle, build_cycle, decoupling_gate, effective_interaction_analytic, gate_duration
from .errors import ConfigError, InvariantError, ParameterError
from .estimate import (
    SensitivityReport,
    negativity,
    scaling_fit,
    scan_sensitivity,
    sensitivity_closed_form,
    sensitivity_from_curve,
    sql_and_enhancement,
)
from .model import DressedFrame, SensorParams, amplified_field, ground_state, omega
from .noise import NoiseSpec, apply_noise, sample_trajectory
from .protocol import (
    RamseyConfig,
    SignalCurve,
    aligned_tau,
    cp_map_apply,
    full_oracle,
    optimal_interrogation,
    ramsey_run,
)

__all__ = [
    "__version__", "SweepResult", "SweepSchedule", "adiabatic_time", "make_schedule", "sweep",
    "DDCycle", "audit_cycle", "build_cycle", "decoupling_gate", "effective_interaction_analytic", "gate_duration",
    "ConfigError", "InvariantError", "ParameterError",
    "SensitivityReport", "negativity", "scaling_fit", "scan_sensitivity", "sensitivity_closed_form",
    "sensitivity_from_curve", "sql_and_enhancement",
    "DressedFrame", "SensorParams", "amplified_field", "ground_state", "omega",
    "NoiseSpec", "apply_noise", "sample_trajectory",
    "RamseyConfig", "SignalCurve", "aligned_tau", "cp_map_apply", "full_oracle", "optimal_interrogation", "ramsey_run",
]

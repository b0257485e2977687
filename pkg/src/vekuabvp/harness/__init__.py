"""Verification suite, presets, configuration and end-to-end runs."""
from .coefficients import CoefficientError, cos4_bump, parse_coefficient
from .config import SCHEMA, ConfigError, RunConfig, load_config
from .pipeline import (EXIT_CONFIG, EXIT_DIVERGED, EXIT_ERROR, EXIT_OK, EXIT_VERIFY, PipelineResult,
                       boundary_suite, build_case, nonuniqueness_demo, run_pipeline, solve_case)
from .presets import PRESETS, preset, preset_names
from .probes import ConeProbe, angular_limit_estimate, probe_angles, probe_field
from .residuals import pde_residual

__all__ = [
    "CoefficientError", "cos4_bump", "parse_coefficient", "SCHEMA", "ConfigError", "RunConfig",
    "load_config", "EXIT_CONFIG", "EXIT_DIVERGED", "EXIT_ERROR", "EXIT_OK", "EXIT_VERIFY",
    "PipelineResult", "boundary_suite", "build_case", "nonuniqueness_demo", "run_pipeline",
    "solve_case", "PRESETS", "preset", "preset_names", "ConeProbe", "angular_limit_estimate",
    "probe_angles", "probe_field", "pde_residual",
]

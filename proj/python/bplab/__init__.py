"""Barren-plateau initialisation lab: simulator, AdaInit search, experiments."""

from ._bplab import (  # noqa: F401
    CircuitSpec,
    QnnParams,
    ShapeMismatch,
    InvalidArgument,
    DataError,
    CapacityError,
    Error,
    simulate,
    sample_params,
    circuit_expectations,
    forward,
    gradients,
    train_and_probe,
    threshold,
    expected_improvement,
    run_adainit,
    parse_and_validate,
    format_params,
    hitting_time,
    prepare,
    validate_config,
    run_sweep,
)

__version__ = "0.1.0"

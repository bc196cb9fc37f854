"""Center-of-inertia frequency and RoCoF estimation from multi-sensor frequency data."""

from ._core import (  # noqa: F401
    CoiError,
    DetectorConfig,
    EventWindow,
    GapPolicy,
    MeasurementSet,
    SolverConfig,
    align,
    build_system,
    cmd_compare,
    cmd_estimate,
    cmd_simulate,
    coi_series,
    detect_event,
    estimate_event_mw,
    estimate_proposed,
    manual_window,
    median_baseline,
    parse_csv,
    quality_report,
    rocof_nerc,
    scenario_presets,
    simulate,
    solve_weights,
    system_inertia,
    true_coi,
)

__all__ = [name for name in dir() if not name.startswith("_")]

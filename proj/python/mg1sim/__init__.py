"""Multi-class M/G/1 frame-based scheduling and power control simulator."""

from ._mg1sim import (
    Config,
    Mg1simError,
    conservation_value,
    delay_region,
    enumerate_vertices,
    expected_frame_size,
    load_config,
    load_profile,
    min_penalty_target,
    min_power_target,
    priority_delays,
    simulate,
    simulate_replications,
)

__all__ = [
    "Config",
    "Mg1simError",
    "conservation_value",
    "delay_region",
    "enumerate_vertices",
    "expected_frame_size",
    "load_config",
    "load_profile",
    "min_penalty_target",
    "min_power_target",
    "priority_delays",
    "simulate",
    "simulate_replications",
]

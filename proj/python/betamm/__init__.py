"""Python bindings for the betamm C++ core."""

from ._betamm import (
    BetammError,
    DayData,
    EpisodeResult,
    from_mode_concentration,
    generate_synthetic_day,
    kappa_of_inventory,
    omega_of_inventory,
    quantise_volumes,
    run_fixed_episode,
    run_inventory_episode,
    run_null_episode,
    scaled_beta_pdf,
    to_mode_concentration,
)

__all__ = [
    "BetammError",
    "DayData",
    "EpisodeResult",
    "from_mode_concentration",
    "generate_synthetic_day",
    "kappa_of_inventory",
    "omega_of_inventory",
    "quantise_volumes",
    "run_fixed_episode",
    "run_inventory_episode",
    "run_null_episode",
    "scaled_beta_pdf",
    "to_mode_concentration",
]

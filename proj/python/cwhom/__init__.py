"""CW multi-photon HOM interference simulator (SI units throughout)."""

from ._core import (  # noqa: F401
    FbgModel,
    FrequencyGrid,
    InvalidModelError,
    ResolutionError,
    Scenario,
    UnreliablePlateauError,
    ValidationError,
    analytic_accidentals,
    count_with_accidentals,
    cw_fourfold_rate,
    design_fbg,
    fbg_fwhm,
    fbg_reflectance,
    filter_fwhm_for_coherence_time,
    fit_fbg,
    identical_source_visibility,
    make_filter,
    optimize_window,
    pass_swaps,
    pulsed_rate,
    simulate_streams,
    visibility_map,
)

__version__ = "0.1.0"

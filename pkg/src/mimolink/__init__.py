"""Link-level Monte Carlo simulator for MIMO-OFDM diversity vs. multiplexing."""

from .channel import (
    ChannelBlock,
    DopplerSpec,
    PowerDelayProfile,
    ToneAllocation,
    build_flat_profile,
    build_tu_profile,
    case_study_allocation,
    frequency_response,
    generate_block,
    generate_tap_gains,
)
from .config import ConfigError, SystemConfig, doppler_from_velocity, load_config, preset
from .dmt import DmtCurve, dmt_curve, estimate_diversity_order, estimate_multiplexing_slope
from .harq import HarqOutcome, effective_rate, termination_round
from .montecarlo import (
    RateCurvePoint,
    TrialEnsemble,
    ergodic_rate,
    outage_prob,
    outage_rate,
    run_trials,
    run_trials_multi,
    sweep_point,
)
from .strategies import (
    MiRecord,
    Strategy,
    mi_mmse_sic_aggregate,
    mi_optimal,
    mi_per_round,
    mi_transmit_diversity,
    mmse_sic_stream_sinr,
)
from .uncoded import Constellation, SerPoint, SerScheme, alamouti_ser, qam_constellation, ser_sweep, sm_ml_ser

__all__ = [
    "ChannelBlock", "ConfigError", "Constellation", "DmtCurve", "DopplerSpec",
    "HarqOutcome", "MiRecord", "PowerDelayProfile", "RateCurvePoint", "SerPoint",
    "SerScheme", "Strategy", "SystemConfig", "ToneAllocation", "TrialEnsemble",
    "alamouti_ser", "build_flat_profile", "build_tu_profile", "case_study_allocation",
    "dmt_curve", "doppler_from_velocity", "effective_rate", "ergodic_rate",
    "estimate_diversity_order", "estimate_multiplexing_slope", "frequency_response",
    "generate_block", "generate_tap_gains", "load_config", "mi_mmse_sic_aggregate",
    "mi_optimal", "mi_per_round", "mi_transmit_diversity", "mmse_sic_stream_sinr",
    "outage_prob", "outage_rate", "preset", "qam_constellation", "run_trials",
    "run_trials_multi", "ser_sweep", "sm_ml_ser", "sweep_point", "termination_round",
]

"""Fair sharing of one channel between a scheduled transmitter and CSMA/CA stations.

Analytic throughput model, proportional-fair configuration solvers, and a
deterministic MAC-slot simulator, with a config-driven CLI on top.
"""

from .phy import (MS, SEC, US, FrameTimings, McsProfile, PhyParams,
                  ack_duration, frame_duration, frame_timings, mean_mac_slot,
                  success_duration)
from .csma import (SlotProbabilities, StationSet, idle_probability,
                   slot_probabilities, standalone_rate)
from .coexistence import (AccessMode, HeterogeneityCosts, InfeasibleConfigError,
                          ScheduledParams, Sensing, ThroughputPrediction,
                          csma_throughput, effective_off_time,
                          heterogeneity_costs, mixture_airtime,
                          on_start_collision_prob, scheduled_throughput,
                          throughput_prediction)
from .fairness import (ActivityFactors, ConvergenceError, FairAllocation,
                       UnsaturatedSpec, mixed_fair_allocation,
                       saturated_fair_off_time, success_airtime)
from .sim import (AirtimeShares, EnsembleReport, OffDistribution, OffKind,
                  SimConfig, SimReport, measure_p_idle, run, run_ensemble,
                  stream_seed)

__version__ = "0.1.0"

__all__ = [
    "MS", "SEC", "US",
    "AccessMode", "ActivityFactors", "AirtimeShares", "ConvergenceError",
    "EnsembleReport", "FairAllocation", "FrameTimings", "HeterogeneityCosts",
    "InfeasibleConfigError", "McsProfile", "OffDistribution", "OffKind",
    "PhyParams", "ScheduledParams", "Sensing", "SimConfig", "SimReport",
    "SlotProbabilities", "StationSet", "ThroughputPrediction",
    "UnsaturatedSpec",
    "ack_duration", "csma_throughput", "effective_off_time", "frame_duration",
    "frame_timings", "heterogeneity_costs", "idle_probability",
    "mean_mac_slot", "measure_p_idle", "mixed_fair_allocation",
    "mixture_airtime", "on_start_collision_prob", "run", "run_ensemble",
    "saturated_fair_off_time", "scheduled_throughput", "slot_probabilities",
    "standalone_rate", "stream_seed", "success_airtime",
    "success_duration", "throughput_prediction",
]

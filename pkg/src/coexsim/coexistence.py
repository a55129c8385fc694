"""Analytic throughput of a channel shared by a scheduled transmitter and CSMA/CA.

The scheduled transmitter alternates a fixed active period T_on with silent
periods of mean T_off_bar.  It gains channel access either preemptively
(transmitting on its slot grid regardless of channel state) or
opportunistically (grabbing an idle MAC slot and holding the channel with a
reservation signal until its next slot boundary).  Station-side detection of
the scheduled signal is either perfect carrier sensing or an explicit
announcement that is lost whenever it collides with a station transmission.

Costs of sharing are expressed per scheduled transmission:

* ``c1`` - mean station airtime lost around the edges of an active period
  (truncated partial MAC slots, undetected overhangs);
* ``c2`` - mean scheduled airtime lost to collisions with stations and to
  reservation signalling.

``c2`` for the preemptive mode is the exact expectation of the per-event
whole-slot loss the simulator implements: a collision destroys
ceil(overlap/delta) scheduled slots, where the overlap is uniform over the
on-air span of the interrupted exchange, and never more than T_on.  For
overlaps shorter than 2*delta this reduces to the familiar
ceil(delta_busy/(2*delta))*delta*p form.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass

from .csma import SlotProbabilities, StationSet, standalone_rate
from .phy import FrameTimings


class AccessMode(enum.Enum):
    PREEMPTIVE = "preemptive"        # duty cycle, ignores channel state
    OPPORTUNISTIC = "opportunistic"  # listen-before-talk with reservation


class Sensing(enum.Enum):
    PERFECT = "perfect"
    EXPLICIT_SIGNAL = "explicit"


class InfeasibleConfigError(ValueError):
    """Raised when a configuration leaves no room for feasible operation."""


@dataclass(frozen=True)
class ScheduledParams:
    """Scheduled transmitter configuration (durations in ns)."""

    mode: AccessMode
    t_on: int
    mean_t_off: float
    slot_delta: int
    rate: float                     # bit/s while transmitting data
    t_res: int | None = None        # mean reservation time, default delta/2
    sensing: Sensing = Sensing.PERFECT

    def __post_init__(self):
        if self.slot_delta <= 0:
            raise ValueError("slot_delta must be > 0")
        if self.t_on < 0:
            raise ValueError("t_on must be >= 0")
        if self.t_on % self.slot_delta != 0:
            raise ValueError("t_on must be an integer multiple of slot_delta")
        if self.mean_t_off < 0:
            raise ValueError("mean_t_off must be >= 0")
        if self.rate < 0:
            raise ValueError("rate must be >= 0")
        if self.t_res is None:
            object.__setattr__(self, "t_res", self.slot_delta // 2)
        if not 0 <= self.t_res <= self.slot_delta:
            raise ValueError("t_res must lie in [0, slot_delta]")
        if self.t_on and self.t_res > self.t_on:
            raise ValueError("t_res must not exceed t_on")


@dataclass(frozen=True)
class HeterogeneityCosts:
    p_tx_a: float    # on-start collision probability for the configured mode
    c1: float        # ns
    c2: float        # ns


@dataclass(frozen=True)
class ThroughputPrediction:
    s_csma: tuple[float, ...]        # bit/s per station
    s_sched: float                   # bit/s
    eff_off: float                   # ns, mean off time in full MAC slots
    airtime_csma_full_slots: float
    airtime_sched: float


def mixture_airtime(probs: SlotProbabilities, timings: FrameTimings) -> float:
    """Mean on-air span of a busy MAC slot, ns.

    Successes occupy T_success, collisions T_frame; the value is the busy-slot
    average (p_s*T_b + p_c*T_fra)/(p_s + p_c).  Falls back to T_success when
    nothing ever transmits (the value is then only ever multiplied by zero).
    """
    busy = probs.p_s + probs.p_c
    if busy <= 0.0:
        return float(timings.t_success)
    return (probs.p_s * timings.t_success + probs.p_c * timings.t_frame) / busy


def on_start_collision_prob(mode: AccessMode, probs: SlotProbabilities,
                            timings: FrameTimings, mean_slot: float) -> float:
    """Probability that a scheduled transmission starts into a station transmission.

    Preemptive starts are unsynchronised, so they hit ongoing airtime with
    probability (p_s*T_b + p_c*T_fra)/E[M].  Opportunistic starts claim a MAC
    slot boundary and collide iff some station transmits in that slot, 1 - p_e.
    """
    if mean_slot <= 0:
        raise ValueError("mean_slot must be > 0")
    if mode is AccessMode.OPPORTUNISTIC:
        return 1.0 - probs.p_e
    return (probs.p_s * timings.t_success + probs.p_c * timings.t_frame) / mean_slot


def _expected_clamped_ceil(span: float, delta: int, cap: int) -> float:
    """E[min(ceil(O/delta)*delta, cap)] for O uniform on (0, span]."""
    if span <= 0.0:
        return 0.0
    m = int(-(-span // delta))
    total = 0.0
    for k in range(1, m + 1):
        p_k = (min(k * delta, span) - (k - 1) * delta) / span
        total += min(k * delta, cap) * p_k
    return total


def expected_preemptive_slot_loss(probs: SlotProbabilities, timings: FrameTimings,
                                  delta: int, t_on: int) -> float:
    """Mean scheduled airtime destroyed per on-start collision, ns.

    The interrupted exchange is a success with probability proportional to
    p_s*T_b and a collision with probability proportional to p_c*T_fra; the
    residual overlap is uniform over the span and wipes whole delta slots,
    at most T_on of them.
    """
    w_s = probs.p_s * timings.t_success
    w_c = probs.p_c * timings.t_frame
    if w_s + w_c <= 0.0:
        return 0.0
    loss_s = _expected_clamped_ceil(timings.t_success, delta, t_on)
    loss_c = _expected_clamped_ceil(timings.t_frame, delta, t_on)
    return (w_s * loss_s + w_c * loss_c) / (w_s + w_c)


def heterogeneity_costs(sched: ScheduledParams, probs: SlotProbabilities,
                        timings: FrameTimings, mean_slot: float,
                        sigma: int = 9_000) -> HeterogeneityCosts:
    """Per-transmission sharing costs for the configured mode and sensing.

    sigma (ns) is only used for the advisory idle-gap check under
    explicit signalling.
    """
    p = on_start_collision_prob(sched.mode, probs, timings, mean_slot)
    delta_busy = mixture_airtime(probs, timings)
    if sched.sensing is Sensing.PERFECT:
        if sched.mode is AccessMode.PREEMPTIVE:
            c1 = (delta_busy / 2.0) * p
            c2 = expected_preemptive_slot_loss(probs, timings, sched.slot_delta,
                                               sched.t_on) * p
        else:
            c1 = 0.0
            coll_loss = min(-(-timings.t_frame // sched.slot_delta) * sched.slot_delta,
                            sched.t_on) if sched.t_on else 0
            c2 = coll_loss * p + sched.t_res * (1.0 - p)
    else:
        _warn_if_idle_gaps_exceed_slot(probs, sigma, sched.slot_delta)
        # Stations only defer when the start-of-on announcement survives.
        p_hit = (probs.p_s * timings.t_success + probs.p_c * timings.t_frame) / mean_slot
        if sched.mode is AccessMode.PREEMPTIVE:
            c1 = (delta_busy / 2.0) * p_hit * (1.0 - p_hit) + delta_busy * p_hit * p_hit
            c2 = sched.t_on * p
        else:
            c1 = (delta_busy / 2.0) * (1.0 - probs.p_e) * p_hit
            c2 = sched.t_on * p + sched.t_res * (1.0 - p)
    return HeterogeneityCosts(p_tx_a=p, c1=c1, c2=c2)


def _warn_if_idle_gaps_exceed_slot(probs: SlotProbabilities, sigma: int,
                                   delta: int) -> None:
    # Explicit-signal loss accounting assumes station transmissions leave
    # idle gaps shorter than one scheduled slot.
    if probs.p_e >= 1.0:
        return
    expected_gap = sigma * probs.p_e / (1.0 - probs.p_e)
    if expected_gap > delta:
        warnings.warn(
            "mean idle gap between station transmissions exceeds one scheduled "
            "slot; explicit-signal loss accounting may be optimistic",
            RuntimeWarning,
            stacklevel=3,
        )


def effective_off_time(sched: ScheduledParams, costs: HeterogeneityCosts,
                       probs: SlotProbabilities, timings: FrameTimings,
                       mean_slot: float) -> float:
    """Mean off-period time available as full CSMA/CA MAC slots, ns.

    Uniformly mean_t_off - c1; c1 already encodes the mode and sensing model.
    """
    eff = sched.mean_t_off - costs.c1
    if eff <= 0.0:
        raise InfeasibleConfigError(
            f"mean_t_off={sched.mean_t_off} leaves no full-slot time (c1={costs.c1})")
    return eff


def csma_throughput(stations: StationSet, probs: SlotProbabilities,
                    sched: ScheduledParams, eff_off: float, mean_slot: float,
                    j: int) -> float:
    """Station j throughput, bit/s: the standalone rate scaled by the share of
    time spent in full MAC slots."""
    scale = eff_off / (sched.t_on + sched.mean_t_off)
    return standalone_rate(stations, probs, mean_slot, j) * scale


def scheduled_throughput(sched: ScheduledParams, costs: HeterogeneityCosts) -> float:
    """Scheduled transmitter throughput, bit/s: rate * (T_on - c2)/(T_on + T_off_bar)."""
    usable = sched.t_on - costs.c2
    if usable <= 0.0:
        raise InfeasibleConfigError(
            f"t_on={sched.t_on} is fully consumed by sharing costs (c2={costs.c2})")
    return sched.rate * usable / (sched.t_on + sched.mean_t_off)


def throughput_prediction(stations: StationSet, probs: SlotProbabilities,
                          timings: FrameTimings, sched: ScheduledParams,
                          mean_slot: float) -> ThroughputPrediction:
    """Full analytic prediction for one configuration."""
    costs = heterogeneity_costs(sched, probs, timings, mean_slot)
    eff = effective_off_time(sched, costs, probs, timings, mean_slot)
    cycle = sched.t_on + sched.mean_t_off
    s_csma = tuple(csma_throughput(stations, probs, sched, eff, mean_slot, j)
                   for j in range(stations.n))
    s_sched = scheduled_throughput(sched, costs)
    frac_csma = eff / cycle
    return ThroughputPrediction(
        s_csma=s_csma,
        s_sched=s_sched,
        eff_off=eff,
        airtime_csma_full_slots=frac_csma,
        airtime_sched=1.0 - frac_csma,
    )

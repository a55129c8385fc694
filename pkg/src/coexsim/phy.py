"""802.11 frame and slot timing.

All durations are carried as integer nanoseconds so that symbol-count
ceilings and slot alignment stay exact; floating point only appears in
quantities that mix probabilities with durations.
"""

from __future__ import annotations

from dataclasses import dataclass

# ns per unit
US = 1_000
MS = 1_000_000
SEC = 1_000_000_000


@dataclass(frozen=True)
class PhyParams:
    """802.11ac MAC/PHY constants (durations in ns, lengths in bits)."""

    sigma: int = 9 * US          # idle slot
    difs: int = 34 * US
    sifs: int = 16 * US
    plcp: int = 40 * US          # PLCP preamble + headers
    l_service: int = 16
    l_delimiter: int = 32
    l_mac_header: int = 288
    l_tail: int = 6
    l_ack: int = 256
    payload: int = 12000         # bits per MPDU

    def __post_init__(self):
        for name in ("sigma", "difs", "sifs", "plcp"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")
        for name in ("l_service", "l_delimiter", "l_mac_header", "l_tail",
                     "l_ack", "payload"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.difs <= self.sifs:
            raise ValueError("difs must exceed sifs")


@dataclass(frozen=True)
class McsProfile:
    """Modulation profile: bits per OFDM symbol and symbol duration (ns).

    Default is 64-QAM 5/6 on a 20 MHz channel, one spatial stream.
    """

    bits_per_symbol: int = 260
    symbol_time: int = 4 * US

    def __post_init__(self):
        if self.bits_per_symbol < 1:
            raise ValueError("bits_per_symbol must be >= 1")
        if self.symbol_time <= 0:
            raise ValueError("symbol_time must be > 0")


@dataclass(frozen=True)
class FrameTimings:
    """Derived on-air durations (ns) for a fixed aggregation level."""

    t_frame: int      # data frame, no ACK (= collision airtime)
    t_ack: int
    t_success: int    # frame + SIFS + ACK
    n_agg: int


def frame_duration(phy: PhyParams, mcs: McsProfile, n_agg: int) -> int:
    """Duration of a data frame carrying n_agg aggregated MPDUs, in ns.

    plcp + ceil((L_s + n_agg*(L_del + L_mac_h + payload) + L_t) / n_sym) * T_sym
    """
    if n_agg < 1:
        raise ValueError("n_agg must be >= 1")
    bits = phy.l_service + n_agg * (phy.l_delimiter + phy.l_mac_header + phy.payload) + phy.l_tail
    symbols = -(-bits // mcs.bits_per_symbol)
    return phy.plcp + symbols * mcs.symbol_time


def ack_duration(phy: PhyParams, mcs: McsProfile) -> int:
    """ACK frame duration in ns."""
    bits = phy.l_service + phy.l_ack + phy.l_tail
    symbols = -(-bits // mcs.bits_per_symbol)
    return phy.plcp + symbols * mcs.symbol_time


def success_duration(phy: PhyParams, mcs: McsProfile, n_agg: int) -> int:
    """Data frame plus SIFS plus ACK, in ns."""
    return frame_duration(phy, mcs, n_agg) + phy.sifs + ack_duration(phy, mcs)


def frame_timings(phy: PhyParams, mcs: McsProfile, n_agg: int) -> FrameTimings:
    t_frame = frame_duration(phy, mcs, n_agg)
    t_ack = ack_duration(phy, mcs)
    return FrameTimings(t_frame=t_frame, t_ack=t_ack,
                        t_success=t_frame + phy.sifs + t_ack, n_agg=n_agg)


def mean_mac_slot(phy: PhyParams, timings: FrameTimings, p_e: float) -> float:
    """Mean MAC slot duration in ns: sigma*p_e + (T_success + DIFS)*(1 - p_e).

    Busy slots cost the full exchange plus DIFS regardless of outcome
    (colliding stations time out waiting for the ACK).
    """
    if not 0.0 <= p_e <= 1.0:
        raise ValueError("p_e must be in [0, 1]")
    return phy.sigma * p_e + (timings.t_success + phy.difs) * (1.0 - p_e)

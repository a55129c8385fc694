"""Per-MAC-slot probabilities and standalone CSMA/CA throughput.

Station j attempts in each MAC slot with fixed probability tau_j,
independently across slots and stations (no binary exponential backoff).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .phy import SEC


@dataclass(frozen=True)
class StationSet:
    """Transmit probabilities and per-success payload bits, one entry per station."""

    taus: tuple[float, ...]
    payloads: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "taus", tuple(float(t) for t in self.taus))
        object.__setattr__(self, "payloads", tuple(int(d) for d in self.payloads))
        if len(self.taus) != len(self.payloads) or len(self.taus) == 0:
            raise ValueError("taus and payloads must be equal-length, non-empty")
        for t in self.taus:
            if not 0.0 <= t < 1.0:
                raise ValueError("each tau must satisfy 0 <= tau < 1")
        for d in self.payloads:
            if d < 0:
                raise ValueError("payload bits must be >= 0")

    @property
    def n(self) -> int:
        return len(self.taus)

    @classmethod
    def homogeneous(cls, n: int, tau: float, payload: int) -> "StationSet":
        return cls(taus=(tau,) * n, payloads=(payload,) * n)


@dataclass(frozen=True)
class SlotProbabilities:
    p_e: float                       # all silent
    p_s: float                       # exactly one transmitter
    p_c: float                       # two or more
    p_succ: tuple[float, ...] = field(default=())   # per-station success

    def __post_init__(self):
        object.__setattr__(self, "p_succ", tuple(self.p_succ))


def slot_probabilities(stations: StationSet) -> SlotProbabilities:
    """Idle/success/collision probabilities for one MAC slot.

    p_succ[j] is computed as tau_j * prod_{k!=j}(1 - tau_k), which equals
    (tau_j / (1 - tau_j)) * p_e and is exact for dyadic tau values.
    """
    taus = stations.taus
    p_e = 1.0
    for t in taus:
        p_e *= 1.0 - t
    p_succ = []
    for j, tj in enumerate(taus):
        q = tj
        for k, tk in enumerate(taus):
            if k != j:
                q *= 1.0 - tk
        p_succ.append(q)
    p_s = sum(p_succ)
    p_c = 1.0 - p_s - p_e
    return SlotProbabilities(p_e=p_e, p_s=p_s, p_c=max(p_c, 0.0), p_succ=tuple(p_succ))


def idle_probability(probs: SlotProbabilities, t_success: float, t_frame: float,
                     mean_slot: float) -> float:
    """Probability the channel is idle at a periodic sampling instant.

    1 - (p_s*T_success + p_c*T_frame) / E[M].  The caller supplies E[M]
    so the same expression serves both the generic and the
    interframe-space-aware slot model.
    """
    if mean_slot <= 0:
        raise ValueError("mean_slot must be > 0")
    return 1.0 - (probs.p_s * t_success + probs.p_c * t_frame) / mean_slot


def standalone_rate(stations: StationSet, probs: SlotProbabilities,
                    mean_slot: float, j: int) -> float:
    """Saturation throughput of station j with no scheduled transmitter, bit/s.

    p_succ[j] * D_j / E[M], with E[M] in ns.
    """
    if not 0 <= j < stations.n:
        raise IndexError(f"station index {j} out of range")
    return probs.p_succ[j] * stations.payloads[j] * SEC / mean_slot

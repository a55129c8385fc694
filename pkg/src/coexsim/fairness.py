"""Proportional-fair configuration of the scheduled transmitter.

Maximises log(s_sched) + sum_j log(s_csma_j) over the mean off time and,
when offered loads bound some stations, over the per-station attempt
ratios x_j = tau_j / (1 - tau_j).

With every station saturated the optimum is closed form: writing
z = mean_t_off - c1, the stationarity condition z/(T_on + c1 + z) = n/(n+1)
gives z* = n*(T_on + c1).  With a mixture of saturated and rate-capped
stations the optimum is characterised by

* idle-budget tightness:  prod_j (1 + x_j) = 1 / p_e_bar,
* a common x for all saturated stations,
* rate-capped stations pinned to their offered load,
* z* = n_eq * (T_on + c1) with n_eq = |C| + sum_{j not in C} lambda_j,

where lambda_j is station j's success airtime relative to a saturated
station's.  The solver below runs an active-set iteration over the
saturated set C with a damped fixed point for z inside.

Busy-slot duration in the rate/airtime constants is instantiated as the
frame transmit time T_frame (c4 = p_e_bar*(sigma - T_frame) + T_frame).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .coexistence import ScheduledParams, heterogeneity_costs
from .csma import StationSet, slot_probabilities
from .phy import SEC, FrameTimings, PhyParams, mean_mac_slot

_REL_TOL = 1e-13
_MAX_ITER = 200


class ConvergenceError(RuntimeError):
    """Active-set or fixed-point iteration failed to settle."""


class _BudgetExhausted(Exception):
    """Rate-capped stations alone need more attempt budget than the idle
    constraint allows; the most demanding one must saturate."""

    def __init__(self, station: int):
        self.station = station


@dataclass(frozen=True)
class FairAllocation:
    t_off_star: float    # ns
    frac_csma: float     # airtime fraction in full CSMA/CA MAC slots
    frac_sched: float
    z_star: float        # t_off_star - c1, ns


@dataclass(frozen=True)
class UnsaturatedSpec:
    """Offered loads (bit/s, math.inf = saturated) and boundary idle probability."""

    offered_loads: tuple[float, ...]
    p_e_bar: float

    def __post_init__(self):
        object.__setattr__(self, "offered_loads",
                           tuple(float(s) for s in self.offered_loads))
        if not 0.0 < self.p_e_bar < 1.0:
            raise ValueError("p_e_bar must lie in (0, 1)")
        if not any(math.isinf(s) for s in self.offered_loads):
            raise ValueError("at least one station must be saturated (load = inf)")
        if any(s < 0 for s in self.offered_loads):
            raise ValueError("offered loads must be >= 0")


@dataclass(frozen=True)
class ActivityFactors:
    lambdas: tuple[float, ...]
    saturated_set: frozenset[int]
    n_eq: float
    x_stars: tuple[float, ...]
    gamma_star: float


def saturated_fair_off_time(n: int, t_on: float, c1: float) -> FairAllocation:
    """Closed-form fair mean off time for n saturated stations."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if t_on <= 0:
        raise ValueError("t_on must be > 0")
    if c1 < 0:
        raise ValueError("c1 must be >= 0")
    base = t_on + c1
    z = n * base
    t_off = z + c1
    frac_csma = z / (base + z)
    return FairAllocation(t_off_star=t_off, frac_csma=frac_csma,
                          frac_sched=1.0 - frac_csma, z_star=z)


def success_airtime(x_j: float, p_e_bar: float, timings: FrameTimings,
                    z: float, t_on: float, c1: float,
                    sigma: int = 9_000) -> float:
    """Fraction of channel time station j spends in successful transmissions.

    x_j * p_e_bar * delta / c4 * z / (t_on + c1 + z), with delta the frame
    transmit time and c4 = p_e_bar*(sigma - delta) + delta.
    """
    if z <= 0:
        raise ValueError("z must be > 0")
    delta = timings.t_frame
    c4 = p_e_bar * (sigma - delta) + delta
    if c4 <= 0:
        raise ValueError("degenerate slot constants (c4 <= 0)")
    return x_j * p_e_bar * delta / c4 * (z / (t_on + c1 + z))


def mixed_fair_allocation(stations: StationSet, spec: UnsaturatedSpec,
                          sched: ScheduledParams, timings: FrameTimings,
                          phy: PhyParams | None = None,
                          c1: float | None = None,
                          ) -> tuple[FairAllocation, ActivityFactors]:
    """Fair allocation with a mixture of saturated and rate-capped stations.

    The partial-slot cost c1 is evaluated at the input operating point
    (stations.taus) unless supplied; phy defaults to the standard constants
    and is only needed for that evaluation and for sigma in c4.
    """
    if phy is None:
        phy = PhyParams()
    if len(spec.offered_loads) != stations.n:
        raise ValueError("offered_loads length must match station count")
    if c1 is None:
        probs = slot_probabilities(stations)
        mean_slot = mean_mac_slot(phy, timings, probs.p_e)
        c1 = heterogeneity_costs(sched, probs, timings, mean_slot,
                                 sigma=phy.sigma).c1

    p_bar = spec.p_e_bar
    delta = timings.t_frame
    c4 = p_bar * (phy.sigma - delta) + delta
    if c4 <= 0:
        raise ValueError("degenerate slot constants (c4 <= 0)")
    # bit/s delivered per unit x at full off-time share
    coef = [p_bar * d * SEC / c4 for d in stations.payloads]

    base = sched.t_on + c1
    loads = spec.offered_loads
    sat = {j for j, s in enumerate(loads) if math.isinf(s)}
    if not sat:
        raise ConvergenceError("saturated set is empty")

    for _ in range(_MAX_ITER):
        try:
            z, x_unsat, x_c = _solve_for_set(sat, loads, coef, p_bar, base)
        except _BudgetExhausted as exc:
            sat.add(exc.station)
            continue
        zfrac = z / (base + z)
        move = None
        for j in range(stations.n):
            if j in sat:
                if not math.isinf(loads[j]) and x_c * coef[j] * zfrac > loads[j] * (1 + 1e-12):
                    move = ("out", j)
                    break
            elif x_unsat[j] > x_c * (1 + 1e-12):
                move = ("in", j)
                break
        if move is None:
            break
        direction, j = move
        if direction == "in":
            sat.add(j)
        else:
            sat.remove(j)
        if not sat:
            raise ConvergenceError("saturated set became empty")
    else:
        raise ConvergenceError("active-set iteration did not settle")

    x_stars = tuple(x_c if j in sat else x_unsat[j] for j in range(stations.n))
    lambdas = tuple(1.0 if j in sat else x_stars[j] / x_c for j in range(stations.n))
    n_eq = len(sat) + sum(lambdas[j] for j in range(stations.n) if j not in sat)
    t_off = z + c1
    frac_csma = z / (base + z)
    alloc = FairAllocation(t_off_star=t_off, frac_csma=frac_csma,
                           frac_sched=1.0 - frac_csma, z_star=z)
    factors = ActivityFactors(lambdas=lambdas, saturated_set=frozenset(sat),
                              n_eq=n_eq, x_stars=x_stars,
                              gamma_star=1.0 / (x_c * p_bar))
    return alloc, factors


def _solve_for_set(sat: set[int], loads: tuple[float, ...], coef: list[float],
                   p_bar: float, base: float) -> tuple[float, dict[int, float], float]:
    """Fixed point in z for a fixed saturated set.

    Given z, rate-capped stations take x_j from their load constraint, the
    common saturated x comes from the idle-budget product, and z is updated
    from n_eq.  The map is monotone and contracts quickly at these scales.
    """
    n_sat = len(sat)
    unsat = [j for j in range(len(loads)) if j not in sat]
    z = n_sat * base
    for _ in range(_MAX_ITER):
        zfrac = z / (base + z)
        x_unsat = {j: loads[j] / (coef[j] * zfrac) for j in unsat}
        prod_unsat = 1.0
        for v in x_unsat.values():
            prod_unsat *= 1.0 + v
        budget = 1.0 / (p_bar * prod_unsat)
        if budget <= 1.0:
            # demand exceeds the idle budget: the most demanding rate-capped
            # station saturates (deterministic: largest x, then lowest index)
            worst = max(unsat, key=lambda j: (x_unsat[j], -j))
            raise _BudgetExhausted(worst)
        x_c = budget ** (1.0 / n_sat) - 1.0
        n_eq = n_sat + sum(x_unsat[j] / x_c for j in unsat)
        z_new = n_eq * base
        if abs(z_new - z) <= _REL_TOL * max(z, 1.0):
            return z_new, x_unsat, x_c
        z = 0.5 * (z + z_new) if z_new < 0.25 * z else z_new
    raise ConvergenceError("z fixed point did not converge")

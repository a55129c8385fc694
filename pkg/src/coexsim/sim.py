"""Discrete-event MAC-slot simulator of the shared channel.

Time is integer nanoseconds throughout, so slot boundaries, scheduled-slot
grids and airtime bucket sums are exact.  A single run is strictly
sequential and bit-deterministic given (config, seed); ensembles run
independent seeds base_seed + i, optionally across worker processes, with
results independent of the worker count.

RNG streams, derived from the run seed with splitmix64:

  stream 0      scheduled transmitter: initial phase, off-period draws
  stream 1      channel contention (all-saturated fast path) and loss draws
  stream 2 + j  station j: arrival process, and attempt draws whenever any
                station in the run is rate-limited

Channel-occupancy conventions: a busy MAC slot lasts T_success + DIFS for
both successes and collisions (stations time out waiting for the ACK); the
on-air span relevant to probing and to inter-technology overlap is
T_success for an acknowledged exchange and T_frame for collisions and for
destroyed frames (no ACK follows).

Probe instants for the idle-channel estimate are k * probe_period for
k = 1, 2, ... below the horizon; instants falling inside a scheduled-active
span are excluded from the estimate rather than counted busy.
"""

from __future__ import annotations

import enum
import math
import random
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

from .coexistence import AccessMode, ScheduledParams, Sensing
from .csma import StationSet
from .phy import MS, SEC, McsProfile, PhyParams, frame_timings

_MASK64 = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def stream_seed(seed: int, stream: int) -> int:
    """Seed for one named RNG stream of a run."""
    return _splitmix64((seed & _MASK64) ^ _splitmix64(stream + 1))


class OffKind(enum.Enum):
    DETERMINISTIC = "deterministic"
    UNIFORM_QUANTIZED = "uniform"
    EXPONENTIAL_QUANTIZED = "exponential"


@dataclass(frozen=True)
class OffDistribution:
    """Silent-period lengths; samples are rounded to a multiple of quantum (ns)."""

    kind: OffKind
    mean: int
    quantum: int
    minimum: int = 0

    def __post_init__(self):
        if self.quantum <= 0:
            raise ValueError("quantum must be > 0")
        if self.minimum < 0:
            raise ValueError("minimum must be >= 0")
        if self.kind is not OffKind.DETERMINISTIC and self.mean < self.minimum:
            raise ValueError("mean must be >= minimum")

    def sample(self, rng: random.Random) -> int:
        if self.kind is OffKind.DETERMINISTIC:
            raw = float(self.mean)
        elif self.kind is OffKind.UNIFORM_QUANTIZED:
            raw = self.minimum + rng.random() * 2.0 * (self.mean - self.minimum)
        else:
            spread = self.mean - self.minimum
            raw = self.minimum + (rng.expovariate(1.0 / spread) if spread > 0 else 0.0)
        if self.kind is not OffKind.DETERMINISTIC and raw < self.minimum:
            raw = float(self.minimum)
        return int(raw / self.quantum + 0.5) * self.quantum


@dataclass(frozen=True)
class AirtimeShares:
    idle: float
    csma_success: float
    csma_collision: float
    sched_data: float
    sched_reservation: float
    inter_tech_collision: float
    partial_slot: float

    def total(self) -> float:
        return (self.idle + self.csma_success + self.csma_collision
                + self.sched_data + self.sched_reservation
                + self.inter_tech_collision + self.partial_slot)


@dataclass(frozen=True)
class SimConfig:
    phy: PhyParams
    mcs: McsProfile
    stations: StationSet
    horizon: int
    seed: int = 1
    n_agg: int = 1
    sched: ScheduledParams | None = None
    off_dist: OffDistribution | None = None
    buffer_capacity: int | None = None          # None = unbounded
    arrival_rates: tuple[float, ...] | None = None   # bit/s, inf = saturated
    channel_loss: float = 0.0
    probe_period: int = 100 * MS

    def __post_init__(self):
        if self.horizon <= 0:
            raise ValueError("horizon must be > 0")
        if self.probe_period <= 0:
            raise ValueError("probe_period must be > 0")
        if not 0.0 <= self.channel_loss <= 1.0:
            raise ValueError("channel_loss must be in [0, 1]")
        if self.arrival_rates is None:
            object.__setattr__(self, "arrival_rates",
                               (math.inf,) * self.stations.n)
        else:
            object.__setattr__(self, "arrival_rates",
                               tuple(float(r) for r in self.arrival_rates))
        if len(self.arrival_rates) != self.stations.n:
            raise ValueError("arrival_rates length must match station count")
        if self.buffer_capacity is not None and self.buffer_capacity < 1:
            raise ValueError("buffer_capacity must be >= 1")
        if self.sched is not None:
            if self.sched.t_on <= 0:
                raise ValueError("simulated scheduled transmitter needs t_on > 0")
            if self.off_dist is None:
                raise ValueError("off_dist is required when sched is present")
            if round(self.sched.mean_t_off) != self.off_dist.mean:
                raise ValueError("sched.mean_t_off and off_dist.mean disagree")
            if self.horizon < self.sched.t_on + self.off_dist.mean:
                raise ValueError("horizon shorter than one on+off cycle")


@dataclass(frozen=True)
class SimReport:
    s_csma_emp: tuple[float, ...]
    s_sched_emp: float
    p_idle_emp: float
    airtime: AirtimeShares
    delay_samples: tuple[float, ...]
    slots_simulated: int
    eff_off_emp: float          # mean full-MAC-slot time per completed off period
    off_periods: int
    epochs: int
    on_start_hits: int          # scheduled starts that landed in station airtime
    on_start_air_loss: int      # ns of station airtime destroyed at those starts
    claim_collisions: int       # opportunistic claims that collided
    reservation_ns: int
    delivered_bits: tuple[int, ...]
    dropped_frames: tuple[int, ...]
    max_queue: tuple[int, ...]


@dataclass(frozen=True)
class EnsembleReport:
    runs: int
    mean_s_csma: tuple[float, ...]
    std_s_csma: tuple[float, ...]
    mean_s_sched: float
    std_s_sched: float
    mean_p_idle: float
    std_p_idle: float
    mean_eff_off: float
    mean_airtime: AirtimeShares
    delay_samples: tuple[float, ...]


def run(config: SimConfig) -> SimReport:
    """Simulate one seeded run and aggregate every metric."""
    return _simulate(config)


def measure_p_idle(config: SimConfig, probe_period: int | None = None) -> float:
    """Fraction of periodic probe instants that find the channel idle."""
    if probe_period is not None:
        config = replace(config, probe_period=probe_period)
    return _simulate(config).p_idle_emp


def _run_seeded(args: tuple[SimConfig, int]) -> SimReport:
    config, seed = args
    return _simulate(replace(config, seed=seed))


def run_ensemble(config: SimConfig, runs: int, base_seed: int | None = None,
                 jobs: int = 1) -> EnsembleReport:
    """runs independent simulations seeded base_seed + i, aggregated.

    Results are identical for any jobs value; workers only change wall time.
    """
    if runs < 1:
        raise ValueError("runs must be >= 1")
    if base_seed is None:
        base_seed = config.seed
    tasks = [(config, base_seed + i) for i in range(runs)]
    if jobs > 1 and runs > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, runs)) as pool:
            reports = list(pool.map(_run_seeded, tasks))
    else:
        reports = [_run_seeded(task) for task in tasks]
    return _aggregate(reports)


def _mean_std(values: list[float]) -> tuple[float, float]:
    values = [v for v in values if not math.isnan(v)]
    if not values:
        return math.nan, math.nan
    m = sum(values) / len(values)
    if len(values) < 2:
        return m, 0.0
    var = sum((v - m) ** 2 for v in values) / (len(values) - 1)
    return m, math.sqrt(var)


def _aggregate(reports: list[SimReport]) -> EnsembleReport:
    n = len(reports[0].s_csma_emp)
    mean_c, std_c = [], []
    for j in range(n):
        m, s = _mean_std([r.s_csma_emp[j] for r in reports])
        mean_c.append(m)
        std_c.append(s)
    m_sched, s_sched = _mean_std([r.s_sched_emp for r in reports])
    m_idle, s_idle = _mean_std([r.p_idle_emp for r in reports])
    eff = [r.eff_off_emp for r in reports if not math.isnan(r.eff_off_emp)]
    m_eff = sum(eff) / len(eff) if eff else math.nan
    shares = AirtimeShares(*[
        sum(getattr(r.airtime, f) for r in reports) / len(reports)
        for f in ("idle", "csma_success", "csma_collision", "sched_data",
                  "sched_reservation", "inter_tech_collision", "partial_slot")])
    delays: list[float] = []
    for r in reports:
        delays.extend(r.delay_samples)
    return EnsembleReport(
        runs=len(reports), mean_s_csma=tuple(mean_c), std_s_csma=tuple(std_c),
        mean_s_sched=m_sched, std_s_sched=s_sched,
        mean_p_idle=m_idle, std_p_idle=s_idle,
        mean_eff_off=m_eff, mean_airtime=shares, delay_samples=tuple(delays))


def _simulate(cfg: SimConfig) -> SimReport:
    phy, mcs = cfg.phy, cfg.mcs
    tim = frame_timings(phy, mcs, cfg.n_agg)
    H = cfg.horizon
    sigma = phy.sigma
    busy_len = tim.t_success + phy.difs
    air_ok = tim.t_success       # acknowledged exchange on-air span
    air_bad = tim.t_frame        # collision / destroyed frame on-air span
    n = cfg.stations.n
    taus = cfg.stations.taus
    payloads = cfg.stations.payloads
    loss_p = cfg.channel_loss

    rng_off = random.Random(stream_seed(cfg.seed, 0))
    chan_rand = random.Random(stream_seed(cfg.seed, 1)).random

    sat_flags = [math.isinf(r) for r in cfg.arrival_rates]
    fast = all(sat_flags)

    # fast-path slot draw: u < p_e idle, then cumulative per-station success
    p_e = 1.0
    for tv in taus:
        p_e *= 1.0 - tv
    cum = []
    acc = p_e
    for j in range(n):
        q = taus[j]
        for k in range(n):
            if k != j:
                q *= 1.0 - taus[k]
        acc += q
        cum.append(acc)

    # general path state
    st_rand = queues = next_arr = arr_lambda = None
    cap = cfg.buffer_capacity
    if not fast:
        st_rng = [random.Random(stream_seed(cfg.seed, 2 + j)) for j in range(n)]
        st_rand = [r.random for r in st_rng]
        queues = [deque() for _ in range(n)]
        next_arr = [0.0] * n
        arr_lambda = [0.0] * n
        for j in range(n):
            r = cfg.arrival_rates[j]
            if sat_flags[j] or r <= 0.0:
                next_arr[j] = math.inf
            else:
                arr_lambda[j] = r / (payloads[j] * SEC)   # frames per ns
                next_arr[j] = st_rng[j].expovariate(arr_lambda[j])

    delivered = [0] * n
    prev_comp = [0] * n
    dropped = [0] * n
    max_q = [0] * n
    delays: list[float] = []

    idle_ns = succ_ns = coll_ns = data_ns = res_ns = itc_ns = part_ns = 0
    slots = 0
    probe_P = cfg.probe_period
    next_probe = probe_P
    probes_tot = probes_idle = 0
    that_off = 0
    that_total = 0
    offs = 0
    epochs = 0
    hits = 0
    hit_air_loss = 0
    claim_colls = 0
    reservation_ns = 0

    t = 0
    cut_air_end = 0          # set by run_slots on "cut": nominal on-air end
    cut_slot_end = 0         # set on "cut": station-side end of the cut slot
    cut_start = 0            # set on "cut": start of the cut slot
    hit_info = (0, 0)        # (air_end, slot_end) set on "hit"

    def probes_span(a: int, b: int, idle_from: int) -> None:
        # count probes in [a, b); idle iff instant >= idle_from
        nonlocal next_probe, probes_tot, probes_idle
        while next_probe < b:
            probes_tot += 1
            if next_probe >= idle_from:
                probes_idle += 1
            next_probe += probe_P

    def probes_skip(b: int) -> None:
        # scheduled transmitter active: probes in [., b) are excluded
        nonlocal next_probe
        if next_probe < b:
            k = -(-(b - next_probe) // probe_P)
            next_probe += k * probe_P

    def probes_busy(a: int, b: int) -> None:
        probes_span(a, b, b)

    def general_draw(b: int) -> int:
        # advance arrivals to b, then per-station attempts; -1 idle, -2 collision
        for j in range(n):
            na = next_arr[j]
            if na <= b:
                qj = queues[j]
                while na <= b:
                    if cap is None or len(qj) < cap:
                        qj.append(na)
                        if len(qj) > max_q[j]:
                            max_q[j] = len(qj)
                    else:
                        dropped[j] += 1
                    na += st_rng_exp(j)
                next_arr[j] = na
        count = 0
        winner = -1
        for j in range(n):
            if (sat_flags[j] or queues[j]) and st_rand[j]() < taus[j]:
                count += 1
                winner = j
        if count == 0:
            return -1
        return winner if count == 1 else -2

    def st_rng_exp(j: int) -> float:
        return st_rng[j].expovariate(arr_lambda[j])

    def credit(j: int, comp: int) -> None:
        delivered[j] += payloads[j]
        if fast or sat_flags[j]:
            hol = prev_comp[j]
        else:
            a = queues[j].popleft()
            pc = prev_comp[j]
            hol = a if a > pc else pc
        delays.append(comp - hol)
        prev_comp[j] = comp

    def run_slots(limit: int, kind: str, destroy: bool = False) -> str:
        """Advance the CSMA/CA slot process.

        kind "cut":   truncate the slot in progress at limit (<= H)
        kind "hit":   like cut, but if station airtime covers limit the slot
                      is left open and "hit" is returned (explicit signalling)
        kind "claim": stop at the first slot boundary >= limit
        destroy:      free-run inside a scheduled epoch ending at limit; every
                      transmission starting before limit is lost, slots
                      crossing limit complete with split accounting
        """
        nonlocal t, idle_ns, succ_ns, coll_ns, itc_ns, part_ns
        nonlocal that_off, slots, cut_air_end, cut_slot_end, cut_start, hit_info
        cut_air_end = 0
        cut_slot_end = 0
        while True:
            b = t
            if b >= limit:
                return "limit"
            if b >= H:
                return "cut"
            if fast:
                u = chan_rand()
                if u < p_e:
                    outcome = -1
                else:
                    outcome = -2
                    for k in range(n):
                        if u < cum[k]:
                            outcome = k
                            break
            else:
                outcome = general_draw(b)

            if outcome == -1:
                end = b + sigma
                air_len = 0
            else:
                end = b + busy_len
                if outcome >= 0 and not destroy:
                    if loss_p and chan_rand() < loss_p:
                        outcome = -3            # success lost to channel noise
                        air_len = air_bad
                    else:
                        air_len = air_ok
                else:
                    air_len = air_bad

            if destroy:
                hard = limit if limit < H else H
                if end <= hard:
                    itc_ns += end - b
                    probes_skip(end)
                    slots += 1
                    t = end
                    continue
                # crossing slot: epoch part is lost time, overhang is partial
                pre_end = hard
                itc_ns += pre_end - b
                probes_skip(pre_end)
                if end > H:
                    over_end = H
                    status = "cut"
                else:
                    over_end = end
                    status = "limit"
                if over_end > pre_end:
                    part_ns += over_end - pre_end
                    probes_span(pre_end, over_end, max(b + air_len, pre_end))
                slots += 1
                t = over_end
                return status

            if kind == "claim":
                if end <= H:
                    pass            # slot completes even past limit
                else:
                    part_ns += H - b
                    probes_span(b, H, b + air_len if outcome != -1 else b)
                    if outcome >= 0 and b + air_len <= H:
                        credit(outcome, b + air_len)
                    t = H
                    return "cut"
            elif end > limit:
                air_end = b + air_len
                if kind == "hit" and outcome != -1 and air_end > limit:
                    part_ns += limit - b
                    probes_span(b, limit, air_end)
                    hit_info = (air_end, end)
                    t = limit
                    return "hit"
                part_ns += limit - b
                probes_span(b, limit, air_end if outcome != -1 else b)
                if outcome >= 0 and air_end <= limit:
                    credit(outcome, air_end)
                cut_air_end = air_end if outcome != -1 else 0
                cut_slot_end = end
                cut_start = b
                t = limit
                return "cut"

            # complete slot inside the off period
            if outcome == -1:
                idle_ns += sigma
                if next_probe < end:
                    probes_span(b, end, b)
            else:
                air_end = b + air_len
                if outcome >= 0:
                    succ_ns += busy_len
                    credit(outcome, air_end)
                else:
                    coll_ns += busy_len
                if next_probe < end:
                    probes_span(b, end, air_end)
            that_off += end - b
            slots += 1
            t = end

    def record_off_period() -> None:
        nonlocal that_off, that_total, offs
        if epochs >= 1:
            offs += 1
            that_total += that_off
        that_off = 0

    sched = cfg.sched
    if sched is None:
        run_slots(H, "cut")
    else:
        mode = sched.mode
        sensing = sched.sensing
        ton = sched.t_on
        delta = sched.slot_delta
        rate = sched.rate
        cycle = ton + cfg.off_dist.mean
        first = int(rng_off.random() * cycle)

        if mode is AccessMode.PREEMPTIVE:
            next_s = first
            while t < H:
                if next_s >= H:
                    run_slots(H, "cut")
                    break
                kind = "hit" if sensing is Sensing.EXPLICIT_SIGNAL else "cut"
                status = run_slots(next_s, kind)
                s = next_s
                e = s + ton
                record_off_period()
                epochs += 1
                if status == "hit":
                    # announcement lost: stations free-run through the epoch
                    hits += 1
                    air_end, slot_end = hit_info
                    hit_air_loss += air_end - s
                    seg = min(slot_end, e, H)
                    itc_ns += seg - s
                    probes_skip(seg)
                    t = seg
                    if slot_end > e:            # overhang into the next off
                        over = min(slot_end, H)
                        if over > seg:
                            part_ns += over - seg
                            probes_span(seg, over, max(air_end, seg))
                        t = over
                    elif t < e:
                        run_slots(e, "free", destroy=True)
                else:
                    hit = cut_air_end > s
                    lost = 0
                    air_tail = slot_tail = 0
                    if hit:
                        hits += 1
                        over = cut_air_end - s
                        hit_air_loss += over
                        lost = min(-(-over // delta) * delta, ton)
                        # the destroyed frame stops at the frame boundary
                        # unless only its ACK was clipped; its station then
                        # finishes the slot (ACK timeout) before restarting
                        phys = cut_start + air_bad
                        if s >= phys:
                            phys = cut_air_end
                        air_tail = phys
                        slot_tail = cut_slot_end
                    seg1 = min(s + lost, H)
                    itc_ns += seg1 - s
                    seg2 = min(e, H)
                    if seg2 > seg1:
                        data_ns += seg2 - seg1
                    probes_skip(seg2)
                    t = seg2
                    if slot_tail > e and t == e:
                        if air_tail > e:
                            over = min(air_tail, H)
                            itc_ns += over - e
                            probes_busy(e, over)
                            t = over
                        tail = min(slot_tail, H)
                        if tail > t:
                            part_ns += tail - t
                            probes_span(t, tail, t)
                            t = tail
                next_s = e + cfg.off_dist.sample(rng_off)
                if next_s < t:
                    # destroyed-frame tail swallowed the whole silent period
                    next_s = t
        else:
            # Pending claim times live on their own wall-clock grid
            # (pend += t_on + T_off), so waiting for a free slot boundary
            # delays a claim without stretching the mean cycle length.
            pend = first
            while t < H:
                if pend >= H:
                    run_slots(H, "cut")
                    break
                status = run_slots(pend, "claim")
                if status == "cut" or t >= H:
                    break
                s = t
                record_off_period()
                epochs += 1
                e = s + ton
                if fast:
                    u = chan_rand()
                    outcome = -1
                    if u >= p_e:
                        outcome = -2
                        for k in range(n):
                            if u < cum[k]:
                                outcome = k
                                break
                else:
                    outcome = general_draw(s)
                if outcome == -1:
                    rho = (delta - s % delta) % delta
                    seg1 = min(s + rho, H)
                    res_ns += seg1 - s
                    reservation_ns += rho
                    seg2 = min(e, H)
                    if seg2 > seg1:
                        data_ns += seg2 - seg1
                    probes_skip(seg2)
                    t = seg2
                else:
                    claim_colls += 1
                    air_end = s + air_bad
                    if sensing is Sensing.PERFECT:
                        rho = (delta - s % delta) % delta
                        lost = min(max(rho, -(-air_bad // delta) * delta), ton)
                        seg1 = min(s + lost, H)
                        itc_ns += seg1 - s
                        seg2 = min(e, H)
                        if seg2 > seg1:
                            data_ns += seg2 - seg1
                        probes_skip(seg2)
                        t = seg2
                        if air_end > e and t == e:
                            over = min(air_end, H)
                            itc_ns += over - e
                            probes_busy(e, over)
                            t = over
                    else:
                        # reservation lost: stations free-run, everything lost
                        slot_end = s + busy_len
                        seg = min(slot_end, e, H)
                        itc_ns += seg - s
                        probes_skip(seg)
                        slots += 1
                        t = seg
                        if slot_end > e:
                            over = min(slot_end, H)
                            if over > seg:
                                part_ns += over - seg
                                probes_span(seg, over, max(air_end, seg))
                            t = over
                        elif t < e and t < H:
                            run_slots(e, "free", destroy=True)
                pend = pend + ton + cfg.off_dist.sample(rng_off)

    total = idle_ns + succ_ns + coll_ns + data_ns + res_ns + itc_ns + part_ns
    if total != H:
        raise RuntimeError(f"airtime accounting error: {total} != {H}")

    shares = AirtimeShares(
        idle=idle_ns / H, csma_success=succ_ns / H, csma_collision=coll_ns / H,
        sched_data=data_ns / H, sched_reservation=res_ns / H,
        inter_tech_collision=itc_ns / H, partial_slot=part_ns / H)
    s_csma = tuple(d * SEC / H for d in delivered)
    s_sched = (cfg.sched.rate * data_ns / SEC) * SEC / H if cfg.sched else 0.0
    p_idle = probes_idle / probes_tot if probes_tot else math.nan
    eff_off = that_total / offs if offs else math.nan
    return SimReport(
        s_csma_emp=s_csma, s_sched_emp=s_sched, p_idle_emp=p_idle,
        airtime=shares, delay_samples=tuple(delays), slots_simulated=slots,
        eff_off_emp=eff_off, off_periods=offs, epochs=epochs,
        on_start_hits=hits, on_start_air_loss=hit_air_loss,
        claim_collisions=claim_colls, reservation_ns=reservation_ns,
        delivered_bits=tuple(delivered), dropped_frames=tuple(dropped),
        max_queue=tuple(max_q))

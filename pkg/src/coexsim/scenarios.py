"""Scenario execution: analytic predictions plus simulation ensembles per sweep row.

Every row is computed from one resolved parameter set; the analytic and
simulated columns always share it.  Fair off times are recomputed per row
and per access mode.  Rows that hit an infeasible configuration are
emitted with a status message instead of aborting the sweep; the caller
maps that to a nonzero exit code.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass

from . import __version__
from .coexistence import (AccessMode, InfeasibleConfigError, ScheduledParams,
                          Sensing, heterogeneity_costs, throughput_prediction)
from .config import ConfigError, ExperimentConfig, Scenario
from .csma import idle_probability, slot_probabilities
from .fairness import (ConvergenceError, UnsaturatedSpec, mixed_fair_allocation,
                       saturated_fair_off_time, success_airtime)
from .phy import MS, frame_timings, mean_mac_slot
from .sim import OffDistribution, OffKind, SimConfig, run_ensemble

_MODE_NAMES = {AccessMode.PREEMPTIVE: "preemptive",
               AccessMode.OPPORTUNISTIC: "opportunistic"}


@dataclass(frozen=True)
class ResultRow:
    sweep_value: object
    values: dict
    status: str = "ok"


@dataclass(frozen=True)
class ResolvedPoint:
    """One fully-resolved parameter set: analytics inputs plus a SimConfig."""

    stations: object
    timings: object
    probs: object
    mean_slot: float
    sched: ScheduledParams | None
    sim_config: SimConfig
    prediction: object | None
    costs: object | None
    t_off_fair: float | None


def _apply_axis(cfg: ExperimentConfig, axis: str | None, value) -> ExperimentConfig:
    cfg = dataclasses.replace(cfg)
    cfg.stations = dataclasses.replace(cfg.stations)
    cfg.sched = dataclasses.replace(cfg.sched)
    if axis is None:
        return cfg
    if axis == "n_agg":
        cfg.stations.n_agg = int(value)
    elif axis == "n":
        cfg.stations.n = int(value)
        cfg.stations.taus = None
    elif axis == "t_on_ms":
        cfg.sched.t_on = int(round(value * MS))
    elif axis == "tau":
        cfg.stations.tau = float(value)
        cfg.stations.taus = None
    elif axis == "mean_t_off_ms":
        cfg.sched.mean_t_off = int(round(value * MS))
    else:
        raise ConfigError(f"unknown sweep axis {axis!r}")
    return cfg


def tiled_uniform_minimum(t_off: int, mean_slot: float, p_e: float) -> int:
    """Lower support bound so the uniform off window spans a whole number of
    mean contention cycles; the scheduled start phase is then uniform over
    the idle-run/busy pattern that repeats inside each silent period."""
    if p_e >= 1.0:
        return 0
    cycle = mean_slot / (1.0 - p_e)
    k = max(1, round(t_off / cycle))
    return max(0, t_off - int(k * cycle / 2.0))


def resolve_point(cfg: ExperimentConfig, mode: AccessMode | None = None,
                  sensing: Sensing | None = None,
                  with_sched: bool | None = None) -> ResolvedPoint:
    """Build analytics and a SimConfig for one parameter set.

    mode/sensing override the configured ones (scenarios iterate modes);
    with_sched=False forces a plain CSMA/CA channel.
    """
    phy, mcs = cfg.phy, cfg.mcs
    stations = cfg.stations.station_set(phy)
    timings = frame_timings(phy, mcs, cfg.stations.n_agg)
    probs = slot_probabilities(stations)
    mean_slot = mean_mac_slot(phy, timings, probs.p_e)

    if with_sched is None:
        with_sched = cfg.sched.mode is not None if mode is None else True
    if not with_sched:
        sim = SimConfig(phy=phy, mcs=mcs, stations=stations, horizon=cfg.sim.horizon,
                        seed=cfg.seed, n_agg=cfg.stations.n_agg,
                        buffer_capacity=cfg.stations.buffer,
                        arrival_rates=cfg.stations.arrival_rates,
                        channel_loss=cfg.sim.channel_loss,
                        probe_period=cfg.sim.probe_period)
        return ResolvedPoint(stations=stations, timings=timings, probs=probs,
                             mean_slot=mean_slot, sched=None, sim_config=sim,
                             prediction=None, costs=None, t_off_fair=None)

    mode = mode if mode is not None else cfg.sched.mode
    sensing = sensing if sensing is not None else cfg.sched.sensing
    base = ScheduledParams(mode=mode, t_on=cfg.sched.t_on, mean_t_off=0,
                           slot_delta=cfg.sched.slot_delta, rate=cfg.sched.rate,
                           t_res=cfg.sched.t_res, sensing=sensing)
    costs = heterogeneity_costs(base, probs, timings, mean_slot, sigma=phy.sigma)
    t_off_fair = None
    if cfg.sched.mean_t_off == "fair":
        t_off_fair = saturated_fair_off_time(stations.n, cfg.sched.t_on,
                                             costs.c1).t_off_star
        t_off = int(round(t_off_fair))
    else:
        t_off = int(cfg.sched.mean_t_off)
    sched = dataclasses.replace(base, mean_t_off=t_off)

    kind = cfg.off.kind
    quantum = cfg.off.quantum if cfg.off.quantum is not None else 1000
    mean = cfg.off.mean if cfg.off.mean is not None else t_off
    if cfg.off.minimum is not None:
        minimum = cfg.off.minimum
    elif kind is OffKind.UNIFORM_QUANTIZED:
        minimum = tiled_uniform_minimum(mean, mean_slot, probs.p_e)
    else:
        minimum = 0
    off = OffDistribution(kind=kind, mean=mean, quantum=quantum, minimum=minimum)

    sim = SimConfig(phy=phy, mcs=mcs, stations=stations, horizon=cfg.sim.horizon,
                    seed=cfg.seed, n_agg=cfg.stations.n_agg, sched=sched,
                    off_dist=off, buffer_capacity=cfg.stations.buffer,
                    arrival_rates=cfg.stations.arrival_rates,
                    channel_loss=cfg.sim.channel_loss,
                    probe_period=cfg.sim.probe_period)
    pred = throughput_prediction(stations, probs, timings, sched, mean_slot)
    return ResolvedPoint(stations=stations, timings=timings, probs=probs,
                         mean_slot=mean_slot, sched=sched, sim_config=sim,
                         prediction=pred, costs=costs, t_off_fair=t_off_fair)


def _row_seed(cfg: ExperimentConfig, index: int) -> int:
    # one seed block per sweep row; both access modes share it so mode
    # comparisons use common random numbers
    return cfg.seed + 100_000 * index


def run_scenario(cfg: ExperimentConfig) -> list[ResultRow]:
    handler = {
        Scenario.P_IDLE_SWEEP: _pidle_sweep,
        Scenario.FAIR_THROUGHPUT_SWEEP: _fair_sweep,
        Scenario.IMPERFECT_SENSING_SWEEP: _imperfect_sweep,
        Scenario.DELAY_CDF: _delay_cdf,
        Scenario.UNSATURATED_AIRTIME: _unsaturated_airtime,
        Scenario.ANALYTIC_ONLY: _analytic_only,
    }[cfg.scenario]
    rows = []
    for index, value in enumerate(cfg.sweep()):
        point_cfg = _apply_axis(cfg, cfg.sweep_axis, value) if value is not None else cfg
        try:
            rows.append(handler(point_cfg, value, _row_seed(cfg, index)))
        except (InfeasibleConfigError, ConvergenceError, ValueError) as exc:
            rows.append(ResultRow(sweep_value=value, values={},
                                  status=f"error: {exc}"))
    return rows


def _pidle_sweep(cfg: ExperimentConfig, value, seed: int) -> ResultRow:
    point = resolve_point(cfg)
    eq1 = idle_probability(point.probs, point.timings.t_success,
                           point.timings.t_frame, point.mean_slot)
    ens = run_ensemble(point.sim_config, cfg.runs, base_seed=seed, jobs=cfg.jobs)
    return ResultRow(value, {
        "p_idle_model": eq1,
        "p_idle_sim_mean": ens.mean_p_idle,
        "p_idle_sim_sd": ens.std_p_idle,
    })


def _mode_columns(cfg: ExperimentConfig, mode: AccessMode, sensing: Sensing,
                  seed: int, simulate: bool) -> dict:
    name = _MODE_NAMES[mode]
    point = resolve_point(cfg, mode=mode, sensing=sensing)
    pred = point.prediction
    out = {
        f"t_off_ms_{name}": point.sched.mean_t_off / MS,
        f"wifi_mbps_{name}": sum(pred.s_csma) / 1e6,
        f"sched_mbps_{name}": pred.s_sched / 1e6,
    }
    if simulate:
        ens = run_ensemble(point.sim_config, cfg.runs, base_seed=seed, jobs=cfg.jobs)
        out[f"wifi_sim_mbps_{name}"] = sum(ens.mean_s_csma) / 1e6
        out[f"wifi_sim_sd_{name}"] = math.fsum(s ** 2 for s in ens.std_s_csma) ** 0.5 / 1e6
        out[f"sched_sim_mbps_{name}"] = ens.mean_s_sched / 1e6
        out[f"sched_sim_sd_{name}"] = ens.std_s_sched / 1e6
    return out


def _fair_sweep(cfg: ExperimentConfig, value, seed: int) -> ResultRow:
    values = {}
    for mode in (AccessMode.PREEMPTIVE, AccessMode.OPPORTUNISTIC):
        values.update(_mode_columns(cfg, mode, cfg.sched.sensing, seed, simulate=True))
    return ResultRow(value, values)


def _imperfect_sweep(cfg: ExperimentConfig, value, seed: int) -> ResultRow:
    values = {}
    for mode in (AccessMode.PREEMPTIVE, AccessMode.OPPORTUNISTIC):
        values.update(_mode_columns(cfg, mode, Sensing.EXPLICIT_SIGNAL, seed,
                                    simulate=True))
        perfect = resolve_point(cfg, mode=mode, sensing=Sensing.PERFECT)
        values[f"sched_mbps_perfect_{_MODE_NAMES[mode]}"] = \
            perfect.prediction.s_sched / 1e6
    return ResultRow(value, values)


def _delay_cdf(cfg: ExperimentConfig, value, seed: int) -> ResultRow:
    point = resolve_point(cfg)
    ens = run_ensemble(point.sim_config, cfg.runs, base_seed=seed, jobs=cfg.jobs)
    delays = sorted(ens.delay_samples)
    if not delays:
        return ResultRow(value, {}, status="error: no delay samples")
    def q(p: float) -> float:
        return delays[min(len(delays) - 1, int(p * len(delays)))] / MS
    return ResultRow(value, {
        "samples": len(delays),
        "frac_below_10ms": sum(1 for d in delays if d < 10 * MS) / len(delays),
        "mean_delay_ms": sum(delays) / len(delays) / MS,
        "delay_p50_ms": q(0.50),
        "delay_p90_ms": q(0.90),
        "delay_p99_ms": q(0.99),
    })


def _unsaturated_airtime(cfg: ExperimentConfig, value, seed: int) -> ResultRow:
    st = cfg.stations
    if st.offered_load is None:
        raise ConfigError("UnsaturatedAirtime needs [stations] offered_load_mbps")
    point = resolve_point(cfg)
    p_e_bar = st.p_e_bar if st.p_e_bar is not None else point.probs.p_e
    spec = UnsaturatedSpec(offered_loads=st.offered_load, p_e_bar=p_e_bar)
    alloc, factors = mixed_fair_allocation(point.stations, spec, point.sched,
                                           point.timings, phy=cfg.phy)
    t_on, c1 = point.sched.t_on, alloc.t_off_star - alloc.z_star
    cycle = t_on + alloc.t_off_star
    values = {
        "t_off_ms": alloc.t_off_star / MS,
        "n_eq": factors.n_eq,
        "sched_channel_time": (t_on + c1) / cycle,
        "sat_station_channel_time": alloc.frac_csma / factors.n_eq,
        "sched_success_airtime": (t_on - c1) / cycle,
    }
    for j in range(point.stations.n):
        values[f"lambda_{j}"] = factors.lambdas[j]
        values[f"success_airtime_{j}"] = success_airtime(
            factors.x_stars[j], p_e_bar, point.timings, alloc.z_star, t_on, c1,
            sigma=cfg.phy.sigma)
    if st.arrival_rates is not None:
        sim = dataclasses.replace(
            point.sim_config,
            sched=dataclasses.replace(point.sched,
                                      mean_t_off=round(alloc.t_off_star)),
            off_dist=dataclasses.replace(point.sim_config.off_dist,
                                         mean=round(alloc.t_off_star)))
        ens = run_ensemble(sim, cfg.runs, base_seed=seed, jobs=cfg.jobs)
        for j in range(point.stations.n):
            values[f"wifi_sim_mbps_{j}"] = ens.mean_s_csma[j] / 1e6
    return ResultRow(value, values)


def _analytic_only(cfg: ExperimentConfig, value, seed: int) -> ResultRow:
    point = resolve_point(cfg)
    eq1 = idle_probability(point.probs, point.timings.t_success,
                           point.timings.t_frame, point.mean_slot)
    values = {"p_idle_model": eq1}
    if point.prediction is not None:
        pred = point.prediction
        values.update({
            "t_off_ms": point.sched.mean_t_off / MS,
            "p_tx_a": point.costs.p_tx_a,
            "c1_us": point.costs.c1 / 1000.0,
            "c2_us": point.costs.c2 / 1000.0,
            "wifi_mbps": sum(pred.s_csma) / 1e6,
            "sched_mbps": pred.s_sched / 1e6,
            "airtime_csma": pred.airtime_csma_full_slots,
            "airtime_sched": pred.airtime_sched,
        })
    return ResultRow(value, values)


def header_for(rows: list[ResultRow], axis: str | None) -> list[str]:
    cols: list[str] = []
    for row in rows:
        for key in row.values:
            if key not in cols:
                cols.append(key)
    return [axis or "point", *cols, "status"]


def _config_echo(cfg: ExperimentConfig) -> list[str]:
    lines = [f"coexsim {__version__}",
             f"scenario = {cfg.scenario.value}",
             f"runs = {cfg.runs}", f"seed = {cfg.seed}"]
    if cfg.sweep_axis:
        lines.append(f"sweep {cfg.sweep_axis} = "
                     + ",".join(str(v) for v in cfg.sweep_values))
    phy, mcs, st, sc = cfg.phy, cfg.mcs, cfg.stations, cfg.sched
    lines.append(f"phy sigma={phy.sigma} difs={phy.difs} sifs={phy.sifs} "
                 f"plcp={phy.plcp} payload={phy.payload}")
    lines.append(f"mcs bits_per_symbol={mcs.bits_per_symbol} symbol={mcs.symbol_time}")
    lines.append(f"stations n={st.n} tau={st.taus or st.tau} n_agg={st.n_agg}")
    if sc.mode is not None:
        lines.append(f"scheduled mode={sc.mode.value} sensing={sc.sensing.value} "
                     f"t_on={sc.t_on} mean_t_off={sc.mean_t_off} "
                     f"delta={sc.slot_delta} rate={sc.rate}")
    lines.append(f"offdist kind={cfg.off.kind.value} mean={cfg.off.mean} "
                 f"min={cfg.off.minimum} quantum={cfg.off.quantum}")
    lines.append(f"sim horizon={cfg.sim.horizon} probe={cfg.sim.probe_period} "
                 f"loss={cfg.sim.channel_loss}")
    return lines


def write_csv(path: str, cfg: ExperimentConfig, rows: list[ResultRow]) -> None:
    header = header_for(rows, cfg.sweep_axis)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for line in _config_echo(cfg):
            fh.write(f"# {line}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            cells = ["base" if row.sweep_value is None else str(row.sweep_value)]
            for key in header[1:-1]:
                v = row.values.get(key, "")
                cells.append(repr(v) if isinstance(v, float) else str(v))
            cells.append(row.status)
            fh.write(",".join(cells) + "\n")


def write_json(path: str, cfg: ExperimentConfig, rows: list[ResultRow]) -> None:
    doc = {
        "meta": _config_echo(cfg),
        "axis": cfg.sweep_axis,
        "rows": [{"sweep_value": r.sweep_value, "status": r.status, **r.values}
                 for r in rows],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")

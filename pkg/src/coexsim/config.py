"""Experiment configuration: a line-oriented ``key = value`` file with sections.

Sections: ``[phy] [mcs] [stations] [scheduled] [offdist] [sim] [sweep]``;
keys before any section header configure the experiment itself (scenario,
runs, seed, output, format, jobs).  Unknown sections or keys are errors,
reported with their line number.  An empty file resolves to the standard
802.11ac constants with one saturated station at tau = 1/16 and a
preemptive scheduled transmitter with t_on = 10 ms at the fair off time.

The full schema with defaults is documented in the README.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from .coexistence import AccessMode, Sensing
from .csma import StationSet
from .phy import MS, SEC, US, McsProfile, PhyParams
from .sim import OffKind


class ConfigError(ValueError):
    """Config file failed to parse or validate; message names line and field."""


class Scenario(enum.Enum):
    P_IDLE_SWEEP = "PIdleSweep"
    FAIR_THROUGHPUT_SWEEP = "FairThroughputSweep"
    DELAY_CDF = "DelayCdf"
    UNSATURATED_AIRTIME = "UnsaturatedAirtime"
    IMPERFECT_SENSING_SWEEP = "ImperfectSensingSweep"
    ANALYTIC_ONLY = "AnalyticOnly"


_SWEEP_AXES = ("n_agg", "n", "t_on_ms", "tau", "mean_t_off_ms")


@dataclass
class StationSpec:
    n: int = 1
    taus: tuple[float, ...] | None = None      # None: tau for every station
    tau: float = 1.0 / 16.0
    n_agg: int = 1
    payload_bits: tuple[int, ...] | None = None  # None: n_agg * phy payload
    offered_load: tuple[float, ...] | None = None  # bit/s, inf = saturated
    p_e_bar: float | None = None
    arrival_rates: tuple[float, ...] | None = None
    buffer: int | None = None

    def station_set(self, phy: PhyParams) -> StationSet:
        taus = self.taus if self.taus is not None else (self.tau,) * self.n
        if len(taus) != self.n:
            raise ConfigError(f"[stations] tau list has {len(taus)} entries for n = {self.n}")
        if self.payload_bits is not None:
            payloads = self.payload_bits
            if len(payloads) != self.n:
                raise ConfigError("[stations] payload_bits list length != n")
        else:
            payloads = (self.n_agg * phy.payload,) * self.n
        return StationSet(taus=taus, payloads=payloads)


@dataclass
class ScheduledSpec:
    mode: AccessMode | None = AccessMode.PREEMPTIVE   # None = no transmitter
    sensing: Sensing = Sensing.PERFECT
    t_on: int = 10 * MS
    mean_t_off: int | str = "fair"
    slot_delta: int = 1 * MS
    rate: float = 75e6
    t_res: int | None = None


@dataclass
class OffSpec:
    kind: OffKind = OffKind.UNIFORM_QUANTIZED
    mean: int | None = None        # default: scheduled mean off time
    minimum: int | None = None     # default: cycle-tiled support (uniform)
    quantum: int | None = None     # default: 1 us


@dataclass
class SimSpec:
    horizon: int = 10 * SEC
    probe_period: int = 100 * MS
    channel_loss: float = 0.0


@dataclass
class ExperimentConfig:
    scenario: Scenario = Scenario.ANALYTIC_ONLY
    runs: int = 20
    seed: int = 1
    jobs: int = 1
    output: str | None = None
    fmt: str = "csv"
    sweep_axis: str | None = None
    sweep_values: tuple = ()
    phy: PhyParams = field(default_factory=PhyParams)
    mcs: McsProfile = field(default_factory=McsProfile)
    stations: StationSpec = field(default_factory=StationSpec)
    sched: ScheduledSpec = field(default_factory=ScheduledSpec)
    off: OffSpec = field(default_factory=OffSpec)
    sim: SimSpec = field(default_factory=SimSpec)

    def sweep(self) -> tuple:
        """Sweep values, defaulting to a single pass at the base config."""
        return self.sweep_values if self.sweep_axis else (None,)


def _parse_scalar(text: str, line: int, key: str):
    low = text.strip().lower()
    if low in ("inf", "infinite", "saturated"):
        return math.inf
    try:
        if "." in low or "e" in low:
            return float(low)
        return int(low)
    except ValueError as exc:
        raise ConfigError(f"line {line}: value for '{key}' is not a number: {text!r}") from exc


def _parse_list(text: str, line: int, key: str) -> list:
    out = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..", 1)
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(_parse_scalar(part, line, key))
    if not out:
        raise ConfigError(f"line {line}: empty list for '{key}'")
    return out


def _duration_ns(value, unit_ns: int) -> int:
    return int(round(value * unit_ns))


_MODES = {"preemptive": AccessMode.PREEMPTIVE, "csat": AccessMode.PREEMPTIVE,
          "opportunistic": AccessMode.OPPORTUNISTIC, "lbe": AccessMode.OPPORTUNISTIC,
          "lbt": AccessMode.OPPORTUNISTIC, "none": None}
_SENSINGS = {"perfect": Sensing.PERFECT, "explicit": Sensing.EXPLICIT_SIGNAL}
_OFF_KINDS = {"deterministic": OffKind.DETERMINISTIC, "periodic": OffKind.DETERMINISTIC,
              "uniform": OffKind.UNIFORM_QUANTIZED,
              "exponential": OffKind.EXPONENTIAL_QUANTIZED}


def load_config(path: str) -> ExperimentConfig:
    """Parse and validate an experiment config file."""
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def parse_config(text: str) -> ExperimentConfig:
    cfg = ExperimentConfig()
    phy_over: dict = {}
    mcs_over: dict = {}
    section = ""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith(("#", ";")):
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"line {lineno}: malformed section header {line!r}")
            section = line[1:-1].strip().lower()
            if section not in ("phy", "mcs", "stations", "scheduled", "offdist",
                               "sim", "sweep"):
                raise ConfigError(f"line {lineno}: unknown section [{section}]")
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip().lower()
        value = value.strip()
        try:
            _apply(cfg, phy_over, mcs_over, section, key, value, lineno)
        except ConfigError:
            raise
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"line {lineno}: invalid value for '{key}': {exc}") from exc
    try:
        cfg.phy = PhyParams(**phy_over) if phy_over else PhyParams()
        cfg.mcs = McsProfile(**mcs_over) if mcs_over else McsProfile()
    except ValueError as exc:
        raise ConfigError(f"phy/mcs parameters invalid: {exc}") from exc
    _validate(cfg)
    return cfg


def _apply(cfg: ExperimentConfig, phy_over: dict, mcs_over: dict,
           section: str, key: str, value: str, line: int) -> None:
    if section == "":
        if key == "scenario":
            try:
                cfg.scenario = Scenario(value)
            except ValueError:
                names = ", ".join(s.value for s in Scenario)
                raise ConfigError(f"line {line}: unknown scenario {value!r} (one of {names})")
        elif key == "runs":
            cfg.runs = int(value)
        elif key == "seed":
            cfg.seed = int(value)
        elif key == "jobs":
            cfg.jobs = int(value)
        elif key == "output":
            cfg.output = value
        elif key == "format":
            if value not in ("csv", "json"):
                raise ConfigError(f"line {line}: format must be csv or json")
            cfg.fmt = value
        else:
            raise ConfigError(f"line {line}: unknown top-level key '{key}'")
        return

    if section == "phy":
        us_keys = {"sigma_us": "sigma", "difs_us": "difs", "sifs_us": "sifs",
                   "plcp_us": "plcp"}
        bit_keys = {"l_service": "l_service", "l_delimiter": "l_delimiter",
                    "l_mac_header": "l_mac_header", "l_tail": "l_tail",
                    "l_ack": "l_ack", "payload_bits": "payload"}
        if key in us_keys:
            phy_over[us_keys[key]] = _duration_ns(_parse_scalar(value, line, key), US)
        elif key in bit_keys:
            phy_over[bit_keys[key]] = int(value)
        else:
            raise ConfigError(f"line {line}: unknown [phy] key '{key}'")
    elif section == "mcs":
        if key == "bits_per_symbol":
            mcs_over["bits_per_symbol"] = int(value)
        elif key == "symbol_us":
            mcs_over["symbol_time"] = _duration_ns(_parse_scalar(value, line, key), US)
        else:
            raise ConfigError(f"line {line}: unknown [mcs] key '{key}'")
    elif section == "stations":
        st = cfg.stations
        if key == "n":
            st.n = int(value)
        elif key == "tau":
            vals = _parse_list(value, line, key)
            for v in vals:
                if not 0.0 <= v < 1.0:
                    raise ConfigError(f"line {line}: tau must satisfy 0 <= tau < 1, got {v}")
            if len(vals) == 1:
                st.tau = float(vals[0])
                st.taus = None
            else:
                st.taus = tuple(float(v) for v in vals)
        elif key == "n_agg":
            st.n_agg = int(value)
        elif key == "payload_bits":
            vals = _parse_list(value, line, key)
            st.payload_bits = tuple(int(v) for v in vals)
        elif key == "offered_load_mbps":
            vals = _parse_list(value, line, key)
            st.offered_load = tuple(v * 1e6 if not math.isinf(v) else v for v in vals)
        elif key == "p_e_bar":
            st.p_e_bar = float(value)
        elif key == "arrival_rate_mbps":
            vals = _parse_list(value, line, key)
            st.arrival_rates = tuple(v * 1e6 if not math.isinf(v) else v for v in vals)
        elif key == "buffer":
            st.buffer = int(value)
        else:
            raise ConfigError(f"line {line}: unknown [stations] key '{key}'")
    elif section == "scheduled":
        sc = cfg.sched
        if key == "mode":
            if value.lower() not in _MODES:
                raise ConfigError(f"line {line}: unknown mode {value!r}")
            sc.mode = _MODES[value.lower()]
        elif key == "sensing":
            if value.lower() not in _SENSINGS:
                raise ConfigError(f"line {line}: unknown sensing {value!r}")
            sc.sensing = _SENSINGS[value.lower()]
        elif key == "t_on_ms":
            sc.t_on = _duration_ns(_parse_scalar(value, line, key), MS)
        elif key == "mean_t_off_ms":
            if value.lower() == "fair":
                sc.mean_t_off = "fair"
            else:
                sc.mean_t_off = _duration_ns(_parse_scalar(value, line, key), MS)
        elif key == "delta_ms":
            sc.slot_delta = _duration_ns(_parse_scalar(value, line, key), MS)
        elif key == "rate_mbps":
            sc.rate = float(value) * 1e6
        elif key == "t_res_ms":
            sc.t_res = _duration_ns(_parse_scalar(value, line, key), MS)
        else:
            raise ConfigError(f"line {line}: unknown [scheduled] key '{key}'")
    elif section == "offdist":
        od = cfg.off
        if key == "kind":
            if value.lower() not in _OFF_KINDS:
                raise ConfigError(f"line {line}: unknown off distribution {value!r}")
            od.kind = _OFF_KINDS[value.lower()]
        elif key == "mean_ms":
            od.mean = _duration_ns(_parse_scalar(value, line, key), MS)
        elif key == "min_ms":
            od.minimum = _duration_ns(_parse_scalar(value, line, key), MS)
        elif key == "quantum_us":
            od.quantum = _duration_ns(_parse_scalar(value, line, key), US)
        else:
            raise ConfigError(f"line {line}: unknown [offdist] key '{key}'")
    elif section == "sim":
        sm = cfg.sim
        if key == "horizon_s":
            sm.horizon = _duration_ns(_parse_scalar(value, line, key), SEC)
        elif key == "probe_period_ms":
            sm.probe_period = _duration_ns(_parse_scalar(value, line, key), MS)
        elif key == "channel_loss":
            sm.channel_loss = float(value)
        else:
            raise ConfigError(f"line {line}: unknown [sim] key '{key}'")
    elif section == "sweep":
        if key == "axis":
            if value not in _SWEEP_AXES:
                raise ConfigError(f"line {line}: unknown sweep axis {value!r} "
                                  f"(one of {', '.join(_SWEEP_AXES)})")
            cfg.sweep_axis = value
        elif key == "values":
            cfg.sweep_values = tuple(_parse_list(value, line, key))
        else:
            raise ConfigError(f"line {line}: unknown [sweep] key '{key}'")


def _validate(cfg: ExperimentConfig) -> None:
    if cfg.runs < 1:
        raise ConfigError("runs must be >= 1")
    if cfg.jobs < 1:
        raise ConfigError("jobs must be >= 1")
    if cfg.stations.n < 1:
        raise ConfigError("[stations] n must be >= 1")
    if cfg.stations.n_agg < 1:
        raise ConfigError("[stations] n_agg must be >= 1")
    if cfg.sweep_axis and not cfg.sweep_values:
        raise ConfigError("[sweep] axis given without values")
    if not cfg.sweep_axis and cfg.sweep_values:
        raise ConfigError("[sweep] values given without axis")
    if cfg.sched.mode is not None:
        if cfg.sched.t_on <= 0:
            raise ConfigError("[scheduled] t_on_ms must be > 0")
        if cfg.sched.slot_delta <= 0:
            raise ConfigError("[scheduled] delta_ms must be > 0")
        if cfg.sched.t_on % cfg.sched.slot_delta != 0:
            raise ConfigError("[scheduled] t_on_ms must be a multiple of delta_ms")
    if not 0.0 <= cfg.sim.channel_loss <= 1.0:
        raise ConfigError("[sim] channel_loss must be in [0, 1]")
    # station-list lengths
    st = cfg.stations
    for name, vals in (("tau", st.taus), ("offered_load_mbps", st.offered_load),
                       ("arrival_rate_mbps", st.arrival_rates),
                       ("payload_bits", st.payload_bits)):
        if vals is not None and len(vals) not in (1, st.n):
            raise ConfigError(f"[stations] {name} list length must be 1 or n = {st.n}")
    if st.taus is not None and len(st.taus) == 1:
        st.tau, st.taus = st.taus[0], None
    for name in ("offered_load", "arrival_rates", "payload_bits"):
        vals = getattr(st, name)
        if vals is not None and len(vals) == 1 and st.n > 1:
            setattr(st, name, tuple(vals) * st.n)
    if st.p_e_bar is not None and not 0.0 < st.p_e_bar < 1.0:
        raise ConfigError("[stations] p_e_bar must lie in (0, 1)")

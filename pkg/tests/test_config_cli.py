import math

import pytest

from coexsim import MS, US, AccessMode, OffKind, Sensing
from coexsim.cli import main
from coexsim.config import ConfigError, Scenario, parse_config
from coexsim.scenarios import resolve_point, run_scenario, write_csv


def test_empty_file_resolves_to_defaults():
    cfg = parse_config("")
    assert cfg.scenario is Scenario.ANALYTIC_ONLY
    assert cfg.phy.sigma == 9 * US and cfg.phy.difs == 34 * US
    assert cfg.phy.payload == 12000
    assert cfg.mcs.bits_per_symbol == 260
    assert cfg.stations.n == 1 and cfg.stations.tau == 1 / 16
    assert cfg.sched.mode is AccessMode.PREEMPTIVE
    assert cfg.sched.t_on == 10 * MS
    assert cfg.sched.mean_t_off == "fair"
    point = resolve_point(cfg)
    assert point.sched is not None
    assert point.sim_config.off_dist.mean == point.sched.mean_t_off


def test_default_override_is_idempotent():
    assert parse_config("[phy]\ndifs_us = 34\n") == parse_config("")


def test_invalid_tau_names_field_and_line():
    with pytest.raises(ConfigError, match="tau"):
        parse_config("[stations]\ntau = 1.0\n")
    with pytest.raises(ConfigError, match="line 2"):
        parse_config("[stations]\ntau = 1.0\n")


def test_unknown_keys_rejected():
    with pytest.raises(ConfigError, match="unknown section"):
        parse_config("[nonsense]\n")
    with pytest.raises(ConfigError, match="unknown \\[phy\\] key"):
        parse_config("[phy]\nbogus = 1\n")
    with pytest.raises(ConfigError, match="unknown top-level key"):
        parse_config("bogus = 1\n")
    with pytest.raises(ConfigError, match="expected 'key = value'"):
        parse_config("[phy]\nnot a pair\n")


def test_sweep_and_list_parsing():
    cfg = parse_config("""
scenario = PIdleSweep
[sweep]
axis = n_agg
values = 1..4, 8
""")
    assert cfg.sweep_values == (1, 2, 3, 4, 8)
    with pytest.raises(ConfigError, match="axis"):
        parse_config("[sweep]\nvalues = 1, 2\n")
    cfg = parse_config("[stations]\nn = 2\ntau = 0.1, 0.2\n")
    assert cfg.stations.taus == (0.1, 0.2)
    cfg = parse_config("[stations]\nn = 3\noffered_load_mbps = inf, 10, 10\n")
    assert cfg.stations.offered_load == (math.inf, 10e6, 10e6)


def test_t_on_multiple_of_delta_checked():
    with pytest.raises(ConfigError, match="multiple"):
        parse_config("[scheduled]\nt_on_ms = 10.5\ndelta_ms = 1\n")


def test_analytic_only_rows():
    cfg = parse_config("""
scenario = AnalyticOnly
[sweep]
axis = n_agg
values = 1, 8
""")
    rows = run_scenario(cfg)
    assert [r.sweep_value for r in rows] == [1, 8]
    assert all(r.status == "ok" for r in rows)
    assert rows[0].values["airtime_csma"] == pytest.approx(0.5, rel=1e-7)
    assert rows[0].values["wifi_mbps"] == pytest.approx(12.903, abs=1e-3)


def test_unsaturated_scenario_row():
    cfg = parse_config("""
scenario = UnsaturatedAirtime
[stations]
n = 3
offered_load_mbps = inf, inf, 10
[scheduled]
t_on_ms = 50
""")
    row = run_scenario(cfg)[0]
    assert row.status == "ok"
    assert 0.0 < row.values["lambda_2"] < 1.0
    assert row.values["lambda_0"] == 1.0
    assert row.values["sched_channel_time"] == \
        pytest.approx(row.values["sat_station_channel_time"], rel=1e-9)


def test_infeasible_row_flagged():
    cfg = parse_config("""
scenario = AnalyticOnly
[stations]
tau = 0.6
[scheduled]
mode = preemptive
mean_t_off_ms = 0.05
t_on_ms = 1
delta_ms = 1
""")
    row = run_scenario(cfg)[0]
    assert row.status.startswith("error:")


def test_csv_output_deterministic(tmp_path):
    text = """
scenario = FairThroughputSweep
runs = 2
[sim]
horizon_s = 1
[sweep]
axis = n_agg
values = 1
"""
    cfg1, cfg2 = parse_config(text), parse_config(text)
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    write_csv(str(p1), cfg1, run_scenario(cfg1))
    write_csv(str(p2), cfg2, run_scenario(cfg2))
    assert p1.read_bytes() == p2.read_bytes()
    header = [l for l in p1.read_text().splitlines() if not l.startswith("#")][0]
    assert header.split(",")[0] == "n_agg"
    assert header.split(",")[-1] == "status"


def test_cli_validate_and_run(tmp_path, capsys):
    cfg_path = tmp_path / "exp.conf"
    cfg_path.write_text("""
scenario = AnalyticOnly
[sweep]
axis = n_agg
values = 1, 2
""")
    assert main(["validate", str(cfg_path)]) == 0
    out = tmp_path / "r.csv"
    assert main(["run", str(cfg_path), "--out", str(out)]) == 0
    assert out.exists()
    assert main(["run", str(cfg_path), "--out", str(tmp_path / "r.json"),
                 "--format", "json"]) == 0
    assert (tmp_path / "r.json").exists()

    bad = tmp_path / "bad.conf"
    bad.write_text("[stations]\ntau = 2.0\n")
    assert main(["validate", str(bad)]) == 1
    assert main(["run", str(bad)]) == 1
    assert main(["validate", str(tmp_path / "missing.conf")]) == 1


def test_cli_allocate(tmp_path, capsys):
    cfg_path = tmp_path / "exp.conf"
    cfg_path.write_text("[stations]\nn = 3\n")
    assert main(["allocate", str(cfg_path)]) == 0
    out = capsys.readouterr().out
    assert "preemptive" in out and "opportunistic" in out
    assert "t_off*" in out


def test_cli_infeasible_exit_code(tmp_path):
    cfg_path = tmp_path / "exp.conf"
    cfg_path.write_text("""
scenario = AnalyticOnly
[stations]
tau = 0.6
[scheduled]
t_on_ms = 1
mean_t_off_ms = 0.05
""")
    out = tmp_path / "r.csv"
    assert main(["run", str(cfg_path), "--out", str(out)]) == 2


def test_explicit_sensing_parse():
    cfg = parse_config("[scheduled]\nsensing = explicit\nmode = lbe\n")
    assert cfg.sched.sensing is Sensing.EXPLICIT_SIGNAL
    assert cfg.sched.mode is AccessMode.OPPORTUNISTIC
    cfg = parse_config("[offdist]\nkind = exponential\nmin_ms = 10\n")
    assert cfg.off.kind is OffKind.EXPONENTIAL_QUANTIZED
    assert cfg.off.minimum == 10 * MS

import math
import random

import pytest

from coexsim import (MS, SEC, AccessMode, PhyParams,
                     McsProfile, ScheduledParams, StationSet, UnsaturatedSpec,
                     frame_timings, heterogeneity_costs, mean_mac_slot,
                     mixed_fair_allocation, saturated_fair_off_time,
                     slot_probabilities, success_airtime)


def test_closed_form_examples():
    alloc = saturated_fair_off_time(3, 50 * MS, 0.0)
    assert alloc.t_off_star == 150 * MS
    assert alloc.frac_csma == 0.75 and alloc.frac_sched == 0.25

    alloc = saturated_fair_off_time(1, 10 * MS, 165_000.0)
    assert alloc.z_star == pytest.approx(10_165_000.0, rel=1e-15)
    assert alloc.t_off_star == pytest.approx(10_330_000.0, rel=1e-15)
    assert alloc.frac_csma == pytest.approx(0.5, abs=1e-15)
    assert alloc.frac_sched == pytest.approx(0.5, abs=1e-15)


def test_closed_form_round_trip():
    rng = random.Random(3)
    for _ in range(300):
        n = rng.randint(1, 40)
        t_on = rng.uniform(1, 100) * MS
        c1 = rng.uniform(0, 5) * MS
        alloc = saturated_fair_off_time(n, t_on, c1)
        assert abs(alloc.frac_csma - n / (n + 1)) <= 1e-12
        assert abs(alloc.frac_sched - 1 / (n + 1)) <= 1e-12
        assert abs((alloc.t_off_star - c1) / (t_on + alloc.t_off_star)
                   - n / (n + 1)) <= 1e-12
        assert alloc.frac_csma + alloc.frac_sched == 1.0


def test_closed_form_validation():
    with pytest.raises(ValueError):
        saturated_fair_off_time(0, 10 * MS, 0.0)
    with pytest.raises(ValueError):
        saturated_fair_off_time(1, 0, 0.0)
    with pytest.raises(ValueError):
        saturated_fair_off_time(1, 10 * MS, -1.0)


def _mixed_setup(n, loads, tau=1 / 16, t_on=50 * MS):
    phy, mcs = PhyParams(), McsProfile()
    tim = frame_timings(phy, mcs, 1)
    st = StationSet.homogeneous(n, tau, 12000)
    spec = UnsaturatedSpec(offered_loads=loads,
                           p_e_bar=slot_probabilities(st).p_e)
    sched = ScheduledParams(mode=AccessMode.PREEMPTIVE, t_on=t_on,
                            mean_t_off=0, slot_delta=1 * MS, rate=75e6)
    return phy, tim, st, spec, sched


def test_all_saturated_reduces_to_closed_form():
    phy, tim, st, spec, sched = _mixed_setup(3, (math.inf,) * 3)
    alloc, factors = mixed_fair_allocation(st, spec, sched, tim, phy=phy)
    probs = slot_probabilities(st)
    em = mean_mac_slot(phy, tim, probs.p_e)
    c1 = heterogeneity_costs(sched, probs, tim, em, sigma=phy.sigma).c1
    ref = saturated_fair_off_time(3, sched.t_on, c1)
    assert alloc.t_off_star == ref.t_off_star
    assert alloc.z_star == ref.z_star
    assert alloc.frac_csma == ref.frac_csma
    assert factors.lambdas == (1.0, 1.0, 1.0)
    assert factors.n_eq == 3.0
    assert factors.saturated_set == frozenset({0, 1, 2})


def test_zero_load_station_vanishes():
    phy, tim, st, spec, sched = _mixed_setup(2, (math.inf, 0.0))
    alloc, factors = mixed_fair_allocation(st, spec, sched, tim, phy=phy)
    assert factors.lambdas[1] == 0.0
    assert factors.n_eq == 1.0
    assert alloc.frac_csma == pytest.approx(0.5, abs=1e-12)
    assert alloc.frac_sched == pytest.approx(0.5, abs=1e-12)


@pytest.mark.parametrize("n,n_sat,load_mbps", [(3, 2, 10.0), (9, 5, 3.0)])
def test_mixed_kkt_point(n, n_sat, load_mbps):
    loads = tuple([math.inf] * n_sat + [load_mbps * 1e6] * (n - n_sat))
    phy, tim, st, spec, sched = _mixed_setup(n, loads)
    alloc, factors = mixed_fair_allocation(st, spec, sched, tim, phy=phy)

    assert factors.saturated_set == frozenset(range(n_sat))
    for j in range(n_sat, n):
        assert 0.0 < factors.lambdas[j] < 1.0

    t_on = sched.t_on
    c1 = alloc.t_off_star - alloc.z_star
    # stationarity in z
    assert abs(alloc.z_star / (factors.n_eq * (t_on + c1)) - 1.0) < 1e-9
    # idle-budget tightness
    prod = math.prod(1.0 + x for x in factors.x_stars)
    assert abs(spec.p_e_bar * prod - 1.0) < 1e-9
    # complementary slackness: rate-capped stations sit exactly at their load
    p = spec.p_e_bar
    c4 = p * (phy.sigma - tim.t_frame) + tim.t_frame
    zfrac = alloc.z_star / (t_on + c1 + alloc.z_star)
    for j in range(n):
        rate = factors.x_stars[j] * p * st.payloads[j] * SEC / c4 * zfrac
        if j in factors.saturated_set:
            assert factors.lambdas[j] == 1.0
            assert rate < loads[j]
        else:
            assert abs(rate / loads[j] - 1.0) < 1e-9
    # equal airtime between the scheduled network and each saturated station
    sched_time = (t_on + c1) / (t_on + alloc.t_off_star)
    per_sat = alloc.frac_csma / factors.n_eq
    assert abs(sched_time - per_sat) < 1e-9
    # lambda identity through gamma*
    for j in range(n):
        assert factors.lambdas[j] == pytest.approx(
            factors.gamma_star * factors.x_stars[j] * spec.p_e_bar, rel=1e-12)


def test_lambda_matches_success_airtime_ratio():
    phy, tim, st, spec, sched = _mixed_setup(3, (math.inf, math.inf, 10e6))
    alloc, factors = mixed_fair_allocation(st, spec, sched, tim, phy=phy)
    c1 = alloc.t_off_star - alloc.z_star
    sat = next(iter(factors.saturated_set))
    t_sat = success_airtime(factors.x_stars[sat], spec.p_e_bar, tim,
                            alloc.z_star, sched.t_on, c1, sigma=phy.sigma)
    for j in range(3):
        t_j = success_airtime(factors.x_stars[j], spec.p_e_bar, tim,
                              alloc.z_star, sched.t_on, c1, sigma=phy.sigma)
        assert abs(factors.lambdas[j] - t_j / t_sat) < 1e-9
    # every saturated station gets the same success airtime
    times = [success_airtime(factors.x_stars[j], spec.p_e_bar, tim,
                             alloc.z_star, sched.t_on, c1, sigma=phy.sigma)
             for j in factors.saturated_set]
    assert max(times) - min(times) < 1e-15
    assert success_airtime(0.0, spec.p_e_bar, tim, alloc.z_star,
                           sched.t_on, c1, sigma=phy.sigma) == 0.0


def test_overloaded_station_saturates():
    # an offered load above the fair share moves the station into the
    # saturated set instead of violating its cap
    phy, tim, st, spec, sched = _mixed_setup(3, (math.inf, math.inf, 50e6))
    alloc, factors = mixed_fair_allocation(st, spec, sched, tim, phy=phy)
    assert factors.saturated_set == frozenset({0, 1, 2})
    assert factors.lambdas == (1.0, 1.0, 1.0)


def test_budget_exhausting_loads_saturate():
    # rate-capped stations that would exhaust the idle budget end up
    # saturated instead of violating the constraint
    loads = (math.inf, 40e6, 40e6, 40e6)
    phy, tim, st, _, sched = _mixed_setup(4, loads, tau=0.02)
    spec = UnsaturatedSpec(offered_loads=loads, p_e_bar=0.97)
    alloc, factors = mixed_fair_allocation(st, spec, sched, tim, phy=phy)
    assert factors.saturated_set == frozenset(range(4))
    assert factors.lambdas == (1.0,) * 4
    assert alloc.frac_csma == pytest.approx(0.8, abs=1e-12)


def test_unsaturated_spec_validation():
    with pytest.raises(ValueError):
        UnsaturatedSpec(offered_loads=(10e6, 20e6), p_e_bar=0.8)
    with pytest.raises(ValueError):
        UnsaturatedSpec(offered_loads=(math.inf,), p_e_bar=1.0)
    with pytest.raises(ValueError):
        UnsaturatedSpec(offered_loads=(math.inf, -1.0), p_e_bar=0.8)

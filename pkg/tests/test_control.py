import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from satcoex.context import WeatherContext
from satcoex.control import (
    CandidateScore,
    SearchSpaceTooLarge,
    baseline_exclusion_zone,
    baseline_in_threshold,
    brute_force_control,
    cat3s_control,
    check_constraints,
    evaluate_objective,
    individual_in_db,
    min_power_for_qos,
    priority_score,
)
from satcoex.link_metrics import LinkEnv, NetworkState
from satcoex.scenario import generate_synthetic_scenario

from conftest import hand_scenario, one_bs, tiny_params


def env_of(bss, weather=None, **kw):
    return LinkEnv(hand_scenario(bss, **kw), weather or WeatherContext.sunny())


def test_empty_scenario():
    env = env_of([])
    for dec in (cat3s_control(env), brute_force_control(env)):
        assert dec.objective_value == 0 and dec.active_bs_count == 0


def test_objective_weight_collapse(small_env):
    dec = cat3s_control(small_env, i_th=10.0)
    st_ = dec.state
    assert evaluate_objective(small_env, NetworkState.all_off(small_env.K)) == 0
    assert evaluate_objective(small_env, st_, w=0.0) == pytest.approx(small_env.total_capacity(st_), rel=1e-12)
    assert evaluate_objective(small_env, st_, w=1.0) == small_env.served_ues(st_)


def test_constraint_report(small_env):
    env = small_env
    off = NetworkState.all_off(env.K)
    rep = check_constraints(env, off)
    assert rep.c1 and rep.c2 and rep.c3 and rep.c4
    beams = env.candidate_beams(0, 0)
    assert len(beams) >= 1
    doubled = NetworkState.build(env.K, {0: (env.nominal[0], {0: [beams[0], beams[0]]})})
    assert not check_constraints(env, doubled, i_th=100.0).c4
    one = NetworkState.build(env.K, {0: (env.nominal[0], {0: beams[0]})})
    x = env.aggregate_in_db(one)
    rep = check_constraints(env, one, i_th=x - 1.0)
    assert not rep.c1 and rep.c1_excess_db == pytest.approx(1.0, abs=1e-12)
    over = NetworkState.build(env.K, {0: (env.p_max[0] + 0.5, {0: beams[0]})})
    assert not check_constraints(env, over, i_th=100.0).c3


def test_min_power_trivial_and_infeasible():
    bss = [one_bs(0, 2000.0, 0.0, [(900, 50)])]
    assert min_power_for_qos(env_of(bss, rate_qos=0.0), 0) == 41.0
    assert min_power_for_qos(env_of(bss, rate_qos=20.0), 0) is None


def test_priority_score_examples():
    assert priority_score(10.0, 2, -60.0, 0.5) == pytest.approx(6e6, rel=1e-12)
    assert priority_score(0.0, 0, -60.0, 0.5) == 0.0
    with pytest.raises(ValueError):
        CandidateScore(0, 0, 0, 0, -1.0)


def test_single_bs_generous_threshold_takes_max_power():
    env = env_of([one_bs(0, 2000.0, 0.0, [(200, 30)])])
    dec = cat3s_control(env, i_th=50.0)
    assert dec.active_bs_count == 1
    assert dec.state.powers[0] == env.p_max[0]
    assert dec.state.beams[0][0] == (tuple(int(v) for v in env.ue_beam[0]),)
    assert dec.objective_value == pytest.approx(brute_force_control(env, i_th=50.0).objective_value, rel=1e-12)


def test_everything_violates_threshold():
    env = env_of([one_bs(0, 2000.0, 0.0, [(200, 30)])])
    assert brute_force_control(env, i_th=-400.0).active_bs_count == 0
    assert cat3s_control(env, i_th=-400.0).active_bs_count == 0


def test_brute_cap():
    env = LinkEnv(generate_synthetic_scenario(tiny_params(n_bs=3, n_beams=16, ues=6), 1), WeatherContext.sunny())
    with pytest.raises(SearchSpaceTooLarge):
        brute_force_control(env, cap=100)


def test_selection_trace_is_sorted(small_env):
    dec = cat3s_control(small_env)
    for picks in dec.selection_trace:
        assert list(picks) == sorted(picks, reverse=True)
    assert dec.iterations[0] >= 1


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000), n_bs=st.integers(1, 3), rain=st.booleans(), i_th=st.floats(-20, 0))
def test_greedy_feasible_and_dominated_by_brute(seed, n_bs, rain, i_th):
    w = WeatherContext.rainy(20.0) if rain else WeatherContext.sunny()
    env = LinkEnv(generate_synthetic_scenario(tiny_params(n_bs=n_bs), seed), w)
    g = cat3s_control(env, i_th=i_th)
    assert check_constraints(env, g.state, i_th).ok
    b = brute_force_control(env, i_th=i_th)
    assert check_constraints(env, b.state, i_th).ok
    assert b.objective_value >= g.objective_value - 1e-9


def test_cat3s_deterministic(small_env):
    assert cat3s_control(small_env) == cat3s_control(small_env)


# -- baselines ---------------------------------------------------------------


def _far_near_env():
    bss = [one_bs(0, 2000.0, 0.0, [(100, 5)]), one_bs(1, 0.0, -4000.0, [(50, 80)], first_ue=5)]
    return env_of(bss)


def test_exclusion_zone_rule():
    env = _far_near_env()
    dec = baseline_exclusion_zone(env, i_th=50.0)
    assert dec.state.active == (False, True)
    assert baseline_exclusion_zone(env, radius=1e6, i_th=50.0).active_bs_count == 0
    ind = individual_in_db(env, 1)[0]
    assert baseline_exclusion_zone(env, i_th=ind - 0.1).state.active[1] is False


def test_in_threshold_is_strict():
    env = _far_near_env()
    ind = individual_in_db(env, 1)[0]
    assert not baseline_in_threshold(env, per_bs_threshold=ind).state.active[1]
    assert baseline_in_threshold(env, per_bs_threshold=ind + 1e-9).state.active[1]
    assert baseline_in_threshold(env, per_bs_threshold=1000.0).active_bs_count == 2


def test_baselines_run_at_nominal(small_env):
    for dec in (baseline_exclusion_zone(small_env, radius=10.0), baseline_in_threshold(small_env, 1000.0)):
        for k in range(small_env.K):
            if dec.state.active[k]:
                assert dec.state.powers[k] == small_env.nominal[k]

import dataclasses
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from satcoex.scenario import (
    BaseStation,
    Building,
    GeneratorParams,
    GeoPoint,
    PowerRange,
    dumps_scenario,
    generate_synthetic_scenario,
    load_scenario,
    save_scenario,
    scenario_from_dict,
    scenario_to_dict,
    thermal_noise_dbm,
    validate_scenario,
)

from conftest import hand_scenario, one_bs


def test_default_generator_counts(default_scene):
    s = default_scene
    assert len(s.base_stations) == 33
    assert sum(len(sec.ues) for bs in s.base_stations for sec in bs.sectors) == 990
    assert all(bs.height == 25.0 and bs.down_tilt == 10.0 for bs in s.base_stations)
    assert validate_scenario(s).ok


def test_nominal_power_is_psd_times_bandwidth():
    p = GeneratorParams()
    assert p.nominal_power_dbm == pytest.approx(42.0, abs=1e-12)
    assert thermal_noise_dbm(100.0) == pytest.approx(-87.0, abs=1e-9)


def test_empty_generator_is_valid():
    s = generate_synthetic_scenario(GeneratorParams(n_bs=0), 5)
    assert s.base_stations == ()
    assert validate_scenario(s).ok


def test_generator_determinism():
    p = GeneratorParams(n_buildings=30)
    a, b = generate_synthetic_scenario(p, 42), generate_synthetic_scenario(p, 42)
    assert a == b
    c = generate_synthetic_scenario(p, 43)
    assert [bs.position for bs in a.base_stations] != [bs.position for bs in c.base_stations]


def test_generator_rejects_bad_params():
    with pytest.raises(ValueError):
        generate_synthetic_scenario(GeneratorParams(n_bs=-1), 0)
    with pytest.raises(ValueError):
        generate_synthetic_scenario(GeneratorParams(radius=0.0), 0)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**64 - 1), n_bs=st.integers(0, 8))
def test_generated_scenarios_validate(seed, n_bs):
    s = generate_synthetic_scenario(GeneratorParams(n_bs=n_bs, n_buildings=15, ues_per_sector=3), seed)
    assert validate_scenario(s).ok
    for bs in s.base_stations:
        assert math.hypot(bs.position.x, bs.position.y) <= 5000.0 + 1e-6


def test_degenerate_building_flagged():
    s = hand_scenario([one_bs(0, 1000, 0)], buildings=[Building(((0.0, 0.0), (1.0, 1.0)), 20.0)])
    rep = validate_scenario(s)
    assert any("polygon simple (non-self-intersecting)" in m for m in rep.messages())


def test_well_formed_single_bs():
    s = hand_scenario([one_bs(0, 1000, 0, [(100, 5)])])
    assert len(validate_scenario(s)) == 0


def test_two_sector_bs_flagged():
    bs = one_bs(0, 1000, 0)
    bad = dataclasses.replace(bs, sectors=bs.sectors[:2])
    rep = validate_scenario(hand_scenario([bad]))
    assert any("exactly 3 sectors" in m for m in rep.messages())


def test_multiple_violations_collected():
    bs = dataclasses.replace(one_bs(0, 1000, 0, [(5000, 0)]), height=-1.0)
    s = hand_scenario([bs], power_range=PowerRange(2.0, -2.0, 0.5), weight=1.5)
    rep = validate_scenario(s)
    assert len(rep) >= 4
    paths = {v.path for v in rep.violations}
    assert "base_stations[0].height" in paths and "scenario.weight" in paths


def test_power_range_offsets():
    assert PowerRange().offsets() == (-2.0, -1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0)
    assert PowerRange(0.0, 0.0, 1.0).offsets() == (0.0,)


def test_json_round_trip(tmp_path):
    s = generate_synthetic_scenario(GeneratorParams(n_bs=4, n_buildings=10, ues_per_sector=2), 3)
    assert scenario_from_dict(scenario_to_dict(s)) == s
    path = tmp_path / "s.json"
    save_scenario(s, path)
    assert load_scenario(path) == s
    assert dumps_scenario(load_scenario(path)) == path.read_text()


def test_with_pointing_only_touches_fss(default_scene):
    s2 = default_scene.with_pointing(50.0)
    assert s2.fss.elevation_angle == 50.0
    assert s2.base_stations is default_scene.base_stations

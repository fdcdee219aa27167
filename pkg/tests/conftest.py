import math

import pytest

from satcoex.context import WeatherContext
from satcoex.link_metrics import LinkEnv
from satcoex.scenario import (
    SECTOR_CENTERS,
    BaseStation,
    FssReceiver,
    GeneratorParams,
    GeoPoint,
    PowerRange,
    Scenario,
    Sector,
    UserEquipment,
    generate_synthetic_scenario,
    subarray_offsets,
)


def one_bs(k, x, y, ue_xy=(), height=25.0, power=42.0, subarrays=1, first_ue=0):
    """BS at (x, y); every UE offset in ``ue_xy`` lands in the sector containing it."""
    per_sector = {j: [] for j in range(3)}
    uid = first_ue
    for dx, dy in ue_xy:
        az = math.degrees(math.atan2(dy, dx)) % 360.0
        j = min(range(3), key=lambda s: abs((az - SECTOR_CENTERS[s] + 180) % 360 - 180))
        per_sector[j].append(UserEquipment(uid, GeoPoint(x + dx, y + dy, 1.5)))
        uid += 1
    subs = subarray_offsets(subarrays)
    sectors = tuple(Sector(c, subs, True, tuple(per_sector[j])) for j, c in enumerate(SECTOR_CENTERS))
    return BaseStation(k, GeoPoint(x, y, 0.0), height, sectors, power)


def hand_scenario(bss, buildings=(), n_beams=4, power_range=PowerRange(-1.0, 1.0, 1.0), **kw):
    kw.setdefault("sigma_los", 0.0)
    kw.setdefault("sigma_nlos", 0.0)
    return Scenario(
        base_stations=tuple(bss),
        buildings=tuple(buildings),
        fss=FssReceiver(GeoPoint(0.0, 0.0, 5.0)),
        n_beams=n_beams,
        power_range=power_range,
        **kw,
    )


def tiny_params(n_bs=3, n_beams=4, ues=2, **kw):
    return GeneratorParams(
        n_bs=n_bs,
        radius=kw.pop("radius", 3000.0),
        ues_per_sector=ues,
        coverage_radius=kw.pop("coverage_radius", 400.0),
        n_buildings=kw.pop("n_buildings", 20),
        subarrays=1,
        n_beams=n_beams,
        power_range=kw.pop("power_range", PowerRange(-0.5, 0.5, 0.5)),
        **kw,
    )


@pytest.fixture
def sunny():
    return WeatherContext.sunny()


@pytest.fixture
def rainy():
    return WeatherContext.rainy(25.0)


@pytest.fixture(scope="session")
def default_scene():
    return generate_synthetic_scenario(GeneratorParams(), 0)


@pytest.fixture(scope="session")
def small_env():
    sc = generate_synthetic_scenario(tiny_params(n_bs=3), 11)
    return LinkEnv(sc, WeatherContext.sunny())


# -- acceptance reporting --------------------------------------------------------

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance():
    def record(num, name, ok, detail=""):
        ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] criterion {num} {name}: {detail}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from satcoex.antenna import (
    DB_FLOOR,
    ArrayConfig,
    Direction,
    array_factor,
    array_factor_uv,
    beam_gain_dbi,
    build_codebook,
    codebook_gains_dbi,
    direction_in_frame,
    fss_gain_dbi,
    fss_pattern_dbi,
    panel_frame,
    sidelobe_envelope_dbi,
)
from satcoex.scenario import FssReceiver, GeoPoint


def brute_af(cfg, beam, d):
    """Direct phasor sum over every element, normalised by the element count."""
    u = math.sin(d.theta) * math.cos(d.phi)
    v = math.sin(d.theta) * math.sin(d.phi)
    m = np.arange(cfg.rows)[:, None]
    l = np.arange(cfg.cols)[None, :]
    phase = m * (2 * math.pi * cfg.dx * u + beam[0]) + l * (2 * math.pi * cfg.dy * v + beam[1])
    return abs(np.exp(1j * phase).sum()) ** 2 / cfg.n_elements


def test_boresight_4x4():
    cfg = ArrayConfig(4, 4)
    assert array_factor(cfg, (0.0, 0.0), Direction(0.0, 1.234)) == pytest.approx(16.0, abs=1e-12)
    assert beam_gain_dbi(cfg, (0.0, 0.0), Direction(0.0, 0.0)) == pytest.approx(12.0412, abs=1e-4)


def test_single_element_isotropic():
    cfg = ArrayConfig(1, 1)
    for th, ph in [(0.0, 0.0), (1.0, -2.0), (math.pi / 2, 3.0)]:
        assert beam_gain_dbi(cfg, (1.1, -0.4), Direction(th, ph)) == pytest.approx(0.0, abs=1e-12)


def test_null_on_endfire_axis():
    cfg = ArrayConfig(4, 4)
    assert array_factor(cfg, (0.0, 0.0), Direction(math.pi / 2, 0.0)) == pytest.approx(0.0, abs=1e-20)
    assert beam_gain_dbi(cfg, (0.0, 0.0), Direction(math.pi / 2, 0.0)) == DB_FLOOR


@settings(max_examples=200, deadline=None)
@given(
    m=st.sampled_from([1, 2, 4, 8, 16]),
    l=st.sampled_from([1, 3, 4, 16]),
    th=st.floats(0, math.pi),
    ph=st.floats(-math.pi, math.pi),
    bx=st.floats(-math.pi, math.pi),
    by=st.floats(-math.pi, math.pi),
)
def test_closed_form_matches_phasor_sum(m, l, th, ph, bx, by):
    cfg = ArrayConfig(m, l)
    d = Direction(th, ph)
    got = array_factor(cfg, (bx, by), d)
    assert got == pytest.approx(brute_af(cfg, (bx, by), d), rel=1e-6, abs=1e-7)
    assert got <= m * l * (1 + 1e-12)


@given(th=st.floats(0, math.pi), ph=st.floats(-math.pi, math.pi))
def test_phi_periodicity(th, ph):
    cfg = ArrayConfig(4, 16)

    def af(p):
        return array_factor_uv(cfg, 0.3, -1.0, math.sin(th) * math.cos(p), math.sin(th) * math.sin(p))

    assert af(ph) == pytest.approx(af(ph + 2 * math.pi), rel=1e-7, abs=1e-9)


def test_codebook_layout():
    cfg = ArrayConfig()
    cb = build_codebook(cfg, 64)
    assert len(cb) == 64
    assert cb.entries[0] == (-math.pi, -math.pi)
    assert build_codebook(cfg, 1).entries == ((0.0, 0.0),)
    assert set(build_codebook(cfg, 4).entries) == {(-math.pi, -math.pi), (-math.pi, 0.0), (0.0, -math.pi), (0.0, 0.0)}
    with pytest.raises(ValueError):
        build_codebook(cfg, 0)


def test_codebook_non_square_count():
    cb = build_codebook(ArrayConfig(), 8)
    assert len(cb) == 8
    assert len({b[0] for b in cb.entries}) == 2


def test_direction_validation():
    with pytest.raises(ValueError):
        Direction(-0.1, 0.0)
    with pytest.raises(ValueError):
        Direction(0.1, 4.0)


def test_array_config_parse():
    cfg = ArrayConfig.parse("4x16")
    assert (cfg.rows, cfg.cols, cfg.label()) == (4, 16, "4x16")
    with pytest.raises(ValueError):
        ArrayConfig(0, 4)


def test_panel_frame_normal_points_along_tilted_azimuth():
    fr = panel_frame(90.0, 10.0)
    assert np.allclose(fr @ fr.T, np.eye(3), atol=1e-12)
    n = fr[2]
    assert n[0] == pytest.approx(0.0, abs=1e-12)
    assert n[1] > 0 and n[2] < 0
    d = direction_in_frame(fr, n * 7.0)
    assert d.theta == pytest.approx(0.0, abs=1e-7)


def test_codebook_gains_agree_with_scalar_path():
    cfg = ArrayConfig(4, 4)
    cb = build_codebook(cfg, 16)
    fr = panel_frame(30.0, 10.0)
    rng = np.random.default_rng(3)
    vecs = rng.normal(size=(20, 3))
    g = codebook_gains_dbi(cfg, cb, fr, vecs)
    assert g.shape == (20, 16)
    for p in range(0, 20, 5):
        d = direction_in_frame(fr, vecs[p])
        for n in (0, 7, 15):
            assert g[p, n] == pytest.approx(beam_gain_dbi(cfg, cb.entries[n], d), abs=1e-6)


# -- earth-station pattern ---------------------------------------------------


def test_fss_boresight_is_max_gain():
    fss = FssReceiver(GeoPoint(0, 0, 5), max_gain=34.0)
    assert fss_gain_dbi(fss, 0.0) == 34.0


def test_fss_envelope_and_floor():
    assert sidelobe_envelope_dbi(48.0) == pytest.approx(-10.03, abs=0.005)
    assert fss_pattern_dbi(34.0, 48.0) == -10.0
    assert fss_pattern_dbi(34.0, 120.0) == -10.0
    assert fss_pattern_dbi(34.0, 10.0) == pytest.approx(32 - 25, abs=1e-12)


def test_fss_pattern_rejects_out_of_range():
    fss = FssReceiver(GeoPoint(0, 0, 5))
    with pytest.raises(ValueError):
        fss_gain_dbi(fss, 181.0)
    with pytest.raises(ValueError):
        fss_gain_dbi(fss, -1.0)


@given(a=st.floats(0, 180), b=st.floats(0, 180))
def test_fss_pattern_bounded(a, b):
    ga, gb = fss_pattern_dbi(34.0, a), fss_pattern_dbi(34.0, b)
    assert -10.0 <= ga <= 34.0
    # the envelope only falls with angle once outside the mainlobe
    if 20.0 <= a <= b:
        assert gb <= ga + 1e-12


def test_fss_mainlobe_is_continuous_at_edge():
    xs = np.linspace(0.0, 10.0, 20001)
    g = fss_pattern_dbi(34.0, xs)
    assert np.max(np.abs(np.diff(g))) < 0.05

import math

import numpy as np
import pytest

import cryocmos as cc


def test_demo_card_threshold_shift():
    card = cc.demo_card(cc.Polarity.nmos)
    g = cc.DeviceGeometry(cc.Polarity.nmos, 1.0, 0.04)
    shift = cc.vth(card, g, cc.BiasPoint(0.0, 0.0, 10.0)) - cc.vth(card, g, cc.BiasPoint(0.0, 0.0, 298.0))
    assert shift == pytest.approx(0.2, abs=0.02)


def test_drain_current_gradients():
    card = cc.demo_card(cc.Polarity.nmos)
    g = cc.DeviceGeometry(cc.Polarity.nmos, 1.0, 0.04)
    h = 1e-6
    r = cc.drain_current(card, g, cc.BiasPoint(0.7, 0.5, 10.0))
    up = cc.drain_current(card, g, cc.BiasPoint(0.7 + h, 0.5, 10.0)).i_d
    dn = cc.drain_current(card, g, cc.BiasPoint(0.7 - h, 0.5, 10.0)).i_d
    assert r.g_m == pytest.approx((up - dn) / (2 * h), rel=1e-5)


def test_pmos_conducts_with_negative_bias():
    card = cc.demo_card(cc.Polarity.pmos)
    g = cc.DeviceGeometry(cc.Polarity.pmos, 1.0, 0.04)
    assert cc.drain_current(card, g, cc.BiasPoint(-1.1, -1.1)).i_d < 0


def test_card_round_trip_and_strict_schema():
    card = cc.demo_card(cc.Polarity.nmos)
    card.vth0_298 = 0.43
    back = cc.read_card(cc.write_card(card, "smoke"))
    assert back.vth0_298 == 0.43
    with pytest.raises(cc.SchemaError):
        cc.read_card(cc.write_card(card).replace('"provenance"', '"bogus"'))


def test_series_resistor_s_parameters():
    abcd = np.array([[[1, 50], [0, 1]]], dtype=complex)
    s = cc.convert(cc.TwoPort([1e9], abcd, cc.Rep.ABCD), cc.Rep.S).matrices[0]
    assert abs(s[0, 0] - 1 / 3) < 1e-12
    assert abs(s[1, 0] - 2 / 3) < 1e-12


def test_touchstone_round_trip():
    rng = np.random.default_rng(3)
    m = (rng.uniform(-0.5, 0.5, (4, 2, 2)) + 1j * rng.uniform(-0.5, 0.5, (4, 2, 2)))
    net = cc.TwoPort([1e9, 2e9, 3e9, 4e9], m)
    back = cc.read_touchstone(cc.write_touchstone(net))
    assert np.array_equal(back.matrices, net.matrices)
    with pytest.raises(cc.ParseError):
        cc.read_touchstone("# GHz S RI R 50\n1 2 3\n")


def test_coldfet_and_ft():
    e = cc.SmallSignalSet()
    e.r_g, e.r_d, e.r_s = 12.0, 8.0, 6.0
    e.c_gd, e.c_gb = 18e-15, 10e-15
    e.c_gg = 24e-15 + e.c_gd + e.c_gb
    e.g_ds = 20e-3
    f = list(np.logspace(np.log10(0.25e9), np.log10(40e9), 160))
    x = cc.coldfet_extract(cc.synth_small_signal(e, f))
    assert x.r_g == pytest.approx(12.0, rel=1e-3)
    assert x.c_gs == pytest.approx(24e-15, rel=1e-3)

    d = cc.SmallSignalSet()
    d.g_m, d.g_ds, d.c_gd, d.c_gg = 1e-3, 0.05e-3, 5e-15, 159.155e-15
    assert cc.ft_extract(cc.synth_small_signal(d, f)) == pytest.approx(1e9, rel=5e-3)
    assert cc.ft_analytic(d) == pytest.approx(1e9, rel=1e-5)


def test_pelgrom():
    mm = cc.demo_mismatch_model()
    g = cc.DeviceGeometry(cc.Polarity.nmos, 1.0, 1.0)
    assert cc.pelgrom_sigma(mm, g, 10.0) / cc.pelgrom_sigma(mm, g, 298.0) == pytest.approx(2.0, abs=1e-12)
    obs = []
    for w, l in [(0.5, 0.04), (1.0, 0.06), (2.0, 0.1), (1.0, 0.5), (2.0, 1.0), (5.0, 2.0)]:
        gg = cc.DeviceGeometry(cc.Polarity.nmos, w, l)
        obs.append((gg, cc.pelgrom_sigma(mm, gg, 298.0)))
    a_short, a_long = cc.fit_pelgrom(obs, 298.0, cc.Polarity.nmos)
    assert a_short == pytest.approx(3.0, rel=1e-9)
    assert a_long == pytest.approx(3.5, rel=1e-9)


def test_circuits_regimes():
    hold = cc.sram_snm(10.0, "hold")
    assert abs(hold["lobe_upper"] - hold["lobe_lower"]) < 1e-3
    assert cc.sram_snm(10.0, "read")["snm"] < hold["snm"]
    assert cc.iddq(10.0) < 1e-3 * cc.iddq(298.0)
    assert not cc.comparator_margin(10.0, 0.5)["passed"]
    assert cc.comparator_margin(10.0, 0.5, preamp=True)["passed"]
    ro = cc.ring_oscillator(298.0)
    assert ro["frequency"] > 0 and math.isfinite(ro["f_estimate"])


def test_flash_adc_matches_ideal_with_preamp():
    n, fs = 64, 1e9
    t = np.arange(n) / fs
    v = list(1.1 / 2 * (1 + np.sin(2 * np.pi * 7 * fs / n * t)))
    codes = cc.flash_adc(10.0, v, fs, preamp=True)
    assert codes == [min(31, max(0, math.floor(32 * x / 1.1))) for x in v]

#include <gtest/gtest.h>

#include <cmath>

#include "cryocmos/circuits.hpp"
#include "cryocmos/demo.hpp"
#include "cryocmos/error.hpp"

using namespace cryo;

TEST(Channel, CurrentFlowsFromHighToLowForNmos) {
    const DeviceSpec n{device::demo_card(Polarity::nmos), DeviceGeometry::single(Polarity::nmos, 1.0, 0.04)};
    const double i = channel_current(n, 1.1, 0.5, 0.0, 298.0);
    EXPECT_GT(i, 0.0);
    EXPECT_EQ(channel_current(n, 1.1, 0.0, 0.5, 298.0), -i);
    EXPECT_EQ(i, device::drain_current(n.card, n.geom, {1.1, 0.5, 0.0, 298.0}).i_d);
}

TEST(Channel, PmosSourcesFromTheHigherTerminal) {
    const DeviceSpec p{device::demo_card(Polarity::pmos), DeviceGeometry::single(Polarity::pmos, 1.0, 0.04)};
    // Gate low, a at vdd, b at 0: current leaves a towards b.
    EXPECT_GT(channel_current(p, 0.0, 1.1, 0.0, 298.0), 0.0);
    EXPECT_LT(channel_current(p, 0.0, 0.0, 1.1, 298.0), 0.0);
    EXPECT_LT(std::abs(channel_current(p, 1.1, 1.1, 0.0, 10.0)), 1e-20);
}

TEST(Inverter, OutputSatisfiesKcl) {
    const InverterSpec inv = demo::inverter(77.0);
    for (double v : {0.3, 0.5, 0.55, 0.6, 0.8}) {
        const double out = inverter_output(inv, v);
        const double ip = channel_current(inv.pmos, v, inv.vdd, out, inv.temperature);
        const double in = channel_current(inv.nmos, v, out, 0.0, inv.temperature);
        // One microvolt of output moves the currents by g_ds * 1 uV at most.
        const double gds = std::abs(channel_current(inv.nmos, v, out + 1e-6, 0.0, inv.temperature) - in) +
                           std::abs(channel_current(inv.pmos, v, inv.vdd, out + 1e-6, inv.temperature) - ip);
        EXPECT_LE(std::abs(ip - in), gds + 1e-18) << v;
    }
}

TEST(Inverter, VtcIsMonotoneRailToRail) {
    const InverterSpec inv = demo::inverter(10.0);
    std::vector<double> grid;
    for (int i = 0; i <= 110; ++i) grid.push_back(0.01 * i);
    const auto vtc = inverter_vtc(inv, grid);
    EXPECT_NEAR(vtc.front().v_out, inv.vdd, 1e-3);
    EXPECT_NEAR(vtc.back().v_out, 0.0, 1e-3);
    for (std::size_t i = 1; i < vtc.size(); ++i) EXPECT_LE(vtc[i].v_out, vtc[i - 1].v_out);
    const double vm = trip_point(inv);
    EXPECT_NEAR(inverter_output(inv, vm), vm, 2e-3);
}

TEST(Snm, IdealInverterGivesHalfSupply) {
    const double vdd = 1.1;
    const auto step = [vdd](double v) { return v < vdd / 2 ? vdd : 0.0; };
    const SnmResult r = snm_from_vtcs(step, step, vdd);
    EXPECT_NEAR(r.snm, vdd / 2, 1e-3);
    EXPECT_NEAR(r.lobe_upper, r.lobe_lower, 1e-3);
}

TEST(Snm, SkewedStepsGiveTheSmallerSide) {
    const double vdd = 1.1, a = 0.4;
    const auto step = [=](double v) { return v < a ? vdd : 0.0; };
    const SnmResult r = snm_from_vtcs(step, step, vdd);
    EXPECT_NEAR(r.snm, a, 1e-3);
}

TEST(Snm, SymmetricCellHasEqualLobesAndReadBelowHold) {
    for (double t : {10.0, 298.0}) {
        const SixTSpec cell = demo::sram_cell(t);
        const SnmResult hold = sram_snm(cell, SramMode::hold);
        const SnmResult read = sram_snm(cell, SramMode::read);
        EXPECT_NEAR(hold.lobe_upper, hold.lobe_lower, 1e-3);
        EXPECT_NEAR(read.lobe_upper, read.lobe_lower, 1e-3);
        EXPECT_LT(read.snm, hold.snm);
        EXPECT_GT(read.snm, 0.0);
        EXPECT_FALSE(hold.flagged);
    }
}

TEST(Snm, SwappedCellSwapsLobes) {
    SixTSpec cell = demo::sram_cell(298.0);
    cell.right.pull_down.geom = DeviceGeometry::single(Polarity::nmos, 0.6, 0.04);
    const SnmResult a = sram_snm(cell, SramMode::read);
    const SnmResult b = sram_snm(cell.swapped(), SramMode::read);
    EXPECT_NEAR(a.lobe_upper, b.lobe_lower, 1e-3);
    EXPECT_NEAR(a.lobe_lower, b.lobe_upper, 1e-3);
}

TEST(WriteMargin, InsideSupply) {
    const WriteMarginResult w = write_margin(demo::sram_cell(298.0));
    EXPECT_GT(w.margin, 0.0);
    EXPECT_LT(w.margin, 1.1);
    EXPECT_FALSE(w.flagged);
}

TEST(PnRatio, OptimumMovesWithTemperature) {
    const std::vector<double> ratios = {0.5, 0.75, 1.0, 1.25, 1.5, 2.0, 2.5, 3.0};
    const PnOptResult warm = optimize_pn_ratio(demo::sram_cell(298.0), ratios, 298.0);
    const PnOptResult cold = optimize_pn_ratio(demo::sram_cell(10.0), ratios, 10.0);
    EXPECT_NE(warm.best_ratio, cold.best_ratio);
    ASSERT_EQ(warm.table.size(), ratios.size());
    for (const auto& row : warm.table) EXPECT_DOUBLE_EQ(row.objective, std::min(row.hold_snm, row.write_margin));
}

TEST(RingOscillator, StepHalvingAndStartNode) {
    RoSpec s;
    s.inverter = demo::inverter(298.0);
    const RoResult a = ring_oscillator(s);
    RoSpec h = s;
    h.dt = a.dt / 2;
    const RoResult b = ring_oscillator(h);
    EXPECT_NEAR(b.frequency / a.frequency, 1.0, 0.005);
    RoSpec r = s;
    r.start_node = 1;
    EXPECT_NEAR(ring_oscillator(r).frequency / a.frequency, 1.0, 1e-3);
    EXPECT_GE(a.periods, 5);
    EXPECT_DOUBLE_EQ(a.stage_delay, 1.0 / (2.0 * 3 * a.frequency));
}

TEST(RingOscillator, TableMatchesExactCurrents) {
    RoSpec s;
    s.n_stages = 21;
    s.inverter = demo::inverter(10.0);
    s.currents = RoSpec::Currents::exact;
    const double exact = ring_oscillator(s).frequency;
    s.currents = RoSpec::Currents::table;
    EXPECT_NEAR(ring_oscillator(s).frequency / exact, 1.0, 2e-3);
}

TEST(RingOscillator, RejectsEvenStageCount) {
    RoSpec s;
    s.n_stages = 4;
    s.inverter = demo::inverter(298.0);
    EXPECT_THROW(ring_oscillator(s), DomainError);
}

TEST(Iddq, MonotoneInTemperature) {
    double prev = 0.0;
    for (double t : {10.0, 77.0, 150.0, 220.0, 298.0}) {
        const double i = iddq(demo::sram_cell(t), 4096, t);
        EXPECT_GT(i, prev);
        prev = i;
    }
    EXPECT_DOUBLE_EQ(iddq(demo::sram_cell(298.0), 2, 298.0), 2 * iddq(demo::sram_cell(298.0), 1, 298.0));
    EXPECT_LT(iddq(demo::sram_cell(10.0), 1, 10.0), 1e-3 * iddq(demo::sram_cell(298.0), 1, 298.0));
}

TEST(Comparator, ColdFailsAtLowCommonModeWithoutPreamp) {
    EXPECT_FALSE(comparator_margin(demo::comparator(10.0, false), 0.5, 0.01).pass);
    EXPECT_TRUE(comparator_margin(demo::comparator(298.0, false), 0.9, 0.01).pass);
    const ComparatorSpec with = demo::comparator(10.0, true);
    for (int k = 0; k <= 22; ++k) EXPECT_TRUE(comparator_margin(with, 1.1 * k / 22.0, 0.01).pass) << k;
}

TEST(Adc, IdealQuantizer) {
    EXPECT_EQ(ideal_code(0.0, 1.1), 0);
    EXPECT_EQ(ideal_code(1.1, 1.1), 31);
    EXPECT_EQ(ideal_code(1.1 / 32 * 5 + 1e-9, 1.1), 5);
    const auto x = adc_sine(1.1, 7e6, 256e6, 256);
    const AdcResult r = flash_adc(demo::comparator(10.0, false), 1e9, x, true);
    for (const auto& s : r.samples) EXPECT_EQ(s.code, s.ideal_code);
    EXPECT_EQ(r.flagged_count, 0u);
}

TEST(Adc, ColdWithoutPreampHasFailBand) {
    const auto x = adc_sine(1.1, 7e6 * 4, 1e9, 256);
    const AdcResult off = flash_adc(demo::comparator(10.0, false), 1e9, x);
    const AdcResult on = flash_adc(demo::comparator(10.0, true), 1e9, x);
    EXPECT_GT(off.flagged_count, 0u);
    EXPECT_EQ(on.flagged_count, 0u);
    for (const auto& s : on.samples) EXPECT_EQ(s.code, s.ideal_code);
}

#include <gtest/gtest.h>

#include <cmath>

#include "cryocmos/demo.hpp"
#include "cryocmos/error.hpp"
#include "cryocmos/fitdc.hpp"

using namespace cryo;

namespace {

demo::IvOptions clean(std::vector<double> temps) {
    demo::IvOptions o;
    o.temperatures = std::move(temps);
    o.noise = false;
    o.die_vth_sigma = 0.0;
    return o;
}

}  // namespace

TEST(IvCsv, RoundTripIsExact) {
    for (Polarity p : {Polarity::nmos, Polarity::pmos}) {
        const IvDataset d = demo::golden_iv(p, 3, demo::IvOptions{{10.0, 298.0}});
        const std::string text = write_iv_csv(d, "first\nsecond");
        EXPECT_EQ(text.rfind("# first\n# second\n", 0), 0u);
        const IvDataset back = read_iv_csv(text);
        ASSERT_EQ(back.curves.size(), d.curves.size());
        for (std::size_t i = 0; i < d.curves.size(); ++i) {
            EXPECT_EQ(back.curves[i].v_gs, d.curves[i].v_gs);
            EXPECT_EQ(back.curves[i].i_d, d.curves[i].i_d);
            EXPECT_EQ(back.curves[i].v_ds, d.curves[i].v_ds);
            EXPECT_EQ(back.curves[i].geom.n_fingers, 2);
            EXPECT_EQ(back.curves[i].geom.polarity, p);
        }
        EXPECT_EQ(write_iv_csv(back, "first\nsecond"), text);
    }
}

TEST(IvCsv, PmosIsStoredAsImage) {
    const IvDataset d = read_iv_csv(
        "device_id,die_id,polarity,w_um,l_um,nf,temp_k,vds_v,vgs_v,id_a\n"
        "p1,d0,pmos,1,0.04,1,298,-0.05,0,-1e-12\n"
        "p1,d0,pmos,1,0.04,1,298,-0.05,-0.5,-1e-6\n");
    ASSERT_EQ(d.curves.size(), 1u);
    EXPECT_EQ(d.curves[0].v_ds, 0.05);
    EXPECT_EQ(d.curves[0].v_gs, (std::vector<double>{0.0, 0.5}));
    EXPECT_EQ(d.curves[0].i_d[1], 1e-6);
}

TEST(IvCsv, ColumnsMatchedByName) {
    const IvDataset d = read_iv_csv(
        "# comment\n"
        "id_a,vgs_v,vds_v,temp_k,nf,l_um,w_um,polarity,die_id,device_id\n"
        "1e-9,0.1,0.05,77,1,0.04,1,nmos,d0,n1\n");
    EXPECT_EQ(d.curves[0].temperature, 77.0);
    EXPECT_EQ(d.curves[0].i_d[0], 1e-9);
}

TEST(IvCsv, Errors) {
    const std::string header = "device_id,die_id,polarity,w_um,l_um,nf,temp_k,vds_v,vgs_v,id_a\n";
    try {
        read_iv_csv(header + "n,d,nmos,1,0.04,1,298,0.05,0,1e-9\nn,d,nmos,1,0.04,1,298,0.05,abc,1e-9\n");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3);
    }
    EXPECT_THROW(read_iv_csv("device_id,polarity\nx,nmos\n"), ParseError);
    EXPECT_THROW(read_iv_csv(header + "n,d,xmos,1,0.04,1,298,0.05,0,1e-9\n"), ParseError);
    EXPECT_THROW(read_iv_csv(header + "n,d,nmos,1,0.04,1,298,0.05,0\n"), ParseError);
}

TEST(Stage1, NeedsLowDrainCurve) {
    demo::IvOptions o = clean({298.0});
    o.v_ds = {1.1};
    const IvDataset d = demo::golden_iv(Polarity::nmos, 1, o);
    EXPECT_THROW(extract_stage1(d.curves, device::demo_card(Polarity::nmos)), DomainError);
}

TEST(Stage1, ShortSubthresholdRangeFallsBack) {
    demo::IvOptions o = clean({298.0});
    o.v_gs_max = 1.1;
    IvDataset d = demo::golden_iv(Polarity::nmos, 1, o);
    for (auto& c : d.curves) {
        // Keep only the points above 1 uA.
        std::vector<double> v, i;
        for (std::size_t k = 0; k < c.v_gs.size(); ++k)
            if (c.i_d[k] > 1e-6) {
                v.push_back(c.v_gs[k]);
                i.push_back(c.i_d[k]);
            }
        c.v_gs = v;
        c.i_d = i;
    }
    const Stage1Result r = extract_stage1(d.curves, device::demo_card(Polarity::nmos));
    EXPECT_TRUE(r.from_defaults);
    EXPECT_FALSE(r.warnings.empty());
}

TEST(Stage1, SeedsNearTruthOnCleanData) {
    const ModelCard truth = device::demo_card(Polarity::nmos);
    const IvDataset d = demo::golden_iv(Polarity::nmos, 1, clean({77.0}));
    ModelCard defaults = truth;
    defaults.n_ideality = 1.6;
    defaults.mu0_298 = 150.0;
    const Stage1Result r = extract_stage1(d.curves, defaults);
    EXPECT_FALSE(r.from_defaults);
    const DeviceGeometry g = d.curves[0].geom;
    EXPECT_NEAR(r.ss_mv_dec / device::subthreshold_swing(truth, g, 77.0), 1.0, 0.03);
    EXPECT_NEAR(r.card.n_ideality, truth.n_ideality, 0.04);
}

TEST(FitCard, RecoversCleanCard) {
    const ModelCard truth = device::demo_card(Polarity::nmos);
    for (double t : {10.0, 298.0}) {
        const IvDataset d = demo::golden_iv(Polarity::nmos, 1, clean({t}));
        ModelCard start = truth;
        start.vth0_298 += 0.05;
        start.mu0_298 *= 0.7;
        start.theta_mob = 0.1;
        const FitReport r = fit_card(d.curves, start);
        EXPECT_LT(r.pooled_rms_percent, 0.5) << t;
        EXPECT_NEAR(device::vth(r.card, d.curves[0].geom, {0, 0, 0, t}), device::vth(truth, d.curves[0].geom, {0, 0, 0, t}),
                    2e-3);
        EXPECT_TRUE(r.converged);
        for (std::size_t i = 1; i < r.loss_history.size(); ++i) EXPECT_LE(r.loss_history[i], r.loss_history[i - 1]);
    }
}

TEST(FitCard, Reproducible) {
    const IvDataset d = demo::golden_iv(Polarity::pmos, 2, demo::IvOptions{{150.0}});
    const Stage1Result s = extract_stage1(d.curves, device::demo_card(Polarity::pmos));
    const FitReport a = fit_card(d.curves, s.card);
    const FitReport b = fit_card(d.curves, s.card);
    EXPECT_EQ(a.pooled_rms_percent, b.pooled_rms_percent);
    EXPECT_EQ(a.card.vth0_298, b.card.vth0_298);
    EXPECT_NEAR(pooled_rms(a.card, d.curves), a.pooled_rms_percent, 1e-12);
}

TEST(FitCard, WidthScalingIsEquivariant) {
    const IvDataset d = demo::golden_iv(Polarity::nmos, 4, demo::IvOptions{{298.0}});
    std::vector<IvCurve> wide = d.curves;
    for (auto& c : wide) {
        c.geom = DeviceGeometry::from_fingers(c.geom.polarity, c.geom.w_finger_um, c.geom.n_fingers * 2, c.geom.l_um);
        for (double& i : c.i_d) i *= 2.0;
    }
    ModelCard seed = device::demo_card(Polarity::nmos);
    // Series resistance is per unit width, so the scaled device is the same device.
    FitOptions scaled;
    scaled.floor_a *= 2.0;
    scaled.rms_floor_a *= 2.0;
    const FitReport a = fit_card(d.curves, seed);
    const FitReport b = fit_card(wide, seed, scaled);
    EXPECT_NEAR(a.pooled_rms_percent, b.pooled_rms_percent, 1e-6);
    EXPECT_NEAR(pooled_rms(a.card, d.curves), pooled_rms(a.card, wide, 2e-10), 1e-9);
    EXPECT_NEAR(a.card.vth0_298, b.card.vth0_298, 1e-6);
    EXPECT_NEAR(a.card.mu0_298 / b.card.mu0_298, 1.0, 1e-6);
}

TEST(FitCard, PaperBoundsOnDemoData) {
    for (Polarity p : {Polarity::nmos, Polarity::pmos}) {
        const IvDataset d = demo::golden_iv(p, 1);
        for (double t : {10.0, 298.0}) {
            const auto curves = d.at_temperature(t);
            ModelCard defaults;
            defaults.polarity = p;
            const FitReport r = fit_card(curves, extract_stage1(curves, defaults).card);
            EXPECT_LT(r.pooled_rms_percent, t < 100 ? 10.0 : 3.0) << to_string(p) << " " << t;
            EXPECT_FALSE(r.flagged);
        }
    }
}

TEST(TemperatureLaws, RecoverGeneratingCard) {
    const ModelCard truth = device::demo_card(Polarity::nmos);
    std::map<double, ModelCard> cards;
    for (double t : demo::kTemperatures) {
        // A per-temperature card that reproduces truth at T but with a
        // different thermal parameterization.
        ModelCard c = truth;
        c.kappa_vth = 0.0;
        c.gamma_mu = 0.0;
        c.t_sat = 25.0;
        c.vth0_298 = device::vth(truth, DeviceGeometry{}, {0, 0, 0, t});
        c.mu0_298 = device::mobility(truth, t);
        cards[t] = c;
    }
    const TemperatureLawFit f = fit_temperature_laws(cards);
    EXPECT_NEAR(f.card.t_sat, truth.t_sat, 1e-3);
    EXPECT_NEAR(f.card.kappa_vth / truth.kappa_vth, 1.0, 1e-4);
    EXPECT_NEAR(f.card.gamma_mu / truth.gamma_mu, 1.0, 1e-4);
    EXPECT_NEAR(f.card.vth0_298, truth.vth0_298, 1e-5);
    for (const auto& [t, r] : f.vth_residual_mv) EXPECT_NEAR(r, 0.0, 1e-3);
    cards.erase(10.0);
    cards.erase(77.0);
    cards.erase(150.0);
    EXPECT_THROW(fit_temperature_laws(cards), DomainError);
}

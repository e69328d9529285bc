#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <numbers>
#include <random>

#include "cryocmos/demo.hpp"
#include "cryocmos/error.hpp"
#include "cryocmos/rf_extract.hpp"

using namespace cryo;

namespace {

// Nodal analysis over (G, D, g, d, s) with the internal nodes reduced by a
// Schur complement.
Mat2 mna_y(const SmallSignalSet& e, double f) {
    const Complex jw(0.0, 2.0 * std::numbers::pi * f);
    Eigen::Matrix<Complex, 5, 5> y = Eigen::Matrix<Complex, 5, 5>::Zero();
    const auto stamp = [&](int a, int b, Complex g) {
        y(a, a) += g;
        if (b >= 0) {
            y(b, b) += g;
            y(a, b) -= g;
            y(b, a) -= g;
        }
    };
    enum { G, D, g, d, s };
    stamp(G, g, 1.0 / e.r_g);
    stamp(D, d, 1.0 / e.r_d);
    stamp(s, -1, 1.0 / e.r_s);
    stamp(g, s, jw * e.c_gs());
    stamp(g, d, jw * e.c_gd);
    stamp(g, -1, jw * e.c_gb);
    stamp(d, s, e.g_ds);
    // g_m (v_g - v_s) leaves node d and enters node s.
    y(d, g) += e.g_m;
    y(d, s) -= e.g_m;
    y(s, g) -= e.g_m;
    y(s, s) += e.g_m;
    const Eigen::Matrix<Complex, 2, 2> a = y.topLeftCorner<2, 2>();
    const Eigen::Matrix<Complex, 2, 3> b = y.topRightCorner<2, 3>();
    const Eigen::Matrix<Complex, 3, 2> c = y.bottomLeftCorner<3, 2>();
    const Eigen::Matrix<Complex, 3, 3> dd = y.bottomRightCorner<3, 3>();
    return a - b * dd.partialPivLu().solve(c);
}

SmallSignalSet random_device(std::mt19937_64& rng, double gm) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    SmallSignalSet e;
    e.r_g = 0.5 + 49.5 * u(rng);
    e.r_d = 0.5 + 49.5 * u(rng);
    e.r_s = 0.5 + 49.5 * u(rng);
    const double cgs = (1 + 199 * u(rng)) * 1e-15;
    e.c_gd = (1 + 199 * u(rng)) * 1e-15;
    e.c_gb = (1 + 199 * u(rng)) * 1e-15;
    e.c_gg = cgs + e.c_gd + e.c_gb;
    e.g_m = gm;
    e.g_ds = 1.0 / (5 + 195 * u(rng));
    return e;
}

std::vector<double> grid() {
    std::vector<double> f;
    for (int k = 0; k < 120; ++k) f.push_back(0.25e9 + 0.33e9 * k);
    return f;
}

}  // namespace

TEST(Synthesis, MatchesNodalOracle) {
    std::mt19937_64 rng(1);
    const auto f = grid();
    for (int i = 0; i < 20; ++i) {
        const SmallSignalSet e = random_device(rng, 5e-3 * (i % 3));
        const TwoPort y = synth_small_signal(e, f);
        ASSERT_EQ(y.rep, Rep::Y);
        for (std::size_t k = 0; k < f.size(); k += 17) {
            const Mat2 ref = mna_y(e, f[k]);
            EXPECT_LT((y.mats[k] - ref).cwiseAbs().maxCoeff(), 1e-12 * ref.cwiseAbs().maxCoeff());
        }
    }
}

TEST(ColdFet, RecoversForwardSynthesizedDevices) {
    std::mt19937_64 rng(21);
    const auto f = grid();
    int good = 0;
    for (int i = 0; i < 20; ++i) {
        const SmallSignalSet e = random_device(rng, 0.0);
        const ColdFetResult r = coldfet_extract(synth_small_signal(e, f));
        const SmallSignalSet& x = r.elements;
        const double er = std::max({std::abs(x.r_g / e.r_g - 1), std::abs(x.r_d / e.r_d - 1), std::abs(x.r_s / e.r_s - 1)});
        const double ec = std::max({std::abs(x.c_gs() / e.c_gs() - 1), std::abs(x.c_gd / e.c_gd - 1),
                                    std::abs(x.c_gb / e.c_gb - 1)});
        good += er < 0.01 && ec < 0.02;
    }
    EXPECT_GE(good, 19);
}

TEST(ColdFet, DemoFixtureDeembedsAndRecovers) {
    const demo::RfSet rf = demo::rf_set();
    const TwoPort net = deembed_open_short({rf.dut, rf.open, rf.short_});
    const ColdFetResult r = coldfet_extract(net);
    const SmallSignalSet ref = demo::coldfet_device();
    EXPECT_NEAR(r.elements.r_g, ref.r_g, 1e-6 * ref.r_g);
    EXPECT_NEAR(r.elements.r_s, ref.r_s, 1e-6 * ref.r_s);
    EXPECT_NEAR(r.elements.c_gd, ref.c_gd, 1e-6 * ref.c_gd);
    EXPECT_FALSE(r.elements.flagged);
}

TEST(ColdFet, ClosedFormOnlyIsFlaggedWhenNonPhysical) {
    SmallSignalSet e;
    e.r_g = -1.0;
    e.c_gg = 1e-15;
    e.c_gd = 2e-15;
    e.check();
    EXPECT_TRUE(e.flagged);
    EXPECT_GE(e.diagnostics.size(), 2u);
}

TEST(Ft, OneGigahertzDevice) {
    const TwoPort net = synth_small_signal(demo::ft_device(), demo::rf_grid());
    const FtResult r = ft_extract(net);
    EXPECT_NEAR(r.f_t / 1e9, 1.0, 0.005);
    EXPECT_EQ(r.method, FtMethod::measured_crossing);
    EXPECT_NEAR(ft_analytic(demo::ft_device()), 1e9, 1e3);
}

TEST(Ft, ExtrapolatesBelowCrossing) {
    std::vector<double> f;
    for (int k = 0; k < 40; ++k) f.push_back(1e8 * (1 + k) / 4);  // up to 1 GHz
    SmallSignalSet e = demo::ft_device();
    e.c_gg = 15.9155e-15;  // f_T 10 GHz, beyond the grid
    e.c_gd = 0.5e-15;
    const FtResult r = ft_extract(synth_small_signal(e, f));
    EXPECT_EQ(r.method, FtMethod::extrapolated);
    EXPECT_NEAR(r.f_t / ft_analytic(e), 1.0, 0.05);
}

TEST(Scaling, RecoversCoefficients) {
    const ParasiticScaling truth{{5.0, 2.0, 3.0, 10.0}, {1.0, 0.5, 8.0, 0.0}, {0.5, 0.1, 4.0, 2.0}};
    std::vector<ScalingSample> samples;
    for (double wf : {0.5, 1.0, 2.0})
        for (int nf : {1, 2, 4})
            for (double l : {0.04, 0.1}) {
                const DeviceGeometry g = DeviceGeometry::from_fingers(Polarity::nmos, wf, nf, l);
                samples.push_back({g, truth.predict(g)});
            }
    const ScalingFit fit = fit_parasitic_scaling(samples, true);
    for (std::size_t c = 0; c < 4; ++c) {
        EXPECT_NEAR(fit.nmos.r_g[c], truth.r_g[c], 1e-9);
        EXPECT_NEAR(fit.pmos.r_s[c], truth.r_s[c], 1e-9);
    }
}

TEST(Scaling, RankDeficientIsAnError) {
    std::vector<ScalingSample> samples;
    for (int i = 0; i < 5; ++i) {
        const DeviceGeometry g = DeviceGeometry::from_fingers(Polarity::nmos, 1.0, 1, 0.04);
        samples.push_back({g, SmallSignalSet{}});
    }
    EXPECT_THROW(fit_parasitic_scaling(samples, true), DomainError);
}

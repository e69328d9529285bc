#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "cryocmos/error.hpp"
#include "cryocmos/statvar.hpp"

using namespace cryo;

namespace {

double sample_sd(const std::vector<double>& x) {
    double m = 0;
    for (double v : x) m += v;
    m /= x.size();
    double s = 0;
    for (double v : x) s += (v - m) * (v - m);
    return std::sqrt(s / (x.size() - 1));
}

MismatchModel single(double a) {
    MismatchModel m;
    m.nmos[298.0] = {a, a};
    m.pmos[298.0] = {a, a};
    return m;
}

VariationModel flat_variation(double sigma_mv) {
    VariationModel v;
    v.nmos[298.0] = {0.0, sigma_mv, 0.0};
    v.pmos[298.0] = {0.0, sigma_mv, 0.0};
    return v;
}

const DeviceGeometry kOne = DeviceGeometry::single(Polarity::nmos, 1.0, 1.0);

}  // namespace

TEST(Pelgrom, DirectFormula) {
    EXPECT_DOUBLE_EQ(pelgrom_sigma(single(3.0), kOne, 298.0), 3.0);
    const DeviceGeometry big = DeviceGeometry::single(Polarity::nmos, 1e4, 1e4);
    EXPECT_LT(pelgrom_sigma(single(3.0), big, 298.0), 1e-3);
}

TEST(Pelgrom, Homogeneous) {
    const MismatchModel m = single(3.0);
    const DeviceGeometry g = DeviceGeometry::single(Polarity::nmos, 0.5, 0.2);
    const DeviceGeometry g3 = DeviceGeometry::single(Polarity::nmos, 1.5, 0.6);
    EXPECT_NEAR(pelgrom_sigma(m, g3, 298.0), pelgrom_sigma(m, g, 298.0) / 3.0, 1e-14);
}

TEST(Pelgrom, DemoRatios) {
    const MismatchModel m = demo_mismatch_model();
    for (Polarity p : {Polarity::nmos, Polarity::pmos}) {
        const DeviceGeometry lg = DeviceGeometry::single(p, 1.0, 1.0);
        const DeviceGeometry sg = DeviceGeometry::single(p, 1.0, 0.04);
        EXPECT_DOUBLE_EQ(pelgrom_sigma(m, lg, 10.0) / pelgrom_sigma(m, lg, 298.0), 2.0);
        EXPECT_DOUBLE_EQ(pelgrom_sigma(m, sg, 10.0) / pelgrom_sigma(m, sg, 298.0), 1.5);
    }
}

TEST(Pelgrom, InterpolatesButDoesNotExtrapolate) {
    const MismatchModel m = demo_mismatch_model();
    const double a10 = m.a_vth(Polarity::nmos, 10.0, 1.0), a77 = m.a_vth(Polarity::nmos, 77.0, 1.0);
    EXPECT_DOUBLE_EQ(m.a_vth(Polarity::nmos, 43.5, 1.0), 0.5 * (a10 + a77));
    EXPECT_THROW(pelgrom_sigma(m, kOne, 4.0), DomainError);
    EXPECT_THROW(pelgrom_sigma(m, kOne, 300.0), DomainError);
}

TEST(Pelgrom, NoiselessFitIsExact) {
    std::vector<MismatchObservation> obs;
    for (double w : {0.2, 0.5, 1.0, 3.0})
        for (double l : {0.04, 0.5, 1.0}) {
            const DeviceGeometry g = DeviceGeometry::single(Polarity::nmos, w, l);
            obs.push_back({g, 2.5 / std::sqrt(w * l)});
        }
    const PelgromFit f = fit_pelgrom(obs, 298.0, Polarity::nmos);
    EXPECT_NEAR(f.a_short / 2.5, 1.0, 1e-12);
    EXPECT_NEAR(f.a_long / 2.5, 1.0, 1e-12);
    EXPECT_NEAR(f.r2_long, 1.0, 1e-12);
}

TEST(Pelgrom, TwoFamiliesGetTheirOwnSlopes) {
    std::vector<MismatchObservation> obs;
    for (double w : {0.2, 1.0, 3.0}) {
        obs.push_back({DeviceGeometry::single(Polarity::nmos, w, 0.04), 4.0 / std::sqrt(w * 0.04)});
        obs.push_back({DeviceGeometry::single(Polarity::nmos, w, 1.0), 7.0 / std::sqrt(w * 1.0)});
    }
    const PelgromFit f = fit_pelgrom(obs, 10.0, Polarity::nmos);
    EXPECT_NEAR(f.a_short, 4.0, 1e-12);
    EXPECT_NEAR(f.a_long, 7.0, 1e-12);
    EXPECT_EQ(f.model.nmos.at(10.0).a_long, f.a_long);
}

TEST(Pelgrom, NoisyFitWithinFivePercent) {
    std::mt19937_64 rng(42);
    std::normal_distribution<double> z(0.0, 1.0);
    const double wl[14][2] = {{0.2, 0.04}, {0.5, 0.04}, {1, 0.04}, {2, 0.04}, {0.5, 0.06}, {1, 0.1}, {3, 0.1},
                              {0.5, 0.2},  {1, 0.2},    {1, 0.5}, {2, 0.5},  {1, 1},      {2, 1},   {5, 2}};
    std::vector<MismatchObservation> obs;
    for (const auto& g : wl)
        for (int k = 0; k < 50; ++k) {
            const double s = 3.0 / std::sqrt(g[0] * g[1]);
            obs.push_back({DeviceGeometry::single(Polarity::nmos, g[0], g[1]), s * (1.0 + 0.05 * z(rng))});
        }
    const PelgromFit f = fit_pelgrom(obs, 298.0, Polarity::nmos);
    EXPECT_NEAR(f.a_short / 3.0, 1.0, 0.05);
    EXPECT_NEAR(f.a_long / 3.0, 1.0, 0.05);
}

TEST(Pelgrom, DegenerateAbscissae) {
    std::vector<MismatchObservation> obs = {{DeviceGeometry::single(Polarity::nmos, 1.0, 0.04), 10.0},
                                            {DeviceGeometry::single(Polarity::nmos, 1.0, 0.04), 11.0}};
    EXPECT_THROW(fit_pelgrom(obs, 298.0, Polarity::nmos), DomainError);
}

TEST(Variation, FwhmOfNormal) { EXPECT_NEAR(fwhm(1.0), 2.3548200450309493, 1e-15); }

TEST(DeltaVth, Arithmetic) {
    const std::vector<double> cold = {0.69, 0.70, 0.71}, warm = {0.5, 0.5, 0.5};
    const DeltaVthStats s = delta_vth_stats(cold, warm);
    EXPECT_NEAR(s.mean, 0.2, 1e-15);
    EXPECT_NEAR(s.min, 0.19, 1e-15);
    EXPECT_NEAR(s.max, 0.21, 1e-15);
    const std::vector<double> same = {0.7, 0.7};
    EXPECT_EQ(delta_vth_stats(same, std::vector<double>{0.5, 0.5}).sigma, 0.0);
    EXPECT_THROW(delta_vth_stats(std::vector<double>{1.0}, std::vector<double>{1.0}), DomainError);
}

TEST(DeltaVth, FiftyDies) {
    // A 3-sigma band misses 0.27 % of the time; allow one miss in 20 sets.
    int inside = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> n(0.2, 0.01);
        std::vector<double> cold, warm;
        for (int i = 0; i < 50; ++i) {
            warm.push_back(0.4);
            cold.push_back(0.4 + n(rng));
        }
        inside += std::abs(delta_vth_stats(cold, warm).mean - 0.2) <= 3 * 0.01 / std::sqrt(50.0);
    }
    EXPECT_GE(inside, 19);
}

TEST(MonteCarlo, OffModesReturnBase) {
    const ModelCard base = device::demo_card(Polarity::nmos);
    McConfig cfg;
    cfg.n_samples = 1;
    cfg.mode = McMode::global_only;
    const auto cards = sample_cards(base, kOne, flat_variation(0.0), single(3.0), 298.0, cfg);
    ASSERT_EQ(cards.size(), 1u);
    EXPECT_EQ(cards[0].vth0_298, base.vth0_298);
    EXPECT_EQ(cards[0].mu0_298, base.mu0_298);
}

TEST(MonteCarlo, GlobalSigmaAndKolmogorovSmirnov) {
    const ModelCard base = device::demo_card(Polarity::nmos);
    McConfig cfg;
    cfg.n_samples = 10000;
    cfg.master_seed = 77;
    cfg.mode = McMode::global_only;
    const auto s = sample_pairs(base, kOne, flat_variation(10.0), single(3.0), 298.0, cfg);
    std::vector<double> x;
    for (const auto& v : s) x.push_back(v.global_dvth * 1e3);
    EXPECT_NEAR(sample_sd(x) / 10.0, 1.0, 0.03);

    std::sort(x.begin(), x.end());
    double d = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double cdf = 0.5 * std::erfc(-x[i] / (10.0 * std::sqrt(2.0)));
        d = std::max({d, std::abs(cdf - i / n), std::abs(cdf - (i + 1) / n)});
    }
    EXPECT_LT(d, 1.628 / std::sqrt(n));
}

TEST(MonteCarlo, PairSigmaMatchesPelgrom) {
    const ModelCard base = device::demo_card(Polarity::nmos);
    const DeviceGeometry g = DeviceGeometry::single(Polarity::nmos, 0.5, 0.04);
    McConfig cfg;
    cfg.n_samples = 10000;
    cfg.master_seed = 5;
    const MismatchModel mm = demo_mismatch_model();
    const auto s = sample_pairs(base, g, demo_variation_model(), mm, 10.0, cfg);
    std::vector<double> d;
    for (const auto& v : s) d.push_back((v.device_a.vth0_298 - v.device_b.vth0_298) * 1e3);
    EXPECT_NEAR(sample_sd(d) / pelgrom_sigma(mm, g, 10.0), 1.0, 0.03);
}

TEST(MonteCarlo, SubstreamsIndependentOfCount) {
    const ModelCard base = device::demo_card(Polarity::pmos);
    const DeviceGeometry g = DeviceGeometry::single(Polarity::pmos, 1.0, 0.1);
    McConfig small, large;
    small.n_samples = 10;
    large.n_samples = 500;
    small.master_seed = large.master_seed = 123;
    const auto a = sample_pairs(base, g, demo_variation_model(), demo_mismatch_model(), 77.0, small);
    const auto b = sample_pairs(base, g, demo_variation_model(), demo_mismatch_model(), 77.0, large);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].device_a.vth0_298, b[i].device_a.vth0_298);
        EXPECT_EQ(a[i].device_b.mu0_298, b[i].device_b.mu0_298);
    }
    const McSample lone = draw_sample(base, g, demo_variation_model(), demo_mismatch_model(), 77.0, 123, 7, McMode::both);
    EXPECT_EQ(lone.mismatch_a, b[7].mismatch_a);
    EXPECT_NE(substream_seed(123, 0), substream_seed(124, 0));
}

TEST(MonteCarlo, ModesShareDraws) {
    const ModelCard base = device::demo_card(Polarity::nmos);
    const auto both = draw_sample(base, kOne, demo_variation_model(), demo_mismatch_model(), 298.0, 1, 3, McMode::both);
    const auto mis = draw_sample(base, kOne, demo_variation_model(), demo_mismatch_model(), 298.0, 1, 3, McMode::mismatch_only);
    EXPECT_EQ(both.mismatch_a, mis.mismatch_a);
    EXPECT_EQ(mis.global_dvth, 0.0);
    EXPECT_EQ(parse_mc_mode(to_string(McMode::global_only)), McMode::global_only);
}

TEST(RelativeRms, Basics) {
    const std::vector<double> ref = {1e-6, 2e-6, 3e-6, 1e-12};
    std::vector<double> model = ref;
    EXPECT_EQ(relative_rms(model, ref), 0.0);
    for (double& v : model) v *= 1.10;
    EXPECT_NEAR(relative_rms(model, ref), 10.0, 1e-10);
    // Points below the floor are ignored.
    model[3] = 1.0;
    EXPECT_NEAR(relative_rms(model, ref), 10.0, 1e-10);
    EXPECT_THROW(relative_rms(std::vector<double>{1e-12}, std::vector<double>{1e-12}), DomainError);
}

TEST(RelativeRms, LognormalNoiseGivesItsWidth) {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> z(0.0, 1.0);
    std::vector<double> ref, model;
    for (int i = 0; i < 200; ++i) {
        const double v = 1e-6 * (1 + i);
        model.push_back(v);
        ref.push_back(v * std::exp(0.03 * z(rng)));
    }
    EXPECT_NEAR(relative_rms(model, ref), 3.0, 0.5);
}

#include <gtest/gtest.h>

#include <cmath>

#include "cryocmos/device.hpp"
#include "cryocmos/error.hpp"

using namespace cryo;

namespace {

// Straight transcription of the model in long double, series resistance by
// plain bisection.
long double softplus_ld(long double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

long double oracle_intrinsic(const ModelCard& c, const DeviceGeometry& g, long double vgs, long double vds, double t) {
    const long double teff = std::sqrt((long double)t * t + (long double)c.t_sat * c.t_sat);
    const long double phi = 1.380649e-23L * teff / 1.602177e-19L;
    const long double n = c.n_ideality;
    const long double mu = c.mu0_298 * std::pow(298.0L / teff, (long double)c.gamma_mu);
    const long double beta = mu * c.cox_areal * 1e8L * g.w_um / g.l_um;
    const long double vt = c.vth0_298 + c.kappa_vth * (298.0L - teff) - c.dibl_eta * vds;
    const long double a = 2 * n * phi;
    const long double lf = softplus_ld((vgs - vt) / a);
    const long double lr = softplus_ld((vgs - vt - n * vds) / a);
    return 2 * n * beta * phi * phi * (lf * lf - lr * lr) / (1 + c.theta_mob * a * lf);
}

long double oracle_current(const ModelCard& c, const DeviceGeometry& g, double vgs, double vds, double t) {
    const long double rs = c.r_source / g.w_um, rsd = (c.r_source + c.r_drain) / g.w_um;
    long double lo = 0, hi = oracle_intrinsic(c, g, vgs, vds, t);
    if (hi <= 0) return hi;
    for (int i = 0; i < 200; ++i) {
        const long double mid = 0.5L * (lo + hi);
        const long double r = mid - oracle_intrinsic(c, g, vgs - mid * rs, vds - mid * rsd, t);
        (r > 0 ? hi : lo) = mid;
    }
    return 0.5L * (lo + hi);
}

const DeviceGeometry kGeom = DeviceGeometry::from_fingers(Polarity::nmos, 0.5, 2, 0.04);

}  // namespace

TEST(Device, MatchesLongDoubleOracle) {
    const ModelCard c = device::demo_card(Polarity::nmos);
    for (double t : {10.0, 77.0, 298.0})
        for (double vgs = 0.0; vgs <= 1.1; vgs += 0.1)
            for (double vds : {0.01, 0.05, 0.5, 1.1}) {
                const double id = device::drain_current(c, kGeom, {vgs, vds, 0.0, t}).i_d;
                const double ref = static_cast<double>(oracle_current(c, kGeom, vgs, vds, t));
                EXPECT_NEAR(id / ref, 1.0, 1e-8) << t << " " << vgs << " " << vds;
            }
}

TEST(Device, PmosIsMirroredImage) {
    ModelCard n = device::demo_card(Polarity::pmos);
    n.polarity = Polarity::nmos;
    const ModelCard p = device::demo_card(Polarity::pmos);
    DeviceGeometry gp = kGeom;
    gp.polarity = Polarity::pmos;
    for (double vgs : {0.2, 0.6, 1.0}) {
        const double in = device::drain_current(n, kGeom, {vgs, 0.7, 0.0, 77.0}).i_d;
        const EvalResult rp = device::drain_current(p, gp, {-vgs, -0.7, 0.0, 77.0});
        EXPECT_DOUBLE_EQ(rp.i_d, -in);
        EXPECT_GT(rp.g_m, 0.0);  // |I| grows as V_GS goes more negative: dI/dVgs > 0 with I < 0
    }
    EXPECT_LT(device::vth(p, gp, {0.0, -0.05, 0.0, 298.0}), 0.0);
}

TEST(Device, GradientsMatchCentralDifferences) {
    const ModelCard c = device::demo_card(Polarity::nmos);
    const double h = 1e-6;
    for (double t : {10.0, 298.0})
        for (double vgs = 0.2; vgs <= 1.1; vgs += 0.15)
            for (double vds = 0.05; vds <= 1.1; vds += 0.25) {
                const EvalResult r = device::drain_current(c, kGeom, {vgs, vds, 0.0, t});
                const double gm = (device::drain_current(c, kGeom, {vgs + h, vds, 0.0, t}).i_d -
                                   device::drain_current(c, kGeom, {vgs - h, vds, 0.0, t}).i_d) / (2 * h);
                const double gds = (device::drain_current(c, kGeom, {vgs, vds + h, 0.0, t}).i_d -
                                    device::drain_current(c, kGeom, {vgs, vds - h, 0.0, t}).i_d) / (2 * h);
                EXPECT_NEAR(r.g_m / gm, 1.0, 1e-5);
                EXPECT_NEAR(r.g_ds / gds, 1.0, 1e-5);
            }
}

TEST(Device, ZeroDrainBiasGivesZeroCurrent) {
    const ModelCard c = device::demo_card(Polarity::nmos);
    EXPECT_EQ(device::drain_current(c, kGeom, {0.8, 0.0, 0.0, 298.0}).i_d, 0.0);
}

TEST(Device, EffectiveTemperatureFloor) {
    EXPECT_DOUBLE_EQ(device::effective_temperature(298.0, 25.0), std::hypot(298.0, 25.0));
    EXPECT_NEAR(device::effective_temperature(1e-3, 25.0), 25.0, 1e-6);
    EXPECT_THROW(device::effective_temperature(0.0, 25.0), DomainError);
}

TEST(Device, SubthresholdSwingMatchesSlope) {
    const ModelCard c = device::demo_card(Polarity::nmos);
    for (double t : {10.0, 298.0}) {
        const double i1 = device::drain_current(c, kGeom, {0.0, 0.05, 0.0, t}).i_d;
        const double i2 = device::drain_current(c, kGeom, {0.001, 0.05, 0.0, t}).i_d;
        const double ss = 1.0 / std::log10(i2 / i1);
        EXPECT_NEAR(ss / device::subthreshold_swing(c, kGeom, t), 1.0, 1e-3);
    }
}

TEST(Device, DemoCardPhysics) {
    for (Polarity p : {Polarity::nmos, Polarity::pmos}) {
        const ModelCard c = device::demo_card(p);
        DeviceGeometry g = kGeom;
        g.polarity = p;
        const double s = p == Polarity::nmos ? 1.0 : -1.0;
        const double shift = std::abs(device::vth(c, g, {0.0, 0.0, 0.0, 10.0})) -
                             std::abs(device::vth(c, g, {0.0, 0.0, 0.0, 298.0}));
        EXPECT_NEAR(shift, 0.2, 0.02);
        double prev = 1e9;
        for (double t : {298.0, 220.0, 150.0, 77.0, 40.0, 10.0}) {
            const double ss = device::subthreshold_swing(c, g, t);
            EXPECT_LT(ss, prev);
            prev = ss;
        }
        EXPECT_GT(device::subthreshold_swing(c, g, 4.0), 0.9 * device::subthreshold_swing(c, g, 10.0));
        EXPECT_LT(device::off_current(c, g, 10.0, 1.1) / device::off_current(c, g, 298.0, 1.1), 1e-3);
        EXPECT_GT(std::abs(device::drain_current(c, g, {s * 1.1, s * 1.1, 0.0, 298.0}).i_d), 0.0);
    }
}

TEST(Device, ConstantCurrentThresholdHitsTarget) {
    const ModelCard c = device::demo_card(Polarity::nmos);
    const double v = device::vth_constant_current(c, kGeom, 77.0);
    const double id = device::drain_current(c, kGeom, {v, 0.05, 0.0, 77.0}).i_d;
    EXPECT_NEAR(id / (100e-9 * kGeom.w_um / kGeom.l_um), 1.0, 1e-6);
}

TEST(Device, InputValidation) {
    const ModelCard c = device::demo_card(Polarity::nmos);
    EXPECT_THROW(device::drain_current(c, kGeom, {NAN, 0.1, 0.0, 298.0}), DomainError);
    EXPECT_THROW(device::drain_current(c, kGeom, {0.5, 0.1, 0.0, 1.0}), DomainError);
    EXPECT_THROW(DeviceGeometry::single(Polarity::nmos, -1.0, 0.04), DomainError);
    ModelCard bad = c;
    bad.n_ideality = 0.9;
    EXPECT_THROW(bad.validate(), DomainError);
    EXPECT_EQ(parse_polarity("pmos"), Polarity::pmos);
    EXPECT_THROW(parse_polarity("cmos"), DomainError);
}

#include "cryocmos/demo.hpp"

#include <Eigen/LU>
#include <cmath>
#include <fmt/format.h>
#include <numbers>
#include <random>

namespace cryo::demo {
namespace {

// Stream identifiers keep the generators independent of each other.
enum Stream : std::uint64_t { kIvStream = 1, kPairStream = 2, kDieStream = 3 };

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t sub) {
    return substream_seed(substream_seed(seed, stream), sub);
}

}  // namespace

double iv_noise(double t) { return 0.01 + 0.04 * (298.0 - t) / 288.0; }

IvDataset golden_iv(Polarity p, std::uint64_t seed, const IvOptions& opt) {
    IvDataset data;
    const ModelCard base = device::demo_card(p);
    const DeviceGeometry g = DeviceGeometry::from_fingers(p, 1.0, 2, 0.04);
    const std::uint64_t pol = p == Polarity::nmos ? 0 : 1;

    std::mt19937_64 die_rng(stream_seed(seed, kIvStream, pol));
    std::normal_distribution<double> normal(0.0, 1.0);
    ModelCard card = base;
    card.vth0_298 += opt.die_vth_sigma * normal(die_rng);

    const double sign = p == Polarity::nmos ? 1.0 : -1.0;
    const int n_pts = static_cast<int>(std::lround(opt.v_gs_max / opt.v_gs_step)) + 1;
    for (std::size_t ti = 0; ti < opt.temperatures.size(); ++ti) {
        const double t = opt.temperatures[ti];
        for (std::size_t vi = 0; vi < opt.v_ds.size(); ++vi) {
            std::mt19937_64 rng(stream_seed(seed, kIvStream, 16 + pol * 1024 + ti * 32 + vi));
            IvCurve c;
            c.device_id = fmt::format("{}_golden", to_string(p));
            c.die_id = "die00";
            c.geom = g;
            c.temperature = t;
            c.v_ds = opt.v_ds[vi];
            const double sigma = opt.noise ? iv_noise(t) : 0.0;
            for (int k = 0; k < n_pts; ++k) {
                const double vgs = k * opt.v_gs_step;
                BiasPoint b;
                b.v_gs = sign * vgs;
                b.v_ds = sign * c.v_ds;
                b.temperature = t;
                const double i = std::abs(device::drain_current(card, g, b).i_d);
                const double z = normal(rng);
                c.v_gs.push_back(vgs);
                c.i_d.push_back(i * std::exp(sigma * z));
            }
            data.curves.push_back(std::move(c));
        }
    }
    return data;
}

std::vector<DeviceGeometry> pair_geometries(Polarity p) {
    const double wl[14][2] = {{0.2, 0.04}, {0.5, 0.04}, {1.0, 0.04}, {2.0, 0.04}, {0.5, 0.06}, {1.0, 0.1}, {3.0, 0.1},
                              {0.5, 0.2},  {1.0, 0.2},  {1.0, 0.5},  {2.0, 0.5},  {1.0, 1.0}, {2.0, 1.0}, {5.0, 2.0}};
    std::vector<DeviceGeometry> out;
    for (const auto& g : wl) out.push_back(DeviceGeometry::single(p, g[0], g[1]));
    return out;
}

std::vector<PairRecord> matched_pairs(std::uint64_t seed) {
    const MismatchModel mm = demo_mismatch_model();
    const VariationModel var = demo_variation_model();
    std::vector<PairRecord> out;
    constexpr int kPairs = 50;
    const std::uint64_t master = substream_seed(seed, kPairStream);
    std::size_t index = 0;
    for (Polarity p : {Polarity::nmos, Polarity::pmos}) {
        const ModelCard card = device::demo_card(p);
        const auto geoms = pair_geometries(p);
        for (double t : {10.0, 298.0}) {
            for (std::size_t gi = 0; gi < geoms.size(); ++gi) {
                for (int k = 0; k < kPairs; ++k, ++index) {
                    const McSample s = draw_sample(card, geoms[gi], var, mm, t, master, index, McMode::mismatch_only);
                    PairRecord r;
                    r.pair_id = fmt::format("{}_g{:02d}_p{:02d}", to_string(p), gi, k);
                    r.geom = geoms[gi];
                    r.temperature = t;
                    r.dvth_mv = (s.mismatch_a - s.mismatch_b) * 1000.0;
                    out.push_back(std::move(r));
                }
            }
        }
    }
    return out;
}

std::vector<DieRecord> die_vth(std::uint64_t seed) {
    const VariationModel var = demo_variation_model();
    std::vector<DieRecord> out;
    constexpr int kDies = 50;
    for (Polarity p : {Polarity::nmos, Polarity::pmos}) {
        const ModelCard base = device::demo_card(p);
        const DeviceGeometry g = DeviceGeometry::single(p, 1.0, 0.04);
        const std::uint64_t pol = p == Polarity::nmos ? 0 : 1;
        for (int d = 0; d < kDies; ++d) {
            std::mt19937_64 rng(stream_seed(seed, kDieStream, pol * 1000 + static_cast<std::uint64_t>(d)));
            std::normal_distribution<double> normal(0.0, 1.0);
            // Die-level shift at 298 K plus an independent spread of the cold shift.
            const double z_warm = normal(rng);
            const double z_cold = normal(rng);
            ModelCard warm = base;
            warm.vth0_298 += z_warm * var.sigma_vth_mv(g, 298.0) * 1e-3;
            ModelCard cold = warm;
            cold.vth0_298 += z_cold * 0.01;
            DieRecord r;
            r.die_id = fmt::format("die{:02d}", d);
            r.polarity = p;
            r.vth_298k = device::vth_constant_current(warm, g, 298.0);
            r.vth_10k = device::vth_constant_current(cold, g, 10.0);
            out.push_back(std::move(r));
        }
    }
    return out;
}

std::vector<double> rf_grid() {
    std::vector<double> f;
    constexpr int kPoints = 160;
    const double lo = std::log10(0.25e9), hi = std::log10(40e9);
    for (int i = 0; i < kPoints; ++i) f.push_back(std::pow(10.0, lo + (hi - lo) * i / (kPoints - 1)));
    return f;
}

SmallSignalSet coldfet_device() {
    SmallSignalSet e;
    e.r_g = 12.0;
    e.r_d = 8.0;
    e.r_s = 6.0;
    e.c_gd = 18e-15;
    e.c_gb = 10e-15;
    e.c_gg = 24e-15 + e.c_gd + e.c_gb;
    e.g_m = 0.0;
    e.g_ds = 20e-3;
    e.temperature = 298.0;
    return e;
}

SmallSignalSet ft_device() {
    SmallSignalSet e;
    e.c_gd = 5e-15;
    e.c_gg = 159.155e-15;  // C_gs + C_gd, C_gb = 0
    e.g_m = 1e-3;
    e.g_ds = 0.05e-3;
    return e;
}

RfSet rf_set() {
    const auto f = rf_grid();
    RfSet s;
    s.coldfet = convert(synth_small_signal(coldfet_device(), f), Rep::S);
    s.ft = convert(synth_small_signal(ft_device(), f), Rep::S);

    std::vector<Mat2> y_pad, z_series;
    for (double fi : f) {
        const Complex jw(0.0, 2.0 * std::numbers::pi * fi);
        const double c1 = 30e-15, c2 = 28e-15, c12 = 4e-15;
        Mat2 y;
        y << jw * (c1 + c12), -jw * c12, -jw * c12, jw * (c2 + c12);
        Mat2 z;
        z << 2.0 + jw * 40e-12 + 0.5, 0.5, 0.5, 2.5 + jw * 45e-12 + 0.5;
        y_pad.push_back(y);
        z_series.push_back(z);
    }
    s.dut = embed_open_short(s.coldfet, y_pad, z_series);

    s.open.freqs = f;
    s.open.rep = Rep::Y;
    s.open.mats = y_pad;
    s.open = convert(s.open, Rep::S);

    s.short_.freqs = f;
    s.short_.rep = Rep::Y;
    for (std::size_t i = 0; i < f.size(); ++i) s.short_.mats.push_back(z_series[i].inverse() + y_pad[i]);
    s.short_ = convert(s.short_, Rep::S);
    return s;
}

InverterSpec inverter(double t, const ModelCard& n, const ModelCard& p) {
    return {{n, DeviceGeometry::single(Polarity::nmos, 0.2, 0.04)}, {p, DeviceGeometry::single(Polarity::pmos, 0.5, 0.04)},
            kVdd, t};
}

SixTSpec sram_cell(double t, const ModelCard& n, const ModelCard& p) {
    return SixTSpec::symmetric({n, DeviceGeometry::single(Polarity::nmos, 0.3, 0.04)},
                               {p, DeviceGeometry::single(Polarity::pmos, 0.3, 0.04)},
                               {n, DeviceGeometry::single(Polarity::nmos, 0.45, 0.04)}, kVdd, t);
}

ComparatorSpec comparator(double t, bool preamp, const ModelCard& n) {
    ComparatorSpec c;
    c.input = {n, DeviceGeometry::single(Polarity::nmos, 1.0, 0.04)};
    c.vdd = kVdd;
    c.temperature = t;
    if (preamp) c.preamp = Preamp{4.0, 0.9};
    return c;
}

}  // namespace cryo::demo

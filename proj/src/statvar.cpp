#include "cryocmos/statvar.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "cryocmos/error.hpp"

namespace cryo {
namespace {

template <typename Entry, typename Lerp>
Entry interpolate(const std::map<double, Entry>& table, double t, Lerp lerp, const char* what) {
    if (table.empty()) throw DomainError(std::string(what) + ": empty temperature table");
    const auto hi = table.lower_bound(t);
    if (hi != table.end() && std::abs(hi->first - t) <= 1e-9) return hi->second;
    if (hi == table.begin() || hi == table.end())
        throw DomainError(std::string(what) + ": temperature " + std::to_string(t) +
                          " K outside tabulated range [" + std::to_string(table.begin()->first) + ", " +
                          std::to_string(table.rbegin()->first) + "] K");
    const auto lo = std::prev(hi);
    const double w = (t - lo->first) / (hi->first - lo->first);
    return lerp(lo->second, hi->second, w);
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

}  // namespace

double MismatchModel::a_vth(Polarity p, double t, double l_um) const {
    const PelgromEntry e = interpolate(
        table(p), t,
        [](const PelgromEntry& a, const PelgromEntry& b, double w) {
            return PelgromEntry{a.a_short + w * (b.a_short - a.a_short), a.a_long + w * (b.a_long - a.a_long)};
        },
        "mismatch model");
    return l_um <= l_split_um ? e.a_short : e.a_long;
}

void MismatchModel::validate() const {
    if (!(l_split_um > 0.0)) throw DomainError("mismatch model: l_split must be positive");
    for (const auto* t : {&nmos, &pmos})
        for (const auto& [temp, e] : *t)
            if (!(e.a_short > 0.0) || !(e.a_long > 0.0))
                throw DomainError("mismatch model: A_VTH must be positive at " + std::to_string(temp) + " K");
}

double VariationModel::sigma_vth_mv(const DeviceGeometry& g, double t) const {
    const VariationEntry e = interpolate(
        table(g.polarity), t,
        [](const VariationEntry& a, const VariationEntry& b, double w) {
            return VariationEntry{a.b_mv_um + w * (b.b_mv_um - a.b_mv_um),
                                  a.sigma0_mv + w * (b.sigma0_mv - a.sigma0_mv),
                                  a.sigma_mu_rel + w * (b.sigma_mu_rel - a.sigma_mu_rel)};
        },
        "variation model");
    return e.b_mv_um / std::sqrt(g.area_um2()) + e.sigma0_mv;
}

double VariationModel::sigma_mu_rel(Polarity p, double t) const {
    return interpolate(
        table(p), t,
        [](const VariationEntry& a, const VariationEntry& b, double w) {
            return VariationEntry{0.0, 0.0, a.sigma_mu_rel + w * (b.sigma_mu_rel - a.sigma_mu_rel)};
        },
        "variation model")
        .sigma_mu_rel;
}

void VariationModel::validate() const {
    for (const auto* t : {&nmos, &pmos})
        for (const auto& [temp, e] : *t)
            if (e.b_mv_um < 0.0 || e.sigma0_mv < 0.0 || e.sigma_mu_rel < 0.0)
                throw DomainError("variation model: negative sigma at " + std::to_string(temp) + " K");
}

double fwhm(double sigma) { return 2.0 * std::sqrt(2.0 * std::log(2.0)) * sigma; }

std::string_view to_string(McMode m) {
    switch (m) {
        case McMode::global_only: return "global-only";
        case McMode::mismatch_only: return "mismatch-only";
        case McMode::both: return "both";
    }
    return "?";
}

McMode parse_mc_mode(std::string_view s) {
    if (s == "global-only" || s == "global") return McMode::global_only;
    if (s == "mismatch-only" || s == "mismatch") return McMode::mismatch_only;
    if (s == "both") return McMode::both;
    throw DomainError("unknown Monte Carlo mode '" + std::string(s) + "'");
}

double pelgrom_sigma(const MismatchModel& model, const DeviceGeometry& geom, double t) {
    geom.validate();
    return model.a_vth(geom.polarity, t, geom.l_um) / std::sqrt(geom.area_um2());
}

PelgromFit fit_pelgrom(std::span<const MismatchObservation> obs, double t, Polarity p, double l_split_um) {
    struct Family {
        double sxy = 0, sxx = 0;
        std::vector<double> x, y;
    } fam[2];  // 0 short, 1 long

    for (const auto& o : obs) {
        o.geom.validate();
        if (!std::isfinite(o.sigma_dvth_mv) || o.sigma_dvth_mv < 0.0)
            throw DomainError("fit_pelgrom: observed sigma must be finite and non-negative");
        Family& f = fam[o.geom.l_um <= l_split_um ? 0 : 1];
        const double x = 1.0 / std::sqrt(o.geom.area_um2());
        f.x.push_back(x);
        f.y.push_back(o.sigma_dvth_mv);
        f.sxy += x * o.sigma_dvth_mv;
        f.sxx += x * x;
    }
    if (fam[0].x.empty() && fam[1].x.empty()) throw DomainError("fit_pelgrom: no observations");

    PelgromFit out;
    double slope[2] = {0, 0};
    double r2[2] = {0, 0};
    for (int k = 0; k < 2; ++k) {
        Family& f = fam[k];
        if (f.x.empty()) continue;
        std::vector<double> xs = f.x;
        std::sort(xs.begin(), xs.end());
        const auto last = std::unique(xs.begin(), xs.end(),
                                      [](double a, double b) { return std::abs(a - b) <= 1e-12 * std::abs(b); });
        if (last - xs.begin() < 2)
            throw DomainError(std::string("fit_pelgrom: degenerate abscissae in the ") + (k == 0 ? "short" : "long") +
                              "-channel family (need >= 2 distinct 1/sqrt(WL) values)");
        slope[k] = f.sxy / f.sxx;
        const double mean = std::accumulate(f.y.begin(), f.y.end(), 0.0) / static_cast<double>(f.y.size());
        double ss_res = 0, ss_tot = 0;
        for (std::size_t i = 0; i < f.x.size(); ++i) {
            ss_res += std::pow(f.y[i] - slope[k] * f.x[i], 2);
            ss_tot += std::pow(f.y[i] - mean, 2);
        }
        r2[k] = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : (ss_res == 0.0 ? 1.0 : 0.0);
    }
    if (fam[0].x.empty()) {
        slope[0] = slope[1];
        out.notes.push_back("no short-channel observations; short family uses the long-channel slope");
    }
    if (fam[1].x.empty()) {
        slope[1] = slope[0];
        out.notes.push_back("no long-channel observations; long family uses the short-channel slope");
    }

    out.a_short = slope[0];
    out.a_long = slope[1];
    out.r2_short = r2[0];
    out.r2_long = r2[1];
    out.n_short = fam[0].x.size();
    out.n_long = fam[1].x.size();
    out.model.l_split_um = l_split_um;
    out.model.table(p)[t] = PelgromEntry{slope[0], slope[1]};
    return out;
}

DeltaVthStats delta_vth_stats(std::span<const double> vth_cold, std::span<const double> vth_warm) {
    if (vth_cold.size() != vth_warm.size())
        throw DomainError("delta_vth_stats: cold and warm samples must be paired per die");
    if (vth_cold.size() < 2) throw DomainError("delta_vth_stats: need at least 2 dies");
    std::vector<double> d(vth_cold.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = vth_cold[i] - vth_warm[i];

    DeltaVthStats s;
    s.n = d.size();
    s.mean = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(s.n);
    double ss = 0;
    for (double v : d) ss += (v - s.mean) * (v - s.mean);
    s.sigma = std::sqrt(ss / static_cast<double>(s.n - 1));
    const auto [mn, mx] = std::minmax_element(d.begin(), d.end());
    s.min = *mn;
    s.max = *mx;
    return s;
}

std::uint64_t substream_seed(std::uint64_t master_seed, std::uint64_t index) {
    return splitmix64(splitmix64(master_seed) ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

McSample draw_sample(const ModelCard& base, const DeviceGeometry& geom, const VariationModel& var,
                     const MismatchModel& mm, double t, std::uint64_t master_seed, std::size_t index, McMode mode) {
    std::mt19937_64 rng(substream_seed(master_seed, index));
    std::normal_distribution<double> normal(0.0, 1.0);
    // Always four draws in this order so every mode reads the same substream.
    const double z_global = normal(rng);
    const double z_mu = normal(rng);
    const double z_a = normal(rng);
    const double z_b = normal(rng);

    McSample s;
    s.index = index;
    const bool global = mode != McMode::mismatch_only;
    const bool local = mode != McMode::global_only;
    if (global) {
        s.global_dvth = z_global * var.sigma_vth_mv(geom, t) * 1e-3;
        s.global_dmu_rel = z_mu * var.sigma_mu_rel(geom.polarity, t);
    }
    if (local) {
        const double per_device = pelgrom_sigma(mm, geom, t) / std::sqrt(2.0) * 1e-3;
        s.mismatch_a = z_a * per_device;
        s.mismatch_b = z_b * per_device;
    }
    s.device_a = base;
    s.device_b = base;
    const double mu_scale = std::max(1.0 + s.global_dmu_rel, 0.05);
    s.device_a.vth0_298 += s.global_dvth + s.mismatch_a;
    s.device_b.vth0_298 += s.global_dvth + s.mismatch_b;
    if (global) {
        s.device_a.mu0_298 *= mu_scale;
        s.device_b.mu0_298 *= mu_scale;
    }
    return s;
}

std::vector<McSample> sample_pairs(const ModelCard& base, const DeviceGeometry& geom, const VariationModel& var,
                                   const MismatchModel& mm, double t, const McConfig& cfg) {
    if (cfg.n_samples < 1) throw DomainError("Monte Carlo: n_samples must be >= 1");
    std::vector<McSample> out;
    out.reserve(cfg.n_samples);
    for (std::size_t i = 0; i < cfg.n_samples; ++i)
        out.push_back(draw_sample(base, geom, var, mm, t, cfg.master_seed, i, cfg.mode));
    return out;
}

std::vector<ModelCard> sample_cards(const ModelCard& base, const DeviceGeometry& geom, const VariationModel& var,
                                    const MismatchModel& mm, double t, const McConfig& cfg) {
    std::vector<ModelCard> cards;
    cards.reserve(cfg.n_samples);
    for (auto& s : sample_pairs(base, geom, var, mm, t, cfg)) cards.push_back(s.device_a);
    return cards;
}

double relative_rms(std::span<const double> model, std::span<const double> ref, double floor) {
    if (model.size() != ref.size()) throw DomainError("relative_rms: curves must share the V_GS grid");
    if (!(floor > 0.0)) throw DomainError("relative_rms: floor must be positive");
    double acc = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
        if (!(std::abs(ref[i]) >= floor)) continue;
        const double e = (model[i] - ref[i]) / ref[i];
        acc += e * e;
        ++n;
    }
    if (n == 0) throw DomainError("relative_rms: no reference points above the floor");
    return std::sqrt(acc / static_cast<double>(n)) * 100.0;
}

MismatchModel demo_mismatch_model() {
    MismatchModel m;
    // mV um; long channel doubles, short channel grows 1.5x from 298 K to 10 K.
    const std::map<double, PelgromEntry> table = {
        {10.0, {4.5, 7.0}},
        {77.0, {4.0, 5.6}},
        {298.0, {3.0, 3.5}},
    };
    m.nmos = table;
    m.pmos = table;
    return m;
}

VariationModel demo_variation_model() {
    VariationModel v;
    const std::map<double, VariationEntry> table = {
        {10.0, {3.0, 8.0, 0.035}},
        {77.0, {2.6, 7.5, 0.03}},
        {298.0, {2.0, 6.0, 0.02}},
    };
    v.nmos = table;
    v.pmos = table;
    return v;
}

}  // namespace cryo

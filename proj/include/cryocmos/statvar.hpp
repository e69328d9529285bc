#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "cryocmos/device.hpp"

namespace cryo {

/// Pelgrom coefficients for one temperature, in mV um.
struct PelgromEntry {
    double a_short = 0.0;  // L <= l_split
    double a_long = 0.0;   // L > l_split
};

/// Local mismatch: sigma(dV_TH) of a matched pair = A_VTH(T, L) / sqrt(W L).
/// Tables are per polarity and interpolated linearly in temperature; no
/// extrapolation.
struct MismatchModel {
    double l_split_um = 0.1;
    std::map<double, PelgromEntry> nmos;
    std::map<double, PelgromEntry> pmos;

    const std::map<double, PelgromEntry>& table(Polarity p) const { return p == Polarity::nmos ? nmos : pmos; }
    std::map<double, PelgromEntry>& table(Polarity p) { return p == Polarity::nmos ? nmos : pmos; }

    /// A_VTH in mV um for the channel-length family of `l_um`.
    double a_vth(Polarity p, double t, double l_um) const;
    void validate() const;
};

/// Die-to-die variation widths at one temperature.
struct VariationEntry {
    double b_mv_um = 0.0;       // geometry term of sigma_G(V_TH)
    double sigma0_mv = 0.0;     // geometry-independent floor
    double sigma_mu_rel = 0.0;  // relative sigma of mobility
};

/// Global variation: sigma_G(V_TH) = B(T)/sqrt(W L) + sigma0(T).
struct VariationModel {
    std::map<double, VariationEntry> nmos;
    std::map<double, VariationEntry> pmos;

    const std::map<double, VariationEntry>& table(Polarity p) const { return p == Polarity::nmos ? nmos : pmos; }
    std::map<double, VariationEntry>& table(Polarity p) { return p == Polarity::nmos ? nmos : pmos; }

    double sigma_vth_mv(const DeviceGeometry& g, double t) const;
    double sigma_mu_rel(Polarity p, double t) const;
    void validate() const;
};

/// Full width at half maximum of a normal distribution with deviation sigma.
double fwhm(double sigma);

enum class McMode { global_only, mismatch_only, both };
std::string_view to_string(McMode m);
McMode parse_mc_mode(std::string_view s);

struct McConfig {
    std::size_t n_samples = 1000;
    std::uint64_t master_seed = 1;
    McMode mode = McMode::both;
};

/// sigma(dV_TH) in mV.
double pelgrom_sigma(const MismatchModel& model, const DeviceGeometry& geom, double t);

/// One observed matched-pair spread.
struct MismatchObservation {
    DeviceGeometry geom;
    double sigma_dvth_mv = 0.0;
};

struct PelgromFit {
    MismatchModel model;  // a single temperature entry for the fitted polarity
    double a_short = 0.0;
    double a_long = 0.0;
    double r2_short = 0.0;
    double r2_long = 0.0;
    std::size_t n_short = 0;
    std::size_t n_long = 0;
    std::vector<std::string> notes;
};

/// Least-squares slope through the origin of sigma vs 1/sqrt(W L), per
/// channel-length family. A family without observations inherits the
/// other family's slope and is noted.
PelgromFit fit_pelgrom(std::span<const MismatchObservation> obs, double t, Polarity p, double l_split_um = 0.1);

struct DeltaVthStats {
    double mean = 0.0;
    double sigma = 0.0;  // unbiased
    double min = 0.0;
    double max = 0.0;
    std::size_t n = 0;
};

/// Statistics of V_TH,10K - V_TH,298K over paired per-die samples.
DeltaVthStats delta_vth_stats(std::span<const double> vth_cold, std::span<const double> vth_warm);

/// Monte Carlo draw for one die: a matched pair (a, b) sharing the global
/// shift. Threshold shifts are stored in volts on vth0_298 (a positive shift
/// raises |V_TH| for either polarity).
struct McSample {
    std::size_t index = 0;
    double global_dvth = 0.0;
    double global_dmu_rel = 0.0;
    double mismatch_a = 0.0;
    double mismatch_b = 0.0;
    ModelCard device_a;
    ModelCard device_b;
};

/// Seed of sample `index`; a function of (master_seed, index) only.
std::uint64_t substream_seed(std::uint64_t master_seed, std::uint64_t index);

McSample draw_sample(const ModelCard& base, const DeviceGeometry& geom, const VariationModel& var,
                     const MismatchModel& mm, double t, std::uint64_t master_seed, std::size_t index, McMode mode);

std::vector<McSample> sample_pairs(const ModelCard& base, const DeviceGeometry& geom, const VariationModel& var,
                                   const MismatchModel& mm, double t, const McConfig& cfg);

/// Perturbed cards, one device per sample (device_a of each pair).
std::vector<ModelCard> sample_cards(const ModelCard& base, const DeviceGeometry& geom, const VariationModel& var,
                                    const MismatchModel& mm, double t, const McConfig& cfg);

/// Relative RMS deviation in percent over points with |ref| >= floor.
double relative_rms(std::span<const double> model, std::span<const double> ref, double floor = 1e-10);

/// Shipped demo statistics: A_VTH doubles (long channel) and grows 1.5x
/// (short channel) between 298 K and 10 K.
MismatchModel demo_mismatch_model();
VariationModel demo_variation_model();

}  // namespace cryo

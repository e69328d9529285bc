#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "cryocmos/device.hpp"
#include "cryocmos/twoport.hpp"

namespace cryo {

/// Hybrid-pi element values. Topology: R_g, R_d, R_s in series with the
/// gate, drain and source terminals; C_gs, C_gd between intrinsic nodes;
/// C_gb from the intrinsic gate to the grounded bulk; g_m and g_ds between
/// intrinsic drain and source.
struct SmallSignalSet {
    double r_g = 0.0;   // Ohm
    double r_d = 0.0;
    double r_s = 0.0;
    double c_gg = 0.0;  // F, total gate capacitance
    double c_gd = 0.0;
    double c_gb = 0.0;
    double g_m = 0.0;   // S
    double g_ds = 0.0;
    double temperature = 298.0;
    bool flagged = false;
    std::vector<std::string> diagnostics;

    /// C_gs = C_gg - C_gd - C_gb.
    double c_gs() const { return c_gg - c_gd - c_gb; }
    /// Flags non-physical values (negative R, C_gs < 0) with diagnostics.
    void check();
};

/// Y-parameters of the hybrid-pi network with series parasitics, by nodal
/// analysis with the three internal nodes eliminated.
TwoPort synth_small_signal(const SmallSignalSet& ss, std::span<const double> freqs, double z0 = 50.0);

struct ColdFetOptions {
    double r_window_decades = 1.0;  // top of the grid, for resistances
    double c_window_decades = 1.0;  // bottom of the grid, for capacitances
    bool refine = true;             // model-based refinement of the closed-form estimates
    int max_fit_points = 48;
    int max_iterations = 200;
};

struct ColdFetResult {
    SmallSignalSet elements;     // refined (or closed-form when refine = false)
    SmallSignalSet closed_form;  // window-averaged estimates
    double channel_term = 0.0;   // Ohm, Re(Z11) - Re(Z12) - R_g absorbed by the channel
    double fit_residual = 0.0;   // RMS relative Z error after refinement
    int iterations = 0;
};

/// Cold-FET extraction at V_DS = 0: resistances from high-frequency Re(Z),
/// capacitances from low-frequency Im(Y) over the configured windows, then a
/// least-squares refinement of all hybrid-pi elements against the measured Z.
ColdFetResult coldfet_extract(const TwoPort& net, const ColdFetOptions& opt = {});

enum class FtMethod { measured_crossing, extrapolated };
std::string_view to_string(FtMethod m);

struct FtResult {
    double f_t = 0.0;  // Hz
    FtMethod method = FtMethod::measured_crossing;
    std::size_t anchor_index = 0;  // grid point used for the crossing or the extrapolation
};

/// Unity-gain frequency of |H21|. Falls back to -20 dB/dec extrapolation
/// from the highest single-pole grid point (|slope + 1| < 0.1).
FtResult ft_extract(const TwoPort& net);

/// g_m / (2 pi (C_gs + C_gd)).
double ft_analytic(const SmallSignalSet& ss);

/// Geometry basis for parasitic resistances:
/// {1, w_f/n_f, 1/(w_f n_f), L/(w_f n_f)}.
std::array<double, 4> scaling_basis(const DeviceGeometry& g);

struct ParasiticScaling {
    std::array<double, 4> r_g{};
    std::array<double, 4> r_d{};
    std::array<double, 4> r_s{};

    SmallSignalSet predict(const DeviceGeometry& g) const;  // resistances only
};

struct ScalingSample {
    DeviceGeometry geom;
    SmallSignalSet elements;
};

struct ScalingFit {
    ParasiticScaling nmos;
    ParasiticScaling pmos;
    bool shared = false;
    std::vector<std::array<double, 3>> residuals;  // per sample (R_g, R_d, R_s), Ohm
    std::vector<std::string> warnings;

    const ParasiticScaling& for_polarity(Polarity p) const { return p == Polarity::nmos ? nmos : pmos; }
};

/// One least-squares coefficient set per resistance over the fixed basis,
/// per polarity unless `share_polarities`.
ScalingFit fit_parasitic_scaling(std::span<const ScalingSample> samples, bool share_polarities = false);

}  // namespace cryo

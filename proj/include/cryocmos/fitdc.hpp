#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "cryocmos/device.hpp"
#include "cryocmos/iv_data.hpp"

namespace cryo {

/// Closed-form first-stage estimates at one temperature.
struct Stage1Result {
    ModelCard card;          // seeds folded back into card parameters
    double ss_mv_dec = 0.0;  // steepest measured swing
    double vth = 0.0;        // V_TH(T) of the model at V_DS = 0
    double vth_cc = 0.0;     // constant-current threshold on the low-V_DS curve
    double mu = 0.0;         // mobility at T, cm^2/(V s)
    bool from_defaults = false;
    std::vector<std::string> warnings;
};

/// Needs a curve with |V_DS| <= 100 mV. SS from the steepest log-slope
/// window, V_TH by the constant-current criterion (100 nA W/L), mobility
/// from the peak linear-region transconductance. Missing subthreshold range
/// (< 3 decades below the threshold current) returns `defaults` flagged.
/// Parameters not estimated here (kappa, t_sat, gamma, theta, eta, cox, R)
/// come from `defaults`.
Stage1Result extract_stage1(std::span<const IvCurve> curves, const ModelCard& defaults);

struct FitOptions {
    int max_iterations = 2000;      // per simplex run
    double rel_tolerance = 1e-10;   // relative loss improvement that ends a run
    int restarts = 3;
    double floor_a = 1e-13;         // points below are not fitted
    double rms_floor_a = 1e-10;     // points below are not scored
};

struct CurveRms {
    std::string device_id;
    double v_ds = 0.0;
    double rms_percent = 0.0;
};

struct FitReport {
    ModelCard card;
    double temperature = 298.0;
    std::vector<CurveRms> per_curve;
    double pooled_rms_percent = 0.0;
    int iterations = 0;
    int evaluations = 0;
    double final_loss = 0.0;
    std::vector<double> loss_history;  // best loss after each accepted iteration
    bool converged = false;
    bool flagged = false;
    std::vector<std::string> warnings;
};

/// Mixed loss: squared log error below 10x the threshold current, squared
/// relative error above, averaged over points >= floor_a. Fits vth0_298,
/// mu0_298, n_ideality, theta_mob and dibl_eta; the rest stay at the seed.
FitReport fit_card(std::span<const IvCurve> curves, const ModelCard& seeds, const FitOptions& opt = {});

/// Model currents on the curve's grid (NMOS image).
std::vector<double> model_curve(const ModelCard& card, const IvCurve& curve);

/// Per-curve relative RMS in percent, as reported by fit_card.
double curve_rms(const ModelCard& card, const IvCurve& curve, double floor_a = 1e-10);

/// Pooled relative RMS in percent over all points of all curves.
double pooled_rms(const ModelCard& card, std::span<const IvCurve> curves, double floor_a = 1e-10);

struct TemperatureLawFit {
    ModelCard card;
    std::map<double, double> vth_residual_mv;  // unified minus per-T card, at V_DS = 0
    std::map<double, double> mu_residual_rel;
    std::map<double, double> ss_residual_mv;
    std::vector<std::string> warnings;
};

/// Fits t_sat and n to SS(T), kappa_vth and vth0_298 to V_TH(T), gamma_mu
/// and mu0_298 to mu(T). theta, eta, cox and R are averaged over the cards.
/// Needs at least three temperatures.
TemperatureLawFit fit_temperature_laws(const std::map<double, ModelCard>& cards);

}  // namespace cryo

#pragma once

#include <string>
#include <string_view>

namespace cryo {

enum class Polarity { nmos, pmos };

std::string_view to_string(Polarity p);
Polarity parse_polarity(std::string_view s);

/// Drawn gate geometry. W is the total width, w_finger * n_fingers.
struct DeviceGeometry {
    Polarity polarity = Polarity::nmos;
    double w_um = 1.0;
    double l_um = 0.04;
    int n_fingers = 1;
    double w_finger_um = 1.0;

    static DeviceGeometry from_fingers(Polarity p, double w_finger_um, int n_fingers, double l_um);
    static DeviceGeometry single(Polarity p, double w_um, double l_um);

    /// Throws DomainError when an invariant is broken.
    void validate() const;
    double area_um2() const { return w_um * l_um; }
};

/// Terminal voltages are in the device's native sign convention (negative
/// V_GS / V_DS turn a PMOS on). v_bs is accepted and ignored by the model.
struct BiasPoint {
    double v_gs = 0.0;
    double v_ds = 0.0;
    double v_bs = 0.0;
    double temperature = 298.0;

    void validate() const;
};

/// Parameters of one device type. Voltages and resistances describe the
/// NMOS image of the device: a PMOS card stores |V_TH| in vth0_298.
struct ModelCard {
    static constexpr int kSchemaVersion = 1;

    int schema_version = kSchemaVersion;
    Polarity polarity = Polarity::nmos;

    double vth0_298 = 0.42;       // V, threshold at the 298 K reference
    double kappa_vth = 7.35e-4;   // V/K, threshold drift per kelvin of (298 - T_eff)
    double t_sat = 25.0;          // K, effective-temperature floor
    double mu0_298 = 260.0;       // cm^2/(V s)
    double gamma_mu = 0.4;        // mobility power-law exponent
    double n_ideality = 1.25;
    double cox_areal = 1.6e-14;   // F/um^2
    double dibl_eta = 0.05;       // V/V
    double theta_mob = 0.3;       // 1/V, vertical-field mobility degradation
    double r_source = 80.0;       // Ohm um
    double r_drain = 80.0;        // Ohm um

    void validate() const;
};

enum class Region { subthreshold, transition, strong_inversion };
std::string_view to_string(Region r);

struct EvalResult {
    double i_d = 0.0;   // A, into the drain (negative for a conducting PMOS)
    double g_m = 0.0;   // S, dI_D/dV_GS
    double g_ds = 0.0;  // S, dI_D/dV_DS
    double ss = 0.0;    // mV/dec at the bias temperature
    Region region = Region::subthreshold;
    bool converged = true;  // series-resistance solve reached 1e-9 relative
    int iterations = 0;
};

namespace device {

inline constexpr double kBoltzmann = 1.380649e-23;  // J/K
inline constexpr double kCharge = 1.602177e-19;     // C
inline constexpr double kReferenceTemperature = 298.0;

/// T_eff = sqrt(T^2 + t_sat^2). Saturates the thermal scale at cryogenic
/// temperatures.
double effective_temperature(double t, double t_sat);

/// k_B T / q in volts.
double thermal_voltage(double t_eff);

/// Signed threshold voltage (negative for PMOS) at the bias temperature and V_DS.
double vth(const ModelCard& card, const DeviceGeometry& geom, const BiasPoint& bias);

/// Low-field mobility in cm^2/(V s).
double mobility(const ModelCard& card, double t);

/// Drain current with analytic g_m and g_ds. The intrinsic current is
///
///   I = 2 n mu C_ox (W/L) phi_t^2 [ln^2(1 + e^xf) - ln^2(1 + e^xr)] / (1 + theta * V_ov+)
///
/// with xf = (V_GS - V_TH) / (2 n phi_t), xr = (V_GS - V_TH - n V_DS) / (2 n phi_t)
/// and V_ov+ = 2 n phi_t ln(1 + e^xf) a smooth positive overdrive. Series
/// source/drain resistance is resolved by a safeguarded Newton iteration on
/// the drain current.
EvalResult drain_current(const ModelCard& card, const DeviceGeometry& geom, const BiasPoint& bias);

/// SS = n phi_t(T_eff) ln(10) in mV/dec.
double subthreshold_swing(const ModelCard& card, const DeviceGeometry& geom, double t);

/// Drain current magnitude at V_GS = 0.
double off_current(const ModelCard& card, const DeviceGeometry& geom, double t, double v_ds);

/// Threshold by the constant-current criterion I_D = 100 nA * W/L at
/// |V_DS| = 50 mV. Returned as a magnitude.
double vth_constant_current(const ModelCard& card, const DeviceGeometry& geom, double t);

/// Calibrated demonstration cards. The threshold rises by 0.2 V between
/// 298 K and 10 K for both polarities.
ModelCard demo_card(Polarity p);

}  // namespace device
}  // namespace cryo

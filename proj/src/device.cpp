#include "cryocmos/device.hpp"

#include <cmath>
#include <numbers>

#include "cryocmos/error.hpp"

namespace cryo {

std::string_view to_string(Polarity p) { return p == Polarity::nmos ? "nmos" : "pmos"; }

Polarity parse_polarity(std::string_view s) {
    if (s == "nmos" || s == "NMOS" || s == "n") return Polarity::nmos;
    if (s == "pmos" || s == "PMOS" || s == "p") return Polarity::pmos;
    throw DomainError("unknown polarity '" + std::string(s) + "'");
}

std::string_view to_string(Region r) {
    switch (r) {
        case Region::subthreshold: return "subthreshold";
        case Region::transition: return "transition";
        case Region::strong_inversion: return "strong-inversion";
    }
    return "?";
}

DeviceGeometry DeviceGeometry::from_fingers(Polarity p, double w_finger_um, int n_fingers, double l_um) {
    DeviceGeometry g;
    g.polarity = p;
    g.w_finger_um = w_finger_um;
    g.n_fingers = n_fingers;
    g.w_um = w_finger_um * n_fingers;
    g.l_um = l_um;
    g.validate();
    return g;
}

DeviceGeometry DeviceGeometry::single(Polarity p, double w_um, double l_um) {
    return from_fingers(p, w_um, 1, l_um);
}

void DeviceGeometry::validate() const {
    if (!(w_um > 0.0) || !std::isfinite(w_um)) throw DomainError("geometry: W must be positive");
    if (!(l_um > 0.0) || !std::isfinite(l_um)) throw DomainError("geometry: L must be positive");
    if (n_fingers < 1) throw DomainError("geometry: n_fingers must be >= 1");
    if (std::abs(w_finger_um * n_fingers - w_um) > 1e-9 * w_um)
        throw DomainError("geometry: W must equal w_finger * n_fingers");
}

void BiasPoint::validate() const {
    if (!std::isfinite(v_gs) || !std::isfinite(v_ds) || !std::isfinite(v_bs))
        throw DomainError("bias: voltages must be finite");
    if (!(temperature >= 4.0 && temperature <= 400.0))
        throw DomainError("bias: temperature must lie in [4, 400] K");
}

void ModelCard::validate() const {
    const double fields[] = {vth0_298,  kappa_vth, t_sat,     mu0_298,   gamma_mu, n_ideality,
                             cox_areal, dibl_eta,  theta_mob, r_source, r_drain};
    for (double f : fields)
        if (!std::isfinite(f)) throw DomainError("model card: non-finite parameter");
    if (!(mu0_298 > 0.0)) throw DomainError("model card: mu0_298 must be positive");
    if (!(cox_areal > 0.0)) throw DomainError("model card: cox_areal must be positive");
    if (!(n_ideality >= 1.0)) throw DomainError("model card: n_ideality must be >= 1");
    if (!(t_sat > 0.0 && t_sat <= 100.0)) throw DomainError("model card: t_sat must lie in (0, 100] K");
    if (theta_mob < 0.0 || r_source < 0.0 || r_drain < 0.0)
        throw DomainError("model card: theta_mob and series resistances must be non-negative");
}

namespace device {
namespace {

struct Softplus {
    double value;  // ln(1 + e^x)
    double slope;  // logistic(x)
};

inline Softplus softplus(double x) {
    if (x > 0.0) {
        const double e = std::exp(-x);
        return {x + std::log1p(e), 1.0 / (1.0 + e)};
    }
    const double e = std::exp(x);
    return {std::log1p(e), e / (1.0 + e)};
}

// Bias-independent quantities of one (card, geometry, temperature) triple.
struct Frame {
    double n;
    double phi_t;
    double a;         // 2 n phi_t
    double prefactor; // 2 n mu C_ox (W/L) phi_t^2, A
    double vth_zero;  // V_TH at V_DS = 0
    double eta;
    double theta;
};

Frame make_frame(const ModelCard& c, const DeviceGeometry& g, double t) {
    const double t_eff = effective_temperature(t, c.t_sat);
    Frame f{};
    f.n = c.n_ideality;
    f.phi_t = thermal_voltage(t_eff);
    f.a = 2.0 * f.n * f.phi_t;
    // cm^2/Vs * F/um^2 -> A/V^2
    const double beta = mobility(c, t) * c.cox_areal * 1e8 * (g.w_um / g.l_um);
    f.prefactor = 2.0 * f.n * beta * f.phi_t * f.phi_t;
    f.vth_zero = c.vth0_298 + c.kappa_vth * (kReferenceTemperature - t_eff);
    f.eta = c.dibl_eta;
    f.theta = c.theta_mob;
    return f;
}

struct Intrinsic {
    double i;
    double di_dvgs;
    double di_dvds;
    double xf;
};

// NMOS image, no series resistance.
Intrinsic intrinsic(const Frame& f, double vgs, double vds) {
    const double vt = f.vth_zero - f.eta * vds;
    const double xf = (vgs - vt) / f.a;
    const double xr = (vgs - vt - f.n * vds) / f.a;
    const Softplus lf = softplus(xf);
    const Softplus lr = softplus(xr);

    const double p = (lf.value - lr.value) * (lf.value + lr.value);
    const double d = 1.0 + f.theta * f.a * lf.value;

    // d/dVgs: dxf = dxr = 1/a.  d/dVds: dxf = eta/a, dxr = (eta - n)/a.
    const double dp_dvgs = 2.0 * (lf.value * lf.slope - lr.value * lr.slope) / f.a;
    const double dp_dvds = 2.0 * (lf.value * lf.slope * f.eta - lr.value * lr.slope * (f.eta - f.n)) / f.a;
    const double dd_dvgs = f.theta * lf.slope;
    const double dd_dvds = f.theta * lf.slope * f.eta;

    Intrinsic out{};
    out.i = f.prefactor * p / d;
    out.di_dvgs = f.prefactor * (dp_dvgs * d - p * dd_dvgs) / (d * d);
    out.di_dvds = f.prefactor * (dp_dvds * d - p * dd_dvds) / (d * d);
    out.xf = xf;
    return out;
}

EvalResult evaluate_image(const ModelCard& card, const DeviceGeometry& geom, double vgs, double vds, double t) {
    const Frame f = make_frame(card, geom, t);
    const double rs = card.r_source / geom.w_um;
    const double rsd = (card.r_source + card.r_drain) / geom.w_um;

    EvalResult r;
    r.ss = card.n_ideality * f.phi_t * std::numbers::ln10 * 1000.0;

    Intrinsic in = intrinsic(f, vgs, vds);
    double current = in.i;

    if (rsd > 0.0 && current != 0.0) {
        // F(I) = I - f(vgs - I rs, vds - I rsd) is increasing in I; the root lies
        // between 0 and the unresisted current.
        double lo = std::min(0.0, current);
        double hi = std::max(0.0, current);
        r.converged = false;
        for (int it = 1; it <= 40; ++it) {
            in = intrinsic(f, vgs - current * rs, vds - current * rsd);
            const double residual = current - in.i;
            const double slope = 1.0 + in.di_dvgs * rs + in.di_dvds * rsd;
            r.iterations = it;
            // Stop before round-off in the residual can shrink the bracket past the root.
            if (std::abs(residual) <= 1e-14 * std::abs(current)) {
                r.converged = true;
                break;
            }
            if (residual > 0.0)
                hi = current;
            else
                lo = current;
            double next = current - residual / slope;
            if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
            const double step = std::abs(next - current);
            current = next;
            r.converged = step <= 1e-9 * std::abs(current);
            if (step <= 1e-12 * std::abs(current)) break;
        }
        const double denom = 1.0 + in.di_dvgs * rs + in.di_dvds * rsd;
        r.g_m = in.di_dvgs / denom;
        r.g_ds = in.di_dvds / denom;
    } else {
        if (rsd > 0.0) {
            const double denom = 1.0 + in.di_dvgs * rs + in.di_dvds * rsd;
            r.g_m = in.di_dvgs / denom;
            r.g_ds = in.di_dvds / denom;
        } else {
            r.g_m = in.di_dvgs;
            r.g_ds = in.di_dvds;
        }
    }
    r.i_d = current;
    if (in.xf < -1.0)
        r.region = Region::subthreshold;
    else if (in.xf > 3.0)
        r.region = Region::strong_inversion;
    else
        r.region = Region::transition;
    return r;
}

}  // namespace

double effective_temperature(double t, double t_sat) {
    if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("effective_temperature: T must be positive");
    if (!(t_sat > 0.0)) throw DomainError("effective_temperature: t_sat must be positive");
    return std::hypot(t, t_sat);
}

double thermal_voltage(double t_eff) {
    if (!(t_eff > 0.0)) throw DomainError("thermal_voltage: temperature must be positive");
    return kBoltzmann * t_eff / kCharge;
}

double vth(const ModelCard& card, const DeviceGeometry& geom, const BiasPoint& bias) {
    (void)geom;
    bias.validate();
    const double sign = card.polarity == Polarity::nmos ? 1.0 : -1.0;
    const double vds_image = sign * bias.v_ds;
    const double t_eff = effective_temperature(bias.temperature, card.t_sat);
    const double v = card.vth0_298 + card.kappa_vth * (kReferenceTemperature - t_eff) - card.dibl_eta * vds_image;
    return sign * v;
}

double mobility(const ModelCard& card, double t) {
    const double t_eff = effective_temperature(t, card.t_sat);
    return card.mu0_298 * std::pow(kReferenceTemperature / t_eff, card.gamma_mu);
}

EvalResult drain_current(const ModelCard& card, const DeviceGeometry& geom, const BiasPoint& bias) {
    bias.validate();
    const double sign = card.polarity == Polarity::nmos ? 1.0 : -1.0;
    EvalResult r = evaluate_image(card, geom, sign * bias.v_gs, sign * bias.v_ds, bias.temperature);
    r.i_d *= sign;
    return r;
}

double subthreshold_swing(const ModelCard& card, const DeviceGeometry& geom, double t) {
    (void)geom;
    const double t_eff = effective_temperature(t, card.t_sat);
    return card.n_ideality * thermal_voltage(t_eff) * std::numbers::ln10 * 1000.0;
}

double off_current(const ModelCard& card, const DeviceGeometry& geom, double t, double v_ds) {
    const double sign = card.polarity == Polarity::nmos ? 1.0 : -1.0;
    return std::abs(drain_current(card, geom, {0.0, sign * std::abs(v_ds), 0.0, t}).i_d);
}

double vth_constant_current(const ModelCard& card, const DeviceGeometry& geom, double t) {
    const double sign = card.polarity == Polarity::nmos ? 1.0 : -1.0;
    const double target = 100e-9 * geom.w_um / geom.l_um;
    double lo = -0.5;
    double hi = 2.5;
    for (int i = 0; i < 80; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double id = std::abs(drain_current(card, geom, {sign * mid, sign * 0.05, 0.0, t}).i_d);
        (id < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

ModelCard demo_card(Polarity p) {
    ModelCard c;
    c.polarity = p;
    if (p == Polarity::nmos) return c;
    c.mu0_298 = 100.0;
    c.gamma_mu = 0.32;
    c.n_ideality = 1.3;
    c.theta_mob = 0.25;
    c.r_source = 120.0;
    c.r_drain = 120.0;
    return c;
}

}  // namespace device
}  // namespace cryo

#include "cryocmos/fitdc.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <numbers>
#include <optional>

#include "cryocmos/error.hpp"
#include "cryocmos/statvar.hpp"

namespace cryo {
namespace {

constexpr double kLowVds = 0.1;

double threshold_current(const DeviceGeometry& g) { return 100e-9 * g.w_um / g.l_um; }

ModelCard image_card(ModelCard c) {
    c.polarity = Polarity::nmos;
    return c;
}

DeviceGeometry image_geom(DeviceGeometry g) {
    g.polarity = Polarity::nmos;
    return g;
}

double eval_current(const ModelCard& img, const DeviceGeometry& g, double vgs, double vds, double t) {
    BiasPoint b;
    b.v_gs = vgs;
    b.v_ds = vds;
    b.temperature = t;
    return device::drain_current(img, g, b).i_d;
}

// V_GS at which the (increasing) curve crosses `level`, by log interpolation.
std::optional<double> crossing(const std::vector<double>& vgs, const std::vector<double>& id, double level) {
    for (std::size_t i = 1; i < vgs.size(); ++i) {
        if (id[i - 1] > 0.0 && id[i - 1] < level && id[i] >= level) {
            const double a = std::log(id[i - 1]), b = std::log(id[i]);
            return vgs[i - 1] + (std::log(level) - a) * (vgs[i] - vgs[i - 1]) / (b - a);
        }
    }
    return std::nullopt;
}

// Peak transconductance as the largest least-squares slope over windows of
// `w` points; the same estimator is applied to data and model.
double peak_gm(const std::vector<double>& vgs, const std::vector<double>& id, std::size_t w = 9) {
    w = std::min(w, vgs.size());
    double best = 0.0;
    for (std::size_t i = 0; i + w <= vgs.size(); ++i) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t k = i; k < i + w; ++k) {
            sx += vgs[k];
            sy += id[k];
            sxx += vgs[k] * vgs[k];
            sxy += vgs[k] * id[k];
        }
        const double n = static_cast<double>(w);
        const double den = n * sxx - sx * sx;
        if (den > 0.0) best = std::max(best, (n * sxy - sx * sy) / den);
    }
    return best;
}

// Constant-current threshold of the model on a fine V_GS bisection.
double model_vcc(const ModelCard& img, const DeviceGeometry& g, double vds, double t) {
    const double target = threshold_current(g);
    double lo = -1.0, hi = 3.0;
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        (eval_current(img, g, mid, vds, t) < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

void set_vth_at(ModelCard& c, double t, double vth_t) {
    c.vth0_298 = vth_t - c.kappa_vth * (device::kReferenceTemperature - device::effective_temperature(t, c.t_sat));
}

void set_mu_at(ModelCard& c, double t, double mu_t) {
    c.mu0_298 = mu_t / std::pow(device::kReferenceTemperature / device::effective_temperature(t, c.t_sat), c.gamma_mu);
}

double vth_at(const ModelCard& c, double t) {
    return c.vth0_298 + c.kappa_vth * (device::kReferenceTemperature - device::effective_temperature(t, c.t_sat));
}

}  // namespace

Stage1Result extract_stage1(std::span<const IvCurve> curves, const ModelCard& defaults) {
    defaults.validate();
    const IvCurve* low = nullptr;
    for (const auto& c : curves) {
        c.validate();
        if (std::abs(c.v_ds) <= kLowVds + 1e-12 && (!low || std::abs(c.v_ds) < std::abs(low->v_ds))) low = &c;
    }
    if (!low) throw DomainError("extract_stage1: need a curve with |V_DS| <= 100 mV");
    for (const auto& c : curves)
        if (std::abs(c.temperature - low->temperature) > 1e-6)
            throw DomainError("extract_stage1: curves must share one temperature");

    const double t = low->temperature;
    const DeviceGeometry g = image_geom(low->geom);
    const double i_th = threshold_current(g);
    constexpr double kFloor = 1e-13;

    Stage1Result r;
    r.card = defaults;
    r.card.polarity = low->geom.polarity;
    r.vth = vth_at(defaults, t);
    r.mu = device::mobility(defaults, t);
    r.ss_mv_dec = device::subthreshold_swing(defaults, g, t);

    double i_min = std::numeric_limits<double>::infinity();
    for (double i : low->i_d)
        if (i >= kFloor) i_min = std::min(i_min, i);
    const auto vcc = crossing(low->v_gs, low->i_d, i_th);
    if (!vcc || !(std::log10(i_th / i_min) >= 3.0)) {
        r.from_defaults = true;
        r.warnings.push_back(fmt::format("curve {} at {} K: less than 3 decades of subthreshold current; default seeds used",
                                         low->device_id, t));
        return r;
    }
    r.vth_cc = *vcc;

    // Steepest log-slope over 3-point windows below the threshold current.
    double best_slope = 0.0;
    const auto& v = low->v_gs;
    const auto& id = low->i_d;
    for (std::size_t i = 0; i + 2 < v.size(); ++i) {
        bool ok = true;
        for (std::size_t k = i; k < i + 3; ++k) ok = ok && id[k] >= kFloor && id[k] < i_th;
        if (!ok) continue;
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t k = i; k < i + 3; ++k) {
            const double y = std::log10(id[k]);
            sx += v[k];
            sy += y;
            sxx += v[k] * v[k];
            sxy += v[k] * y;
        }
        const double den = 3.0 * sxx - sx * sx;
        if (den > 0.0) best_slope = std::max(best_slope, (3.0 * sxy - sx * sy) / den);
    }
    if (!(best_slope > 0.0)) {
        r.from_defaults = true;
        r.warnings.push_back(fmt::format("curve {} at {} K: no usable subthreshold slope; default seeds used",
                                         low->device_id, t));
        return r;
    }
    r.ss_mv_dec = 1000.0 / best_slope;
    const double phi = device::thermal_voltage(device::effective_temperature(t, defaults.t_sat));
    ModelCard& c = r.card;
    c.n_ideality = std::max(1.0, r.ss_mv_dec / (phi * std::numbers::ln10 * 1000.0));

    // Threshold and mobility are matched to the measured constant-current
    // point and peak g_m through the model itself, so series resistance and
    // mobility degradation from `defaults` are accounted for.
    double vth_t = r.vth_cc;
    double mu_t = device::mobility(defaults, t);
    const double gm_meas = peak_gm(v, id);
    std::vector<double> model_i(v.size());
    for (int pass = 0; pass < 6; ++pass) {
        set_vth_at(c, t, vth_t);
        set_mu_at(c, t, mu_t);
        const ModelCard img = image_card(c);
        vth_t += r.vth_cc - model_vcc(img, g, low->v_ds, t);
        set_vth_at(c, t, vth_t);
        const ModelCard img2 = image_card(c);
        for (std::size_t k = 0; k < v.size(); ++k) model_i[k] = eval_current(img2, g, v[k], low->v_ds, t);
        const double gm_model = peak_gm(v, model_i);
        if (gm_model > 0.0 && gm_meas > 0.0) mu_t *= gm_meas / gm_model;
    }
    set_vth_at(c, t, vth_t);
    set_mu_at(c, t, mu_t);
    r.vth = vth_t;
    r.mu = mu_t;
    return r;
}

std::vector<double> model_curve(const ModelCard& card, const IvCurve& curve) {
    const ModelCard img = image_card(card);
    const DeviceGeometry g = image_geom(curve.geom);
    std::vector<double> out(curve.v_gs.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = eval_current(img, g, curve.v_gs[i], curve.v_ds, curve.temperature);
    return out;
}

double curve_rms(const ModelCard& card, const IvCurve& curve, double floor_a) {
    return relative_rms(model_curve(card, curve), curve.i_d, floor_a);
}

double pooled_rms(const ModelCard& card, std::span<const IvCurve> curves, double floor_a) {
    std::vector<double> m, r;
    for (const auto& c : curves) {
        const auto mc = model_curve(card, c);
        m.insert(m.end(), mc.begin(), mc.end());
        r.insert(r.end(), c.i_d.begin(), c.i_d.end());
    }
    return relative_rms(m, r, floor_a);
}

namespace {

constexpr std::size_t kFitParams = 5;

struct LossContext {
    const std::vector<IvCurve>* curves;
    ModelCard base;
    double floor_a;
    int evaluations = 0;
};

ModelCard apply(const ModelCard& base, const double* x) {
    ModelCard c = base;
    c.vth0_298 = x[0];
    c.mu0_298 = std::exp(x[1]);
    c.n_ideality = 1.0 + std::abs(x[2]);
    c.theta_mob = std::abs(x[3]);
    c.dibl_eta = x[4];
    return c;
}

double loss(const LossContext& ctx, const ModelCard& card) {
    const ModelCard img = image_card(card);
    double acc = 0.0;
    std::size_t n = 0;
    for (const auto& c : *ctx.curves) {
        const DeviceGeometry g = image_geom(c.geom);
        const double i_log = 10.0 * threshold_current(g);
        for (std::size_t k = 0; k < c.v_gs.size(); ++k) {
            const double meas = c.i_d[k];
            if (!(meas >= ctx.floor_a)) continue;
            double m = eval_current(img, g, c.v_gs[k], c.v_ds, c.temperature);
            if (!std::isfinite(m)) return 1e300;
            double e;
            if (meas < i_log) {
                e = std::log(std::max(m, 1e-300)) - std::log(meas);
            } else {
                e = (m - meas) / meas;
            }
            acc += e * e;
            ++n;
        }
    }
    return n ? acc / static_cast<double>(n) : 0.0;
}

double gsl_loss(const gsl_vector* x, void* p) {
    auto* ctx = static_cast<LossContext*>(p);
    ++ctx->evaluations;
    return loss(*ctx, apply(ctx->base, x->data));
}

struct SimplexRun {
    std::array<double, kFitParams> x{};
    double f = 0.0;
    int iterations = 0;
    bool converged = false;
};

SimplexRun run_simplex(LossContext& ctx, const std::array<double, kFitParams>& start,
                       const std::array<double, kFitParams>& step, const FitOptions& opt,
                       std::vector<double>& history) {
    gsl_multimin_function fn{&gsl_loss, kFitParams, &ctx};
    gsl_vector_const_view x0 = gsl_vector_const_view_array(start.data(), kFitParams);
    gsl_vector_const_view ss = gsl_vector_const_view_array(step.data(), kFitParams);
    gsl_multimin_fminimizer* m = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, kFitParams);
    gsl_multimin_fminimizer_set(m, &fn, &x0.vector, &ss.vector);

    SimplexRun run;
    // A run ends once the best loss has improved by less than rel_tolerance
    // over a full simplex cycle (one iteration per vertex).
    constexpr int kWindow = 2 * static_cast<int>(kFitParams + 1);
    std::vector<double> local;
    local.push_back(m->fval);
    history.push_back(history.empty() ? m->fval : std::min(history.back(), m->fval));
    while (run.iterations < opt.max_iterations) {
        if (gsl_multimin_fminimizer_iterate(m) != GSL_SUCCESS) break;
        ++run.iterations;
        local.push_back(m->fval);
        history.push_back(std::min(history.back(), m->fval));
        if (gsl_multimin_fminimizer_size(m) < 1e-12) {
            run.converged = true;
            break;
        }
        if (static_cast<int>(local.size()) > kWindow) {
            const double old = local[local.size() - 1 - kWindow];
            const double now = local.back();
            if (old - now <= opt.rel_tolerance * std::max(now, 1e-300)) {
                run.converged = true;
                break;
            }
        }
    }
    std::copy(m->x->data, m->x->data + kFitParams, run.x.begin());
    run.f = m->fval;
    gsl_multimin_fminimizer_free(m);
    return run;
}

}  // namespace

FitReport fit_card(std::span<const IvCurve> curves, const ModelCard& seeds, const FitOptions& opt) {
    if (curves.empty()) throw DomainError("fit_card: no curves");
    seeds.validate();
    const double t = curves.front().temperature;
    for (const auto& c : curves) {
        c.validate();
        if (std::abs(c.temperature - t) > 1e-6) throw DomainError("fit_card: curves must share one temperature");
        if (c.geom.polarity != curves.front().geom.polarity) throw DomainError("fit_card: mixed polarities");
    }
    const std::vector<IvCurve> data(curves.begin(), curves.end());
    LossContext ctx{&data, seeds, opt.floor_a};
    ctx.base.polarity = curves.front().geom.polarity;

    std::array<double, kFitParams> x{seeds.vth0_298, std::log(seeds.mu0_298), seeds.n_ideality - 1.0,
                                     seeds.theta_mob, seeds.dibl_eta};
    const std::array<double, kFitParams> base_step{0.02, 0.1, 0.05, 0.05, 0.01};
    // Fixed restart schedule: each run restarts from the best point with a
    // fresh simplex of the listed relative size.
    constexpr double kRestartScale[] = {1.0, 0.3, 0.1, 0.03};

    gsl_error_handler_t* old = gsl_set_error_handler_off();
    FitReport rep;
    rep.temperature = t;
    double best = std::numeric_limits<double>::infinity();
    bool converged = false;
    const int runs = std::clamp(opt.restarts + 1, 1, static_cast<int>(std::size(kRestartScale)));
    for (int k = 0; k < runs; ++k) {
        std::array<double, kFitParams> step{};
        for (std::size_t i = 0; i < kFitParams; ++i) step[i] = base_step[i] * kRestartScale[k];
        const SimplexRun run = run_simplex(ctx, x, step, opt, rep.loss_history);
        rep.iterations += run.iterations;
        const bool improved = run.f < best;
        const double gain = improved ? (best - run.f) / std::max(run.f, 1e-300) : 0.0;
        if (improved) {
            best = run.f;
            x = run.x;
        }
        converged = run.converged;
        if (k > 0 && gain <= opt.rel_tolerance) break;
    }
    gsl_set_error_handler(old);

    rep.card = apply(ctx.base, x.data());
    rep.final_loss = best;
    rep.evaluations = ctx.evaluations;
    rep.converged = converged;
    if (!converged) {
        rep.flagged = true;
        rep.warnings.push_back(fmt::format("{} K: simplex stopped at the iteration limit", t));
    }
    for (const auto& c : data) rep.per_curve.push_back({c.device_id, c.v_ds, curve_rms(rep.card, c, opt.rms_floor_a)});
    rep.pooled_rms_percent = pooled_rms(rep.card, data, opt.rms_floor_a);
    return rep;
}

TemperatureLawFit fit_temperature_laws(const std::map<double, ModelCard>& cards) {
    if (cards.size() < 3)
        throw DomainError(fmt::format("fit_temperature_laws: need at least 3 temperatures, got {}", cards.size()));
    const Polarity pol = cards.begin()->second.polarity;
    std::vector<double> ts, vths, mus, sss;
    TemperatureLawFit out;
    ModelCard& u = out.card;
    u = cards.begin()->second;
    u.theta_mob = u.dibl_eta = u.cox_areal = u.r_source = u.r_drain = 0.0;
    const DeviceGeometry g = DeviceGeometry::single(pol, 1.0, 1.0);
    for (const auto& [t, c] : cards) {
        c.validate();
        if (c.polarity != pol) throw DomainError("fit_temperature_laws: cards of mixed polarity");
        ts.push_back(t);
        vths.push_back(vth_at(c, t));
        mus.push_back(device::mobility(c, t));
        sss.push_back(device::subthreshold_swing(c, g, t));
        u.theta_mob += c.theta_mob;
        u.dibl_eta += c.dibl_eta;
        u.cox_areal += c.cox_areal;
        u.r_source += c.r_source;
        u.r_drain += c.r_drain;
    }
    const double nc = static_cast<double>(cards.size());
    u.theta_mob /= nc;
    u.dibl_eta /= nc;
    u.cox_areal /= nc;
    u.r_source /= nc;
    u.r_drain /= nc;

    // SS(T) = n * c * sqrt(T^2 + t_sat^2); n in closed form for each t_sat.
    const double cst = device::kBoltzmann / device::kCharge * std::numbers::ln10 * 1000.0;
    const auto ss_fit = [&](double tsat, double* n_out) {
        double num = 0, den = 0;
        for (std::size_t i = 0; i < ts.size(); ++i) {
            const double gi = cst * std::hypot(ts[i], tsat);
            num += sss[i] * gi;
            den += gi * gi;
        }
        const double n = num / den;
        double r = 0;
        for (std::size_t i = 0; i < ts.size(); ++i) {
            const double e = sss[i] - n * cst * std::hypot(ts[i], tsat);
            r += e * e;
        }
        if (n_out) *n_out = n;
        return r;
    };
    // Coarse scan, then golden-section refinement around the best cell.
    constexpr double kTmin = 1e-3, kTmax = 100.0;
    constexpr int kScan = 1000;
    int best_i = 0;
    double best_r = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= kScan; ++i) {
        const double r = ss_fit(kTmin + (kTmax - kTmin) * i / kScan, nullptr);
        if (r < best_r) {
            best_r = r;
            best_i = i;
        }
    }
    double a = kTmin + (kTmax - kTmin) * std::max(best_i - 1, 0) / kScan;
    double b = kTmin + (kTmax - kTmin) * std::min(best_i + 1, kScan) / kScan;
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double c1 = b - gr * (b - a), c2 = a + gr * (b - a);
    double f1 = ss_fit(c1, nullptr), f2 = ss_fit(c2, nullptr);
    for (int it = 0; it < 100 && b - a > 1e-10; ++it) {
        if (f1 < f2) {
            b = c2;
            c2 = c1;
            f2 = f1;
            c1 = b - gr * (b - a);
            f1 = ss_fit(c1, nullptr);
        } else {
            a = c1;
            c1 = c2;
            f1 = f2;
            c2 = a + gr * (b - a);
            f2 = ss_fit(c2, nullptr);
        }
    }
    u.t_sat = 0.5 * (a + b);
    ss_fit(u.t_sat, &u.n_ideality);
    if (u.n_ideality < 1.0) {
        out.warnings.push_back(fmt::format("fitted n_ideality {} below 1; clamped", u.n_ideality));
        u.n_ideality = 1.0;
    }

    // Linear least squares for the threshold and mobility laws.
    const std::size_t m = ts.size();
    Eigen::MatrixXd av(m, 2), am(m, 2);
    Eigen::VectorXd bv(m), bm(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double te = device::effective_temperature(ts[i], u.t_sat);
        const auto r = static_cast<Eigen::Index>(i);
        av(r, 0) = 1.0;
        av(r, 1) = device::kReferenceTemperature - te;
        bv(r) = vths[i];
        am(r, 0) = 1.0;
        am(r, 1) = std::log(device::kReferenceTemperature / te);
        bm(r) = std::log(mus[i]);
    }
    const Eigen::Vector2d pv = av.colPivHouseholderQr().solve(bv);
    const Eigen::Vector2d pm = am.colPivHouseholderQr().solve(bm);
    u.vth0_298 = pv(0);
    u.kappa_vth = pv(1);
    u.mu0_298 = std::exp(pm(0));
    u.gamma_mu = pm(1);

    for (std::size_t i = 0; i < m; ++i) {
        out.vth_residual_mv[ts[i]] = (vth_at(u, ts[i]) - vths[i]) * 1000.0;
        out.mu_residual_rel[ts[i]] = device::mobility(u, ts[i]) / mus[i] - 1.0;
        out.ss_residual_mv[ts[i]] = device::subthreshold_swing(u, g, ts[i]) - sss[i];
    }
    u.validate();
    return out;
}

}  // namespace cryo

#include "cryocmos/rf_extract.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multifit_nlinear.h>
#include <gsl/gsl_vector.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <numbers>

#include "cryocmos/error.hpp"

namespace cryo {

void SmallSignalSet::check() {
    const auto note = [this](std::string msg) {
        flagged = true;
        diagnostics.push_back(std::move(msg));
    };
    constexpr double r_tol = 1e-6;     // Ohm
    constexpr double c_tol = 1e-18;    // F
    if (r_g < -r_tol) note(fmt::format("negative R_g = {} Ohm", r_g));
    if (r_d < -r_tol) note(fmt::format("negative R_d = {} Ohm", r_d));
    if (r_s < -r_tol) note(fmt::format("negative R_s = {} Ohm", r_s));
    if (c_gb < -c_tol) note(fmt::format("negative C_gb = {} F", c_gb));
    if (c_gs() < -c_tol) note(fmt::format("C_gg < C_gd + C_gb (C_gs = {} F)", c_gs()));
}

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Admittance seen at the intrinsic gate/drain nodes (source node eliminated).
Mat2 inner_y(const SmallSignalSet& e, double w) {
    const Complex jw(0.0, w);
    const double cgs = e.c_gs();
    Mat2 m;
    m << jw * (cgs + e.c_gd + e.c_gb), -jw * e.c_gd, e.g_m - jw * e.c_gd, e.g_ds + jw * e.c_gd;
    if (e.r_s == 0.0) return m;
    // Column/row of the intrinsic source node.
    const Complex m_gs = -jw * cgs;
    const Complex m_ds = -e.g_ds - e.g_m;
    const Complex m_sg = -jw * cgs - e.g_m;
    const Complex m_sd = -e.g_ds;
    const Complex m_ss = jw * cgs + e.g_ds + e.g_m + 1.0 / e.r_s;
    Eigen::Vector2cd col(m_gs, m_ds);
    Eigen::RowVector2cd row(m_sg, m_sd);
    return m - col * row / m_ss;
}

Mat2 synth_y(const SmallSignalSet& e, double f) {
    const double w = kTwoPi * f;
    const Mat2 yi = inner_y(e, w);
    if (e.r_g == 0.0 && e.r_d == 0.0) return yi;
    // Series R_g, R_d at the ports: Y = (I + Y' R)^-1 Y'.
    Mat2 r = Mat2::Zero();
    r(0, 0) = e.r_g;
    r(1, 1) = e.r_d;
    const Mat2 a = Mat2::Identity() + yi * r;
    return a.inverse() * yi;
}

Mat2 synth_z(const SmallSignalSet& e, double f) {
    const double w = kTwoPi * f;
    Mat2 z = inner_y(e, w).inverse();
    z(0, 0) += e.r_g;
    z(1, 1) += e.r_d;
    return z;
}

std::vector<std::size_t> window(const std::vector<double>& f, bool top, double decades) {
    std::vector<std::size_t> idx;
    if (top) {
        const double lo = f.back() / std::pow(10.0, decades);
        for (std::size_t i = 0; i < f.size(); ++i)
            if (f[i] >= lo) idx.push_back(i);
    } else {
        const double hi = f.front() * std::pow(10.0, decades);
        for (std::size_t i = 0; i < f.size(); ++i)
            if (f[i] <= hi) idx.push_back(i);
    }
    return idx;
}

// Parameter vector for refinement: ohms, fF, mS.
constexpr int kParams = 8;

SmallSignalSet unpack(const double* x, double temperature) {
    SmallSignalSet e;
    e.r_g = x[0];
    e.r_d = x[1];
    e.r_s = x[2];
    e.c_gg = x[3] * 1e-15;
    e.c_gd = x[4] * 1e-15;
    e.c_gb = x[5] * 1e-15;
    e.g_m = x[6] * 1e-3;
    e.g_ds = x[7] * 1e-3;
    e.temperature = temperature;
    return e;
}

void pack(const SmallSignalSet& e, double* x) {
    x[0] = e.r_g;
    x[1] = e.r_d;
    x[2] = e.r_s;
    x[3] = e.c_gg * 1e15;
    x[4] = e.c_gd * 1e15;
    x[5] = e.c_gb * 1e15;
    x[6] = e.g_m * 1e3;
    x[7] = e.g_ds * 1e3;
}

struct FitContext {
    std::vector<double> f;
    std::vector<Mat2> z;
    std::vector<double> scale;
};

int residual_cb(const gsl_vector* x, void* params, gsl_vector* out) {
    const auto* ctx = static_cast<const FitContext*>(params);
    const SmallSignalSet e = unpack(x->data, 0.0);
    std::size_t k = 0;
    for (std::size_t i = 0; i < ctx->f.size(); ++i) {
        const Mat2 d = (synth_z(e, ctx->f[i]) - ctx->z[i]) / ctx->scale[i];
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c) {
                gsl_vector_set(out, k++, d(r, c).real());
                gsl_vector_set(out, k++, d(r, c).imag());
            }
    }
    for (std::size_t i = 0; i < out->size; ++i)
        if (!std::isfinite(gsl_vector_get(out, i))) return GSL_EDOM;
    return GSL_SUCCESS;
}

struct RefineOutcome {
    std::array<double, kParams> x{};
    double rms = 0.0;
    int iterations = 0;
    bool ok = false;
};

RefineOutcome refine(const FitContext& ctx, const std::array<double, kParams>& start, int max_iter) {
    const std::size_t n = ctx.f.size() * 8;
    gsl_multifit_nlinear_fdf fdf{};
    fdf.f = residual_cb;
    fdf.df = nullptr;
    fdf.fvv = nullptr;
    fdf.n = n;
    fdf.p = kParams;
    fdf.params = const_cast<FitContext*>(&ctx);

    gsl_multifit_nlinear_parameters params = gsl_multifit_nlinear_default_parameters();
    params.trs = gsl_multifit_nlinear_trs_lm;
    params.scale = gsl_multifit_nlinear_scale_more;
    params.fdtype = GSL_MULTIFIT_NLINEAR_CTRDIFF;

    gsl_multifit_nlinear_workspace* w = gsl_multifit_nlinear_alloc(gsl_multifit_nlinear_trust, &params, n, kParams);
    gsl_vector_const_view x0 = gsl_vector_const_view_array(start.data(), kParams);

    RefineOutcome out;
    out.x = start;
    gsl_error_handler_t* old = gsl_set_error_handler_off();
    if (gsl_multifit_nlinear_init(&x0.vector, &fdf, w) == GSL_SUCCESS) {
        int info = 0;
        gsl_multifit_nlinear_driver(static_cast<std::size_t>(max_iter), 1e-15, 1e-15, 1e-15, nullptr, nullptr, &info,
                                    w);
        const gsl_vector* x = gsl_multifit_nlinear_position(w);
        std::copy(x->data, x->data + kParams, out.x.begin());
        const gsl_vector* r = gsl_multifit_nlinear_residual(w);
        double ss = 0.0;
        for (std::size_t i = 0; i < r->size; ++i) ss += r->data[i] * r->data[i];
        out.rms = std::sqrt(ss / static_cast<double>(r->size));
        out.iterations = static_cast<int>(gsl_multifit_nlinear_niter(w));
        out.ok = std::isfinite(out.rms);
    }
    gsl_set_error_handler(old);
    gsl_multifit_nlinear_free(w);
    return out;
}

}  // namespace

TwoPort synth_small_signal(const SmallSignalSet& ss, std::span<const double> freqs, double z0) {
    TwoPort out;
    out.rep = Rep::Y;
    out.z0 = z0;
    out.freqs.assign(freqs.begin(), freqs.end());
    out.mats.reserve(freqs.size());
    for (double f : freqs) out.mats.push_back(synth_y(ss, f));
    out.validate();
    return out;
}

ColdFetResult coldfet_extract(const TwoPort& net, const ColdFetOptions& opt) {
    net.validate();
    if (net.size() < 2) throw DomainError("coldfet_extract: need at least two frequencies");
    const TwoPort z = convert(net, Rep::Z);
    const TwoPort y = convert(net, Rep::Y);

    ColdFetResult res;
    SmallSignalSet& cf = res.closed_form;

    const auto top = window(net.freqs, true, opt.r_window_decades);
    double z12 = 0, z22 = 0, z11 = 0;
    for (auto i : top) {
        z11 += z.mats[i](0, 0).real();
        z12 += z.mats[i](0, 1).real();
        z22 += z.mats[i](1, 1).real();
    }
    const double nt = static_cast<double>(top.size());
    cf.r_s = z12 / nt;
    cf.r_d = (z22 - z12) / nt;
    cf.r_g = (z11 - z12) / nt;

    const auto bottom = window(net.freqs, false, opt.c_window_decades);
    double cgg = 0, cgd = 0, gm = 0, gds = 0;
    for (auto i : bottom) {
        const double w = kTwoPi * net.freqs[i];
        const Mat2& m = y.mats[i];
        cgg += m(0, 0).imag() / w;
        cgd += -m(0, 1).imag() / w;
        gm += (m(1, 0) - m(0, 1)).real();
        gds += m(1, 1).real();
    }
    const double nb = static_cast<double>(bottom.size());
    cf.c_gg = cgg / nb;
    cf.c_gd = cgd / nb;
    cf.c_gb = 0.0;  // C_gs / C_gb split is unresolved at low frequency
    cf.g_m = gm / nb;
    cf.g_ds = gds / nb;
    cf.temperature = 298.0;

    if (!opt.refine) {
        res.elements = cf;
        res.elements.check();
        return res;
    }

    FitContext ctx;
    const std::size_t n_fit = std::min<std::size_t>(net.size(), static_cast<std::size_t>(std::max(opt.max_fit_points, 8)));
    for (std::size_t k = 0; k < n_fit; ++k) {
        const std::size_t i = n_fit == 1 ? 0 : (k * (net.size() - 1)) / (n_fit - 1);
        if (!ctx.f.empty() && ctx.f.back() == net.freqs[i]) continue;
        ctx.f.push_back(net.freqs[i]);
        ctx.z.push_back(z.mats[i]);
        ctx.scale.push_back(z.mats[i].cwiseAbs().maxCoeff());
    }

    std::array<double, kParams> start{};
    SmallSignalSet seed = cf;
    seed.r_g = std::max(cf.r_g, 0.1);
    seed.r_d = std::max(cf.r_d, 0.1);
    seed.r_s = std::max(cf.r_s, 0.1);
    seed.c_gb = 0.1 * cf.c_gg;
    pack(seed, start.data());

    RefineOutcome best = refine(ctx, start, opt.max_iterations);
    // Deterministic restarts when the first descent stalls away from the data:
    // rescale the resistances and move the C_gs / C_gb split.
    // Also re-split R_d + R_s, which the closed form separates poorly when
    // C_gb is large.
    struct Restart {
        double r_scale;
        double cgb_fraction;
        double source_share;  // < 0 keeps the closed-form split
    };
    constexpr Restart restarts[] = {{1.0, 0.3, -1},  {1.0, 0.1, 0.5}, {1.0, 0.1, 0.8},  {0.5, 0.1, -1},
                                    {2.0, 0.1, -1},  {1.0, 0.02, -1}, {1.0, 0.3, 0.5},  {1.0, 0.3, 0.2}};
    const double rds = std::max(start[1] + start[2], 1e-3);
    for (const Restart& rs : restarts) {
        if (best.ok && best.rms < 1e-9) break;
        std::array<double, kParams> alt = start;
        if (rs.source_share >= 0.0) {
            alt[2] = rds * rs.source_share;
            alt[1] = rds - alt[2];
        }
        for (int k = 0; k < 3; ++k) alt[static_cast<std::size_t>(k)] *= rs.r_scale;
        alt[5] = start[3] * rs.cgb_fraction;
        RefineOutcome r = refine(ctx, alt, opt.max_iterations);
        if (r.ok && (!best.ok || r.rms < best.rms)) best = r;
    }

    // Narrow valleys (small C_gd against a large C_gb) need long descents;
    // continue from the best point rather than giving up.
    if (best.ok && best.rms > 1e-9) {
        RefineOutcome more = refine(ctx, best.x, 5 * opt.max_iterations);
        if (more.ok && more.rms < best.rms) {
            more.iterations += best.iterations;
            best = more;
        }
    }

    if (best.ok) {
        res.elements = unpack(best.x.data(), cf.temperature);
        res.fit_residual = best.rms;
        res.iterations = best.iterations;
    } else {
        res.elements = cf;
        res.elements.flagged = true;
        res.elements.diagnostics.push_back("refinement failed; closed-form estimates returned");
    }
    res.channel_term = cf.r_g - res.elements.r_g;
    if (best.ok && best.rms > 1e-3)
        res.elements.diagnostics.push_back(fmt::format("refinement residual {:.3g} (relative Z)", best.rms));
    res.elements.check();
    return res;
}

std::string_view to_string(FtMethod m) {
    return m == FtMethod::measured_crossing ? "measured-crossing" : "extrapolated";
}

FtResult ft_extract(const TwoPort& net) {
    net.validate();
    if (net.size() < 2) throw DomainError("ft_extract: need at least two frequencies");
    const TwoPort h = convert(net, Rep::H);
    std::vector<double> mag(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) mag[i] = std::abs(h.mats[i](1, 0));

    for (std::size_t i = 1; i < mag.size(); ++i) {
        if (mag[i - 1] >= 1.0 && mag[i] < 1.0) {
            const double lf0 = std::log(net.freqs[i - 1]), lf1 = std::log(net.freqs[i]);
            const double lh0 = std::log(mag[i - 1]), lh1 = std::log(mag[i]);
            const double lft = lf0 + (0.0 - lh0) * (lf1 - lf0) / (lh1 - lh0);
            return {std::exp(lft), FtMethod::measured_crossing, i};
        }
    }

    // No crossing on the grid: extrapolate at -20 dB/dec.
    const auto slope = [&](std::size_t i) {
        const std::size_t a = i == 0 ? 0 : i - 1;
        const std::size_t b = i == 0 ? 1 : i;
        return (std::log(mag[b]) - std::log(mag[a])) / (std::log(net.freqs[b]) - std::log(net.freqs[a]));
    };
    for (std::size_t k = mag.size(); k-- > 0;) {
        if (std::abs(slope(k) + 1.0) < 0.1) return {net.freqs[k] * mag[k], FtMethod::extrapolated, k};
    }
    throw DomainError("ft_extract: |H21| never crosses unity on the grid and no single-pole region was found");
}

double ft_analytic(const SmallSignalSet& ss) { return ss.g_m / (kTwoPi * (ss.c_gs() + ss.c_gd)); }

std::array<double, 4> scaling_basis(const DeviceGeometry& g) {
    const double wf = g.w_finger_um;
    const double nf = static_cast<double>(g.n_fingers);
    return {1.0, wf / nf, 1.0 / (wf * nf), g.l_um / (wf * nf)};
}

SmallSignalSet ParasiticScaling::predict(const DeviceGeometry& g) const {
    const auto b = scaling_basis(g);
    const auto dot = [&](const std::array<double, 4>& c) {
        return c[0] * b[0] + c[1] * b[1] + c[2] * b[2] + c[3] * b[3];
    };
    SmallSignalSet e;
    e.r_g = dot(r_g);
    e.r_d = dot(r_d);
    e.r_s = dot(r_s);
    return e;
}

namespace {

ParasiticScaling fit_group(std::span<const ScalingSample> all, const std::vector<std::size_t>& idx, const char* label) {
    if (idx.size() < 4)
        throw DomainError(fmt::format("fit_parasitic_scaling: {} needs at least 4 geometries, got {}", label, idx.size()));
    Eigen::MatrixXd a(idx.size(), 4);
    Eigen::MatrixXd rhs(idx.size(), 3);
    for (std::size_t r = 0; r < idx.size(); ++r) {
        const auto& s = all[idx[r]];
        s.geom.validate();
        const auto b = scaling_basis(s.geom);
        for (int c = 0; c < 4; ++c) a(static_cast<Eigen::Index>(r), c) = b[static_cast<std::size_t>(c)];
        rhs(static_cast<Eigen::Index>(r), 0) = s.elements.r_g;
        rhs(static_cast<Eigen::Index>(r), 1) = s.elements.r_d;
        rhs(static_cast<Eigen::Index>(r), 2) = s.elements.r_s;
    }
    // Column scaling keeps the rank test meaningful across basis magnitudes.
    Eigen::VectorXd norms = a.colwise().norm();
    for (int c = 0; c < 4; ++c)
        if (norms(c) == 0.0) throw DomainError("fit_parasitic_scaling: rank-deficient design matrix");
    const Eigen::MatrixXd as = a * norms.cwiseInverse().asDiagonal();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(as);
    qr.setThreshold(1e-10);
    if (qr.rank() < 4)
        throw DomainError(fmt::format("fit_parasitic_scaling: rank-deficient design matrix for {} (rank {})", label,
                                      static_cast<int>(qr.rank())));
    const Eigen::MatrixXd coef = norms.cwiseInverse().asDiagonal() * qr.solve(rhs);
    ParasiticScaling p;
    for (int c = 0; c < 4; ++c) {
        p.r_g[static_cast<std::size_t>(c)] = coef(c, 0);
        p.r_d[static_cast<std::size_t>(c)] = coef(c, 1);
        p.r_s[static_cast<std::size_t>(c)] = coef(c, 2);
    }
    return p;
}

}  // namespace

ScalingFit fit_parasitic_scaling(std::span<const ScalingSample> samples, bool share_polarities) {
    ScalingFit fit;
    fit.shared = share_polarities;
    std::vector<std::size_t> n_idx, p_idx, all_idx;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        all_idx.push_back(i);
        (samples[i].geom.polarity == Polarity::nmos ? n_idx : p_idx).push_back(i);
    }
    if (share_polarities) {
        fit.nmos = fit_group(samples, all_idx, "shared fit");
        fit.pmos = fit.nmos;
    } else {
        if (n_idx.empty() && p_idx.empty()) throw DomainError("fit_parasitic_scaling: no samples");
        if (!n_idx.empty()) fit.nmos = fit_group(samples, n_idx, "nmos");
        if (!p_idx.empty()) fit.pmos = fit_group(samples, p_idx, "pmos");
    }
    for (const auto& s : samples) {
        const SmallSignalSet pred = fit.for_polarity(s.geom.polarity).predict(s.geom);
        fit.residuals.push_back({s.elements.r_g - pred.r_g, s.elements.r_d - pred.r_d, s.elements.r_s - pred.r_s});
        if (pred.r_g <= 0.0 || pred.r_d <= 0.0 || pred.r_s <= 0.0)
            fit.warnings.push_back(fmt::format("non-positive predicted resistance at W_f = {} um, N_f = {}, L = {} um",
                                               s.geom.w_finger_um, s.geom.n_fingers, s.geom.l_um));
    }
    return fit;
}

}  // namespace cryo

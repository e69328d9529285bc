#include "cryocmos/circuits.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <numbers>

#include "cryocmos/error.hpp"

namespace cryo {

double channel_current(const DeviceSpec& d, double v_g, double v_a, double v_b, double t) {
    const bool n = d.card.polarity == Polarity::nmos;
    // NMOS: drain is the higher terminal. PMOS: drain is the lower terminal.
    const bool a_is_drain = n ? v_a >= v_b : v_a < v_b;
    const double vd = a_is_drain ? v_a : v_b;
    const double vs = a_is_drain ? v_b : v_a;
    BiasPoint b;
    b.v_gs = v_g - vs;
    b.v_ds = vd - vs;
    b.temperature = t;
    const double id = device::drain_current(d.card, d.geom, b).i_d;
    return a_is_drain ? id : -id;
}

void InverterSpec::validate() const {
    if (!(vdd > 0.0)) throw DomainError("inverter: vdd must be positive");
    if (nmos.card.polarity != Polarity::nmos || pmos.card.polarity != Polarity::pmos)
        throw DomainError("inverter: expected an NMOS pull-down and a PMOS pull-up");
    nmos.card.validate();
    pmos.card.validate();
    nmos.geom.validate();
    pmos.geom.validate();
}

namespace {

// Net current into the output node; non-increasing in v_out.
double node_current(const InverterSpec& s, double v_in, double v_out, const std::optional<AccessLoad>& acc) {
    const double t = s.temperature;
    double i = channel_current(s.pmos, v_in, s.vdd, v_out, t) - channel_current(s.nmos, v_in, v_out, 0.0, t);
    if (acc) i += channel_current(acc->device, acc->v_gate, acc->v_line, v_out, t);
    return i;
}

}  // namespace

double inverter_output(const InverterSpec& spec, double v_in, const std::optional<AccessLoad>& access) {
    double lo = 0.0, hi = spec.vdd;
    const double f_lo = node_current(spec, v_in, lo, access);
    const double f_hi = node_current(spec, v_in, hi, access);
    if (f_lo < 0.0 || f_hi > 0.0 || (f_lo == 0.0 && f_hi == 0.0))
        throw DomainError(fmt::format("inverter: no output solution in [0, {}] V at v_in = {} V", spec.vdd, v_in));
    if (f_lo == 0.0) return lo;
    if (f_hi == 0.0) return hi;
    while (hi - lo > 1e-6) {
        const double mid = 0.5 * (lo + hi);
        (node_current(spec, v_in, mid, access) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

std::vector<VtcPoint> inverter_vtc(const InverterSpec& spec, std::span<const double> grid,
                                   const std::optional<AccessLoad>& access) {
    spec.validate();
    std::vector<VtcPoint> out;
    out.reserve(grid.size());
    for (double v : grid) {
        if (v < 0.0 || v > spec.vdd) throw DomainError(fmt::format("inverter: v_in = {} V outside [0, vdd]", v));
        out.push_back({v, inverter_output(spec, v, access)});
    }
    // Bisection noise must not break monotonicity.
    for (std::size_t i = 1; i < out.size(); ++i)
        if (out[i].v_in >= out[i - 1].v_in) out[i].v_out = std::min(out[i].v_out, out[i - 1].v_out);
    return out;
}

double trip_point(const InverterSpec& spec) {
    spec.validate();
    double lo = 0.0, hi = spec.vdd;
    while (hi - lo > 1e-7) {
        const double mid = 0.5 * (lo + hi);
        (inverter_output(spec, mid) > mid ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

SixTSpec SixTSpec::symmetric(const DeviceSpec& pd, const DeviceSpec& pu, const DeviceSpec& ax, double vdd, double t) {
    SixTSpec s;
    s.left = {pd, pu, ax};
    s.right = {pd, pu, ax};
    s.vdd = vdd;
    s.temperature = t;
    return s;
}

SixTSpec SixTSpec::swapped() const {
    SixTSpec s = *this;
    std::swap(s.left, s.right);
    return s;
}

void SixTSpec::validate() const {
    if (!(vdd > 0.0)) throw DomainError("6T cell: vdd must be positive");
    for (const CellSide* side : {&left, &right}) {
        for (const DeviceSpec* d : {&side->pull_down, &side->pull_up, &side->access}) {
            d->card.validate();
            d->geom.validate();
        }
        if (side->pull_down.card.polarity != Polarity::nmos || side->access.card.polarity != Polarity::nmos ||
            side->pull_up.card.polarity != Polarity::pmos)
            throw DomainError("6T cell: pull-down and access must be NMOS, pull-up PMOS");
    }
}

std::string_view to_string(SramMode m) { return m == SramMode::hold ? "hold" : "read"; }

namespace {

InverterSpec side_inverter(const SixTSpec& s, const CellSide& side) {
    return {side.pull_down, side.pull_up, s.vdd, s.temperature};
}

struct Poly {
    std::vector<double> w, d, p;  // rotated coordinates, sorted by w; source parameter
};

constexpr double kRoot2 = std::numbers::sqrt2;

// Curve R: (X, Y) = (q, f(q)); curve L: (X, Y) = (f(p), p).
Poly sample(const std::function<double(double)>& f, bool is_left, double a, double b, double step) {
    Poly poly;
    const int n = std::max(1, static_cast<int>(std::ceil((b - a) / step - 1e-9)));
    for (int i = 0; i <= n; ++i) {
        const double p = std::min(b, a + i * step);
        const double v = f(p);
        const double x = is_left ? v : p;
        const double y = is_left ? p : v;
        poly.w.push_back((x - y) / kRoot2);
        poly.d.push_back((x + y) / kRoot2);
        poly.p.push_back(p);
    }
    if (is_left) {
        std::reverse(poly.w.begin(), poly.w.end());
        std::reverse(poly.d.begin(), poly.d.end());
        std::reverse(poly.p.begin(), poly.p.end());
    }
    return poly;
}

double interp(const Poly& c, double w) {
    const auto it = std::lower_bound(c.w.begin(), c.w.end(), w);
    if (it == c.w.begin()) return c.d.front();
    if (it == c.w.end()) return c.d.back();
    const std::size_t i = static_cast<std::size_t>(it - c.w.begin());
    const double w0 = c.w[i - 1], w1 = c.w[i];
    if (w1 == w0) return c.d[i];
    return c.d[i - 1] + (w - w0) * (c.d[i] - c.d[i - 1]) / (w1 - w0);
}

// Parameter interval of a curve covering the rotated window [wa, wb].
std::pair<double, double> param_window(const Poly& c, double wa, double wb) {
    auto lo = std::lower_bound(c.w.begin(), c.w.end(), wa);
    auto hi = std::upper_bound(c.w.begin(), c.w.end(), wb);
    std::size_t i0 = lo == c.w.begin() ? 0 : static_cast<std::size_t>(lo - c.w.begin()) - 1;
    std::size_t i1 = std::min(c.w.size() - 1, static_cast<std::size_t>(hi - c.w.begin()));
    double p0 = c.p[i0], p1 = c.p[i1];
    if (p0 > p1) std::swap(p0, p1);
    return {p0, p1};
}

}  // namespace

SnmResult snm_from_vtcs(const std::function<double(double)>& f_left, const std::function<double(double)>& f_right,
                        double vdd) {
    constexpr double kGrid = 1e-3;
    constexpr double kFine = 1e-4;
    SnmResult res;
    const Poly r = sample(f_right, false, 0.0, vdd, kGrid);
    const Poly l = sample(f_left, true, 0.0, vdd, kGrid);
    for (std::size_t i = 0; i < r.p.size(); ++i) res.curve_right.push_back({r.p[i], f_right(r.p[i])});
    for (std::size_t i = l.p.size(); i-- > 0;) res.curve_left.push_back({l.p[i], f_left(l.p[i])});

    const double w_lo = std::max(r.w.front(), l.w.front());
    const double w_hi = std::min(r.w.back(), l.w.back());
    std::vector<double> ws, ds;
    for (double w = w_lo; w <= w_hi + 1e-12; w += kGrid / kRoot2) {
        ws.push_back(w);
        ds.push_back(interp(r, w) - interp(l, w));
    }
    // Lobes: maximal runs of one sign, closed by a sign change or by a range
    // end where the curves meet.
    struct Lobe {
        int sign;
        double peak;
        double w_peak;
    };
    std::vector<Lobe> lobes;
    const double close_tol = 2e-3;
    std::size_t i = 0;
    while (i < ws.size()) {
        if (ds[i] == 0.0) {
            ++i;
            continue;
        }
        const int sign = ds[i] > 0 ? 1 : -1;
        std::size_t j = i;
        Lobe lb{sign, 0.0, ws[i]};
        while (j < ws.size() && ds[j] * sign > 0.0) {
            if (std::abs(ds[j]) > lb.peak) {
                lb.peak = std::abs(ds[j]);
                lb.w_peak = ws[j];
            }
            ++j;
        }
        const bool closed_left = i > 0 || std::abs(ds[i]) < close_tol;
        const bool closed_right = j < ws.size() || std::abs(ds[j - 1]) < close_tol;
        if (closed_left && closed_right) lobes.push_back(lb);
        i = j;
    }
    const auto best_of = [&](int sign) -> const Lobe* {
        const Lobe* b = nullptr;
        for (const auto& lb : lobes)
            if (lb.sign == sign && (!b || lb.peak > b->peak)) b = &lb;
        return b;
    };
    const Lobe* up = best_of(-1);   // w < 0 side: Q low, QB high
    const Lobe* down = best_of(1);
    if (!up || !down) {
        res.flagged = true;
        res.note = "butterfly curves do not form two closed lobes (cell is not bistable)";
        return res;
    }
    const auto refine = [&](const Lobe& lb) {
        const double wa = lb.w_peak - 2e-3, wb = lb.w_peak + 2e-3;
        const auto [ra, rb] = param_window(r, wa, wb);
        const auto [la, lb_] = param_window(l, wa, wb);
        const Poly rf = sample(f_right, false, ra, rb, kFine);
        const Poly lf = sample(f_left, true, la, lb_, kFine);
        double peak = lb.peak;
        for (double w = lb.w_peak - 1e-3; w <= lb.w_peak + 1e-3 + 1e-12; w += kFine / kRoot2) {
            const double d = (interp(rf, w) - interp(lf, w)) * lb.sign;
            peak = std::max(peak, d);
        }
        return peak / kRoot2;
    };
    res.lobe_upper = refine(*up);
    res.lobe_lower = refine(*down);
    res.snm = std::min(res.lobe_upper, res.lobe_lower);
    return res;
}

SnmResult sram_snm(const SixTSpec& spec, SramMode mode) {
    spec.validate();
    const InverterSpec inv_l = side_inverter(spec, spec.left);
    const InverterSpec inv_r = side_inverter(spec, spec.right);
    std::optional<AccessLoad> acc_l, acc_r;
    if (mode == SramMode::read) {
        acc_l = AccessLoad{spec.left.access, spec.vdd, spec.vdd};
        acc_r = AccessLoad{spec.right.access, spec.vdd, spec.vdd};
    }
    return snm_from_vtcs([&](double v) { return inverter_output(inv_l, v, acc_l); },
                         [&](double v) { return inverter_output(inv_r, v, acc_r); }, spec.vdd);
}

namespace {

// Highest fixed point of Q -> f_L(f_R(Q)), scanned downward from vdd.
double highest_fixed_point(const SixTSpec& s, double v_bl) {
    const InverterSpec inv_l = side_inverter(s, s.left);
    const InverterSpec inv_r = side_inverter(s, s.right);
    const AccessLoad acc_l{s.left.access, s.vdd, v_bl};
    const AccessLoad acc_r{s.right.access, s.vdd, s.vdd};
    const auto g = [&](double q) { return inverter_output(inv_l, inverter_output(inv_r, q, acc_r), acc_l) - q; };
    constexpr double kStep = 5e-3;
    double q_prev = s.vdd;
    double h_prev = g(q_prev);
    if (h_prev >= 0.0) return q_prev;
    for (double q = s.vdd - kStep; q > -1e-12; q -= kStep) {
        const double h = g(std::max(q, 0.0));
        if (h >= 0.0) {
            double lo = std::max(q, 0.0), hi = q_prev;
            for (int it = 0; it < 30; ++it) {
                const double mid = 0.5 * (lo + hi);
                (g(mid) >= 0.0 ? lo : hi) = mid;
            }
            return 0.5 * (lo + hi);
        }
        q_prev = q;
        h_prev = h;
    }
    return 0.0;
}

}  // namespace

WriteMarginResult write_margin(const SixTSpec& spec) {
    spec.validate();
    const double half = 0.5 * spec.vdd;
    const auto flips = [&](double v_bl) { return highest_fixed_point(spec, v_bl) < half; };
    WriteMarginResult r;
    if (!flips(0.0)) {
        r.flagged = true;
        r.note = "cell does not flip with the bitline at 0 V";
        return r;
    }
    if (flips(spec.vdd)) {
        r.margin = spec.vdd;
        r.flagged = true;
        r.note = "cell flips with both bitlines at vdd (read-unstable)";
        return r;
    }
    double lo = 0.0, hi = spec.vdd;
    while (hi - lo > 1e-4) {
        const double mid = 0.5 * (lo + hi);
        (flips(mid) ? lo : hi) = mid;
    }
    r.margin = lo;
    return r;
}

PnOptResult optimize_pn_ratio(const SixTSpec& tmpl, std::span<const double> ratios, double t) {
    if (ratios.empty()) throw DomainError("pn-ratio: empty ratio grid");
    PnOptResult out;
    double best = -1.0;
    for (double ratio : ratios) {
        if (!(ratio > 0.0)) throw DomainError(fmt::format("pn-ratio: ratio {} must be positive", ratio));
        SixTSpec s = tmpl;
        s.temperature = t;
        for (CellSide* side : {&s.left, &s.right}) {
            const auto& pd = side->pull_down.geom;
            side->pull_up.geom = DeviceGeometry::from_fingers(Polarity::pmos, pd.w_finger_um * ratio, pd.n_fingers,
                                                              side->pull_up.geom.l_um);
        }
        PnRow row;
        row.ratio = ratio;
        row.hold_snm = sram_snm(s, SramMode::hold).snm;
        row.write_margin = write_margin(s).margin;
        row.objective = std::min(row.hold_snm, row.write_margin);
        if (row.objective > best) {
            best = row.objective;
            out.best_ratio = ratio;
        }
        out.table.push_back(row);
    }
    // Ties go to the smallest ratio.
    for (const auto& row : out.table)
        if (row.objective == best && row.ratio < out.best_ratio) out.best_ratio = row.ratio;
    return out;
}

void RoSpec::validate() const {
    if (n_stages < 3 || n_stages % 2 == 0) throw DomainError("ring oscillator: n_stages must be odd and >= 3");
    if (!(c_load > 0.0)) throw DomainError("ring oscillator: c_load must be positive");
    if (dt < 0.0) throw DomainError("ring oscillator: dt must be non-negative");
    if (max_cycles < 8) throw DomainError("ring oscillator: max_cycles must be >= 8");
    inverter.validate();
}

double ro_stage_delay_estimate(const RoSpec& spec) {
    const auto& inv = spec.inverter;
    const double vdd = inv.vdd, t = inv.temperature;
    const auto drive = [&](const DeviceSpec& d) {
        const double s = d.card.polarity == Polarity::nmos ? 1.0 : -1.0;
        BiasPoint b;
        b.temperature = t;
        b.v_gs = s * vdd;
        b.v_ds = s * vdd;
        const double i1 = std::abs(device::drain_current(d.card, d.geom, b).i_d);
        b.v_ds = s * 0.5 * vdd;
        const double i2 = std::abs(device::drain_current(d.card, d.geom, b).i_d);
        return 0.5 * (i1 + i2);
    };
    const double tn = spec.c_load * vdd / (2.0 * drive(inv.nmos));
    const double tp = spec.c_load * vdd / (2.0 * drive(inv.pmos));
    return 0.5 * (tn + tp);
}

namespace {

// Bilinear table of the net stage current I_P - I_N over (v_in, v_out).
class CurrentTable {
public:
    CurrentTable(const InverterSpec& s, int n)
        : n_(n), vdd_(s.vdd), h_(s.vdd / (n - 1)), inv_h_((n - 1) / s.vdd), v_(static_cast<std::size_t>(n) * n) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                v_[static_cast<std::size_t>(i) * n + j] = node_current(s, i * h_, j * h_, std::nullopt);
    }
    double operator()(double vin, double vout) const {
        const double x = std::clamp(vin, 0.0, vdd_) * inv_h_;
        const double y = std::clamp(vout, 0.0, vdd_) * inv_h_;
        const int i = std::min(static_cast<int>(x), n_ - 2);
        const int j = std::min(static_cast<int>(y), n_ - 2);
        const double fx = x - i, fy = y - j;
        const double* row0 = &v_[static_cast<std::size_t>(i) * n_ + j];
        const double* row1 = row0 + n_;
        const double a = row0[0] + fy * (row0[1] - row0[0]);
        const double b = row1[0] + fy * (row1[1] - row1[0]);
        return a + fx * (b - a);
    }

private:
    int n_;
    double vdd_, h_, inv_h_;
    std::vector<double> v_;
};

}  // namespace

RoResult ring_oscillator(const RoSpec& spec) {
    spec.validate();
    const InverterSpec& inv = spec.inverter;
    const int n = spec.n_stages;
    const double vdd = inv.vdd;
    RoResult res;
    res.t_d_estimate = ro_stage_delay_estimate(spec);
    res.f_estimate = 1.0 / (2.0 * n * res.t_d_estimate);
    const double dt = spec.dt > 0.0 ? spec.dt : res.t_d_estimate / 20.0;
    res.dt = dt;

    const bool use_table = spec.currents == RoSpec::Currents::table ||
                           (spec.currents == RoSpec::Currents::automatic && n > 15);
    std::optional<CurrentTable> table;
    if (use_table) table.emplace(inv, 513);
    const double inv_c = 1.0 / spec.c_load;
    const auto stage = [&](double vin, double vout) {
        return table ? (*table)(vin, vout) : node_current(inv, vin, vout, std::nullopt);
    };
    const auto deriv = [&](const std::vector<double>& v, std::vector<double>& dv) {
        const std::size_t m = v.size();
        if (table) {
            const CurrentTable& tb = *table;
            dv[0] = tb(v[m - 1], v[0]) * inv_c;
            for (std::size_t k = 1; k < m; ++k) dv[k] = tb(v[k - 1], v[k]) * inv_c;
            return;
        }
        dv[0] = stage(v[m - 1], v[0]) * inv_c;
        for (std::size_t k = 1; k < m; ++k) dv[k] = stage(v[k - 1], v[k]) * inv_c;
    };

    std::vector<double> v(static_cast<std::size_t>(n));
    const int s0 = ((spec.start_node % n) + n) % n;
    for (int k = 0; k < n; ++k) v[static_cast<std::size_t>((s0 + k) % n)] = k % 2 == 0 ? vdd : 0.0;

    std::vector<double> k1(v.size()), k2(v.size()), k3(v.size()), k4(v.size()), tmp(v.size());
    const double t_max = spec.max_cycles * 2.0 / res.f_estimate;
    const std::size_t max_steps = static_cast<std::size_t>(std::ceil(t_max / dt));
    const std::size_t decimate = std::max<std::size_t>(1, max_steps / 20000);

    std::vector<double> crossings;
    constexpr int kSkip = 2, kPeriods = 5;
    const double half = 0.5 * vdd;
    double t = 0.0;
    for (std::size_t step = 0; step < max_steps; ++step) {
        if (step % decimate == 0) {
            res.time.push_back(t);
            res.v_node0.push_back(v[0]);
        }
        deriv(v, k1);
        for (std::size_t i = 0; i < v.size(); ++i) tmp[i] = v[i] + 0.5 * dt * k1[i];
        deriv(tmp, k2);
        for (std::size_t i = 0; i < v.size(); ++i) tmp[i] = v[i] + 0.5 * dt * k2[i];
        deriv(tmp, k3);
        for (std::size_t i = 0; i < v.size(); ++i) tmp[i] = v[i] + dt * k3[i];
        deriv(tmp, k4);
        const double before = v[0];
        for (std::size_t i = 0; i < v.size(); ++i) v[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        t += dt;
        if (before < half && v[0] >= half) {
            crossings.push_back(t - dt + dt * (half - before) / (v[0] - before));
            if (static_cast<int>(crossings.size()) >= kSkip + kPeriods + 1) break;
        }
    }
    if (static_cast<int>(crossings.size()) < kSkip + kPeriods + 1)
        throw DomainError(fmt::format("ring oscillator: no steady oscillation within {} estimated cycles", spec.max_cycles));
    res.periods = kPeriods;
    const double period = (crossings.back() - crossings[kSkip]) / kPeriods;
    res.frequency = 1.0 / period;
    res.stage_delay = period / (2.0 * n);
    return res;
}

double iddq(const SixTSpec& cell, std::size_t n_cells, double t) {
    if (n_cells < 1) throw DomainError("iddq: need at least one cell");
    SixTSpec s = cell;
    s.temperature = t;
    s.validate();
    const InverterSpec inv_l = side_inverter(s, s.left);
    const InverterSpec inv_r = side_inverter(s, s.right);
    const AccessLoad off_l{s.left.access, 0.0, s.vdd};
    const AccessLoad off_r{s.right.access, 0.0, s.vdd};
    // Settle the Q-high state by fixed-point iteration from the rails.
    double q = s.vdd, qb = 0.0;
    for (int it = 0; it < 200; ++it) {
        const double qb_next = inverter_output(inv_r, q, off_r);
        const double q_next = inverter_output(inv_l, qb_next, off_l);
        const bool done = std::abs(q_next - q) < 1e-9 && std::abs(qb_next - qb) < 1e-9;
        q = q_next;
        qb = qb_next;
        if (done) break;
    }
    // By KCL the supply current equals the leakage of the off devices: the Q
    // pull-down, the QB pull-up and the QB access device. Summing the on
    // devices instead would pick up the bisection residual.
    const double supply = channel_current(s.left.pull_down, qb, q, 0.0, t) +
                          channel_current(s.right.pull_up, q, s.vdd, qb, t) +
                          channel_current(s.right.access, 0.0, s.vdd, qb, t);
    return supply * static_cast<double>(n_cells);
}

void ComparatorSpec::validate() const {
    input.card.validate();
    input.geom.validate();
    if (input.card.polarity != Polarity::nmos) throw DomainError("comparator: input pair must be NMOS");
    if (!(clock_period > 0.0) || !(c_load > 0.0) || !(vdd > 0.0))
        throw DomainError("comparator: clock period, load and vdd must be positive");
    if (preamp && !(preamp->gain >= 1.0)) throw DomainError("comparator: preamp gain must be >= 1");
}

ComparatorResult comparator_margin(const ComparatorSpec& spec, double v_cm, double dv_in) {
    spec.validate();
    if (v_cm < 0.0 || v_cm > spec.vdd) throw DomainError(fmt::format("comparator: v_cm = {} V outside [0, vdd]", v_cm));
    ComparatorResult r;
    r.v_eff = spec.preamp ? std::clamp(spec.preamp->output_cm, 0.0, spec.vdd) : v_cm;
    r.dv_eff = spec.preamp ? spec.preamp->gain * dv_in : dv_in;
    BiasPoint b;
    b.temperature = spec.temperature;
    b.v_ds = 0.5 * spec.vdd;
    r.margin = r.v_eff - std::abs(device::vth(spec.input.card, spec.input.geom, b));
    b.v_gs = r.v_eff;
    const double id = std::abs(device::drain_current(spec.input.card, spec.input.geom, b).i_d);
    r.discharge_time = id > 0.0 ? spec.c_load * 0.5 * spec.vdd / id : std::numeric_limits<double>::infinity();
    r.pass = r.margin > 0.0 && r.discharge_time < 0.5 * spec.clock_period;
    return r;
}

int ideal_code(double v, double vdd) {
    const double x = 32.0 * v / vdd;
    if (!(x > 0.0)) return 0;
    return static_cast<int>(std::min(std::floor(x), 31.0));
}

AdcResult flash_adc(const ComparatorSpec& comparator, double f_sample, std::span<const double> input, bool ideal) {
    if (!(f_sample > 0.0)) throw DomainError("flash ADC: sample rate must be positive");
    ComparatorSpec c = comparator;
    c.clock_period = 1.0 / f_sample;
    const double vdd = c.vdd;
    AdcResult out;
    for (int k = 1; k <= 31; ++k)
        out.comparator_pass.push_back(ideal || comparator_margin(c, k * vdd / 32.0, 0.0).pass);
    for (double v : input) {
        if (v < 0.0 || v > vdd) throw DomainError(fmt::format("flash ADC: input {} V outside [0, vdd]", v));
        AdcSample s;
        s.v_in = v;
        s.ideal_code = ideal_code(v, vdd);
        const double x = 32.0 * v / vdd;
        for (int k = 1; k <= 31; ++k) {
            const bool above = x >= k;
            const bool ok = out.comparator_pass[static_cast<std::size_t>(k - 1)];
            if (above && ok) ++s.code;
            if (above && !ok) s.flagged = true;
        }
        if (s.flagged) ++out.flagged_count;
        out.samples.push_back(s);
    }
    return out;
}

std::vector<double> adc_sine(double vdd, double f_signal, double f_sample, std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = std::clamp(0.5 * vdd * (1.0 + std::sin(2.0 * std::numbers::pi * f_signal * static_cast<double>(i) / f_sample)),
                          0.0, vdd);
    return v;
}

}  // namespace cryo

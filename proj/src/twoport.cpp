#include "cryocmos/twoport.hpp"

#include <cmath>
#include <fmt/format.h>

#include "cryocmos/error.hpp"

namespace cryo {

std::string_view to_string(Rep r) {
    switch (r) {
        case Rep::S: return "S";
        case Rep::Y: return "Y";
        case Rep::Z: return "Z";
        case Rep::H: return "H";
        case Rep::ABCD: return "ABCD";
    }
    return "?";
}

Rep parse_rep(std::string_view s) {
    if (s == "S" || s == "s") return Rep::S;
    if (s == "Y" || s == "y") return Rep::Y;
    if (s == "Z" || s == "z") return Rep::Z;
    if (s == "H" || s == "h") return Rep::H;
    if (s == "ABCD" || s == "abcd") return Rep::ABCD;
    throw DomainError("unknown two-port representation '" + std::string(s) + "'");
}

void TwoPort::validate() const {
    if (mats.size() != freqs.size()) throw DomainError("two-port: matrix count differs from frequency count");
    if (!(z0 > 0.0)) throw DomainError("two-port: z0 must be positive");
    for (std::size_t i = 1; i < freqs.size(); ++i)
        if (!(freqs[i] > freqs[i - 1])) throw DomainError("two-port: frequencies must be strictly ascending");
}

namespace {

const Mat2 kI = Mat2::Identity();

double scale_of(const Mat2& m) { return m.cwiseAbs().maxCoeff(); }

Mat2 inverse(const Mat2& m, double f, const char* what) {
    const Complex det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    const double scale = std::max(std::abs(m(0, 0) * m(1, 1)), std::abs(m(0, 1) * m(1, 0)));
    if (!(std::abs(det) > 1e-13 * scale) || !std::isfinite(std::abs(det))) throw SingularError(what, f);
    Mat2 inv;
    inv << m(1, 1), -m(0, 1), -m(1, 0), m(0, 0);
    return inv / det;
}

Complex pivot(const Mat2& m, int r, int c, double f, const char* what) {
    const Complex p = m(r, c);
    if (!(std::abs(p) > 1e-13 * scale_of(m))) throw SingularError(what, f);
    return p;
}

Complex det(const Mat2& m) { return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0); }

Mat2 to_y(const Mat2& m, Rep from, double z0, double f) {
    switch (from) {
        case Rep::Y: return m;
        case Rep::Z: return inverse(m, f, "Z->Y");
        case Rep::S: return (kI - m) * inverse(kI + m, f, "S->Y") / z0;
        case Rep::H: {
            const Complex h11 = pivot(m, 0, 0, f, "H->Y");
            Mat2 y;
            y << 1.0 / h11, -m(0, 1) / h11, m(1, 0) / h11, det(m) / h11;
            return y;
        }
        case Rep::ABCD: {
            const Complex b = pivot(m, 0, 1, f, "ABCD->Y");
            Mat2 y;
            y << m(1, 1) / b, -det(m) / b, -1.0 / b, m(0, 0) / b;
            return y;
        }
    }
    return m;
}

Mat2 to_z(const Mat2& m, Rep from, double z0, double f) {
    switch (from) {
        case Rep::Z: return m;
        case Rep::Y: return inverse(m, f, "Y->Z");
        case Rep::S: return z0 * (kI + m) * inverse(kI - m, f, "S->Z");
        case Rep::H: {
            const Complex h22 = pivot(m, 1, 1, f, "H->Z");
            Mat2 z;
            z << det(m) / h22, m(0, 1) / h22, -m(1, 0) / h22, 1.0 / h22;
            return z;
        }
        case Rep::ABCD: {
            const Complex c = pivot(m, 1, 0, f, "ABCD->Z");
            Mat2 z;
            z << m(0, 0) / c, det(m) / c, 1.0 / c, m(1, 1) / c;
            return z;
        }
    }
    return m;
}

Mat2 from_y(const Mat2& y, Rep to, double z0, double f) {
    switch (to) {
        case Rep::Y: return y;
        case Rep::Z: return inverse(y, f, "Y->Z");
        case Rep::S: return (kI - z0 * y) * inverse(kI + z0 * y, f, "Y->S");
        case Rep::H: {
            const Complex y11 = pivot(y, 0, 0, f, "Y->H");
            Mat2 h;
            h << 1.0 / y11, -y(0, 1) / y11, y(1, 0) / y11, det(y) / y11;
            return h;
        }
        case Rep::ABCD: {
            const Complex y21 = pivot(y, 1, 0, f, "Y->ABCD");
            Mat2 t;
            t << -y(1, 1) / y21, -1.0 / y21, -det(y) / y21, -y(0, 0) / y21;
            return t;
        }
    }
    return y;
}

Mat2 from_z(const Mat2& z, Rep to, double z0, double f) {
    switch (to) {
        case Rep::Z: return z;
        case Rep::Y: return inverse(z, f, "Z->Y");
        case Rep::S: return (z - z0 * kI) * inverse(z + z0 * kI, f, "Z->S");
        case Rep::H: {
            const Complex z22 = pivot(z, 1, 1, f, "Z->H");
            Mat2 h;
            h << det(z) / z22, z(0, 1) / z22, -z(1, 0) / z22, 1.0 / z22;
            return h;
        }
        case Rep::ABCD: {
            const Complex z21 = pivot(z, 1, 0, f, "Z->ABCD");
            Mat2 t;
            t << z(0, 0) / z21, det(z) / z21, 1.0 / z21, z(1, 1) / z21;
            return t;
        }
    }
    return z;
}

// Direct forms; they exist for networks with neither Y nor Z (a through line).
Mat2 s_to_abcd(const Mat2& s, double z0, double f) {
    const Complex s21 = pivot(s, 1, 0, f, "S->ABCD");
    const Complex p = s(0, 1) * s(1, 0);
    Mat2 t;
    t << ((1.0 + s(0, 0)) * (1.0 - s(1, 1)) + p) / (2.0 * s21),
        z0 * ((1.0 + s(0, 0)) * (1.0 + s(1, 1)) - p) / (2.0 * s21),
        ((1.0 - s(0, 0)) * (1.0 - s(1, 1)) - p) / (2.0 * s21 * z0),
        ((1.0 - s(0, 0)) * (1.0 + s(1, 1)) + p) / (2.0 * s21);
    return t;
}

Mat2 abcd_to_s(const Mat2& t, double z0, double f) {
    const Complex a = t(0, 0), b = t(0, 1), c = t(1, 0), d = t(1, 1);
    const Complex den = a + b / z0 + c * z0 + d;
    if (!(std::abs(den) > 1e-13 * scale_of(t))) throw SingularError("ABCD->S", f);
    Mat2 s;
    s << (a + b / z0 - c * z0 - d) / den, 2.0 * (a * d - b * c) / den, 2.0 / den, (-a + b / z0 - c * z0 + d) / den;
    return s;
}

}  // namespace

Mat2 convert_matrix(const Mat2& m, Rep from, Rep to, double z0, double f) {
    if (from == to) return m;
    // Route through Y; fall back to Z when an admittance form does not exist
    // (open circuits, series-only networks seen from H, ...).
    try {
        return from_y(to_y(m, from, z0, f), to, z0, f);
    } catch (const SingularError&) {
    }
    try {
        return from_z(to_z(m, from, z0, f), to, z0, f);
    } catch (const SingularError&) {
        if (from == Rep::S && to == Rep::ABCD) return s_to_abcd(m, z0, f);
        if (from == Rep::ABCD && to == Rep::S) return abcd_to_s(m, z0, f);
        throw;
    }
}

TwoPort convert(const TwoPort& net, Rep target) {
    net.validate();
    TwoPort out;
    out.freqs = net.freqs;
    out.rep = target;
    out.z0 = net.z0;
    out.mats.reserve(net.size());
    for (std::size_t i = 0; i < net.size(); ++i)
        out.mats.push_back(convert_matrix(net.mats[i], net.rep, target, net.z0, net.freqs[i]));
    return out;
}

namespace {

std::string describe_grid(const TwoPort& n) {
    if (n.freqs.empty()) return "[empty]";
    return fmt::format("[{} points, {} Hz .. {} Hz]", n.freqs.size(), n.freqs.front(), n.freqs.back());
}

}  // namespace

void require_same_grid(const TwoPort& a, std::string_view a_name, const TwoPort& b, std::string_view b_name) {
    if (a.freqs != b.freqs)
        throw DomainError(fmt::format("frequency grids differ: {} grid {} vs {} grid {}", a_name, describe_grid(a),
                                      b_name, describe_grid(b)));
}

TwoPort deembed_open_short(const DeembedSet& set) {
    set.dut.validate();
    set.open.validate();
    require_same_grid(set.dut, "dut", set.open, "open");
    if (set.short_) {
        set.short_->validate();
        require_same_grid(set.dut, "dut", *set.short_, "short");
    }
    const TwoPort y_dut = convert(set.dut, Rep::Y);
    const TwoPort y_open = convert(set.open, Rep::Y);
    std::optional<TwoPort> y_short;
    if (set.short_) y_short = convert(*set.short_, Rep::Y);

    TwoPort out;
    out.freqs = set.dut.freqs;
    out.rep = Rep::S;
    out.z0 = set.dut.z0;
    out.mats.reserve(out.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double f = out.freqs[i];
        const Mat2 y1 = y_dut.mats[i] - y_open.mats[i];
        if (!y_short) {
            out.mats.push_back(convert_matrix(y1, Rep::Y, Rep::S, out.z0, f));
            continue;
        }
        const Mat2 z_leads = convert_matrix(y_short->mats[i] - y_open.mats[i], Rep::Y, Rep::Z, out.z0, f);
        const Mat2 z2 = convert_matrix(y1, Rep::Y, Rep::Z, out.z0, f) - z_leads;
        out.mats.push_back(convert_matrix(z2, Rep::Z, Rep::S, out.z0, f));
    }
    return out;
}

TwoPort embed_open_short(const TwoPort& intrinsic, const std::vector<Mat2>& y_pad, const std::vector<Mat2>& z_series) {
    intrinsic.validate();
    if (y_pad.size() != intrinsic.size() || z_series.size() != intrinsic.size())
        throw DomainError("embed_open_short: fixture length differs from the network grid");
    TwoPort out;
    out.freqs = intrinsic.freqs;
    out.rep = Rep::S;
    out.z0 = intrinsic.z0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double f = out.freqs[i];
        const Mat2 z = convert_matrix(intrinsic.mats[i], intrinsic.rep, Rep::Z, intrinsic.z0, f) + z_series[i];
        const Mat2 y = convert_matrix(z, Rep::Z, Rep::Y, out.z0, f) + y_pad[i];
        out.mats.push_back(convert_matrix(y, Rep::Y, Rep::S, out.z0, f));
    }
    return out;
}

}  // namespace cryo

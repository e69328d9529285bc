#include "cryocmos/touchstone.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fmt/format.h>
#include <numbers>
#include <sstream>
#include <vector>

#include "cryocmos/error.hpp"

namespace cryo {
namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
        std::size_t j = i;
        while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
        if (j > i) out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

double parse_number(std::string_view tok, int line) {
    double v = 0.0;
    const auto* first = tok.data();
    if (!tok.empty() && tok.front() == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size())
        throw ParseError("invalid number '" + std::string(tok) + "'", line);
    return v;
}

double unit_scale(FreqUnit u) {
    switch (u) {
        case FreqUnit::Hz: return 1.0;
        case FreqUnit::kHz: return 1e3;
        case FreqUnit::MHz: return 1e6;
        case FreqUnit::GHz: return 1e9;
    }
    return 1.0;
}

std::string_view unit_name(FreqUnit u) {
    switch (u) {
        case FreqUnit::Hz: return "Hz";
        case FreqUnit::kHz: return "kHz";
        case FreqUnit::MHz: return "MHz";
        case FreqUnit::GHz: return "GHz";
    }
    return "Hz";
}

struct Options {
    double scale = 1e9;
    DataFormat format = DataFormat::MA;
    double z0 = 50.0;
};

Options parse_option_line(std::string_view body, int line) {
    const auto tok = split_ws(body);
    if (tok.size() != 5)
        throw ParseError("malformed option line (expected '# <freq-unit> S <RI|MA|DB> R <z0>')", line);
    Options o;
    const std::string unit = lower(tok[0]);
    if (unit == "hz")
        o.scale = 1.0;
    else if (unit == "khz")
        o.scale = 1e3;
    else if (unit == "mhz")
        o.scale = 1e6;
    else if (unit == "ghz")
        o.scale = 1e9;
    else
        throw ParseError("malformed option line: unknown frequency unit '" + std::string(tok[0]) + "'", line);
    if (lower(tok[1]) != "s")
        throw ParseError("malformed option line: only S-parameter files are supported, got '" + std::string(tok[1]) +
                             "'",
                         line);
    const std::string fmt = lower(tok[2]);
    if (fmt == "ri")
        o.format = DataFormat::RI;
    else if (fmt == "ma")
        o.format = DataFormat::MA;
    else if (fmt == "db")
        o.format = DataFormat::DB;
    else
        throw ParseError("malformed option line: unknown data format '" + std::string(tok[2]) + "'", line);
    if (lower(tok[3]) != "r") throw ParseError("malformed option line: expected 'R <z0>'", line);
    o.z0 = parse_number(tok[4], line);
    if (!(o.z0 > 0.0)) throw ParseError("malformed option line: reference impedance must be positive", line);
    return o;
}

Complex decode(double a, double b, DataFormat f) {
    constexpr double deg = std::numbers::pi / 180.0;
    switch (f) {
        case DataFormat::RI: return {a, b};
        case DataFormat::MA: return std::polar(a, b * deg);
        case DataFormat::DB: return std::polar(std::pow(10.0, a / 20.0), b * deg);
    }
    return {a, b};
}

}  // namespace

TwoPort read_touchstone(std::string_view text) {
    TwoPort net;
    net.rep = Rep::S;
    Options opt;
    bool have_options = false;
    bool have_data = false;

    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t eol = text.find('\n', pos);
        std::string_view raw = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;

        if (const auto bang = raw.find('!'); bang != std::string_view::npos) raw = raw.substr(0, bang);
        const auto tok = split_ws(raw);
        if (tok.empty()) continue;

        if (tok.front().front() == '#') {
            // Later option lines are ignored, as in Touchstone v1.
            if (have_options) continue;
            if (have_data) throw ParseError("option line after data", line_no);
            const auto hash = raw.find('#');
            opt = parse_option_line(raw.substr(hash + 1), line_no);
            have_options = true;
            continue;
        }
        if (tok.front().front() == '[') throw ParseError("Touchstone v2 keywords are not supported", line_no);

        if (tok.size() == 5) throw ParseError("noise-parameter data is not supported", line_no);
        if (tok.size() != 9)
            throw ParseError("expected 9 columns for 2-port data, got " + std::to_string(tok.size()), line_no);

        double v[9];
        for (int i = 0; i < 9; ++i) v[i] = parse_number(tok[i], line_no);
        const double f = v[0] * opt.scale;
        if (!std::isfinite(f) || f < 0.0) throw ParseError("invalid frequency", line_no);
        if (!net.freqs.empty() && !(f > net.freqs.back()))
            throw ParseError("frequencies must be strictly ascending", line_no);

        Mat2 s;
        s(0, 0) = decode(v[1], v[2], opt.format);
        s(1, 0) = decode(v[3], v[4], opt.format);
        s(0, 1) = decode(v[5], v[6], opt.format);
        s(1, 1) = decode(v[7], v[8], opt.format);
        net.freqs.push_back(f);
        net.mats.push_back(s);
        have_data = true;
    }
    if (!have_data) throw ParseError("no network data found", 0);
    net.z0 = opt.z0;
    return net;
}

std::string write_touchstone(const TwoPort& net, FreqUnit unit, std::string_view comment) {
    const TwoPort s = net.rep == Rep::S ? net : convert(net, Rep::S);
    s.validate();
    std::string out;
    if (!comment.empty()) {
        std::istringstream lines{std::string(comment)};
        for (std::string l; std::getline(lines, l);) out += fmt::format("! {}\n", l);
    }
    out += fmt::format("# {} S RI R {}\n", unit_name(unit), s.z0);
    const double scale = unit_scale(unit);
    for (std::size_t i = 0; i < s.size(); ++i) {
        const Mat2& m = s.mats[i];
        out += fmt::format("{} {} {} {} {} {} {} {} {}\n", s.freqs[i] / scale, m(0, 0).real(), m(0, 0).imag(),
                           m(1, 0).real(), m(1, 0).imag(), m(0, 1).real(), m(0, 1).imag(), m(1, 1).real(),
                           m(1, 1).imag());
    }
    return out;
}

}  // namespace cryo

#include "cryocmos/iv_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fmt/format.h>
#include <map>
#include <sstream>
#include <tuple>

#include "cryocmos/error.hpp"

namespace cryo {

void IvCurve::validate() const {
    geom.validate();
    if (v_gs.size() != i_d.size()) throw DomainError(fmt::format("curve {}: v_gs and i_d lengths differ", device_id));
    if (v_gs.empty()) throw DomainError(fmt::format("curve {}: no points", device_id));
    if (!(temperature >= 4.0 && temperature <= 400.0))
        throw DomainError(fmt::format("curve {}: temperature {} K outside [4, 400]", device_id, temperature));
    for (std::size_t i = 0; i < v_gs.size(); ++i) {
        if (!std::isfinite(v_gs[i]) || !std::isfinite(i_d[i]))
            throw DomainError(fmt::format("curve {}: non-finite value at point {}", device_id, i));
        if (i_d[i] < 0.0)
            throw DomainError(fmt::format("curve {}: current has the wrong sign for {} at V_GS = {}", device_id,
                                          to_string(geom.polarity), v_gs[i]));
        if (i > 0 && !(v_gs[i] > v_gs[i - 1]))
            throw DomainError(fmt::format("curve {}: V_GS not strictly ascending at point {}", device_id, i));
    }
}

std::vector<double> IvDataset::temperatures() const {
    std::vector<double> t;
    for (const auto& c : curves)
        if (std::none_of(t.begin(), t.end(), [&](double x) { return std::abs(x - c.temperature) < 1e-6; }))
            t.push_back(c.temperature);
    std::sort(t.begin(), t.end());
    return t;
}

std::vector<IvCurve> IvDataset::at_temperature(double t) const {
    std::vector<IvCurve> out;
    for (const auto& c : curves)
        if (std::abs(c.temperature - t) < 1e-6) out.push_back(c);
    return out;
}

void IvDataset::validate() const {
    for (const auto& c : curves) c.validate();
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

double number(std::string_view tok, int line, std::string_view column) {
    double v = 0.0;
    const char* first = tok.data();
    if (!tok.empty() && tok.front() == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, tok.data() + tok.size(), v);
    if (tok.empty() || ec != std::errc() || ptr != tok.data() + tok.size())
        throw ParseError(fmt::format("column {}: invalid number '{}'", column, tok), line);
    return v;
}

constexpr std::string_view kColumns[] = {"device_id", "die_id", "polarity", "w_um", "l_um",
                                         "nf",        "temp_k", "vds_v",    "vgs_v", "id_a"};

}  // namespace

IvDataset read_iv_csv(std::string_view text) {
    IvDataset data;
    using Key = std::tuple<std::string, std::string, int, double, double, int, double, double>;
    std::map<Key, std::size_t> index;
    std::vector<int> col;  // column position per kColumns entry
    int line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto eol = text.find('\n', pos);
        const std::string_view line = trim(text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos));
        pos = eol == std::string_view::npos ? text.size() : eol + 1;
        ++line_no;
        if (line.empty() || line.front() == '#') continue;
        const auto f = split_csv(line);
        if (col.empty()) {
            col.assign(std::size(kColumns), -1);
            for (std::size_t i = 0; i < f.size(); ++i) {
                const auto it = std::find(std::begin(kColumns), std::end(kColumns), f[i]);
                if (it == std::end(kColumns)) throw ParseError(fmt::format("unknown column '{}'", f[i]), line_no);
                col[static_cast<std::size_t>(it - std::begin(kColumns))] = static_cast<int>(i);
            }
            for (std::size_t k = 0; k < col.size(); ++k)
                if (col[k] < 0) throw ParseError(fmt::format("missing column '{}'", kColumns[k]), line_no);
            continue;
        }
        if (f.size() != col.size())
            throw ParseError(fmt::format("expected {} fields, got {}", col.size(), f.size()), line_no);
        const auto field = [&](int k) { return f[static_cast<std::size_t>(col[static_cast<std::size_t>(k)])]; };

        Polarity p{};
        try {
            p = parse_polarity(field(2));
        } catch (const Error& e) {
            throw ParseError(e.what(), line_no);
        }
        const double w = number(field(3), line_no, "w_um");
        const double l = number(field(4), line_no, "l_um");
        const double nf_d = number(field(5), line_no, "nf");
        if (nf_d < 1 || nf_d != std::floor(nf_d)) throw ParseError("column nf: must be a positive integer", line_no);
        const int nf = static_cast<int>(nf_d);
        const double t = number(field(6), line_no, "temp_k");
        const double sign = p == Polarity::nmos ? 1.0 : -1.0;
        const double vds = sign * number(field(7), line_no, "vds_v");
        const double vgs = sign * number(field(8), line_no, "vgs_v");
        const double id = sign * number(field(9), line_no, "id_a");

        Key key{std::string(field(0)), std::string(field(1)), static_cast<int>(p), w, l, nf, t, vds};
        auto [it, inserted] = index.try_emplace(key, data.curves.size());
        if (inserted) {
            IvCurve c;
            c.device_id = std::get<0>(key);
            c.die_id = std::get<1>(key);
            try {
                c.geom = DeviceGeometry::from_fingers(p, w / nf, nf, l);
                c.geom.w_um = w;
                c.geom.validate();
            } catch (const Error& e) {
                throw ParseError(e.what(), line_no);
            }
            c.temperature = t;
            c.v_ds = vds;
            data.curves.push_back(std::move(c));
        }
        IvCurve& c = data.curves[it->second];
        if (!c.v_gs.empty() && !(vgs > c.v_gs.back()))
            throw ParseError(fmt::format("curve {}: V_GS must ascend in magnitude within a curve", c.device_id), line_no);
        if (!std::isfinite(id) || id < 0.0)
            throw ParseError(fmt::format("curve {}: drain current must be finite with the polarity's sign", c.device_id),
                             line_no);
        c.v_gs.push_back(vgs);
        c.i_d.push_back(id);
    }
    if (col.empty()) throw ParseError("missing header row", line_no);
    if (data.curves.empty()) throw ParseError("no data rows", line_no);
    data.validate();
    return data;
}

std::string write_iv_csv(const IvDataset& data, std::string_view preamble) {
    std::string out;
    if (!preamble.empty()) {
        std::istringstream lines{std::string(preamble)};
        for (std::string l; std::getline(lines, l);) out += fmt::format("# {}\n", l);
    }
    out += "device_id,die_id,polarity,w_um,l_um,nf,temp_k,vds_v,vgs_v,id_a\n";
    for (const auto& c : data.curves) {
        const double s = c.geom.polarity == Polarity::nmos ? 1.0 : -1.0;
        for (std::size_t i = 0; i < c.v_gs.size(); ++i)
            out += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", c.device_id, c.die_id, to_string(c.geom.polarity),
                               c.geom.w_um, c.geom.l_um, c.geom.n_fingers, c.temperature, s * c.v_ds + 0.0,
                               s * c.v_gs[i] + 0.0, s * c.i_d[i] + 0.0);
    }
    return out;
}

}  // namespace cryo

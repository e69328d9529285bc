#include "output.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "cryocmos/error.hpp"

namespace cryo::cli {

namespace fs = std::filesystem;

std::uint64_t fnv1a(std::string_view data, std::uint64_t h) {
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot open '{}'", p.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError(fmt::format("error reading '{}'", p.string()));
    return ss.str();
}

void RunConfig::set_file(const std::string& key, const fs::path& p) {
    values_[key] = fmt::format("fnv1a:{:016x}", fnv1a(read_file(p)));
}

std::string RunConfig::hash() const {
    std::string canon = fmt::format("{} {}\n{}\n", kToolName, CRYO_VERSION, command_);
    for (const auto& [k, v] : values_) canon += fmt::format("{}={}\n", k, v);
    return fmt::format("{:016x}", fnv1a(canon));
}

std::string provenance_line(const RunConfig& cfg) {
    return fmt::format("# {} {} config_hash={}\n", kToolName, CRYO_VERSION, cfg.hash());
}

OutputDir::OutputDir(fs::path target, bool overwrite) : target_(std::move(target)), overwrite_(overwrite) {
    if (target_.empty()) throw IoError("output directory must not be empty");
    if (fs::exists(target_)) {
        if (!fs::is_directory(target_)) throw IoError(fmt::format("'{}' exists and is not a directory", target_.string()));
        if (!fs::is_empty(target_) && !overwrite_)
            throw IoError(fmt::format("output directory '{}' is not empty (use --overwrite)", target_.string()));
    }
    const fs::path parent = fs::absolute(target_).parent_path();
    std::error_code ec;
    fs::create_directories(parent, ec);
    if (ec) throw IoError(fmt::format("cannot create '{}': {}", parent.string(), ec.message()));
    stage_ = parent / fmt::format(".{}.staging-{}", fs::absolute(target_).filename().string(), ::getpid());
    fs::remove_all(stage_, ec);
    if (!fs::create_directory(stage_, ec) || ec)
        throw IoError(fmt::format("cannot create staging directory '{}'", stage_.string()));
}

OutputDir::~OutputDir() {
    if (!committed_) {
        std::error_code ec;
        fs::remove_all(stage_, ec);
    }
}

void OutputDir::write(const std::string& relative, std::string_view content) {
    const fs::path p = stage_ / relative;
    std::error_code ec;
    fs::create_directories(p.parent_path(), ec);
    std::ofstream out(p, std::ios::binary);
    if (!out) throw IoError(fmt::format("cannot write '{}'", relative));
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError(fmt::format("error writing '{}'", relative));
}

void OutputDir::commit() {
    std::error_code ec;
    if (fs::exists(target_)) {
        fs::remove_all(target_, ec);
        if (ec) throw IoError(fmt::format("cannot replace '{}': {}", target_.string(), ec.message()));
    }
    fs::rename(stage_, target_, ec);
    if (ec) throw IoError(fmt::format("cannot move output into '{}': {}", target_.string(), ec.message()));
    committed_ = true;
}

Csv::Csv(const RunConfig& cfg, std::vector<std::string> header, std::vector<std::string> extra_comments)
    : columns_(header.size()) {
    text_ = provenance_line(cfg);
    for (const auto& c : extra_comments) text_ += "# " + c + "\n";
    append(header);
}

void Csv::append(const std::vector<std::string>& fields) {
    if (fields.size() != columns_) throw std::logic_error("csv: column count mismatch");
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) text_ += ',';
        text_ += fields[i];
    }
    text_ += '\n';
}

std::string field(double v) { return fmt::format("{}", v + 0.0); }
std::string field(int v) { return std::to_string(v); }
std::string field(std::size_t v) { return std::to_string(v); }
std::string field(bool v) { return v ? "true" : "false"; }
std::string field(const std::string& v) { return v; }
std::string field(std::string_view v) { return std::string(v); }
std::string field(const char* v) { return v; }

std::string svg_plot(const std::string& title, const std::string& x_label, const std::string& y_label,
                     const std::vector<Series>& series) {
    constexpr double W = 640, H = 400, L = 70, R = 20, T = 40, B = 50;
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            y0 = std::min(y0, s.y[i]);
            y1 = std::max(y1, s.y[i]);
        }
    if (!(x1 > x0)) x1 = x0 + 1.0;
    if (!(y1 > y0)) y1 = y0 + 1.0;
    const auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
    const auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};

    std::string out = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" font-family=\"sans-serif\" font-size=\"12\">\n",
        W, H);
    out += fmt::format("<text x=\"{}\" y=\"20\" text-anchor=\"middle\">{}</text>\n", W / 2, title);
    out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n", L, T,
                       W - L - R, H - T - B);
    out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", (L + W - R) / 2, H - 10, x_label);
    out += fmt::format("<text x=\"15\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 15 {})\">{}</text>\n",
                       (T + H - B) / 2, (T + H - B) / 2, y_label);
    out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"start\">{:.4g}</text>\n", L, H - B + 15, x0);
    out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{:.4g}</text>\n", W - R, H - B + 15, x1);
    out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{:.4g}</text>\n", L - 4, H - B, y0);
    out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{:.4g}</text>\n", L - 4, T + 10, y1);
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        std::string pts;
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            pts += fmt::format("{:.2f},{:.2f} ", px(s.x[i]), py(s.y[i]));
        }
        const char* c = colors[k % std::size(colors)];
        out += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n", c, pts);
        out += fmt::format("<text x=\"{}\" y=\"{}\" fill=\"{}\">{}</text>\n", L + 10, T + 15 + 15 * k, c, s.name);
    }
    out += "</svg>\n";
    return out;
}

std::vector<double> parse_grid(const std::string& text) {
    const auto num = [&](const std::string& s) {
        std::size_t pos = 0;
        double v = 0;
        try {
            v = std::stod(s, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos == 0 || pos != s.size()) throw DomainError(fmt::format("invalid number '{}' in grid '{}'", s, text));
        return v;
    };
    std::vector<double> out;
    if (text.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::stringstream ss(text);
        for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
        if (parts.size() != 3) throw DomainError(fmt::format("grid '{}': expected start:stop:step", text));
        const double a = num(parts[0]), b = num(parts[1]), h = num(parts[2]);
        if (!(h > 0.0) || b < a) throw DomainError(fmt::format("grid '{}': need stop >= start and step > 0", text));
        const long n = std::lround(std::floor((b - a) / h + 1e-9));
        // Rounded to 12 digits so 0:1:0.1 gives 0.3, not 0.30000000000000004.
        for (long i = 0; i <= n; ++i) out.push_back(std::stod(fmt::format("{:.12g}", a + static_cast<double>(i) * h)));
        return out;
    }
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ',');) out.push_back(num(p));
    if (out.empty()) throw DomainError("empty grid");
    return out;
}

}  // namespace cryo::cli

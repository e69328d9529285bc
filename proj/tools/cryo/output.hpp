#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace cryo::cli {

inline constexpr std::string_view kToolName = "cryo-cmos";

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::uint64_t fnv1a(std::string_view data, std::uint64_t h = 0xcbf29ce484222325ULL);

std::string read_file(const std::filesystem::path& p);

/// Canonical description of one invocation. Input files enter by content,
/// so the hash does not depend on where they live.
class RunConfig {
public:
    explicit RunConfig(std::string command) : command_(std::move(command)) {}
    void set(const std::string& key, const std::string& value) { values_[key] = value; }
    void set_file(const std::string& key, const std::filesystem::path& p);
    std::string hash() const;
    const std::string& command() const { return command_; }

private:
    std::string command_;
    std::map<std::string, std::string> values_;
};

/// Output directory staged next to its final location and renamed into
/// place on commit.
class OutputDir {
public:
    OutputDir(std::filesystem::path target, bool overwrite);
    ~OutputDir();
    OutputDir(const OutputDir&) = delete;
    OutputDir& operator=(const OutputDir&) = delete;

    void write(const std::string& relative, std::string_view content);
    void commit();

private:
    std::filesystem::path target_;
    std::filesystem::path stage_;
    bool overwrite_;
    bool committed_ = false;
};

/// CSV text with the provenance comment and a header row.
class Csv {
public:
    Csv(const RunConfig& cfg, std::vector<std::string> header, std::vector<std::string> extra_comments = {});
    template <typename... Ts>
    void row(const Ts&... fields);
    const std::string& str() const { return text_; }

private:
    void append(const std::vector<std::string>& fields);
    std::string text_;
    std::size_t columns_;
};

std::string field(double v);
std::string field(int v);
std::string field(std::size_t v);
std::string field(bool v);
std::string field(const std::string& v);
std::string field(std::string_view v);
std::string field(const char* v);

template <typename... Ts>
void Csv::row(const Ts&... fields) {
    append({field(fields)...});
}

std::string provenance_line(const RunConfig& cfg);

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

/// Minimal line chart.
std::string svg_plot(const std::string& title, const std::string& x_label, const std::string& y_label,
                     const std::vector<Series>& series);

/// "a,b,c" or "start:stop:step".
std::vector<double> parse_grid(const std::string& text);

}  // namespace cryo::cli

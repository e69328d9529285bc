#pragma once

#include <CLI11.hpp>
#include <functional>
#include <initializer_list>
#include <string>
#include <vector>

#include "cryocmos/device.hpp"
#include "output.hpp"

namespace cryo::cli {

/// Exit status of a finished command.
enum Exit : int { kOk = 0, kInputError = 1, kFlagged = 2 };

using Action = std::function<int()>;

void add_gen_demo(CLI::App& app, Action& run);
void add_fit_dc(CLI::App& app, Action& run);
void add_mc(CLI::App& app, Action& run);
void add_rf(CLI::App& app, Action& run);
void add_circuit(CLI::App& app, Action& run);

/// Config of a parsed subcommand: every option except --out, with the
/// listed options hashed by file content.
RunConfig make_config(const CLI::App& sub, const std::string& command, std::initializer_list<std::string> file_options);

/// Output options shared by every subcommand.
struct OutputOptions {
    std::string dir;
    bool overwrite = false;
};
void add_output_options(CLI::App* sub, OutputOptions& o);

/// "10" for 10 K, "77.5" for 77.5 K.
std::string temp_tag(double t);

ModelCard load_card(const std::string& path, Polarity expected);

}  // namespace cryo::cli

#include <cstdio>
#include <fmt/format.h>

#include "commands.hpp"
#include "cryocmos/card_file.hpp"
#include "cryocmos/error.hpp"

namespace cryo::cli {

RunConfig make_config(const CLI::App& sub, const std::string& command, std::initializer_list<std::string> file_options) {
    RunConfig cfg(command);
    for (const CLI::Option* opt : sub.get_options()) {
        const std::string name = opt->get_name();
        if (name == "--out" || name == "--help" || name == "--overwrite" || name.empty()) continue;
        const bool is_file = std::find(file_options.begin(), file_options.end(), name) != file_options.end();
        const auto& results = opt->results();
        if (is_file) {
            for (std::size_t i = 0; i < results.size(); ++i) cfg.set_file(fmt::format("{}[{}]", name, i), results[i]);
            continue;
        }
        std::string value;
        if (opt->count() > 0) {
            for (std::size_t i = 0; i < results.size(); ++i) value += (i ? "," : "") + results[i];
        } else {
            value = "default:" + opt->get_default_str();
        }
        cfg.set(name, value);
    }
    return cfg;
}

void add_output_options(CLI::App* sub, OutputOptions& o) {
    sub->add_option("--out", o.dir, "Output directory")->required();
    sub->add_flag("--overwrite", o.overwrite, "Replace a non-empty output directory");
}

std::string temp_tag(double t) { return fmt::format("{}", t); }

ModelCard load_card(const std::string& path, Polarity expected) {
    ModelCardFile f = parse_card_file(read_file(path));
    if (f.card.polarity != expected)
        throw SchemaError(fmt::format("'{}' is a {} card, expected {}", path, to_string(f.card.polarity),
                                      to_string(expected)));
    return f.card;
}

}  // namespace cryo::cli

int main(int argc, char** argv) {
    using namespace cryo::cli;
    CLI::App app{"Cryogenic CMOS modeling and circuit toolkit", "cryo"};
    app.set_version_flag("--version", std::string(kToolName) + " " + CRYO_VERSION);
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default();

    Action run;
    add_gen_demo(app, run);
    add_fit_dc(app, run);
    add_mc(app, run);
    add_rf(app, run);
    add_circuit(app, run);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kInputError;
    }
    if (!run) return kInputError;
    try {
        return run();
    } catch (const cryo::ParseError& e) {
        fmt::print(stderr, "parse error: {}\n", e.what());
    } catch (const cryo::SchemaError& e) {
        fmt::print(stderr, "schema error: {}\n", e.what());
    } catch (const IoError& e) {
        fmt::print(stderr, "i/o error: {}\n", e.what());
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
    }
    return kInputError;
}

#include <cmath>
#include <fmt/format.h>
#include <numbers>

#include "commands.hpp"
#include "cryocmos/error.hpp"
#include "cryocmos/rf_extract.hpp"
#include "cryocmos/touchstone.hpp"

namespace cryo::cli {

namespace {

struct RfOptions {
    OutputOptions out;
    std::string in;
    std::string open;
    std::string short_;
    std::string to = "Y";
    double r_window = 1.0;
    double c_window = 1.0;
    bool no_refine = false;
};

TwoPort load_s2p(const std::string& path) {
    try {
        return read_touchstone(read_file(path));
    } catch (const ParseError& e) {
        throw ParseError(fmt::format("{}: {}", path, e.what()), 0);
    }
}

/// Input network, de-embedded when dummies are given.
TwoPort load_input(const RfOptions& o) {
    TwoPort net = load_s2p(o.in);
    if (!o.short_.empty() && o.open.empty()) throw DomainError("--short needs --open");
    if (o.open.empty()) return net;
    DeembedSet set{net, load_s2p(o.open), {}};
    if (!o.short_.empty()) set.short_ = load_s2p(o.short_);
    return deembed_open_short(set);
}

std::string s2p_comment(const RunConfig& cfg, const std::string& what) {
    return fmt::format("{} {} config_hash={}\n{}", kToolName, CRYO_VERSION, cfg.hash(), what);
}

int rf_convert(const CLI::App& sub, const RfOptions& o) {
    const RunConfig cfg = make_config(sub, "rf convert", {"--in", "--open", "--short"});
    const TwoPort net = load_input(o);
    const Rep rep = parse_rep(o.to);
    const TwoPort c = convert(net, rep);
    Csv csv(cfg, {"f_hz", "rep", "m11_re", "m11_im", "m12_re", "m12_im", "m21_re", "m21_im", "m22_re", "m22_im"});
    for (std::size_t i = 0; i < c.size(); ++i) {
        const Mat2& m = c.mats[i];
        csv.row(c.freqs[i], to_string(rep), m(0, 0).real(), m(0, 0).imag(), m(0, 1).real(), m(0, 1).imag(),
                m(1, 0).real(), m(1, 0).imag(), m(1, 1).real(), m(1, 1).imag());
    }
    OutputDir dir(o.out.dir, o.out.overwrite);
    dir.write("converted.csv", csv.str());
    dir.commit();
    return kOk;
}

int rf_deembed(const CLI::App& sub, const RfOptions& o) {
    const RunConfig cfg = make_config(sub, "rf deembed", {"--in", "--open", "--short"});
    if (o.open.empty()) throw DomainError("deembed needs --open");
    const TwoPort net = load_input(o);
    OutputDir dir(o.out.dir, o.out.overwrite);
    dir.write("deembedded.s2p", write_touchstone(net, FreqUnit::Hz,
                                                 s2p_comment(cfg, o.short_.empty() ? "open de-embedded" : "open-short de-embedded")));
    dir.commit();
    return kOk;
}

int rf_coldfet(const CLI::App& sub, const RfOptions& o) {
    const RunConfig cfg = make_config(sub, "rf coldfet", {"--in", "--open", "--short"});
    const TwoPort net = load_input(o);
    ColdFetOptions opt;
    opt.r_window_decades = o.r_window;
    opt.c_window_decades = o.c_window;
    opt.refine = !o.no_refine;
    const ColdFetResult r = coldfet_extract(net, opt);
    const SmallSignalSet& e = r.elements;
    const SmallSignalSet& c = r.closed_form;

    Csv el(cfg, {"element", "closed_form", "extracted", "unit"});
    el.row("r_g", c.r_g, e.r_g, "ohm");
    el.row("r_d", c.r_d, e.r_d, "ohm");
    el.row("r_s", c.r_s, e.r_s, "ohm");
    el.row("c_gg", c.c_gg, e.c_gg, "F");
    el.row("c_gs", c.c_gs(), e.c_gs(), "F");
    el.row("c_gd", c.c_gd, e.c_gd, "F");
    el.row("c_gb", c.c_gb, e.c_gb, "F");
    el.row("g_ds", c.g_ds, e.g_ds, "S");
    Csv fit(cfg, {"quantity", "value"});
    fit.row("channel_term_ohm", r.channel_term);
    fit.row("fit_residual", r.fit_residual);
    fit.row("iterations", r.iterations);
    fit.row("flagged", e.flagged);
    std::string diag = provenance_line(cfg);
    for (const auto& d : e.diagnostics) diag += d + "\n";

    OutputDir dir(o.out.dir, o.out.overwrite);
    dir.write("coldfet.csv", el.str());
    dir.write("coldfet_fit.csv", fit.str());
    dir.write("diagnostics.txt", diag);
    dir.commit();
    fmt::print("Rg {:.4g} ohm  Rd {:.4g} ohm  Rs {:.4g} ohm  Cgs {:.4g} fF  Cgd {:.4g} fF  Cgb {:.4g} fF\n", e.r_g, e.r_d,
               e.r_s, e.c_gs() * 1e15, e.c_gd * 1e15, e.c_gb * 1e15);
    for (const auto& d : e.diagnostics) fmt::print(stderr, "warning: {}\n", d);
    return e.flagged ? kFlagged : kOk;
}

int rf_ft(const CLI::App& sub, const RfOptions& o, bool svg) {
    const RunConfig cfg = make_config(sub, "rf ft", {"--in", "--open", "--short"});
    const TwoPort net = load_input(o);
    const FtResult r = ft_extract(net);
    const TwoPort h = convert(net, Rep::H);
    Csv ft(cfg, {"f_t_hz", "method", "anchor_hz"});
    ft.row(r.f_t, to_string(r.method), net.freqs.at(r.anchor_index));
    Csv curve(cfg, {"f_hz", "h21_db"});
    Series s{"|H21|", {}, {}};
    for (std::size_t i = 0; i < h.size(); ++i) {
        const double db = 20.0 * std::log10(std::abs(h.mats[i](1, 0)));
        curve.row(h.freqs[i], db);
        s.x.push_back(std::log10(h.freqs[i]));
        s.y.push_back(db);
    }
    OutputDir dir(o.out.dir, o.out.overwrite);
    dir.write("ft.csv", ft.str());
    dir.write("h21.csv", curve.str());
    if (svg) dir.write("h21.svg", svg_plot("Current gain", "log10(f / Hz)", "|H21| (dB)", {s}));
    dir.commit();
    fmt::print("f_T = {:.6g} Hz ({})\n", r.f_t, to_string(r.method));
    return kOk;
}

}  // namespace

void add_rf(CLI::App& app, Action& run) {
    CLI::App* rf = app.add_subcommand("rf", "Two-port conversion, de-embedding and extraction");
    rf->require_subcommand(1);

    const auto common = [](CLI::App* sub, RfOptions& o, bool need_open) {
        add_output_options(sub, o.out);
        sub->add_option("--in,--dut", o.in, "Touchstone .s2p input")->required()->check(CLI::ExistingFile);
        auto* open = sub->add_option("--open", o.open, "Open dummy .s2p")->check(CLI::ExistingFile);
        if (need_open) open->required();
        sub->add_option("--short", o.short_, "Short dummy .s2p")->check(CLI::ExistingFile);
    };

    {
        auto o = std::make_shared<RfOptions>();
        CLI::App* sub = rf->add_subcommand("convert", "Convert S-parameters to another representation");
        common(sub, *o, false);
        sub->add_option("--to", o->to, "S, Y, Z, H or ABCD");
        sub->callback([sub, o, &run] { run = [sub, o] { return rf_convert(*sub, *o); }; });
    }
    {
        auto o = std::make_shared<RfOptions>();
        CLI::App* sub = rf->add_subcommand("deembed", "Open or open-short de-embedding");
        common(sub, *o, true);
        sub->callback([sub, o, &run] { run = [sub, o] { return rf_deembed(*sub, *o); }; });
    }
    {
        auto o = std::make_shared<RfOptions>();
        CLI::App* sub = rf->add_subcommand("coldfet", "Cold-FET parasitic extraction");
        common(sub, *o, false);
        sub->add_option("--r-window", o->r_window, "Decades at the top of the grid used for resistances");
        sub->add_option("--c-window", o->c_window, "Decades at the bottom of the grid used for capacitances");
        sub->add_flag("--no-refine", o->no_refine, "Report the closed-form estimates only");
        sub->callback([sub, o, &run] { run = [sub, o] { return rf_coldfet(*sub, *o); }; });
    }
    {
        auto o = std::make_shared<RfOptions>();
        auto svg = std::make_shared<bool>(false);
        CLI::App* sub = rf->add_subcommand("ft", "Unity current-gain frequency");
        common(sub, *o, false);
        sub->add_flag("--svg", *svg, "Also write an SVG plot");
        sub->callback([sub, o, svg, &run] { run = [sub, o, svg] { return rf_ft(*sub, *o, *svg); }; });
    }
}

}  // namespace cryo::cli

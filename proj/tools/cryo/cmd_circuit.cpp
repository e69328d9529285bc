#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <numbers>

#include "commands.hpp"
#include "cryocmos/demo.hpp"
#include "cryocmos/error.hpp"

namespace cryo::cli {

namespace {

struct CircuitOptions {
    OutputOptions out;
    std::string card_n;
    std::string card_p;
    std::vector<double> temps = {298.0};
    bool svg = false;

    // ro
    int stages = 3;
    double c_load = 1e-15;
    double dt = 0.0;
    int max_cycles = 20;
    // snm
    std::string mode = "both";
    // pn-opt
    std::string ratios = "0.5:3:0.25";
    // iddq
    std::size_t cells = 4096;
    // comparator / adc
    std::string vcm = "0:1.1:0.1";
    double dv = 0.01;
    std::string preamp = "off";
    double preamp_gain = 4.0;
    double preamp_cm = 0.9;
    double clock = 1e-9;
    double c_cmp = 10e-15;
    std::size_t samples = 256;
    double f_sample = 1e9;
    double f_signal = 0.0;
    bool ideal = false;
};

struct Cards {
    ModelCard n;
    ModelCard p;
};

Cards load_cards(const CircuitOptions& o) {
    Cards c{device::demo_card(Polarity::nmos), device::demo_card(Polarity::pmos)};
    if (!o.card_n.empty()) c.n = load_card(o.card_n, Polarity::nmos);
    if (!o.card_p.empty()) c.p = load_card(o.card_p, Polarity::pmos);
    return c;
}

RunConfig config(const CLI::App& sub, const std::string& name) {
    return make_config(sub, "circuit " + name, {"--card-n", "--card-p"});
}

int run_ro(const CLI::App& sub, const CircuitOptions& o) {
    const RunConfig cfg = config(sub, "ro");
    const Cards cards = load_cards(o);
    OutputDir dir(o.out.dir, o.out.overwrite);
    Csv table(cfg, {"temp_k", "stages", "frequency_hz", "f_estimate_hz", "stage_delay_s", "t_d_estimate_s", "dt_s", "periods"});
    std::vector<Series> waves;
    for (double t : o.temps) {
        RoSpec spec;
        spec.n_stages = o.stages;
        spec.c_load = o.c_load;
        spec.inverter = demo::inverter(t, cards.n, cards.p);
        spec.dt = o.dt;
        spec.max_cycles = o.max_cycles;
        const RoResult r = ring_oscillator(spec);
        table.row(t, o.stages, r.frequency, r.f_estimate, r.stage_delay, r.t_d_estimate, r.dt, r.periods);
        Csv wave(cfg, {"t_s", "v_node0_v"});
        for (std::size_t i = 0; i < r.time.size(); ++i) wave.row(r.time[i], r.v_node0[i]);
        dir.write(fmt::format("ro_wave_{}K.csv", temp_tag(t)), wave.str());
        Series s{fmt::format("{} K", t), {}, {}};
        for (std::size_t i = 0; i < r.time.size(); ++i) {
            s.x.push_back(r.time[i] * 1e9);
            s.y.push_back(r.v_node0[i]);
        }
        waves.push_back(std::move(s));
        fmt::print("{:>6} K  {} stages  f = {:.6g} Hz  (estimate {:.6g} Hz)\n", t, o.stages, r.frequency, r.f_estimate);
    }
    dir.write("ro.csv", table.str());
    if (o.svg) dir.write("ro.svg", svg_plot("Ring oscillator node 0", "t (ns)", "V (V)", waves));
    dir.commit();
    return kOk;
}

int run_snm(const CLI::App& sub, const CircuitOptions& o) {
    const RunConfig cfg = config(sub, "snm");
    const Cards cards = load_cards(o);
    std::vector<SramMode> modes;
    if (o.mode == "hold" || o.mode == "both") modes.push_back(SramMode::hold);
    if (o.mode == "read" || o.mode == "both") modes.push_back(SramMode::read);
    OutputDir dir(o.out.dir, o.out.overwrite);
    Csv table(cfg, {"temp_k", "mode", "snm_v", "lobe_upper_v", "lobe_lower_v", "flagged"});
    bool flagged = false;
    for (double t : o.temps) {
        const SixTSpec cell = demo::sram_cell(t, cards.n, cards.p);
        for (SramMode m : modes) {
            const SnmResult r = sram_snm(cell, m);
            flagged = flagged || r.flagged;
            table.row(t, to_string(m), r.snm, r.lobe_upper, r.lobe_lower, r.flagged);
            Csv bf(cfg, {"curve", "q_v", "qb_v"});
            Series left{"Q = f(QB)", {}, {}}, right{"QB = f(Q)", {}, {}};
            for (const auto& p : r.curve_left) {
                bf.row("left", p.v_out, p.v_in);
                left.x.push_back(p.v_out);
                left.y.push_back(p.v_in);
            }
            for (const auto& p : r.curve_right) {
                bf.row("right", p.v_in, p.v_out);
                right.x.push_back(p.v_in);
                right.y.push_back(p.v_out);
            }
            const std::string stem = fmt::format("butterfly_{}K_{}", temp_tag(t), to_string(m));
            dir.write(stem + ".csv", bf.str());
            if (o.svg)
                dir.write(stem + ".svg", svg_plot(fmt::format("Butterfly, {} K, {}", t, to_string(m)), "Q (V)", "QB (V)",
                                                  {left, right}));
            fmt::print("{:>6} K  {:<4}  SNM = {:.4f} V{}\n", t, to_string(m), r.snm, r.flagged ? "  FLAGGED" : "");
            if (r.flagged) fmt::print(stderr, "warning: {}\n", r.note);
        }
    }
    dir.write("snm.csv", table.str());
    dir.commit();
    return flagged ? kFlagged : kOk;
}

int run_pn_opt(const CLI::App& sub, const CircuitOptions& o) {
    const RunConfig cfg = config(sub, "pn-opt");
    const Cards cards = load_cards(o);
    const std::vector<double> ratios = parse_grid(o.ratios);
    OutputDir dir(o.out.dir, o.out.overwrite);
    Csv table(cfg, {"temp_k", "ratio", "hold_snm_v", "write_margin_v", "objective_v", "best"});
    std::vector<Series> curves;
    for (double t : o.temps) {
        const PnOptResult r = optimize_pn_ratio(demo::sram_cell(t, cards.n, cards.p), ratios, t);
        Series s{fmt::format("{} K", t), {}, {}};
        for (const auto& row : r.table) {
            table.row(t, row.ratio, row.hold_snm, row.write_margin, row.objective, row.ratio == r.best_ratio);
            s.x.push_back(row.ratio);
            s.y.push_back(row.objective);
        }
        curves.push_back(std::move(s));
        fmt::print("{:>6} K  best pull-up/pull-down ratio {}\n", t, r.best_ratio);
    }
    dir.write("pn_opt.csv", table.str());
    if (o.svg) dir.write("pn_opt.svg", svg_plot("min(hold SNM, write margin)", "W_pu / W_pd", "V", curves));
    dir.commit();
    return kOk;
}

int run_iddq(const CLI::App& sub, const CircuitOptions& o) {
    const RunConfig cfg = config(sub, "iddq");
    const Cards cards = load_cards(o);
    Csv table(cfg, {"temp_k", "cells", "iddq_a"});
    Series s{"IDDQ", {}, {}};
    for (double t : o.temps) {
        const double i = iddq(demo::sram_cell(t, cards.n, cards.p), o.cells, t);
        table.row(t, o.cells, i);
        s.x.push_back(t);
        s.y.push_back(std::log10(i));
        fmt::print("{:>6} K  IDDQ = {:.4g} A\n", t, i);
    }
    OutputDir dir(o.out.dir, o.out.overwrite);
    dir.write("iddq.csv", table.str());
    if (o.svg) dir.write("iddq.svg", svg_plot("Array leakage", "T (K)", "log10(IDDQ / A)", {s}));
    dir.commit();
    return kOk;
}

ComparatorSpec comparator_spec(const CircuitOptions& o, const Cards& cards, double t) {
    ComparatorSpec c = demo::comparator(t, o.preamp == "on", cards.n);
    if (c.preamp) *c.preamp = Preamp{o.preamp_gain, o.preamp_cm};
    c.clock_period = o.clock;
    c.c_load = o.c_cmp;
    return c;
}

int run_comparator(const CLI::App& sub, const CircuitOptions& o) {
    const RunConfig cfg = config(sub, "comparator");
    const Cards cards = load_cards(o);
    const std::vector<double> vcm = parse_grid(o.vcm);
    Csv table(cfg, {"temp_k", "v_cm_v", "preamp", "pass", "margin_v", "discharge_s", "v_eff_v"});
    for (double t : o.temps) {
        const ComparatorSpec spec = comparator_spec(o, cards, t);
        std::size_t failing = 0;
        for (double v : vcm) {
            const ComparatorResult r = comparator_margin(spec, v, o.dv);
            failing += r.pass ? 0 : 1;
            table.row(t, v, o.preamp, r.pass, r.margin, r.discharge_time, r.v_eff);
        }
        fmt::print("{:>6} K  preamp {}  {} of {} common-mode points fail\n", t, o.preamp, failing, vcm.size());
    }
    OutputDir dir(o.out.dir, o.out.overwrite);
    dir.write("comparator.csv", table.str());
    dir.commit();
    return kOk;
}

int run_adc(const CLI::App& sub, const CircuitOptions& o) {
    const RunConfig cfg = config(sub, "adc");
    const Cards cards = load_cards(o);
    // Default input: 7 cycles across the record, full scale.
    const double f_sig = o.f_signal > 0.0 ? o.f_signal : o.f_sample * 7.0 / static_cast<double>(o.samples);
    OutputDir dir(o.out.dir, o.out.overwrite);
    Csv summary(cfg, {"temp_k", "preamp", "samples", "flagged_samples", "code_mismatches", "failing_levels"});
    bool flagged = false;
    std::vector<Series> plots;
    for (double t : o.temps) {
        const ComparatorSpec spec = comparator_spec(o, cards, t);
        const std::vector<double> input = adc_sine(spec.vdd, f_sig, o.f_sample, o.samples);
        const AdcResult r = flash_adc(spec, o.f_sample, input, o.ideal);
        Csv codes(cfg, {"index", "v_in_v", "code", "ideal_code", "flagged"});
        std::size_t mismatches = 0;
        Series s{fmt::format("{} K code", t), {}, {}}, ideal{"ideal", {}, {}};
        for (std::size_t i = 0; i < r.samples.size(); ++i) {
            const AdcSample& a = r.samples[i];
            codes.row(i, a.v_in, a.code, a.ideal_code, a.flagged);
            mismatches += a.code != a.ideal_code ? 1 : 0;
            s.x.push_back(static_cast<double>(i));
            s.y.push_back(a.code);
            ideal.x.push_back(static_cast<double>(i));
            ideal.y.push_back(a.ideal_code);
        }
        const auto failing = static_cast<std::size_t>(std::count(r.comparator_pass.begin(), r.comparator_pass.end(), false));
        summary.row(t, o.ideal ? "ideal" : o.preamp, o.samples, r.flagged_count, mismatches, failing);
        flagged = flagged || r.flagged_count > 0;
        dir.write(fmt::format("adc_{}K.csv", temp_tag(t)), codes.str());
        if (o.svg) dir.write(fmt::format("adc_{}K.svg", temp_tag(t)), svg_plot(fmt::format("Flash ADC, {} K", t), "sample", "code", {ideal, s}));
        fmt::print("{:>6} K  preamp {}  {} code mismatches, {} flagged samples, {} failing comparators\n", t, o.preamp,
                   mismatches, r.flagged_count, failing);
    }
    dir.write("adc_summary.csv", summary.str());
    dir.commit();
    return flagged ? kFlagged : kOk;
}

using Runner = int (*)(const CLI::App&, const CircuitOptions&);

CLI::App* add_leaf(CLI::App* parent, const std::string& name, const std::string& help, Action& run, Runner fn,
                   std::shared_ptr<CircuitOptions> o) {
    CLI::App* sub = parent->add_subcommand(name, help);
    add_output_options(sub, o->out);
    sub->add_option("--card-n", o->card_n, "NMOS model-card JSON (demo card by default)")->check(CLI::ExistingFile);
    sub->add_option("--card-p", o->card_p, "PMOS model-card JSON (demo card by default)")->check(CLI::ExistingFile);
    sub->add_option("--temps,--temp", o->temps, "Temperatures (K)")->delimiter(',');
    sub->add_flag("--svg", o->svg, "Also write SVG plots");
    sub->callback([sub, o, fn, &run] { run = [sub, o, fn] { return fn(*sub, *o); }; });
    return sub;
}

}  // namespace

void add_circuit(CLI::App& app, Action& run) {
    CLI::App* c = app.add_subcommand("circuit", "Circuit evaluations on model cards");
    c->require_subcommand(1);

    auto ro = std::make_shared<CircuitOptions>();
    CLI::App* s = add_leaf(c, "ro", "Ring-oscillator frequency", run, run_ro, ro);
    s->add_option("--stages", ro->stages, "Number of inverter stages (odd)");
    s->add_option("--c-load", ro->c_load, "Load capacitance per node (F)");
    s->add_option("--dt", ro->dt, "Time step (s), 0 for automatic");
    s->add_option("--max-cycles", ro->max_cycles, "Simulated length in estimated periods");

    auto snm = std::make_shared<CircuitOptions>();
    s = add_leaf(c, "snm", "6T SRAM static noise margin", run, run_snm, snm);
    s->add_option("--mode", snm->mode, "hold, read or both")->check(CLI::IsMember({"hold", "read", "both"}));

    auto pn = std::make_shared<CircuitOptions>();
    s = add_leaf(c, "pn-opt", "Pull-up/pull-down width ratio sweep", run, run_pn_opt, pn);
    s->add_option("--ratios", pn->ratios, "Ratio grid, 'a,b,c' or 'start:stop:step'");

    auto iq = std::make_shared<CircuitOptions>();
    s = add_leaf(c, "iddq", "SRAM array standby current", run, run_iddq, iq);
    s->add_option("--cells", iq->cells, "Number of cells")->check(CLI::PositiveNumber);

    const auto comparator_opts = [](CLI::App* sub, CircuitOptions& o) {
        sub->add_option("--preamp", o.preamp, "on or off")->check(CLI::IsMember({"on", "off"}));
        sub->add_option("--preamp-gain", o.preamp_gain, "Pre-amplifier gain");
        sub->add_option("--preamp-cm", o.preamp_cm, "Pre-amplifier output common mode (V)");
        sub->add_option("--c-cmp", o.c_cmp, "Comparator output load (F)");
    };
    auto cmp = std::make_shared<CircuitOptions>();
    s = add_leaf(c, "comparator", "StrongARM comparator margin sweep", run, run_comparator, cmp);
    comparator_opts(s, *cmp);
    s->add_option("--vcm", cmp->vcm, "Common-mode grid (V)");
    s->add_option("--dv", cmp->dv, "Differential input (V)");
    s->add_option("--clock", cmp->clock, "Clock period (s)");

    auto adc = std::make_shared<CircuitOptions>();
    s = add_leaf(c, "adc", "5-bit flash ADC on a full-scale sine", run, run_adc, adc);
    comparator_opts(s, *adc);
    s->add_option("--samples", adc->samples, "Number of samples")->check(CLI::PositiveNumber);
    s->add_option("--f-sample", adc->f_sample, "Sample rate (Hz)")->check(CLI::PositiveNumber);
    s->add_option("--f-signal", adc->f_signal, "Signal frequency (Hz), 0 for 7 cycles per record");
    s->add_flag("--ideal", adc->ideal, "Force every comparator to pass");
}

}  // namespace cryo::cli

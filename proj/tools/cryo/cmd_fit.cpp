#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <map>

#include "commands.hpp"
#include "cryocmos/card_file.hpp"
#include "cryocmos/error.hpp"
#include "cryocmos/fitdc.hpp"

namespace cryo::cli {

namespace {

struct FitDcOptions {
    OutputOptions out;
    std::vector<std::string> iv;
    double w_um = 0.0;
    double l_um = 0.0;
    int nf = 0;
    std::vector<double> temps;
    std::string polarity = "both";
};

bool same(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(std::abs(a), std::abs(b)); }

struct PolarityRun {
    Polarity pol;
    std::map<double, std::vector<IvCurve>> by_temp;
    std::map<double, FitReport> fits;
    std::map<double, bool> stage1_defaults;
    std::optional<TemperatureLawFit> laws;
};

FitReport fit_one(const std::vector<IvCurve>& curves, const ModelCard& defaults, bool& from_defaults,
                  std::vector<std::string>& warnings) {
    const Stage1Result s1 = extract_stage1(curves, defaults);
    from_defaults = s1.from_defaults;
    warnings.insert(warnings.end(), s1.warnings.begin(), s1.warnings.end());
    return fit_card(curves, s1.card);
}

int fit_dc(const CLI::App& sub, const FitDcOptions& o) {
    const RunConfig cfg = make_config(sub, "fit-dc", {"--iv"});
    if (!(o.w_um > 0.0) || !(o.l_um > 0.0)) throw DomainError("--w-um and --l-um must be positive");

    IvDataset data;
    for (const auto& path : o.iv) {
        IvDataset d;
        try {
            d = read_iv_csv(read_file(path));
        } catch (const ParseError& e) {
            throw ParseError(fmt::format("{}: {}", path, e.what()), 0);
        }
        for (auto& c : d.curves) data.curves.push_back(std::move(c));
    }

    std::vector<Polarity> pols;
    if (o.polarity == "both" || o.polarity == "nmos") pols.push_back(Polarity::nmos);
    if (o.polarity == "both" || o.polarity == "pmos") pols.push_back(Polarity::pmos);

    std::vector<PolarityRun> runs;
    for (Polarity pol : pols) {
        PolarityRun r{pol, {}, {}, {}, {}};
        for (const auto& c : data.curves) {
            if (c.geom.polarity != pol || !same(c.geom.w_um, o.w_um) || !same(c.geom.l_um, o.l_um)) continue;
            if (o.nf > 0 && c.geom.n_fingers != o.nf) continue;
            r.by_temp[c.temperature].push_back(c);
        }
        if (r.by_temp.empty()) {
            if (o.polarity != "both")
                throw DomainError(fmt::format("no {} curves with W = {} um, L = {} um", to_string(pol), o.w_um, o.l_um));
            continue;
        }
        if (!o.temps.empty()) {
            std::map<double, std::vector<IvCurve>> chosen;
            for (double t : o.temps) {
                auto it = std::find_if(r.by_temp.begin(), r.by_temp.end(),
                                       [&](const auto& kv) { return std::abs(kv.first - t) <= 1e-6; });
                if (it == r.by_temp.end())
                    throw DomainError(fmt::format("no {} data at requested temperature {} K", to_string(pol), t));
                chosen[it->first] = it->second;
            }
            r.by_temp = std::move(chosen);
        }
        runs.push_back(std::move(r));
    }
    if (runs.empty()) throw DomainError(fmt::format("no curves with W = {} um, L = {} um", o.w_um, o.l_um));

    std::vector<std::string> warnings;
    bool flagged = false;
    for (auto& r : runs) {
        ModelCard defaults;
        defaults.polarity = r.pol;
        std::map<double, ModelCard> cards;
        for (const auto& [t, curves] : r.by_temp) {
            bool from_defaults = false;
            r.fits[t] = fit_one(curves, defaults, from_defaults, warnings);
            r.stage1_defaults[t] = from_defaults;
            cards[t] = r.fits[t].card;
        }
        if (cards.size() >= 3) {
            // Second pass: refit every temperature with the shared thermal laws.
            r.laws = fit_temperature_laws(cards);
            for (const auto& [t, curves] : r.by_temp) {
                FitReport second = fit_card(curves, r.laws->card);
                if (second.pooled_rms_percent <= r.fits[t].pooled_rms_percent || r.fits[t].flagged) r.fits[t] = second;
            }
            for (const auto& w : r.laws->warnings) warnings.push_back(fmt::format("{}: {}", to_string(r.pol), w));
        }
        for (const auto& [t, f] : r.fits) {
            flagged = flagged || f.flagged || !f.converged || r.stage1_defaults[t];
            for (const auto& w : f.warnings) warnings.push_back(fmt::format("{} {} K: {}", to_string(r.pol), t, w));
        }
    }

    OutputDir dir(o.out.dir, o.out.overwrite);
    Csv report(cfg, {"polarity", "temp_k", "card", "device_id", "vds_v", "rms_percent"});
    Csv summary(cfg, {"polarity", "temp_k", "pooled_rms_percent", "unified_rms_percent", "iterations", "final_loss",
                      "converged", "flagged", "stage1_defaults"});
    for (const auto& r : runs) {
        for (const auto& [t, f] : r.fits) {
            for (const auto& c : f.per_curve) report.row(to_string(r.pol), t, "per_temperature", c.device_id, c.v_ds, c.rms_percent);
            report.row(to_string(r.pol), t, "per_temperature", "pooled", "", f.pooled_rms_percent);
            double unified = f.pooled_rms_percent;
            if (r.laws) {
                const auto& curves = r.by_temp.at(t);
                for (const auto& c : curves)
                    report.row(to_string(r.pol), t, "unified", c.device_id, c.v_ds, curve_rms(r.laws->card, c));
                unified = pooled_rms(r.laws->card, curves);
                report.row(to_string(r.pol), t, "unified", "pooled", "", unified);
            }
            summary.row(to_string(r.pol), t, f.pooled_rms_percent, unified, f.iterations, f.final_loss, f.converged,
                        f.flagged, r.stage1_defaults.at(t));

            ModelCardFile per_t;
            per_t.card = f.card;
            per_t.provenance = fmt::format("fit-dc {} K; {} {} config_hash={}", t, kToolName, CRYO_VERSION, cfg.hash());
            per_t.fits.push_back(FitRecord::from_report(f));
            dir.write(fmt::format("card_{}_{}K.json", to_string(r.pol), temp_tag(t)), to_json(per_t));
        }
        if (r.laws) {
            ModelCardFile unified;
            unified.card = r.laws->card;
            unified.provenance = fmt::format("fit-dc temperature laws; {} {} config_hash={}", kToolName, CRYO_VERSION, cfg.hash());
            for (const auto& [t, f] : r.fits) unified.fits.push_back(FitRecord::from_report(f));
            dir.write(fmt::format("card_{}.json", to_string(r.pol)), to_json(unified));

            Csv laws(cfg, {"polarity", "temp_k", "vth_residual_mv", "mu_residual_rel", "ss_residual_mv"});
            for (const auto& [t, v] : r.laws->vth_residual_mv)
                laws.row(to_string(r.pol), t, v, r.laws->mu_residual_rel.at(t), r.laws->ss_residual_mv.at(t));
            dir.write(fmt::format("laws_{}.csv", to_string(r.pol)), laws.str());
        }
    }
    dir.write("fit_report.csv", report.str());
    dir.write("fit_summary.csv", summary.str());
    std::string warn_text = provenance_line(cfg);
    for (const auto& w : warnings) warn_text += w + "\n";
    dir.write("warnings.txt", warn_text);
    dir.commit();

    for (const auto& r : runs)
        for (const auto& [t, f] : r.fits)
            fmt::print("{} {:>5} K  rms {:.3f} %{}\n", to_string(r.pol), t, f.pooled_rms_percent,
                       f.flagged || !f.converged || r.stage1_defaults.at(t) ? "  FLAGGED" : "");
    for (const auto& w : warnings) fmt::print(stderr, "warning: {}\n", w);
    return flagged ? kFlagged : kOk;
}

}  // namespace

void add_fit_dc(CLI::App& app, Action& run) {
    auto o = std::make_shared<FitDcOptions>();
    CLI::App* sub = app.add_subcommand("fit-dc", "Fit model cards to I-V transfer curves");
    add_output_options(sub, o->out);
    sub->add_option("--iv", o->iv, "I-V CSV files")->required()->check(CLI::ExistingFile);
    sub->add_option("--w-um", o->w_um, "Total gate width of the fitted device (um)")->required();
    sub->add_option("--l-um", o->l_um, "Gate length of the fitted device (um)")->required();
    sub->add_option("--nf", o->nf, "Finger count filter (0 = any)");
    sub->add_option("--temps", o->temps, "Temperatures to fit (K); all present by default")->delimiter(',');
    sub->add_option("--polarity", o->polarity, "nmos, pmos or both")->check(CLI::IsMember({"nmos", "pmos", "both"}));
    sub->callback([sub, o, &run] { run = [sub, o] { return fit_dc(*sub, *o); }; });
}

}  // namespace cryo::cli

#include <fmt/format.h>

#include "commands.hpp"
#include "cryocmos/card_file.hpp"
#include "cryocmos/demo.hpp"
#include "cryocmos/touchstone.hpp"

namespace cryo::cli {

namespace {

struct GenDemoOptions {
    OutputOptions out;
    std::uint64_t seed = 1;
};

int gen_demo(const CLI::App& sub, const GenDemoOptions& o) {
    const RunConfig cfg = make_config(sub, "gen-demo", {});
    const std::string label = fmt::format("synthetic demo data (seed {}), not measured silicon", o.seed);
    const std::string preamble = fmt::format("{} {} config_hash={}\n{}", kToolName, CRYO_VERSION, cfg.hash(), label);
    OutputDir dir(o.out.dir, o.out.overwrite);

    const IvDataset n = demo::golden_iv(Polarity::nmos, o.seed);
    const IvDataset p = demo::golden_iv(Polarity::pmos, o.seed);
    for (double t : demo::kTemperatures) {
        IvDataset both;
        for (const IvDataset* d : {&n, &p})
            for (auto& c : d->at_temperature(t)) both.curves.push_back(std::move(c));
        dir.write(fmt::format("iv_{}K.csv", temp_tag(t)), write_iv_csv(both, preamble));
    }

    Csv pairs(cfg, {"pair_id", "polarity", "w_um", "l_um", "nf", "temp_k", "dvth_mv"}, {label});
    for (const auto& r : demo::matched_pairs(o.seed))
        pairs.row(r.pair_id, to_string(r.geom.polarity), r.geom.w_um, r.geom.l_um, r.geom.n_fingers, r.temperature,
                  r.dvth_mv);
    dir.write("pairs.csv", pairs.str());

    Csv dies(cfg, {"die_id", "polarity", "vth_10k_v", "vth_298k_v"}, {label});
    for (const auto& r : demo::die_vth(o.seed)) dies.row(r.die_id, to_string(r.polarity), r.vth_10k, r.vth_298k);
    dir.write("dies.csv", dies.str());

    const demo::RfSet rf = demo::rf_set();
    const auto s2p = [&](const char* name, const TwoPort& net, const char* what) {
        dir.write(fmt::format("rf/{}.s2p", name), write_touchstone(net, FreqUnit::Hz, preamble + "\n" + what));
    };
    s2p("coldfet", rf.coldfet, "intrinsic cold-FET device, VGS = 1.1 V, VDS = 0 V");
    s2p("ft", rf.ft, "intrinsic device, gm = 1 mS, Cgs + Cgd = 159.155 fF");
    s2p("dut", rf.dut, "cold-FET device inside the pad fixture");
    s2p("open", rf.open, "open dummy");
    s2p("short", rf.short_, "short dummy");

    for (Polarity pol : {Polarity::nmos, Polarity::pmos}) {
        ModelCardFile f = demo_card_file(pol);
        f.provenance = fmt::format("{}; {} {} config_hash={}", f.provenance, kToolName, CRYO_VERSION, cfg.hash());
        dir.write(fmt::format("cards/card_{}.json", to_string(pol)), to_json(f));
    }
    dir.commit();
    fmt::print("wrote synthetic demo dataset to {}\n", o.out.dir);
    return kOk;
}

}  // namespace

void add_gen_demo(CLI::App& app, Action& run) {
    auto o = std::make_shared<GenDemoOptions>();
    CLI::App* sub = app.add_subcommand("gen-demo", "Write the synthetic demo dataset");
    add_output_options(sub, o->out);
    sub->add_option("--seed", o->seed, "Master seed");
    sub->callback([sub, o, &run] { run = [sub, o] { return gen_demo(*sub, *o); }; });
}

}  // namespace cryo::cli

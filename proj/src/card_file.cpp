#include "cryocmos/card_file.hpp"

#include <fmt/format.h>
#include <json.hpp>
#include <set>

#include "cryocmos/error.hpp"

namespace cryo {

using Json = nlohmann::ordered_json;

FitRecord FitRecord::from_report(const FitReport& r) {
    FitRecord f;
    f.temperature = r.temperature;
    f.pooled_rms_percent = r.pooled_rms_percent;
    f.per_curve = r.per_curve;
    f.iterations = r.iterations;
    f.final_loss = r.final_loss;
    f.converged = r.converged;
    f.flagged = r.flagged;
    f.warnings = r.warnings;
    return f;
}

MismatchModel ModelCardFile::mismatch_model() const {
    MismatchModel m;
    if (mismatch_l_split_um) m.l_split_um = *mismatch_l_split_um;
    m.table(card.polarity) = mismatch;
    return m;
}

VariationModel ModelCardFile::variation_model() const {
    VariationModel v;
    v.table(card.polarity) = variation;
    return v;
}

namespace {

Json core_json(const ModelCard& c) {
    return Json{{"vth0_298", c.vth0_298},   {"kappa_vth", c.kappa_vth}, {"t_sat", c.t_sat},
                {"mu0_298", c.mu0_298},     {"gamma_mu", c.gamma_mu},   {"n_ideality", c.n_ideality},
                {"cox_areal", c.cox_areal}, {"dibl_eta", c.dibl_eta},   {"theta_mob", c.theta_mob},
                {"r_source", c.r_source},   {"r_drain", c.r_drain}};
}

void check_keys(const Json& j, std::string_view where, std::initializer_list<std::string_view> allowed,
                std::initializer_list<std::string_view> required) {
    if (!j.is_object()) throw SchemaError(fmt::format("{}: expected an object", where));
    for (const auto& [k, v] : j.items())
        if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
            throw SchemaError(fmt::format("{}: unknown field '{}'", where, k));
    for (auto k : required)
        if (!j.contains(std::string(k))) throw SchemaError(fmt::format("{}: missing field '{}'", where, k));
}

double num(const Json& j, std::string_view where, const char* key) {
    const Json& v = j.at(key);
    if (!v.is_number()) throw SchemaError(fmt::format("{}.{}: expected a number", where, key));
    return v.get<double>();
}

std::string str(const Json& j, std::string_view where, const char* key) {
    const Json& v = j.at(key);
    if (!v.is_string()) throw SchemaError(fmt::format("{}.{}: expected a string", where, key));
    return v.get<std::string>();
}

bool boolean(const Json& j, std::string_view where, const char* key) {
    const Json& v = j.at(key);
    if (!v.is_boolean()) throw SchemaError(fmt::format("{}.{}: expected true or false", where, key));
    return v.get<bool>();
}

const Json& array(const Json& j, std::string_view where, const char* key) {
    const Json& v = j.at(key);
    if (!v.is_array()) throw SchemaError(fmt::format("{}.{}: expected an array", where, key));
    return v;
}

std::array<double, 4> coeffs(const Json& j, std::string_view where, const char* key) {
    const Json& a = array(j, where, key);
    if (a.size() != 4) throw SchemaError(fmt::format("{}.{}: expected 4 coefficients", where, key));
    std::array<double, 4> out{};
    for (std::size_t i = 0; i < 4; ++i) {
        if (!a[i].is_number()) throw SchemaError(fmt::format("{}.{}[{}]: expected a number", where, key, i));
        out[i] = a[i].get<double>();
    }
    return out;
}

}  // namespace

std::string to_json(const ModelCardFile& f) {
    Json j;
    j["schema_version"] = ModelCardFile::kSchemaVersion;
    j["polarity"] = std::string(to_string(f.card.polarity));
    j["provenance"] = f.provenance;
    j["core"] = core_json(f.card);
    if (!f.mismatch.empty()) {
        Json m;
        m["l_split_um"] = f.mismatch_l_split_um.value_or(0.1);
        Json rows = Json::array();
        for (const auto& [t, e] : f.mismatch) rows.push_back({{"temp_k", t}, {"a_short", e.a_short}, {"a_long", e.a_long}});
        m["a_vth_mv_um"] = rows;
        j["mismatch"] = m;
    }
    if (!f.variation.empty()) {
        Json rows = Json::array();
        for (const auto& [t, e] : f.variation)
            rows.push_back({{"temp_k", t}, {"b_mv_um", e.b_mv_um}, {"sigma0_mv", e.sigma0_mv}, {"sigma_mu_rel", e.sigma_mu_rel}});
        j["variation"] = Json{{"table", rows}};
    }
    if (f.scaling) {
        j["parasitic_scaling"] = Json{{"basis", "1, wf/nf, 1/(wf*nf), L/(wf*nf)"},
                                      {"r_g", f.scaling->r_g},
                                      {"r_d", f.scaling->r_d},
                                      {"r_s", f.scaling->r_s}};
    }
    if (!f.fits.empty()) {
        Json fits = Json::array();
        for (const auto& r : f.fits) {
            Json curves = Json::array();
            for (const auto& c : r.per_curve)
                curves.push_back({{"device_id", c.device_id}, {"vds_v", c.v_ds}, {"rms_percent", c.rms_percent}});
            fits.push_back({{"temp_k", r.temperature},
                            {"pooled_rms_percent", r.pooled_rms_percent},
                            {"per_curve", curves},
                            {"iterations", r.iterations},
                            {"final_loss", r.final_loss},
                            {"converged", r.converged},
                            {"flagged", r.flagged},
                            {"warnings", r.warnings}});
        }
        j["fits"] = fits;
    }
    return j.dump(2) + "\n";
}

ModelCardFile parse_card_file(std::string_view text) {
    Json j;
    try {
        j = Json::parse(text.begin(), text.end());
    } catch (const Json::parse_error& e) {
        throw ParseError(fmt::format("model card: {}", e.what()), 0);
    }
    check_keys(j, "card", {"schema_version", "polarity", "provenance", "core", "mismatch", "variation", "parasitic_scaling", "fits"},
               {"schema_version", "polarity", "core"});
    const Json& sv = j.at("schema_version");
    if (!sv.is_number_integer()) throw SchemaError("card.schema_version: expected an integer");
    if (sv.get<int>() != ModelCardFile::kSchemaVersion)
        throw SchemaError(fmt::format("card.schema_version {} is not supported (expected {})", sv.get<int>(),
                                      ModelCardFile::kSchemaVersion));
    ModelCardFile f;
    try {
        f.card.polarity = parse_polarity(str(j, "card", "polarity"));
    } catch (const DomainError& e) {
        throw SchemaError(fmt::format("card.polarity: {}", e.what()));
    }
    if (j.contains("provenance")) f.provenance = str(j, "card", "provenance");

    const Json& core = j.at("core");
    check_keys(core, "core",
               {"vth0_298", "kappa_vth", "t_sat", "mu0_298", "gamma_mu", "n_ideality", "cox_areal", "dibl_eta", "theta_mob",
                "r_source", "r_drain"},
               {"vth0_298", "kappa_vth", "t_sat", "mu0_298", "gamma_mu", "n_ideality", "cox_areal", "dibl_eta", "theta_mob",
                "r_source", "r_drain"});
    ModelCard& c = f.card;
    c.vth0_298 = num(core, "core", "vth0_298");
    c.kappa_vth = num(core, "core", "kappa_vth");
    c.t_sat = num(core, "core", "t_sat");
    c.mu0_298 = num(core, "core", "mu0_298");
    c.gamma_mu = num(core, "core", "gamma_mu");
    c.n_ideality = num(core, "core", "n_ideality");
    c.cox_areal = num(core, "core", "cox_areal");
    c.dibl_eta = num(core, "core", "dibl_eta");
    c.theta_mob = num(core, "core", "theta_mob");
    c.r_source = num(core, "core", "r_source");
    c.r_drain = num(core, "core", "r_drain");
    try {
        c.validate();
    } catch (const DomainError& e) {
        throw SchemaError(e.what());
    }

    if (j.contains("mismatch")) {
        const Json& m = j.at("mismatch");
        check_keys(m, "mismatch", {"l_split_um", "a_vth_mv_um"}, {"a_vth_mv_um"});
        if (m.contains("l_split_um")) f.mismatch_l_split_um = num(m, "mismatch", "l_split_um");
        for (const auto& row : array(m, "mismatch", "a_vth_mv_um")) {
            check_keys(row, "mismatch.a_vth_mv_um[]", {"temp_k", "a_short", "a_long"}, {"temp_k", "a_short", "a_long"});
            f.mismatch[num(row, "mismatch", "temp_k")] = {num(row, "mismatch", "a_short"), num(row, "mismatch", "a_long")};
        }
        if (f.mismatch.empty()) throw SchemaError("mismatch: empty table");
        try {
            f.mismatch_model().validate();
        } catch (const DomainError& e) {
            throw SchemaError(e.what());
        }
    }
    if (j.contains("variation")) {
        const Json& v = j.at("variation");
        check_keys(v, "variation", {"table"}, {"table"});
        for (const auto& row : array(v, "variation", "table")) {
            check_keys(row, "variation.table[]", {"temp_k", "b_mv_um", "sigma0_mv", "sigma_mu_rel"},
                       {"temp_k", "b_mv_um", "sigma0_mv", "sigma_mu_rel"});
            f.variation[num(row, "variation", "temp_k")] = {num(row, "variation", "b_mv_um"), num(row, "variation", "sigma0_mv"),
                                                            num(row, "variation", "sigma_mu_rel")};
        }
        if (f.variation.empty()) throw SchemaError("variation: empty table");
        try {
            f.variation_model().validate();
        } catch (const DomainError& e) {
            throw SchemaError(e.what());
        }
    }
    if (j.contains("parasitic_scaling")) {
        const Json& s = j.at("parasitic_scaling");
        check_keys(s, "parasitic_scaling", {"basis", "r_g", "r_d", "r_s"}, {"r_g", "r_d", "r_s"});
        ParasiticScaling ps;
        ps.r_g = coeffs(s, "parasitic_scaling", "r_g");
        ps.r_d = coeffs(s, "parasitic_scaling", "r_d");
        ps.r_s = coeffs(s, "parasitic_scaling", "r_s");
        f.scaling = ps;
    }
    if (j.contains("fits")) {
        for (const auto& r : array(j, "card", "fits")) {
            check_keys(r, "fits[]",
                       {"temp_k", "pooled_rms_percent", "per_curve", "iterations", "final_loss", "converged", "flagged", "warnings"},
                       {"temp_k", "pooled_rms_percent"});
            FitRecord fr;
            fr.temperature = num(r, "fits[]", "temp_k");
            fr.pooled_rms_percent = num(r, "fits[]", "pooled_rms_percent");
            if (r.contains("per_curve"))
                for (const auto& c2 : array(r, "fits[]", "per_curve")) {
                    check_keys(c2, "fits[].per_curve[]", {"device_id", "vds_v", "rms_percent"}, {"device_id", "vds_v", "rms_percent"});
                    fr.per_curve.push_back({str(c2, "per_curve", "device_id"), num(c2, "per_curve", "vds_v"),
                                            num(c2, "per_curve", "rms_percent")});
                }
            if (r.contains("iterations")) fr.iterations = static_cast<int>(num(r, "fits[]", "iterations"));
            if (r.contains("final_loss")) fr.final_loss = num(r, "fits[]", "final_loss");
            if (r.contains("converged")) fr.converged = boolean(r, "fits[]", "converged");
            if (r.contains("flagged")) fr.flagged = boolean(r, "fits[]", "flagged");
            if (r.contains("warnings"))
                for (const auto& w : array(r, "fits[]", "warnings")) {
                    if (!w.is_string()) throw SchemaError("fits[].warnings: expected strings");
                    fr.warnings.push_back(w.get<std::string>());
                }
            f.fits.push_back(std::move(fr));
        }
    }
    return f;
}

ModelCardFile demo_card_file(Polarity p) {
    ModelCardFile f;
    f.card = device::demo_card(p);
    f.provenance = "synthetic demo card";
    const MismatchModel mm = demo_mismatch_model();
    f.mismatch_l_split_um = mm.l_split_um;
    f.mismatch = mm.table(p);
    f.variation = demo_variation_model().table(p);
    return f;
}

}  // namespace cryo

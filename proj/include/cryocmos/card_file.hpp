#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cryocmos/device.hpp"
#include "cryocmos/fitdc.hpp"
#include "cryocmos/rf_extract.hpp"
#include "cryocmos/statvar.hpp"

namespace cryo {

/// Fit summary stored alongside a card.
struct FitRecord {
    double temperature = 298.0;
    double pooled_rms_percent = 0.0;
    std::vector<CurveRms> per_curve;
    int iterations = 0;
    double final_loss = 0.0;
    bool converged = true;
    bool flagged = false;
    std::vector<std::string> warnings;

    static FitRecord from_report(const FitReport& r);
};

/// One device type's model package: core card, optional statistics and
/// parasitic scaling, and the fits it came from. Serialized as JSON.
struct ModelCardFile {
    static constexpr int kSchemaVersion = 1;

    ModelCard card;
    std::string provenance;
    std::optional<double> mismatch_l_split_um;
    std::map<double, PelgromEntry> mismatch;     // empty = absent
    std::map<double, VariationEntry> variation;  // empty = absent
    std::optional<ParasiticScaling> scaling;
    std::vector<FitRecord> fits;

    bool has_statistics() const { return !mismatch.empty() && !variation.empty(); }
    /// Statistics blocks as models for this card's polarity only.
    MismatchModel mismatch_model() const;
    VariationModel variation_model() const;
};

/// Canonical JSON text; shortest round-trip numbers, fixed key order.
std::string to_json(const ModelCardFile& f);

/// Strict reader: unknown fields, wrong types and other schema versions are
/// rejected with SchemaError; malformed JSON raises ParseError.
ModelCardFile parse_card_file(std::string_view text);

/// The shipped demo card of a polarity with its statistics blocks.
ModelCardFile demo_card_file(Polarity p);

}  // namespace cryo

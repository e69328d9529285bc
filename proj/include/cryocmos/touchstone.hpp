#pragma once

#include <string>
#include <string_view>

#include "cryocmos/twoport.hpp"

namespace cryo {

enum class FreqUnit { Hz, kHz, MHz, GHz };
enum class DataFormat { RI, MA, DB };

/// Touchstone v1, 2-port, S-parameters only. Option line grammar:
///   # <Hz|kHz|MHz|GHz> S <RI|MA|DB> R <z0>
/// A missing option line means "# GHz S MA R 50". Data lines carry nine
/// columns in the v1 order f, S11, S21, S12, S22. Noise-parameter blocks
/// are rejected.
TwoPort read_touchstone(std::string_view text);

/// Serializes an S network (converted first if needed) in RI format with
/// shortest round-trip number formatting.
std::string write_touchstone(const TwoPort& net, FreqUnit unit = FreqUnit::GHz, std::string_view comment = {});

}  // namespace cryo

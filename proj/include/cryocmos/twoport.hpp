#pragma once

#include <Eigen/Core>
#include <complex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cryo {

using Complex = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;

enum class Rep { S, Y, Z, H, ABCD };
std::string_view to_string(Rep r);
Rep parse_rep(std::string_view s);

/// Frequency-indexed 2x2 network in one representation. z0 only matters for S.
struct TwoPort {
    std::vector<double> freqs;  // Hz, strictly ascending
    std::vector<Mat2> mats;
    Rep rep = Rep::S;
    double z0 = 50.0;

    std::size_t size() const { return freqs.size(); }
    void validate() const;
};

/// Single-matrix conversion. `f` only labels a SingularError.
Mat2 convert_matrix(const Mat2& m, Rep from, Rep to, double z0, double f = 0.0);

/// Textbook two-port conversion, frequency by frequency.
TwoPort convert(const TwoPort& net, Rep target);

struct DeembedSet {
    TwoPort dut;
    TwoPort open;
    std::optional<TwoPort> short_;
};

/// Open-short de-embedding: Y1 = Y_dut - Y_open, Z = Z(Y1) - Z(Y_short - Y_open).
/// Without a short only the open admittance is removed. Result in S.
TwoPort deembed_open_short(const DeembedSet& set);

/// Inverse of open-short de-embedding: wraps an intrinsic network in series
/// impedance `z_series` (Z-added) and then shunt admittance `y_pad`
/// (Y-added). Used to build test fixtures.
TwoPort embed_open_short(const TwoPort& intrinsic, const std::vector<Mat2>& y_pad, const std::vector<Mat2>& z_series);

/// Throws when two grids differ; the message names both grids.
void require_same_grid(const TwoPort& a, std::string_view a_name, const TwoPort& b, std::string_view b_name);

}  // namespace cryo

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "cryocmos/device.hpp"

namespace cryo {

/// One transfer curve at fixed V_DS. Voltages and currents are stored in the
/// NMOS image: a PMOS curve has its terminal voltages and current negated on
/// load, so v_gs ascends and i_d >= 0 for both polarities.
struct IvCurve {
    std::string device_id;
    std::string die_id;
    DeviceGeometry geom;
    double temperature = 298.0;
    double v_ds = 0.0;
    std::vector<double> v_gs;
    std::vector<double> i_d;

    void validate() const;
};

struct IvDataset {
    std::vector<IvCurve> curves;

    /// Distinct temperatures, ascending.
    std::vector<double> temperatures() const;
    /// Curves within 1e-6 K of `t`.
    std::vector<IvCurve> at_temperature(double t) const;
    void validate() const;
};

/// Columns: device_id, die_id, polarity, w_um, l_um, nf, temp_k, vds_v, vgs_v, id_a.
/// '#' starts a comment line; the first non-comment line is the header.
/// Rows are grouped into curves by (device, die, polarity, geometry, T, V_DS)
/// in order of first appearance.
IvDataset read_iv_csv(std::string_view text);

/// Writes native-sign values (PMOS negated back). `preamble` lines are
/// emitted first, each prefixed with "# ".
std::string write_iv_csv(const IvDataset& data, std::string_view preamble = {});

}  // namespace cryo

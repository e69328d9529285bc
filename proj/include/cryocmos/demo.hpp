#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cryocmos/circuits.hpp"
#include "cryocmos/iv_data.hpp"
#include "cryocmos/rf_extract.hpp"
#include "cryocmos/statvar.hpp"
#include "cryocmos/twoport.hpp"

namespace cryo::demo {

/// Synthetic stand-in data. Every generator is a deterministic function of
/// its arguments.

inline const std::vector<double> kTemperatures = {10.0, 77.0, 150.0, 220.0, 298.0};

/// Multiplicative I-V noise: 1 % at 298 K rising linearly to 5 % at 10 K.
double iv_noise(double t);

struct IvOptions {
    std::vector<double> temperatures = kTemperatures;
    std::vector<double> v_ds = {0.05, 1.1};
    double v_gs_step = 0.01;
    double v_gs_max = 1.1;
    double die_vth_sigma = 0.01;  // V, one offset per die, shared across temperatures
    bool noise = true;
};

/// Transfer curves of one "golden die" for a polarity, from the demo card.
IvDataset golden_iv(Polarity p, std::uint64_t seed, const IvOptions& opt = {});

/// One matched pair measurement.
struct PairRecord {
    std::string pair_id;
    DeviceGeometry geom;
    double temperature = 298.0;
    double dvth_mv = 0.0;
};

/// 14 geometries x 50 pairs at 10 K and 298 K, per polarity.
std::vector<PairRecord> matched_pairs(std::uint64_t seed);

/// The geometries used by matched_pairs.
std::vector<DeviceGeometry> pair_geometries(Polarity p);

struct DieRecord {
    std::string die_id;
    Polarity polarity = Polarity::nmos;
    double vth_10k = 0.0;
    double vth_298k = 0.0;
};

/// 50 dies per polarity; constant-current V_TH at 10 K and 298 K.
std::vector<DieRecord> die_vth(std::uint64_t seed);

/// Frequency grid of the RF demo files: 0.25 GHz to 40 GHz, 160 points.
std::vector<double> rf_grid();

/// Element set of the cold-FET demo device (V_GS = 1.1 V, V_DS = 0 V).
SmallSignalSet coldfet_device();

/// Device with g_m = 1 mS and C_gs + C_gd = 159.155 fF (f_T = 1 GHz).
SmallSignalSet ft_device();

struct RfSet {
    TwoPort coldfet;     // intrinsic cold-FET device, S
    TwoPort ft;          // intrinsic f_T device, S
    TwoPort dut;         // cold-FET device embedded in the pad fixture
    TwoPort open;
    TwoPort short_;
};

RfSet rf_set();

inline constexpr double kVdd = 1.1;

/// Demo inverter: NMOS 0.2/0.04 um, PMOS 0.5/0.04 um.
InverterSpec inverter(double t, const ModelCard& n = device::demo_card(Polarity::nmos),
                      const ModelCard& p = device::demo_card(Polarity::pmos));

/// Demo 6T cell: pull-down 0.3/0.04 um, pull-up 0.3/0.04 um, access 0.45/0.04 um.
SixTSpec sram_cell(double t, const ModelCard& n = device::demo_card(Polarity::nmos),
                   const ModelCard& p = device::demo_card(Polarity::pmos));

/// Demo comparator: NMOS input pair 1/0.04 um, 1 ns clock, 10 fF load.
ComparatorSpec comparator(double t, bool preamp, const ModelCard& n = device::demo_card(Polarity::nmos));

}  // namespace cryo::demo

#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cryocmos/device.hpp"

namespace cryo {

struct DeviceSpec {
    ModelCard card;
    DeviceGeometry geom;
};

/// Current flowing from terminal a to terminal b through the channel, for
/// either polarity. The drain is whichever terminal the carriers leave by.
double channel_current(const DeviceSpec& d, double v_g, double v_a, double v_b, double t);

struct InverterSpec {
    DeviceSpec nmos;
    DeviceSpec pmos;
    double vdd = 1.1;
    double temperature = 298.0;

    void validate() const;
};

/// Optional device from a bitline into the output node (SRAM read/write).
struct AccessLoad {
    DeviceSpec device;
    double v_gate = 0.0;
    double v_line = 0.0;
};

struct VtcPoint {
    double v_in = 0.0;
    double v_out = 0.0;
};

/// Output voltage for one input: KCL at the output node solved by bisection
/// on [0, vdd] to 1 uV.
double inverter_output(const InverterSpec& spec, double v_in, const std::optional<AccessLoad>& access = std::nullopt);

std::vector<VtcPoint> inverter_vtc(const InverterSpec& spec, std::span<const double> grid,
                                   const std::optional<AccessLoad>& access = std::nullopt);

/// Input voltage where v_out = v_in.
double trip_point(const InverterSpec& spec);

struct CellSide {
    DeviceSpec pull_down;
    DeviceSpec pull_up;
    DeviceSpec access;
};

/// Left inverter drives Q from QB; right inverter drives QB from Q.
struct SixTSpec {
    CellSide left;
    CellSide right;
    double vdd = 1.1;
    double temperature = 298.0;

    static SixTSpec symmetric(const DeviceSpec& pd, const DeviceSpec& pu, const DeviceSpec& ax, double vdd, double t);
    SixTSpec swapped() const;
    void validate() const;
};

enum class SramMode { hold, read };
std::string_view to_string(SramMode m);

struct SnmResult {
    double snm = 0.0;         // V, smaller lobe
    double lobe_upper = 0.0;  // V, lobe with Q low / QB high
    double lobe_lower = 0.0;
    bool flagged = false;
    std::string note;
    std::vector<VtcPoint> curve_left;   // Q = f_L(QB), as (QB, Q)
    std::vector<VtcPoint> curve_right;  // QB = f_R(Q), as (Q, QB)
};

/// Largest inscribed square of the butterfly, searched on the 45 degree
/// rotated coordinate with a 1 mV grid refined to 0.1 mV. `f_left` maps QB
/// to Q, `f_right` maps Q to QB.
SnmResult snm_from_vtcs(const std::function<double(double)>& f_left, const std::function<double(double)>& f_right,
                        double vdd);

SnmResult sram_snm(const SixTSpec& spec, SramMode mode);

struct WriteMarginResult {
    double margin = 0.0;  // V, highest bitline level that still flips the cell
    bool flagged = false;
    std::string note;
};

/// Cell holding Q = 1 with BLB at vdd and the word line on; binary search
/// over the BL level for the loss of the Q-high state.
WriteMarginResult write_margin(const SixTSpec& spec);

struct PnRow {
    double ratio = 0.0;
    double hold_snm = 0.0;
    double write_margin = 0.0;
    double objective = 0.0;
};

struct PnOptResult {
    double best_ratio = 0.0;
    std::vector<PnRow> table;
};

/// Pull-up width = ratio * pull-down width; maximizes min(hold SNM, write
/// margin), ties to the smallest ratio.
PnOptResult optimize_pn_ratio(const SixTSpec& tmpl, std::span<const double> ratios, double t);

struct RoSpec {
    int n_stages = 3;
    double c_load = 1e-15;  // F
    InverterSpec inverter;
    double dt = 0.0;        // s, 0 = t_d / 20 from the analytic delay
    int max_cycles = 20;
    int start_node = 0;     // node set to vdd in the alternating start state
    enum class Currents { automatic, exact, table } currents = Currents::automatic;

    void validate() const;
};

struct RoResult {
    double frequency = 0.0;       // Hz
    double f_estimate = 0.0;      // Hz, 1 / (2 n t_d)
    double stage_delay = 0.0;     // s, 1 / (2 n f)
    double t_d_estimate = 0.0;    // s
    double dt = 0.0;
    int periods = 0;
    std::vector<double> time;     // node-0 waveform, decimated
    std::vector<double> v_node0;
};

RoResult ring_oscillator(const RoSpec& spec);

/// Analytic stage delay c vdd / (2 I_eff), averaged over the N and P devices.
double ro_stage_delay_estimate(const RoSpec& spec);

/// Static supply current of n identical cells in the hold state (Q = 1),
/// with both bitlines precharged to vdd and the word line off.
double iddq(const SixTSpec& cell, std::size_t n_cells, double t);

struct Preamp {
    double gain = 1.0;
    double output_cm = 0.9;  // V
};

struct ComparatorSpec {
    DeviceSpec input;
    double clock_period = 1e-9;  // s
    double c_load = 10e-15;      // F
    std::optional<Preamp> preamp;
    double vdd = 1.1;
    double temperature = 298.0;

    void validate() const;
};

struct ComparatorResult {
    bool pass = false;
    double margin = 0.0;          // V, v_eff - |V_TH|
    double discharge_time = 0.0;  // s
    double v_eff = 0.0;
    double dv_eff = 0.0;
};

ComparatorResult comparator_margin(const ComparatorSpec& spec, double v_cm, double dv_in);

struct AdcSample {
    double v_in = 0.0;
    int code = 0;
    int ideal_code = 0;
    bool flagged = false;  // a comparator that should have fired failed
};

struct AdcResult {
    std::vector<AdcSample> samples;
    std::size_t flagged_count = 0;
    std::vector<bool> comparator_pass;  // per reference level k = 1..31
};

/// floor(32 v / vdd) clamped to [0, 31].
int ideal_code(double v, double vdd);

/// 5-bit flash converter: 31 comparators on a uniform ladder, each gated
/// by comparator_margin at its reference level; code = count of ones.
/// `ideal` forces every comparator to pass. The comparator clock is the
/// sample period.
AdcResult flash_adc(const ComparatorSpec& comparator, double f_sample, std::span<const double> input,
                    bool ideal = false);

/// Full-scale sine sampled at f_sample: v = vdd/2 (1 + sin(2 pi f t)).
std::vector<double> adc_sine(double vdd, double f_signal, double f_sample, std::size_t n);

}  // namespace cryo

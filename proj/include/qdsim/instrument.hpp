#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qdsim/core_model.hpp"
#include "qdsim/transport.hpp"

namespace qdsim::instrument {

enum class GateKind : std::uint8_t { Plunger, Barrier, Confinement, Source, Drain };

struct Gate {
    GateKind kind = GateKind::Plunger;
    int index = 0; // 1-based; 0 for the single drain accumulation gate

    auto operator<=>(const Gate&) const = default;
    std::string name() const;
    static Gate parse(const std::string& s);

    static Gate plunger(int i) { return {GateKind::Plunger, i}; }
    static Gate barrier(int i) { return {GateKind::Barrier, i}; }
    static Gate confinement(int i) { return {GateKind::Confinement, i}; }
    static Gate source(int i) { return {GateKind::Source, i}; }
    static Gate drain() { return {GateKind::Drain, 0}; }
};

// Control/readout lines for an n x n array: (n+1) confinement + n plungers
// + (n+1) barriers + n sources + 1 drain = 4n + 3.
int line_budget(int n);

struct RoutingPlan {
    int row_under_test = 0;
    Gate plunger_gate;
    Gate source_barrier;
    Gate drain_barrier;
    std::vector<Gate> extender_gates; // all other plungers/barriers, biased high
    double confinement_bias_v = -0.25;
    double accumulation_bias_v = 1.5;
};

struct InstrumentConfig {
    double confinement_bias_v = -0.25;
    double accumulation_bias_v = 1.5;
    double softness_per_v = 20.0;
    double visibility_gain = 4.0;
    double noise_rel = 0.01;   // sigma_I as a fraction of the open-channel
                               // current at the reference source-drain bias
    std::vector<int> dead_columns; // columns that never turn on
};

RoutingPlan configure_row(const SampleInstance& sample, int row,
                          const InstrumentConfig& cfg = {});

// A sweep axis: either a gate voltage or the source-drain bias.
struct SweepAxis {
    bool is_source_drain = false;
    Gate gate;
    double start_v = 0.0;
    double stop_v = 0.0;
    int points = 0;

    double value(int i) const {
        return start_v + (stop_v - start_v) * static_cast<double>(i) /
                             static_cast<double>(points - 1);
    }
    static SweepAxis of_gate(Gate g, double start, double stop, int points) {
        return {false, g, start, stop, points};
    }
    static SweepAxis source_drain(double start, double stop, int points) {
        return {true, {}, start, stop, points};
    }
};

struct SweepSpec {
    std::vector<SweepAxis> axes;            // 1 or 2; axis 1 is fastest
    std::map<Gate, double> fixed_biases_v;
    double v_sd_v = 0.001;                  // reference bias when not swept
    double temperature_k = 1.4;
    std::vector<int> channels;              // columns, 1-based
    std::vector<std::vector<Gate>> equal_bias_groups;
};

struct MeasurementRecord {
    SweepSpec spec;
    RoutingPlan routing;
    std::string sample_label;
    std::string timestamp; // left empty by deterministic pipelines
    std::uint64_t noise_seed = 0;
    double noise_rel = 0.0;
    std::vector<double> iopen_a;   // per channel, open-channel current at v_sd_v
    std::vector<double> currents_a; // [axis2][axis1][channel], quantized to 9 digits

    int points1() const { return spec.axes[0].points; }
    int points2() const { return spec.axes.size() > 1 ? spec.axes[1].points : 1; }
    int n_channels() const { return static_cast<int>(spec.channels.size()); }
    double current(int i1, int i2, int channel_pos) const {
        return currents_a[(static_cast<std::size_t>(i2) * points1() + i1) * n_channels() +
                          channel_pos];
    }
    int channel_pos(int column) const; // throws if the column was not measured
};

MeasurementRecord run_sweep(const SampleInstance& sample, const RoutingPlan& plan,
                            const SweepSpec& spec, std::uint64_t noise_seed,
                            const InstrumentConfig& cfg = {});

std::string record_to_text(const MeasurementRecord& rec);
MeasurementRecord record_from_text(const std::string& text);
void save_record(const MeasurementRecord& rec, const std::string& path);
MeasurementRecord load_record(const std::string& path);

// Quantization applied to acquired currents (9 significant digits, matching
// the on-disk format so the save/load round trip is bit exact).
double quantize_current(double ampere);

} // namespace qdsim::instrument

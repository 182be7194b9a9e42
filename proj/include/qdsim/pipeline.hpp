#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qdsim/core_model.hpp"
#include "qdsim/extraction.hpp"
#include "qdsim/instrument.hpp"
#include "qdsim/statistics.hpp"

namespace qdsim::pipeline {

struct CampaignSettings {
    double temperature_k = 1.4;
    double v_sd_v = 0.001;
    double noise_rel = 0.01;
    // turn-on sweeps
    double turnon_start_v = 0.0;
    double turnon_stop_v = 1.8;
    int turnon_points = 241;
    // barrier maps, centered on the configured mean barrier threshold
    double barrier_half_span_v = 0.5;
    int barrier_points = 161;
    // diamond scans
    int diamond_points_vp = 101;
    int diamond_points_vsd = 101;
    double diamond_span_periods = 2.5;   // plunger span in expected peak periods
    double diamond_span_tips = 2.0;      // v_sd half-span in expected tip heights
    double diamond_start_offset_periods = 0.05;
    double plunger_margin_v = 0.25;      // map plunger bias above the row max V_t
    instrument::InstrumentConfig instrument;
};

// One row's records plus the per-dot diamond scans.
struct RowPlanFiles {
    std::string turnon_plunger;
    std::string turnon_bs;
    std::string turnon_bd;
    std::string barrier_map;
};

struct DotEntry {
    int row = 0, col = 0;
    stats::BiasMode mode = stats::BiasMode::Failed;
    std::string diamond_file; // empty when not measured
    double v_bs = 0.0, v_bd = 0.0;
};

struct Manifest {
    std::string sample_file;
    std::string label;
    int n = 0;
    std::vector<int> dead_columns;
    std::vector<RowPlanFiles> rows; // index 0 = row 1
    std::vector<std::optional<std::pair<double, double>>> shared_bias; // per row
    std::vector<DotEntry> dots;

    int record_count() const;
};

std::string manifest_to_text(const Manifest& m);
Manifest manifest_from_text(const std::string& text);
void save_manifest(const Manifest& m, const std::string& path);
Manifest load_manifest(const std::string& path);

// Row-by-row measurement campaign: turn-on sweeps, barrier map, common-bias
// choice, per-dot diamond scans. Writes records and the manifest under outdir.
Manifest run_campaign(const SampleInstance& sample, const CampaignSettings& settings,
                      std::uint64_t seed, const std::string& outdir);

struct DotExtraction {
    int row = 0, col = 0;
    stats::BiasMode mode = stats::BiasMode::Failed;
    double vt_plunger_v = std::numeric_limits<double>::quiet_NaN();
    double vt_bs_v = std::numeric_limits<double>::quiet_NaN();
    double vt_bd_v = std::numeric_limits<double>::quiet_NaN();
    bool diamond_ok = false;
    double c_p_af = std::numeric_limits<double>::quiet_NaN();
    double c_sigma_af = std::numeric_limits<double>::quiet_NaN();
    double alpha = std::numeric_limits<double>::quiet_NaN();
    double e_c_mev = std::numeric_limits<double>::quiet_NaN();
    double quality = 0.0;
    bool spurious_bs = false, spurious_bd = false;
    double spurious_bs_period_v = 0.0, spurious_bd_period_v = 0.0;
};

struct ExtractionReport {
    std::string label;
    OxideStack stack;
    int n = 0;
    std::vector<DotExtraction> dots;
};

std::string extraction_report_to_text(const ExtractionReport& r);
ExtractionReport extraction_report_from_text(const std::string& text);
void save_extraction_report(const ExtractionReport& r, const std::string& path);
ExtractionReport load_extraction_report(const std::string& path);

ExtractionReport extract_campaign(const Manifest& manifest, const std::string& dir,
                                  const extraction::ExtractionOptions& opts = {});

struct StatsSettings {
    bool central_filter = true;
    stats::FilteredEstimator estimator = stats::FilteredEstimator::Slope;
};

struct SampleStats {
    std::string label;
    OxideStack stack;
    stats::YieldReport yield;
    std::optional<stats::GateFamilyStats> plunger;
    std::optional<stats::GateFamilyStats> barrier;
    double cp_mean_af = 0.0, cp_rsd = 0.0;
    double csigma_mean_af = 0.0, csigma_rsd = 0.0;
    int diamonds_ok = 0;
};

struct StatsReport {
    std::vector<SampleStats> samples;
    std::optional<stats::CapFitResult> cap_fit; // per distinct t1; needs >= 2
    std::optional<stats::VariabilityCurve> curve; // needs >= 2 samples
};

StatsReport compute_stats(std::span<const ExtractionReport> reports,
                          const StatsSettings& settings = {});

std::string stats_report_to_text(const StatsReport& r);
void save_stats_report(const StatsReport& r, const std::string& path);

// Plot-data tables plus svg renderings (tables are the tested artifact).
void write_stats_outputs(const StatsReport& r, const std::string& outdir, bool with_svg);

} // namespace qdsim::pipeline

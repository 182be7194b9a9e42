#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qdsim/core_model.hpp"

namespace qdsim::stats {

struct ProbitResult {
    std::vector<double> sorted_values;
    std::vector<double> z_scores;
    double sigma_raw = 0.0;
    double sigma_filtered = 0.0;
    double mu_filtered = 0.0;
    int kept = 0;
};

// Sort ascending, plotting positions p_i = (i - 0.5)/N, z_i = Phi^-1(p_i).
// Sigma fields are left unset.
ProbitResult probit_transform(std::span<const double> values);

enum class FilteredEstimator {
    Slope,      // LS slope of value vs z over |z| <= 1
    TruncatedSd // debiased standard deviation of the retained subset
};

// Full probit analysis: sigma_raw is the ordinary sample standard deviation,
// sigma_filtered/mu_filtered come from the retained central band.
ProbitResult gaussian_sigma_filtered(std::span<const double> values,
                                     FilteredEstimator estimator = FilteredEstimator::Slope);

enum class BiasMode { Shared, Individual, Failed, Dead };

struct DotOutcome {
    int row = 0;
    int col = 0;
    BiasMode mode = BiasMode::Failed;
    bool diamond_ok = false;
};

struct YieldReport {
    int measured = 0;
    int shared_ok = 0;
    int individual_ok = 0;
    double row_shared_yield = 0.0;
    double total_yield = 0.0;
};

YieldReport yield_metrics(std::span<const DotOutcome> outcomes);

struct CapFitResult {
    double area_nm2 = 0.0;
    double delta2_nm = 0.0;
    double residual_af = 0.0;
};

// Least squares of C_P = eps0*epsr*A/(t1 + delta2) over (A, delta2).
CapFitResult fit_parallel_plate(std::span<const std::pair<double, double>> t1_cp_points);

struct GateFamilyStats {
    double sigma_raw_mv = 0.0;
    double sigma_filtered_mv = 0.0;
    double mu_filtered_mv = 0.0;
    int n = 0;
};

struct SampleVariability {
    std::string label;
    OxideStack stack;
    std::optional<GateFamilyStats> plunger;
    std::optional<GateFamilyStats> barrier;
};

struct VariabilityCurve {
    struct Row {
        std::string family; // "plunger" | "barrier"
        double t_gate_nm = 0.0;
        double sigma_raw_mv = 0.0;
        double sigma_filtered_mv = 0.0;
        std::string label;
    };
    std::vector<Row> rows;
};

// Plot-ready table: plungers keyed by t2, barriers by t3. No smoothing.
VariabilityCurve variability_curve(std::span<const SampleVariability> samples);

struct PeakTrace {
    double t_fridge_k = 0.0;
    std::vector<double> v_plunger_v;
    std::vector<double> conductance_s;
};

struct ETempPoint {
    double t_fridge_k = 0.0;
    double t0_k = 0.0;      // effective electron temperature of this trace
    double stderr_k = 0.0;
};

struct ETempResult {
    std::vector<ETempPoint> t0_points;
    double t0_fit_k = 0.0;
    std::vector<std::pair<double, double>> t_e_curve; // (T_fridge, T_e model)
    bool valid_regime = false;
};

// sqrt(T0^2 + Tph^2 + Tsd^2)
double effective_temperature_k(double t0_k, double t_ph_k, double t_sd_k);

struct ETempOptions {
    double eta_sd = 0.5;            // T_sd = eta * e * V_sd / k_B
    double thermal_factor = 2.5;    // k_B T_max * factor <= delta_e
    double charging_factor = 3.0;   // delta_e * factor <= e_c
};

// Per-trace thermal-broadening fits followed by the effective-temperature
// model fit with the base electron temperature free.
ETempResult fit_electron_temperature(std::span<const PeakTrace> traces, double alpha,
                                     double v_sd_v, double delta_e_mev, double e_c_mev,
                                     const ETempOptions& opts = {});

} // namespace qdsim::stats

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qdsim/constants.hpp"

namespace qdsim {

// Net oxide thicknesses under the three gate layers, nm. t2/t3 are derived.
struct OxideStack {
    double t1_nm = 15.0;
    double delta2_nm = 4.5;
    double delta3_nm = 0.8;

    double t2_nm() const { return t1_nm + delta2_nm; }
    double t3_nm() const { return t2_nm() + delta3_nm; }
};

struct ArrayGeometry {
    int n = 7;                    // rows = columns
    double pitch_nm = 110.0;
    double dot_width_nm = 50.0;
    double dot_length_nm = 70.0;

    double dot_area_nm2() const { return dot_width_nm * dot_length_nm; }
};

struct DisorderConfig {
    double strain_coeff_a_mvnm = 868.3;        // sigma term a/t
    double pelgrom_coeff_b_mv_per_nm = 2.285;  // sigma term b*t
    double sigma0_mv = 0.0;                    // residual floor
    double outlier_prob = 0.1;
    double outlier_scale = 4.0;
    double spurious_rate_coeff_nm = 0.4;       // per-segment probability = min(1, coeff/t1)
    double mean_vt_plunger_v = 0.65;
    double mean_vt_barrier_v = 0.85;
    // Optional barrier-family overrides of the strain/Pelgrom coefficients.
    std::optional<double> barrier_strain_coeff_a_mvnm;
    std::optional<double> barrier_pelgrom_coeff_b_mv_per_nm;
};

// Population model for the per-dot capacitance/conductance draws.
struct SynthesisTuning {
    double alpha0 = 0.165;            // mean lever arm C_P/C_Sigma
    double alpha_rel_spread = 0.26;
    double alpha_min = 0.05;
    double alpha_max = 0.8;
    double cp_rel_spread = 0.03;
    double gmax_mean_s = 2e-6;
    double gmax_log_spread = 0.25;
    double lever_bs = 0.05;
    double lever_bd = 0.05;
    double spurious_period_min_v = 0.03;
    double spurious_period_max_v = 0.08;
    double spurious_depth_min = 0.3;
    double spurious_depth_max = 0.8;
    double spurious_lever_min = 0.02;
    double spurious_lever_max = 0.08;
};

struct DotGroundTruth {
    int row = 0;  // 1-based
    int col = 0;  // 1-based
    double vt_plunger_v = 0.0;
    double c_p_af = 0.0;
    double c_sigma_af = 0.0;
    double gmax_s = 0.0;
    double lever_bs = 0.05;
    double lever_bd = 0.05;

    double alpha() const { return c_p_af / c_sigma_af; }
    double peak_period_v() const { return charge_over_capacitance_v(c_p_af); }
    double e_c_mev() const { return charging_energy_mev(c_sigma_af); }
};

// Unintended dot under barrier gate `barrier_index`, confined to one column.
// It modulates transport of row (barrier_index-1) through its drain barrier
// and row barrier_index through its source barrier.
struct SpuriousDotSpec {
    int barrier_index = 0;  // 1..n+1
    int col = 0;            // 1..n
    double coupling_lever = 0.05;
    double period_v = 0.04;
    double depth = 0.5;  // in [0,1]
};

struct SampleInstance {
    ArrayGeometry geometry;
    OxideStack stack;
    std::vector<DotGroundTruth> dots;  // row-major, n*n
    std::vector<double> barrier_vts_v; // B_1..B_{n+1}
    std::vector<SpuriousDotSpec> spurious;
    std::uint64_t seed = 0;
    std::string label;

    const DotGroundTruth& dot(int row, int col) const;  // 1-based
    double barrier_vt(int barrier_index) const;         // 1-based
    std::vector<SpuriousDotSpec> spurious_for_dot(int row, int col) const;
};

// (t1, t2, t3) from the nominal t1 and inter-layer oxides.
struct EffectiveThicknesses {
    double t1_nm, t2_nm, t3_nm;
};
EffectiveThicknesses effective_thicknesses(double t1_nominal_nm, double delta2_nm,
                                           double delta3_nm);

// Root-sum-square of the strain (a/t1), Pelgrom (b*t_gate) and floor terms, mV.
double sigma_vt_mv(double t1_nm, double t_gate_nm, const DisorderConfig& cfg);
// Barrier-family variant: same law with the optional coefficient overrides.
double sigma_vt_barrier_mv(double t1_nm, double t_gate_nm, const DisorderConfig& cfg);

// Parallel-plate plunger capacitance, aF.
double plunger_capacitance_af(double area_nm2, double t2_nm,
                              const PhysicalConstants& c = kConstants);

SampleInstance synthesize_sample(const ArrayGeometry& geometry, const OxideStack& stack,
                                 const DisorderConfig& cfg, std::uint64_t seed,
                                 const SynthesisTuning& tuning = {},
                                 const std::string& label = {});

// Versioned text serialization; byte-stable for golden-file comparisons.
std::string sample_to_text(const SampleInstance& s);
SampleInstance sample_from_text(const std::string& text);
void save_sample(const SampleInstance& s, const std::string& path);
SampleInstance load_sample(const std::string& path);

} // namespace qdsim

#pragma once

#include <span>

#include "qdsim/constants.hpp"
#include "qdsim/core_model.hpp"

namespace qdsim::transport {

struct BiasPoint {
    double v_plunger_v = 0.0;
    double v_bs_v = 0.0;
    double v_bd_v = 0.0;
    double v_sd_v = 0.0;
    double temperature_t0_k = 1.4;
};

struct PeakShape {
    double gmax_s = 0.0;
    double t0_k = 0.0;
};

// Thermal broadening, barrier thresholds and visibility blending for one
// transport channel.
struct TransportContext {
    double vt_bs_v = 0.0;
    double vt_bd_v = 0.0;
    double softness_per_v = 20.0;   // barrier/plunger logistic steepness
    double visibility_gain = 4.0;   // oscillation contrast vs barrier openness
    int peak_window = 6;            // levels summed each side of the nearest one
};

// G = gmax * cosh^-2(delta_eps / (2 k_B T0)); delta_eps in eV.
double coulomb_peak_conductance(double delta_eps_ev, const PeakShape& shape);

// Energy offset of the n-th level from resonance at this bias, eV.
double dot_detuning(const DotGroundTruth& dot, const BiasPoint& bias, int n_level);

// Analytic blockade-region geometry for the diamond between levels n and n+1
// at reference barrier bias. Lines are v_sd = slope * (v_plunger - x0).
struct DiamondBoundaries {
    double width_v;       // e / C_P
    double tip_height_v;  // e / C_Sigma
    double alpha;         // C_P / C_Sigma
    double e_c_mev;       // e^2 / C_Sigma
    struct Line {
        double slope;       // dv_sd / dv_plunger
        double intercept_v; // v_plunger at v_sd = 0
    };
    Line lines[4]; // left-upper, right-upper, left-lower, right-lower
};
DiamondBoundaries diamond_boundaries(const DotGroundTruth& dot, int n_level);

// Logistic pinch-off transmission, in [0,1].
double barrier_transmission(double v_b_v, double vt_b_v, double softness_per_v);

enum class BarrierSide { Source, Drain };

// Multiplicative factor 1 - depth*sin^2(pi v/period) when the addressed
// barrier matches the spec; 1 otherwise.
double spurious_modulation(const SpuriousDotSpec& spec, BarrierSide side, int barrier_index,
                           double v_barrier_v);

// Sequential-tunneling current through one dot, ampere, noiseless.
// Linear response reduces to v_sd * sum_n coulomb_peak_conductance(eps_n).
double dot_current(const DotGroundTruth& dot, const TransportContext& ctx,
                   std::span<const SpuriousDotSpec> spurious, const BiasPoint& bias);

} // namespace qdsim::transport

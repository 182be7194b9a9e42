#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "qdsim/instrument.hpp"

namespace qdsim::extraction {

struct ExtractionOptions {
    int smooth_window = 3;            // moving-average window for traces/cuts
    int contrast_window_px = 5;       // half-window along the map diagonal
    double theta_osc_noise_mult = 5.0; // contrast threshold in noise sigmas
                                       // (detrended range of 2w+1 noisy samples
                                       // reaches ~3 sigma on its own)
    double theta_osc_floor_rel = 0.02; // contrast floor relative to map max
    double blockade_valley_frac = 0.35; // window min must pinch off below this
                                        // fraction of the window max
    double current_window_lo = 0.02;  // candidate mean-current window,
    double current_window_hi = 0.80;  // relative to the per-channel map max
                                      // (staircase currents sit far below the
                                      // ohmic open-corner maximum)
    double theta_sp = 0.35;           // dominant-line spectral power fraction
    double min_modulation_depth = 0.05; // absolute gate on the detected line
    int delta_cut_steps = 2;          // start of the low-bias band, in v_sd steps
    double edge_band_kt = 8.0;        // low edge of the cut window, in kT/e
    double edge_band_top = 0.8;       // high edge, fraction of the tip height
    double peak_floor_rel = 0.2;      // peak detection floor vs band max
    double tip_threshold_rel = 0.3;   // blockade-exit threshold vs column max
};

struct SigmoidFit {
    double v_t_v = 0.0;
    double k_per_v = 0.0;
    double i_max_a = 0.0;
    double residual_rms_a = 0.0;
    bool converged = false;
};

// Nonlinear least squares of i = i_max / (1 + exp(-k (v - v_t))).
// v strictly increasing, at least 10 points. Flat traces throw NoTurnOnError.
SigmoidFit fit_threshold(std::span<const double> v, std::span<const double> i,
                         double noise_floor_a = 0.0);

struct BarrierMapAnalysis {
    int n_bs = 0, n_bd = 0;
    std::vector<std::uint8_t> mask; // [i_bd][i_bs], oscillation regions
    struct Candidate {
        int i_bs = 0, i_bd = 0;
        double v_bs = 0.0, v_bd = 0.0;
        double contrast_a = 0.0;
        double mean_current_a = 0.0;
    };
    std::vector<Candidate> candidates;
    bool mask_at(int i_bs, int i_bd) const {
        return mask[static_cast<std::size_t>(i_bd) * n_bs + i_bs] != 0;
    }
};

// Coulomb-oscillation detection on a 2D (B_s, B_d) map: local peak-to-valley
// contrast along the diagonal plus a mean-current window.
BarrierMapAnalysis analyze_barrier_map(const instrument::MeasurementRecord& rec, int column,
                                       const ExtractionOptions& opts = {});

struct CommonBiasDecision {
    std::optional<std::pair<double, double>> shared_point; // (v_bs, v_bd)
    std::set<int> shared_ok;
    std::map<int, std::pair<double, double>> individual_points;
    std::set<int> failed;
};

// Picks the grid point covered by the most columns' candidate sets
// (ties: higher summed contrast, then lower v_bs+v_bd).
CommonBiasDecision select_common_bias(
    const std::vector<std::pair<int, const BarrierMapAnalysis*>>& maps);

struct DiamondFit {
    double c_p_af = 0.0;
    double c_sigma_af = 0.0;
    double alpha = 0.0;
    double e_c_mev = 0.0;
    struct Line {
        double slope;       // dv_sd / dv_plunger
        double intercept_v; // v_plunger at v_sd = 0
    };
    Line edge_lines[4]; // left-upper, right-upper, left-lower, right-lower
    double quality = 0.0;
};

// Maximal-slope edge extraction on a (v_plunger, v_sd) scan; fits the four
// edge lines over cuts below the blockade tip and inverts width/height.
DiamondFit fit_diamond(const instrument::MeasurementRecord& rec, int column,
                       const ExtractionOptions& opts = {});

// e / width, aF from volts.
double capacitance_from_width_af(double width_v);

enum class BarrierAxis { Source, Drain };

struct SpuriousDetection {
    BarrierAxis axis;
    double period_v = 0.0;
    double strength = 0.0; // dominant-bin fraction of non-DC spectral power
};

// Spectral detection of oscillation lines perpendicular to one barrier axis.
std::vector<SpuriousDetection> detect_spurious(const instrument::MeasurementRecord& rec,
                                               int column,
                                               const ExtractionOptions& opts = {});

} // namespace qdsim::extraction

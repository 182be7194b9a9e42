#include "qdsim/transport.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qdsim/errors.hpp"

namespace qdsim::transport {

namespace {

// First level sits half a period above the plunger threshold.
double peak_position_v(const DotGroundTruth& dot, int n_level) {
    return dot.vt_plunger_v + (n_level + 0.5) * dot.peak_period_v();
}

double fermi(double u_ev, double kt_ev) {
    const double x = std::clamp(u_ev / kt_ev, -60.0, 60.0);
    return 1.0 / (1.0 + std::exp(x));
}

} // namespace

double coulomb_peak_conductance(double delta_eps_ev, const PeakShape& shape) {
    if (shape.gmax_s <= 0.0 || shape.t0_k <= 0.0)
        throw ConfigError("coulomb_peak_conductance: invalid peak shape");
    const double x = delta_eps_ev / (2.0 * kConstants.k_b * shape.t0_k);
    if (std::fabs(x) > 300.0) return 0.0;
    const double c = std::cosh(x);
    return shape.gmax_s / (c * c);
}

double dot_detuning(const DotGroundTruth& dot, const BiasPoint& bias, int n_level) {
    return dot.alpha() * (bias.v_plunger_v - peak_position_v(dot, n_level)) +
           dot.lever_bs * bias.v_bs_v + dot.lever_bd * bias.v_bd_v;
}

DiamondBoundaries diamond_boundaries(const DotGroundTruth& dot, int n_level) {
    DiamondBoundaries b{};
    b.width_v = dot.peak_period_v();
    b.tip_height_v = charge_over_capacitance_v(dot.c_sigma_af);
    b.alpha = dot.alpha();
    b.e_c_mev = dot.e_c_mev();
    const double xl = peak_position_v(dot, n_level);
    const double xr = peak_position_v(dot, n_level + 1);
    const double s = 2.0 * b.alpha;
    b.lines[0] = {s, xl};   // left edge, v_sd > 0
    b.lines[1] = {-s, xr};  // right edge, v_sd > 0
    b.lines[2] = {-s, xl};  // left edge, v_sd < 0
    b.lines[3] = {s, xr};   // right edge, v_sd < 0
    return b;
}

double barrier_transmission(double v_b_v, double vt_b_v, double softness_per_v) {
    if (softness_per_v <= 0.0)
        throw ConfigError("barrier_transmission: softness must be positive");
    const double x = std::clamp(softness_per_v * (v_b_v - vt_b_v), -500.0, 500.0);
    return 1.0 / (1.0 + std::exp(-x));
}

double spurious_modulation(const SpuriousDotSpec& spec, BarrierSide side, int barrier_index,
                           double v_barrier_v) {
    if (spec.depth < 0.0 || spec.depth > 1.0 || spec.period_v <= 0.0)
        throw ConfigError("spurious_modulation: invalid spec");
    (void)side;
    if (barrier_index != spec.barrier_index) return 1.0;
    const double s = std::sin(std::numbers::pi * v_barrier_v / spec.period_v);
    return 1.0 - spec.depth * s * s;
}

double dot_current(const DotGroundTruth& dot, const TransportContext& ctx,
                   std::span<const SpuriousDotSpec> spurious, const BiasPoint& bias) {
    if (bias.temperature_t0_k <= 0.0)
        throw ConfigError("dot_current: temperature must be positive");
    const double kt = kConstants.k_b * bias.temperature_t0_k; // eV
    const double alpha = dot.alpha();
    const double period = dot.peak_period_v();

    const double gp = barrier_transmission(bias.v_plunger_v, dot.vt_plunger_v, ctx.softness_per_v);
    const double gs = barrier_transmission(bias.v_bs_v, ctx.vt_bs_v, ctx.softness_per_v);
    const double gd = barrier_transmission(bias.v_bd_v, ctx.vt_bd_v, ctx.softness_per_v);
    const double vis =
        std::clamp(ctx.visibility_gain * (1.0 - gs) * (1.0 - gd), 0.0, 1.0);

    // Occupation-difference sum over the level comb nearest this bias. The
    // barrier levers are referenced to the barrier thresholds so that the
    // first level stays tied to the plunger turn-on at operating bias.
    const double w = 0.5 * bias.v_sd_v; // eV shift of the two chemical potentials
    const double barrier_shift = dot.lever_bs * (bias.v_bs_v - ctx.vt_bs_v) +
                                 dot.lever_bd * (bias.v_bd_v - ctx.vt_bd_v);
    const double idx = (bias.v_plunger_v - dot.vt_plunger_v) / period - 0.5 +
                       barrier_shift / (alpha * period);
    const int n_center = static_cast<int>(std::lround(idx));
    const int n_lo = std::max(0, n_center - ctx.peak_window);
    const int n_hi = std::max(0, n_center + ctx.peak_window);
    double sum = 0.0;
    for (int n = n_lo; n <= n_hi; ++n) {
        const double eps = alpha * (bias.v_plunger_v - dot.vt_plunger_v -
                                    (n + 0.5) * period) +
                           barrier_shift;
        sum += fermi(eps - w, kt) - fermi(eps + w, kt);
    }

    const double i_osc = dot.gmax_s * 4.0 * kt * sum;
    const double i_smooth = dot.gmax_s * bias.v_sd_v;
    double current = gp * gs * gd * ((1.0 - vis) * i_smooth + vis * i_osc);

    for (const auto& sp : spurious) {
        if (sp.col != 0 && sp.col != dot.col) continue;
        current *= spurious_modulation(sp, BarrierSide::Source, dot.row, bias.v_bs_v);
        current *= spurious_modulation(sp, BarrierSide::Drain, dot.row + 1, bias.v_bd_v);
    }
    return current;
}

} // namespace qdsim::transport

#include "qdsim/statistics.hpp"

#include <algorithm>
#include <cmath>

#include "qdsim/errors.hpp"
#include "qdsim/levmar.hpp"
#include "qdsim/numerics.hpp"

namespace qdsim::stats {

ProbitResult probit_transform(std::span<const double> values) {
    const std::size_t n = values.size();
    if (n < 3) throw InsufficientDataError("probit_transform: need at least 3 values");
    ProbitResult r;
    r.sorted_values.assign(values.begin(), values.end());
    std::stable_sort(r.sorted_values.begin(), r.sorted_values.end());
    r.z_scores.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double p = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
        r.z_scores[i] = num::normal_quantile(p);
    }
    return r;
}

ProbitResult gaussian_sigma_filtered(std::span<const double> values,
                                     FilteredEstimator estimator) {
    ProbitResult r = probit_transform(values);
    r.sigma_raw = num::stdev(values);

    std::vector<double> zk, vk;
    for (std::size_t i = 0; i < r.z_scores.size(); ++i) {
        if (std::fabs(r.z_scores[i]) <= 1.0) {
            zk.push_back(r.z_scores[i]);
            vk.push_back(r.sorted_values[i]);
        }
    }
    if (zk.size() < 3)
        throw InsufficientDataError("gaussian_sigma_filtered: fewer than 3 points with |z| <= 1");
    r.kept = static_cast<int>(zk.size());

    if (estimator == FilteredEstimator::Slope) {
        const auto f = num::fit_line(zk, vk);
        r.sigma_filtered = f.slope;
        r.mu_filtered = f.intercept;
    } else {
        // standard deviation of the central band, rescaled to the full-Gaussian
        // equivalent: Var[X | |X| <= s] = s^2 (1 - 2 phi(1)/(2 Phi(1) - 1))
        const double phi1 = std::exp(-0.5) / std::sqrt(2.0 * 3.14159265358979323846);
        const double band = 0.682689492137086;
        const double shrink = std::sqrt(1.0 - 2.0 * phi1 / band);
        r.sigma_filtered = num::stdev(vk) / shrink;
        r.mu_filtered = num::mean(vk);
    }
    return r;
}

YieldReport yield_metrics(std::span<const DotOutcome> outcomes) {
    YieldReport y;
    for (const auto& o : outcomes) {
        if (o.mode == BiasMode::Dead) continue;
        ++y.measured;
        if (!o.diamond_ok) continue;
        if (o.mode == BiasMode::Shared) ++y.shared_ok;
        else if (o.mode == BiasMode::Individual) ++y.individual_ok;
    }
    if (y.measured > 0) {
        y.row_shared_yield = static_cast<double>(y.shared_ok) / y.measured;
        y.total_yield = static_cast<double>(y.shared_ok + y.individual_ok) / y.measured;
    }
    return y;
}

CapFitResult fit_parallel_plate(std::span<const std::pair<double, double>> t1_cp_points) {
    const std::size_t n = t1_cp_points.size();
    if (n < 2) throw InsufficientDataError("fit_parallel_plate: need at least 2 points");
    double t1_min = t1_cp_points[0].first, t1_max = t1_cp_points[0].first;
    for (const auto& [t1, cp] : t1_cp_points) {
        t1_min = std::min(t1_min, t1);
        t1_max = std::max(t1_max, t1);
        if (cp <= 0.0) throw DataError("fit_parallel_plate: capacitances must be positive");
    }
    if (t1_min == t1_max)
        throw DegenerateFitError("fit_parallel_plate: all t1 equal (singular design)");

    // closed-form start from the linearization 1/C = (t1 + delta2)/(K A)
    const double K = kConstants.eps0 * kConstants.epsr_sio2 * 1e-9 * 1e18; // aF*nm/nm2
    std::vector<double> xs, ys;
    for (const auto& [t1, cp] : t1_cp_points) {
        xs.push_back(t1);
        ys.push_back(1.0 / cp);
    }
    const auto lin = num::fit_line(xs, ys);
    double a0 = (lin.slope > 0.0) ? 1.0 / (K * lin.slope) : 3500.0;
    double d0 = (lin.slope > 0.0) ? std::max(lin.intercept / lin.slope, 0.0) : 4.5;

    auto residuals = [&](std::span<const double> p, std::span<double> r) {
        for (std::size_t i = 0; i < n; ++i) {
            const auto& [t1, cp] = t1_cp_points[i];
            r[i] = K * p[0] / (t1 + p[1]) - cp;
        }
    };
    auto jacobian = [&](std::span<const double> p, std::span<double> jac) {
        for (std::size_t i = 0; i < n; ++i) {
            const auto& [t1, cp] = t1_cp_points[i];
            const double den = t1 + p[1];
            jac[i * 2 + 0] = K / den;
            jac[i * 2 + 1] = -K * p[0] / (den * den);
        }
    };
    auto res = lm::fit(residuals, jacobian, n, {a0, d0});

    CapFitResult out;
    out.area_nm2 = res.params[0];
    out.delta2_nm = res.params[1];
    out.residual_af = std::sqrt(res.rss / static_cast<double>(n));
    if (out.area_nm2 <= 0.0)
        throw DegenerateFitError("fit_parallel_plate: nonpositive fitted area");
    return out;
}

VariabilityCurve variability_curve(std::span<const SampleVariability> samples) {
    if (samples.size() < 2)
        throw InsufficientDataError("variability_curve: need at least 2 samples");
    VariabilityCurve curve;
    for (const auto& s : samples) {
        if (s.plunger) {
            curve.rows.push_back({"plunger", s.stack.t2_nm(), s.plunger->sigma_raw_mv,
                                  s.plunger->sigma_filtered_mv, s.label});
        }
        if (s.barrier) {
            curve.rows.push_back({"barrier", s.stack.t3_nm(), s.barrier->sigma_raw_mv,
                                  s.barrier->sigma_filtered_mv, s.label});
        }
    }
    std::stable_sort(curve.rows.begin(), curve.rows.end(),
                     [](const VariabilityCurve::Row& a, const VariabilityCurve::Row& b) {
                         if (a.family != b.family) return a.family < b.family;
                         return a.t_gate_nm < b.t_gate_nm;
                     });
    return curve;
}

double effective_temperature_k(double t0_k, double t_ph_k, double t_sd_k) {
    return std::sqrt(t0_k * t0_k + t_ph_k * t_ph_k + t_sd_k * t_sd_k);
}

ETempResult fit_electron_temperature(std::span<const PeakTrace> traces, double alpha,
                                     double v_sd_v, double delta_e_mev, double e_c_mev,
                                     const ETempOptions& opts) {
    if (traces.size() < 3)
        throw InsufficientDataError("fit_electron_temperature: need at least 3 traces");
    if (alpha <= 0.0) throw DataError("fit_electron_temperature: alpha must be positive");

    ETempResult out;
    double t_fridge_max = 0.0;
    for (const auto& tr : traces) {
        t_fridge_max = std::max(t_fridge_max, tr.t_fridge_k);
        const std::size_t n = tr.v_plunger_v.size();
        if (n < 10 || tr.conductance_s.size() != n) continue;

        double gmax = 0.0;
        std::size_t ipk = 0;
        for (std::size_t s = 0; s < n; ++s)
            if (tr.conductance_s[s] > gmax) { gmax = tr.conductance_s[s]; ipk = s; }
        if (gmax <= 0.0) continue;

        // G(V) = gmax cosh^-2( alpha (V - Vpeak) / (2 kB T) )
        auto residuals = [&](std::span<const double> p, std::span<double> r) {
            const double g = p[0], vpk = p[1], t = p[2];
            for (std::size_t s = 0; s < n; ++s) {
                const double x = alpha * (tr.v_plunger_v[s] - vpk) /
                                 (2.0 * kConstants.k_b * std::max(t, 1e-6));
                const double c = std::cosh(std::clamp(x, -300.0, 300.0));
                r[s] = g / (c * c) - tr.conductance_s[s];
            }
        };
        // width start from the half-maximum crossings
        double vlo = tr.v_plunger_v.front(), vhi = tr.v_plunger_v.back();
        for (std::size_t s = 0; s <= ipk; ++s)
            if (tr.conductance_s[s] >= 0.5 * gmax) { vlo = tr.v_plunger_v[s]; break; }
        for (std::size_t s = n; s-- > ipk;)
            if (tr.conductance_s[s] >= 0.5 * gmax) { vhi = tr.v_plunger_v[s]; break; }
        const double fwhm_v = std::max(vhi - vlo, 1e-9);
        const double t_start =
            alpha * fwhm_v / (4.0 * std::log(1.0 + std::sqrt(2.0)) * kConstants.k_b);

        lm::Result res;
        try {
            res = lm::fit(residuals, n, {gmax, tr.v_plunger_v[ipk], t_start});
        } catch (const FitError&) {
            continue;
        }
        if (!res.converged || res.params[2] <= 0.0) continue; // excluded with warning upstream
        ETempPoint pt;
        pt.t_fridge_k = tr.t_fridge_k;
        pt.t0_k = res.params[2];
        pt.stderr_k = res.stderrs.empty() ? 0.0 : res.stderrs[2];
        out.t0_points.push_back(pt);
    }
    if (out.t0_points.size() < 3)
        throw FitError("fit_electron_temperature: fewer than 3 usable peak fits");

    // eta * e * V_sd / k_B; with k_B in eV/K this is eta * V_sd / k_B kelvin
    const double t_sd = opts.eta_sd * std::fabs(v_sd_v) / kConstants.k_b;
    auto residuals = [&](std::span<const double> p, std::span<double> r) {
        for (std::size_t s = 0; s < out.t0_points.size(); ++s) {
            const auto& pt = out.t0_points[s];
            r[s] = effective_temperature_k(p[0], pt.t_fridge_k, t_sd) - pt.t0_k;
        }
    };
    auto res = lm::fit(residuals, out.t0_points.size(), {1.0});
    out.t0_fit_k = std::fabs(res.params[0]);

    for (const auto& pt : out.t0_points)
        out.t_e_curve.push_back(
            {pt.t_fridge_k, effective_temperature_k(out.t0_fit_k, pt.t_fridge_k, t_sd)});

    const double kt_max_mev = kConstants.k_b * t_fridge_max * 1e3;
    out.valid_regime = (kt_max_mev * opts.thermal_factor <= delta_e_mev) &&
                       (delta_e_mev * opts.charging_factor <= e_c_mev);
    return out;
}

} // namespace qdsim::stats

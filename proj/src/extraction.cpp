#include "qdsim/extraction.hpp"

#include <algorithm>
#include <cmath>

#include "qdsim/errors.hpp"
#include "qdsim/levmar.hpp"
#include "qdsim/numerics.hpp"

namespace qdsim::extraction {

namespace {

using instrument::MeasurementRecord;

std::vector<double> smooth(std::span<const double> y, int window) {
    return num::moving_average(y, window);
}

// ordered local maxima above floor, separated by at least minsep samples
std::vector<int> find_peaks(std::span<const double> y, double floor, int minsep) {
    std::vector<int> cand;
    for (int i = 1; i + 1 < static_cast<int>(y.size()); ++i) {
        if (y[i] > y[i - 1] && y[i] >= y[i + 1] && y[i] > floor) cand.push_back(i);
    }
    std::sort(cand.begin(), cand.end(), [&](int a, int b) { return y[a] > y[b]; });
    std::vector<int> peaks;
    for (int i : cand) {
        bool ok = true;
        for (int j : peaks)
            if (std::abs(i - j) < minsep) { ok = false; break; }
        if (ok) peaks.push_back(i);
    }
    std::sort(peaks.begin(), peaks.end());
    return peaks;
}

} // namespace

SigmoidFit fit_threshold(std::span<const double> v, std::span<const double> i,
                         double noise_floor_a) {
    const std::size_t n = v.size();
    if (n != i.size()) throw DataError("fit_threshold: size mismatch");
    if (n < 10) throw InsufficientDataError("fit_threshold: need at least 10 points");
    for (std::size_t k = 1; k < n; ++k)
        if (!(v[k] > v[k - 1]))
            throw DataError("fit_threshold: voltages must be strictly increasing");

    double i_min = i[0], i_max = i[0];
    for (double x : i) { i_min = std::min(i_min, x); i_max = std::max(i_max, x); }
    const double range = i_max - i_min;

    double floor = noise_floor_a;
    if (floor <= 0.0) {
        // robust noise scale from first differences
        std::vector<double> d(n - 1);
        for (std::size_t k = 0; k + 1 < n; ++k) d[k] = std::fabs(i[k + 1] - i[k]);
        floor = 6.0 * num::median(std::move(d)) / (std::sqrt(2.0) * 0.6745);
    }
    if (range <= 0.0 || range <= floor)
        throw NoTurnOnError("fit_threshold: no turn-on (flat trace)");

    // closed-form start: half crossing for v_t, 10/90 crossings for k
    const double half = i_min + 0.5 * range;
    const double lo10 = i_min + 0.1 * range, hi90 = i_min + 0.9 * range;
    double vt0 = v[n / 2], v10 = v.front(), v90 = v.back();
    for (std::size_t k = 0; k < n; ++k) {
        if (i[k] >= half) { vt0 = v[k]; break; }
    }
    for (std::size_t k = 0; k < n; ++k)
        if (i[k] >= lo10) { v10 = v[k]; break; }
    for (std::size_t k = 0; k < n; ++k)
        if (i[k] >= hi90) { v90 = v[k]; break; }
    double k0 = (v90 > v10) ? 4.0 / (v90 - v10) : 10.0 / (v.back() - v.front());

    auto residuals = [&](std::span<const double> p, std::span<double> r) {
        const double imax = p[0], vt = p[1], kk = p[2];
        for (std::size_t s = 0; s < n; ++s) {
            const double x = std::clamp(-kk * (v[s] - vt), -500.0, 500.0);
            r[s] = imax / (1.0 + std::exp(x)) - i[s];
        }
    };
    auto jacobian = [&](std::span<const double> p, std::span<double> jac) {
        const double imax = p[0], vt = p[1], kk = p[2];
        for (std::size_t s = 0; s < n; ++s) {
            const double x = std::clamp(-kk * (v[s] - vt), -500.0, 500.0);
            const double ex = std::exp(x);
            const double den = 1.0 + ex;
            const double f = 1.0 / den;
            const double d_dx = -imax * ex / (den * den); // d model / d x
            jac[s * 3 + 0] = f;
            jac[s * 3 + 1] = d_dx * kk;
            jac[s * 3 + 2] = d_dx * -(v[s] - vt);
        }
    };

    auto res = lm::fit(residuals, jacobian, n, {i_max, vt0, k0});

    SigmoidFit fit;
    fit.i_max_a = res.params[0];
    fit.v_t_v = res.params[1];
    fit.k_per_v = res.params[2];
    fit.residual_rms_a = std::sqrt(res.rss / static_cast<double>(n));
    fit.converged = res.converged && fit.k_per_v > 0.0 &&
                    fit.residual_rms_a <= 0.20 * std::fabs(fit.i_max_a) &&
                    fit.v_t_v >= v.front() && fit.v_t_v <= v.back();
    return fit;
}

BarrierMapAnalysis analyze_barrier_map(const MeasurementRecord& rec, int column,
                                       const ExtractionOptions& opts) {
    if (rec.spec.axes.size() != 2)
        throw DimensionalityError("analyze_barrier_map: need a 2D record");
    if (rec.spec.axes[0].is_source_drain || rec.spec.axes[1].is_source_drain)
        throw DimensionalityError("analyze_barrier_map: axes must be the two barriers");
    // canonical orientation: i_bs indexes the source barrier axis
    const bool bs_first = rec.spec.axes[0].gate == rec.routing.source_barrier;
    if (!bs_first && !(rec.spec.axes[1].gate == rec.routing.source_barrier))
        throw DimensionalityError("analyze_barrier_map: source barrier axis missing");

    const int k = rec.channel_pos(column);
    const int n1 = rec.points1(), n2 = rec.points2();
    const int n_bs = bs_first ? n1 : n2;
    const int n_bd = bs_first ? n2 : n1;

    auto cur = [&](int i_bs, int i_bd) {
        return bs_first ? std::fabs(rec.current(i_bs, i_bd, k))
                        : std::fabs(rec.current(i_bd, i_bs, k));
    };
    auto v_bs = [&](int i) { return rec.spec.axes[bs_first ? 0 : 1].value(i); };
    auto v_bd = [&](int i) { return rec.spec.axes[bs_first ? 1 : 0].value(i); };

    double map_max = 0.0;
    for (int j = 0; j < n_bd; ++j)
        for (int i = 0; i < n_bs; ++i) map_max = std::max(map_max, cur(i, j));

    const double sigma = rec.noise_rel * (k < static_cast<int>(rec.iopen_a.size())
                                              ? rec.iopen_a[k] : map_max);
    const double theta =
        std::max(opts.theta_osc_noise_mult * sigma, opts.theta_osc_floor_rel * map_max);
    // noise floor keeps pure-noise maps out of the candidate set
    const double i_lo = std::max(opts.current_window_lo * map_max, 2.0 * sigma);
    const double i_hi = opts.current_window_hi * map_max;

    BarrierMapAnalysis out;
    out.n_bs = n_bs;
    out.n_bd = n_bd;
    out.mask.assign(static_cast<std::size_t>(n_bs) * n_bd, 0);

    // peak-to-valley of the diagonal window after removing its linear trend:
    // a smooth turn-on edge detrends to nothing, Coulomb oscillations do not
    const int w = opts.contrast_window_px;
    const int nw = 2 * w + 1;
    std::vector<double> win(nw);
    for (int j = 0; j < n_bd; ++j) {
        for (int i = 0; i < n_bs; ++i) {
            if (i - w < 0 || j - w < 0 || i + w >= n_bs || j + w >= n_bd) continue;
            double sum = 0.0, sum_t = 0.0, sum_tt = 0.0, sum_ty = 0.0;
            double raw_lo = cur(i - w, j - w), raw_hi = raw_lo;
            for (int t = -w; t <= w; ++t) {
                const double c = cur(i + t, j + t);
                win[static_cast<std::size_t>(t + w)] = c;
                sum += c;
                sum_t += t;
                sum_tt += t * t;
                sum_ty += t * c;
                raw_lo = std::min(raw_lo, c);
                raw_hi = std::max(raw_hi, c);
            }
            const double mean = sum / nw;
            const double slope = sum_ty / sum_tt;
            double lo = 0.0, hi = 0.0;
            for (int t = -w; t <= w; ++t) {
                const double r = win[static_cast<std::size_t>(t + w)] - (mean + slope * t);
                lo = std::min(lo, r);
                hi = std::max(hi, r);
            }
            const double contrast = hi - lo;
            if (contrast <= theta) continue;
            out.mask[static_cast<std::size_t>(j) * n_bs + i] = 1;
            // Coulomb oscillations pinch off between peaks; modulation riding
            // on an open channel does not reach the blockade floor
            const bool pinches =
                raw_lo <= opts.blockade_valley_frac * raw_hi + 2.0 * sigma;
            if (pinches && mean >= i_lo && mean <= i_hi)
                out.candidates.push_back({i, j, v_bs(i), v_bd(j), contrast, mean});
        }
    }
    return out;
}

CommonBiasDecision select_common_bias(
    const std::vector<std::pair<int, const BarrierMapAnalysis*>>& maps) {
    if (maps.empty()) throw InsufficientDataError("select_common_bias: no maps");

    struct Tally {
        int count = 0;
        double contrast = 0.0;
        double v_bs = 0.0, v_bd = 0.0;
    };
    // each column contributes once per grid point (best contrast wins)
    std::map<std::pair<int, int>, Tally> tally;
    for (const auto& [col, m] : maps) {
        std::map<std::pair<int, int>, double> unique;
        for (const auto& c : m->candidates) {
            auto& best = unique[{c.i_bs, c.i_bd}];
            best = std::max(best, c.contrast_a);
        }
        for (const auto& c : m->candidates) {
            auto it = unique.find({c.i_bs, c.i_bd});
            if (it == unique.end() || it->second != c.contrast_a) continue;
            auto& t = tally[{c.i_bs, c.i_bd}];
            ++t.count;
            t.contrast += c.contrast_a;
            t.v_bs = c.v_bs;
            t.v_bd = c.v_bd;
            unique.erase(it);
        }
    }

    CommonBiasDecision out;
    const Tally* best = nullptr;
    std::pair<int, int> best_key{};
    for (const auto& [key, t] : tally) {
        if (!best) { best = &t; best_key = key; continue; }
        if (t.count != best->count) {
            if (t.count > best->count) { best = &t; best_key = key; }
            continue;
        }
        if (t.contrast != best->contrast) {
            if (t.contrast > best->contrast) { best = &t; best_key = key; }
            continue;
        }
        if (t.v_bs + t.v_bd < best->v_bs + best->v_bd) { best = &t; best_key = key; }
    }

    if (best && best->count > 0) out.shared_point = {best->v_bs, best->v_bd};

    for (const auto& [col, m] : maps) {
        if (m->candidates.empty()) {
            out.failed.insert(col);
            continue;
        }
        bool covers = false;
        if (out.shared_point) {
            for (const auto& c : m->candidates)
                if (c.i_bs == best_key.first && c.i_bd == best_key.second) { covers = true; break; }
        }
        if (covers) {
            out.shared_ok.insert(col);
        } else {
            const BarrierMapAnalysis::Candidate* pick = nullptr;
            for (const auto& c : m->candidates) {
                if (!pick || c.contrast_a > pick->contrast_a ||
                    (c.contrast_a == pick->contrast_a &&
                     c.v_bs + c.v_bd < pick->v_bs + pick->v_bd))
                    pick = &c;
            }
            out.individual_points[col] = {pick->v_bs, pick->v_bd};
        }
    }
    return out;
}

double capacitance_from_width_af(double width_v) {
    if (width_v <= 0.0) throw GeometryError("capacitance_from_width: width must be positive");
    return kConstants.e_charge / width_v * 1e18;
}

DiamondFit fit_diamond(const MeasurementRecord& rec, int column, const ExtractionOptions& opts) {
    if (rec.spec.axes.size() != 2)
        throw DimensionalityError("fit_diamond: need a 2D (plunger, v_sd) record");
    const bool sd_second = rec.spec.axes[1].is_source_drain;
    const bool sd_first = rec.spec.axes[0].is_source_drain;
    if (sd_first == sd_second)
        throw DimensionalityError("fit_diamond: exactly one axis must be the source-drain bias");
    const int ax_p = sd_second ? 0 : 1;
    const int ax_sd = sd_second ? 1 : 0;
    if (rec.spec.axes[ax_p].is_source_drain || !(rec.spec.axes[ax_p].gate == rec.routing.plunger_gate))
        throw DimensionalityError("fit_diamond: plunger axis missing");

    const int k = rec.channel_pos(column);
    const int n_p = rec.spec.axes[ax_p].points;
    const int n_sd = rec.spec.axes[ax_sd].points;

    std::vector<double> vps(n_p), vsds(n_sd);
    for (int i = 0; i < n_p; ++i) vps[i] = rec.spec.axes[ax_p].value(i);
    for (int j = 0; j < n_sd; ++j) vsds[j] = rec.spec.axes[ax_sd].value(j);
    if (vsds.front() >= 0.0 || vsds.back() <= 0.0)
        throw DataError("fit_diamond: scan must straddle v_sd = 0");

    auto cur = [&](int ip, int isd) {
        return sd_second ? std::fabs(rec.current(ip, isd, k))
                         : std::fabs(rec.current(isd, ip, k));
    };
    auto row_abs = [&](int isd) {
        std::vector<double> r(n_p);
        for (int ip = 0; ip < n_p; ++ip) r[ip] = cur(ip, isd);
        return r;
    };

    const double dvp = vps[1] - vps[0];
    const double dsd = std::fabs(vsds[1] - vsds[0]);
    int iz = 0;
    for (int j = 1; j < n_sd; ++j)
        if (std::fabs(vsds[j]) < std::fabs(vsds[iz])) iz = j;

    const double kt = kConstants.k_b * rec.spec.temperature_k; // eV

    // blockade-exit profile across the whole plunger range: inside the
    // blockade some column is dark, beyond the tip none is
    double h0 = 0.0;
    {
        std::vector<double> mprof(n_sd);
        for (int j = 0; j < n_sd; ++j) mprof[j] = num::quantile(row_abs(j), 0.05);
        mprof = smooth(mprof, opts.smooth_window);
        std::vector<double> nearz;
        for (int j = 0; j < n_sd; ++j)
            if (std::fabs(vsds[j]) <= 2.5 * dsd) nearz.push_back(mprof[j]);
        const double m0 = num::mean(nearz);
        double mmax = 0.0;
        for (double v : mprof) mmax = std::max(mmax, v);
        const double th = std::max(4.0 * m0, 0.05 * mmax);
        // tip crossing with hysteresis on both signs
        auto crossing = [&](int dir) -> std::optional<double> {
            for (int j = iz; j + 2 * dir >= 0 && j + 2 * dir < n_sd; j += dir) {
                if (mprof[j] >= th && mprof[j + dir] >= 0.8 * th && mprof[j + 2 * dir] >= 0.6 * th)
                    return vsds[j];
            }
            return std::nullopt;
        };
        auto up = crossing(+1), dn = crossing(-1);
        if (!up || !dn || *up <= 0.0 || *dn >= 0.0)
            throw UnfittableDiamondError("fit_diamond: no blockade region in scan");
        h0 = 0.5 * (*up - *dn);
    }

    // peak centers from the symmetric low-bias band
    const int minsep = std::max(3, (n_p - 1) / 5);
    std::vector<double> band(n_p, 0.0);
    int nband = 0;
    for (int j = 0; j < n_sd; ++j) {
        const double a = std::fabs(vsds[j]);
        if (a >= opts.delta_cut_steps * dsd - 1e-15 && a <= 6.0 * dsd + 1e-15) {
            const auto r = row_abs(j);
            for (int ip = 0; ip < n_p; ++ip) band[ip] += r[ip];
            ++nband;
        }
    }
    if (nband < 2) throw UnfittableDiamondError("fit_diamond: no usable low-bias cuts");
    for (auto& v : band) v /= nband;
    band = smooth(band, opts.smooth_window);
    double band_max = 0.0;
    for (double v : band) band_max = std::max(band_max, v);
    // peaks must rise above the smooth background floor (median of the band)
    const double band_med = num::median(band);
    const auto peaks =
        find_peaks(band, band_med + opts.peak_floor_rel * (band_max - band_med), minsep);
    if (peaks.size() < 2)
        throw UnfittableDiamondError("fit_diamond: fewer than two conductance peaks");
    // first adjacent pair enclosing a genuine blockade valley
    int p0 = -1, p1 = -1;
    for (std::size_t q = 0; q + 1 < peaks.size(); ++q) {
        const int a = peaks[q], b = peaks[q + 1];
        double vmin = band[static_cast<std::size_t>(a)];
        for (int ip = a; ip <= b; ++ip) vmin = std::min(vmin, band[static_cast<std::size_t>(ip)]);
        const double lower_peak = std::min(band[static_cast<std::size_t>(a)],
                                           band[static_cast<std::size_t>(b)]);
        if (vmin - band_med < 0.5 * (lower_peak - band_med)) {
            p0 = a;
            p1 = b;
            break;
        }
    }
    if (p0 < 0) throw UnfittableDiamondError("fit_diamond: no blockade valley between peaks");
    const int ival = (p0 + p1) / 2;
    // sub-pixel zero-bias degeneracy points: the band average is symmetric in
    // v_sd, so these sit exactly on the edge-line intercepts
    const double anchor_l =
        vps[p0] + num::parabolic_offset(band[p0 - 1], band[p0], band[p0 + 1]) * dvp;
    const double anchor_r =
        vps[p1] + num::parabolic_offset(band[p1 - 1], band[p1], band[p1 + 1]) * dvp;

    // refine the tip on the valley-column strip
    double hest = h0;
    {
        std::vector<double> g(n_sd, 0.0);
        const int c0 = std::max(0, ival - 2), c1 = std::min(n_p - 1, ival + 2);
        for (int j = 0; j < n_sd; ++j) {
            double s = 0.0;
            for (int ip = c0; ip <= c1; ++ip) s += cur(ip, j);
            g[j] = s / static_cast<double>(c1 - c0 + 1);
        }
        g = smooth(g, opts.smooth_window);
        double gmax = 0.0;
        for (double v : g) gmax = std::max(gmax, v);
        const double th = opts.tip_threshold_rel * gmax;
        std::optional<double> up, dn;
        for (int j = iz; j + 2 < n_sd; ++j)
            if (g[j] >= th && g[j + 1] >= 0.8 * th && g[j + 2] >= 0.6 * th) { up = vsds[j]; break; }
        for (int j = iz; j - 2 >= 0; --j)
            if (g[j] >= th && g[j - 1] >= 0.8 * th && g[j - 2] >= 0.6 * th) { dn = vsds[j]; break; }
        if (up && dn && *up > 0.0 && *dn < 0.0) hest = 0.5 * (*up - *dn);
    }

    // maximal-slope edge points on cuts below the tip
    const double lo = std::max(opts.delta_cut_steps * dsd, opts.edge_band_kt * kt);
    const double hi = opts.edge_band_top * hest;
    std::vector<double> xLp, yLp, xLm, yLm, xRp, yRp, xRm, yRm;
    double slope_scale = 0.0;
    int n_cut_rows = 0;
    for (int j = 0; j < n_sd; ++j) {
        const double a = std::fabs(vsds[j]);
        if (a < lo || a > hi) continue;
        ++n_cut_rows;
        auto row = smooth(row_abs(j), opts.smooth_window);
        const auto d = num::gradient(row, dvp);
        int il = p0, ir = ival;
        for (int ip = p0; ip <= ival; ++ip)
            if (d[ip] < d[il]) il = ip;
        for (int ip = ival; ip <= p1; ++ip)
            if (d[ip] > d[ir]) ir = ip;
        if (il <= p0 || il >= ival || ir <= ival || ir >= p1) continue;
        const double xl = vps[il] + num::parabolic_offset(d[il - 1], d[il], d[il + 1]) * dvp;
        const double xr = vps[ir] + num::parabolic_offset(d[ir - 1], d[ir], d[ir + 1]) * dvp;
        slope_scale = std::max({slope_scale, -d[il], d[ir]});
        if (vsds[j] > 0.0) {
            yLp.push_back(vsds[j]); xLp.push_back(xl);
            yRp.push_back(vsds[j]); xRp.push_back(xr);
        } else {
            yLm.push_back(vsds[j]); xLm.push_back(xl);
            yRm.push_back(vsds[j]); xRm.push_back(xr);
        }
    }
    if (n_cut_rows < 4)
        throw UnfittableDiamondError("fit_diamond: cut window too small");
    if (xLp.size() < 2 || xLm.size() < 2 || xRp.size() < 2 || xRm.size() < 2)
        throw UnfittableDiamondError("fit_diamond: fewer than two edge points per line");

    // v_plunger as a function of v_sd for each of the four edges. The slope
    // comes from the maximal-slope points, regressed through the zero-bias
    // anchor: intercept scatter would otherwise be amplified by extrapolating
    // from the cut window down to v_sd = 0.
    auto fit_edge = [](std::span<const double> vsd, std::span<const double> x,
                       double anchor) {
        num::LineFit f;
        f.intercept = anchor;
        std::vector<double> vs(vsd.begin(), vsd.end()), xs(x.begin(), x.end());
        for (int pass = 0; pass < 2; ++pass) {
            double num_ = 0.0, den = 0.0;
            for (std::size_t i = 0; i < vs.size(); ++i) {
                num_ += (xs[i] - anchor) * vs[i];
                den += vs[i] * vs[i];
            }
            if (den == 0.0) return f;
            f.slope = num_ / den;
            std::vector<double> r(vs.size());
            for (std::size_t i = 0; i < vs.size(); ++i)
                r[i] = xs[i] - (anchor + f.slope * vs[i]);
            double ss = 0.0;
            for (double v : r) ss += v * v;
            f.rms_residual = std::sqrt(ss / static_cast<double>(vs.size()));
            f.n_used = vs.size();
            if (pass == 1) break;
            const double med = num::median(r);
            std::vector<double> ad(r.size());
            for (std::size_t i = 0; i < r.size(); ++i) ad[i] = std::fabs(r[i] - med);
            const double mad = num::median(ad);
            if (mad <= 0.0) break;
            std::vector<double> vk, xk;
            for (std::size_t i = 0; i < r.size(); ++i) {
                if (std::fabs(r[i] - med) <= 5.0 * 1.4826 * mad) {
                    vk.push_back(vs[i]);
                    xk.push_back(xs[i]);
                }
            }
            if (vk.size() < 2 || vk.size() == vs.size()) break;
            vs.swap(vk);
            xs.swap(xk);
        }
        return f;
    };
    const auto fLp = fit_edge(yLp, xLp, anchor_l);
    const auto fLm = fit_edge(yLm, xLm, anchor_l);
    const auto fRp = fit_edge(yRp, xRp, anchor_r);
    const auto fRm = fit_edge(yRm, xRm, anchor_r);

    if (!(fLp.slope > 0.0 && fRp.slope < 0.0 && fLm.slope < 0.0 && fRm.slope > 0.0))
        throw GeometryError("fit_diamond: edge slopes have wrong signs");
    const double smin = std::min({fLp.slope, -fRp.slope, -fLm.slope, fRm.slope});
    const double smax = std::max({fLp.slope, -fRp.slope, -fLm.slope, fRm.slope});
    if (smax > 3.0 * smin) throw GeometryError("fit_diamond: inconsistent edge slopes");

    const double width = 0.5 * (fRp.intercept + fRm.intercept) -
                         0.5 * (fLp.intercept + fLm.intercept);
    const double gap = vps[p1] - vps[p0];
    if (width <= 0.0) throw UnfittableDiamondError("fit_diamond: nonpositive width");
    if (width < 0.4 * gap || width > 1.4 * gap)
        throw GeometryError("fit_diamond: width inconsistent with peak spacing");

    const double v_up = (fRp.intercept - fLp.intercept) / (fLp.slope - fRp.slope);
    const double v_dn = (fRm.intercept - fLm.intercept) / (fLm.slope - fRm.slope);
    const double height = 0.5 * (v_up - v_dn);
    if (height <= 0.0) throw GeometryError("fit_diamond: nonpositive extracted height");
    if (height < 0.3 * hest || height > 1.6 * hest)
        throw GeometryError("fit_diamond: height inconsistent with blockade tip");

    DiamondFit fit;
    fit.c_p_af = capacitance_from_width_af(width);
    fit.c_sigma_af = capacitance_from_width_af(height);
    fit.alpha = fit.c_p_af / fit.c_sigma_af;
    fit.e_c_mev = charging_energy_mev(fit.c_sigma_af);
    auto to_line = [](const num::LineFit& f) {
        // x = m v_sd + x0  ->  v_sd = (x - x0) / m
        return DiamondFit::Line{1.0 / f.slope, f.intercept};
    };
    fit.edge_lines[0] = to_line(fLp);
    fit.edge_lines[1] = to_line(fRp);
    fit.edge_lines[2] = to_line(fLm);
    fit.edge_lines[3] = to_line(fRm);
    const double resid =
        (fLp.rms_residual + fLm.rms_residual + fRp.rms_residual + fRm.rms_residual) / 4.0;
    fit.quality = 1.0 / (1.0 + resid / (0.01 * width));
    return fit;
}

std::vector<SpuriousDetection> detect_spurious(const MeasurementRecord& rec, int column,
                                               const ExtractionOptions& opts) {
    if (rec.spec.axes.size() != 2)
        throw DimensionalityError("detect_spurious: need a 2D record");
    if (rec.spec.axes[0].is_source_drain || rec.spec.axes[1].is_source_drain)
        throw DimensionalityError("detect_spurious: axes must be the two barriers");
    const bool bs_first = rec.spec.axes[0].gate == rec.routing.source_barrier;

    const int k = rec.channel_pos(column);
    const int n1 = rec.points1(), n2 = rec.points2();

    // Averaging runs over the upper part of the other axis, where the channel
    // is open and smooth: the multiplicative barrier modulation survives
    // there, while Coulomb-oscillation stripes (and their harmonics, which
    // would alias onto the wrong axis) do not.
    // Both windows sit in the open-channel part of the map: the cross-axis
    // restriction keeps Coulomb-stripe harmonics from aliasing onto the wrong
    // axis, the own-axis restriction avoids the turn-on knee that defeats the
    // moving-average detrend.
    auto profile_along = [&](int axis) {
        const int np = axis == 0 ? n1 : n2;
        const int nq = axis == 0 ? n2 : n1;
        const int p0 = static_cast<int>(0.3 * (np - 1));
        const int q0 = static_cast<int>(0.6 * (nq - 1));
        std::vector<double> prof;
        prof.reserve(np - p0);
        for (int p = p0; p < np; ++p) {
            double s = 0.0;
            for (int q = q0; q < nq; ++q)
                s += std::fabs(axis == 0 ? rec.current(p, q, k) : rec.current(q, p, k));
            prof.push_back(s / (nq - q0));
        }
        return prof;
    };

    std::vector<SpuriousDetection> out;
    for (int axis = 0; axis < 2; ++axis) {
        auto prof = profile_along(axis);
        const int np = static_cast<int>(prof.size());
        // detrend: divide by a wide moving average, subtract 1
        const int wide = std::max(5, np / 4) | 1;
        auto trend = num::moving_average(prof, wide);
        double pmax = 0.0;
        for (double v : prof) pmax = std::max(pmax, v);
        if (pmax <= 0.0) continue;
        std::vector<double> flat(np);
        for (int p = 0; p < np; ++p)
            flat[p] = prof[p] / std::max(trend[p], 1e-6 * pmax) - 1.0;
        const auto power = num::power_spectrum(flat);
        if (power.size() < 6) continue;
        // bins below 4 cycles belong to the residual turn-on trend
        double total = 0.0;
        int kbest = 4;
        for (std::size_t b = 4; b + 1 < power.size(); ++b) {
            total += power[b];
            if (power[b] > power[kbest]) kbest = static_cast<int>(b);
        }
        if (total <= 0.0) continue;
        // dominant line strength: the winning bin plus its in-band neighbours
        double dom = power[kbest];
        if (kbest - 1 >= 4) dom += power[kbest - 1];
        if (kbest + 2 < static_cast<int>(power.size())) dom += power[kbest + 1];
        const double strength = dom / total;
        if (strength < opts.theta_sp) continue;
        // absolute modulation depth gate: a Hann-windowed cosine of relative
        // amplitude A carries |X_k| ~ A N/4 at the line bin
        const double amp_est = 4.0 * std::sqrt(dom) / np;
        if (amp_est < opts.min_modulation_depth) continue;

        const auto& ax = rec.spec.axes[axis];
        const double step = std::fabs(ax.stop_v - ax.start_v) / (ax.points - 1);
        const double span = step * (np - 1); // span of the analyzed window
        // sub-bin refinement of the dominant frequency
        double kref = kbest;
        if (kbest > 2 && kbest + 2 < static_cast<int>(power.size()))
            kref += num::parabolic_offset(power[kbest - 1], power[kbest], power[kbest + 1]);
        SpuriousDetection det;
        const bool is_source = (axis == 0) == bs_first;
        det.axis = is_source ? BarrierAxis::Source : BarrierAxis::Drain;
        det.period_v = span / kref;
        det.strength = strength;
        out.push_back(det);
    }
    std::sort(out.begin(), out.end(),
              [](const SpuriousDetection& a, const SpuriousDetection& b) {
                  return a.strength > b.strength;
              });
    return out;
}

} // namespace qdsim::extraction

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "qdsim/errors.hpp"
#include "qdsim/extraction.hpp"
#include "qdsim/rng.hpp"

using namespace qdsim;
using namespace qdsim::extraction;
using namespace qdsim::instrument;

namespace {

double sigmoid(double v, double imax, double vt, double k) {
    return imax / (1.0 + std::exp(-k * (v - vt)));
}

// one-dot sample with everything pinned for closed-loop scans
SampleInstance pinned_sample(double cp_af, double cs_af, double vt_p, double vt_b = 0.0) {
    ArrayGeometry g;
    g.n = 1;
    OxideStack st{15.0, 4.5, 0.8};
    DisorderConfig cfg;
    cfg.spurious_rate_coeff_nm = 0.0;
    auto s = synthesize_sample(g, st, cfg, 1, {}, "one");
    auto& d = s.dots[0];
    d.vt_plunger_v = vt_p;
    d.c_p_af = cp_af;
    d.c_sigma_af = cs_af;
    d.gmax_s = 2e-6;
    d.lever_bs = 0.0;
    d.lever_bd = 0.0;
    s.barrier_vts_v = {vt_b, vt_b};
    return s;
}

MeasurementRecord diamond_scan(const SampleInstance& s, double t0_k, std::uint64_t seed = 0,
                               double noise_rel = 0.0, int npts = 101,
                               double barrier_offset_v = 0.0) {
    auto plan = configure_row(s, 1);
    const auto& d = s.dots[0];
    const double period = d.peak_period_v();
    const double tip = charge_over_capacitance_v(d.c_sigma_af);
    SweepSpec spec;
    spec.temperature_k = t0_k;
    spec.v_sd_v = 0.001;
    spec.channels = {1};
    spec.axes = {SweepAxis::of_gate(plan.plunger_gate, d.vt_plunger_v,
                                    d.vt_plunger_v + 2.2 * period, npts),
                 SweepAxis::source_drain(-1.25 * tip, 1.25 * tip, npts)};
    spec.fixed_biases_v[plan.source_barrier] = s.barrier_vt(1) + barrier_offset_v;
    spec.fixed_biases_v[plan.drain_barrier] = s.barrier_vt(2) + barrier_offset_v;
    InstrumentConfig cfg;
    cfg.noise_rel = noise_rel;
    return run_sweep(s, plan, spec, seed, cfg);
}

} // namespace

TEST_CASE("sigmoid threshold fit on exact samples") {
    std::vector<double> v, i;
    for (int k = 0; k < 200; ++k) {
        v.push_back(0.3 + 0.7 * k / 199.0);
        i.push_back(sigmoid(v.back(), 2e-9, 0.64, 25.0));
    }
    auto f = fit_threshold(v, i);
    CHECK(f.converged);
    CHECK(f.v_t_v == doctest::Approx(0.640).epsilon(1e-3 / 0.64)); // +- 1 mV
    CHECK(f.k_per_v == doctest::Approx(25.0).epsilon(1e-6));
    CHECK(f.i_max_a == doctest::Approx(2e-9).epsilon(1e-6));
}

TEST_CASE("flat or empty traces raise the dedicated no-turn-on error") {
    std::vector<double> v, zero, flat;
    for (int k = 0; k < 50; ++k) {
        v.push_back(0.01 * k);
        zero.push_back(0.0);
        flat.push_back(3.3e-9);
    }
    CHECK_THROWS_AS(fit_threshold(v, zero), NoTurnOnError);
    CHECK_THROWS_AS(fit_threshold(v, flat), NoTurnOnError);

    std::vector<double> few_v{0.0, 0.1, 0.2}, few_i{0.0, 1.0, 2.0};
    CHECK_THROWS_AS(fit_threshold(few_v, few_i), InsufficientDataError);

    auto bad_v = v;
    std::swap(bad_v[10], bad_v[11]);
    std::vector<double> ramp;
    for (int k = 0; k < 50; ++k) ramp.push_back(sigmoid(v[k], 1e-9, 0.3, 30.0));
    CHECK_THROWS_AS(fit_threshold(bad_v, ramp), DataError);
}

TEST_CASE("decreasing trace is reported unconverged, not an error") {
    std::vector<double> v, i;
    for (int k = 0; k < 100; ++k) {
        v.push_back(0.01 * k);
        i.push_back(sigmoid(v.back(), 2e-9, 0.5, -18.0));
    }
    auto f = fit_threshold(v, i);
    CHECK_FALSE(f.converged);
}

TEST_CASE("threshold fit equivariance under voltage shift and current scale") {
    std::vector<double> v, i;
    for (int k = 0; k < 150; ++k) {
        v.push_back(0.2 + 0.8 * k / 149.0);
        i.push_back(sigmoid(v.back(), 1.7e-9, 0.55, 22.0) +
                    2e-11 * std::sin(13.0 * k)); // mild deterministic ripple
    }
    auto base = fit_threshold(v, i);
    REQUIRE(base.converged);

    const double shift = 0.37;
    std::vector<double> vs = v;
    for (auto& x : vs) x += shift;
    auto shifted = fit_threshold(vs, i);
    CHECK(shifted.v_t_v == doctest::Approx(base.v_t_v + shift).epsilon(1e-7));
    CHECK(shifted.k_per_v == doctest::Approx(base.k_per_v).epsilon(1e-6));

    const double scale = 3.7;
    std::vector<double> is = i;
    for (auto& x : is) x *= scale;
    auto scaled = fit_threshold(v, is);
    CHECK(scaled.v_t_v == doctest::Approx(base.v_t_v).epsilon(1e-7));
    CHECK(scaled.k_per_v == doctest::Approx(base.k_per_v).epsilon(1e-6));
    CHECK(scaled.i_max_a == doctest::Approx(base.i_max_a * scale).epsilon(1e-6));
}

TEST_CASE("noisy threshold recovery: 95th percentile within 5 mV") {
    std::vector<double> errors;
    for (int trial = 0; trial < 100; ++trial) {
        const double vt = 0.5 + 0.002 * trial;
        const double imax = 2e-9, k = 20.0 + 0.1 * trial;
        std::vector<double> v, i;
        for (int s = 0; s < 200; ++s) {
            v.push_back(0.0 + 1.5 * s / 199.0);
            const double noise =
                0.02 * imax *
                rng::standard_normal(4242, {static_cast<std::uint64_t>(trial),
                                            static_cast<std::uint64_t>(s)});
            i.push_back(sigmoid(v.back(), imax, vt, k) + noise);
        }
        auto f = fit_threshold(v, i);
        REQUIRE(f.converged);
        errors.push_back(std::fabs(f.v_t_v - vt));
    }
    std::sort(errors.begin(), errors.end());
    CHECK(errors[94] < 0.005);
}

TEST_CASE("diamond fit recovers capacitances on a noiseless scan") {
    auto s = pinned_sample(3.0, 40.0, 0.3);
    const double t0 = 0.02 * s.dots[0].e_c_mev() * 1e-3 / kConstants.k_b;
    auto rec = diamond_scan(s, t0);
    auto fit = fit_diamond(rec, 1);
    CHECK(fit.c_p_af == doctest::Approx(3.0).epsilon(0.02));
    CHECK(fit.c_sigma_af == doctest::Approx(40.0).epsilon(0.02));
    // derived identities are exact by construction
    CHECK(fit.alpha == doctest::Approx(fit.c_p_af / fit.c_sigma_af).epsilon(1e-12));
    CHECK(fit.e_c_mev == doctest::Approx(charging_energy_mev(fit.c_sigma_af)).epsilon(1e-12));
    CHECK(fit.quality > 0.5);
    // edge line slopes approach +-2 alpha
    CHECK(std::fabs(fit.edge_lines[0].slope) == doctest::Approx(2.0 * 0.075).epsilon(0.05));
}

TEST_CASE("width inversion: 53.4 mV equals 3.000 aF") {
    CHECK(capacitance_from_width_af(0.0534058878) == doctest::Approx(3.0).epsilon(1e-9));
    CHECK_THROWS_AS(capacitance_from_width_af(0.0), GeometryError);
}

TEST_CASE("diamond fit across the lever-arm range stays within 2%") {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> ua(0.05, 0.5), ue(1.0, 8.0);
    for (int trial = 0; trial < 6; ++trial) {
        const double alpha = ua(gen), ec_mev = ue(gen);
        const double cs = kConstants.e_charge / (ec_mev * 1e-3) * 1e18;
        const double cp = alpha * cs;
        auto s = pinned_sample(cp, cs, 0.3);
        const double t0 = 0.02 * ec_mev * 1e-3 / kConstants.k_b;
        auto rec = diamond_scan(s, t0);
        auto fit = fit_diamond(rec, 1);
        CHECK(fit.c_p_af == doctest::Approx(cp).epsilon(0.02));
        CHECK(fit.c_sigma_af == doctest::Approx(cs).epsilon(0.02));
    }
}

TEST_CASE("pinched-off scan raises unfittable-diamond") {
    auto s = pinned_sample(3.0, 40.0, 0.3);
    // barriers 0.6 V below threshold: transport drowns in the noise floor
    auto rec = diamond_scan(s, 1.0, 2, 0.01, 101, -0.6);
    CHECK_THROWS_AS(fit_diamond(rec, 1), UnfittableDiamondError);
}

TEST_CASE("diamond fit requires a 2D scan with one source-drain axis") {
    auto s = pinned_sample(3.0, 40.0, 0.3);
    auto plan = configure_row(s, 1);
    SweepSpec spec;
    spec.channels = {1};
    spec.axes = {SweepAxis::of_gate(plan.plunger_gate, 0.1, 0.5, 51)};
    spec.fixed_biases_v[plan.source_barrier] = 0.0;
    spec.fixed_biases_v[plan.drain_barrier] = 0.0;
    auto rec1d = run_sweep(s, plan, spec, 0);
    CHECK_THROWS_AS(fit_diamond(rec1d, 1), DimensionalityError);
}

namespace {

MeasurementRecord barrier_map_record(const SampleInstance& s, double v_plunger, double half_span,
                                     int npts, std::uint64_t seed, double noise_rel,
                                     int row = 1) {
    auto plan = configure_row(s, row);
    SweepSpec spec;
    spec.channels.clear();
    for (int c = 1; c <= s.geometry.n; ++c) spec.channels.push_back(c);
    const double center = 0.5 * (s.barrier_vt(row) + s.barrier_vt(row + 1));
    spec.axes = {SweepAxis::of_gate(plan.source_barrier, center - half_span, center + half_span,
                                    npts),
                 SweepAxis::of_gate(plan.drain_barrier, center - half_span, center + half_span,
                                    npts)};
    spec.fixed_biases_v[plan.plunger_gate] = v_plunger;
    InstrumentConfig cfg;
    cfg.noise_rel = noise_rel;
    return run_sweep(s, plan, spec, seed, cfg);
}

SampleInstance map_sample(int n, std::uint64_t seed, double vt_b = 0.85) {
    ArrayGeometry g;
    g.n = n;
    OxideStack st{15.0, 4.5, 0.8};
    DisorderConfig cfg;
    cfg.spurious_rate_coeff_nm = 0.0;
    cfg.outlier_prob = 0.0;
    cfg.strain_coeff_a_mvnm = 0.0;
    cfg.pelgrom_coeff_b_mv_per_nm = 0.0;
    cfg.sigma0_mv = 0.0;
    cfg.mean_vt_barrier_v = vt_b;
    SynthesisTuning tuning;
    tuning.alpha_rel_spread = 0.0;
    tuning.cp_rel_spread = 0.0;
    tuning.gmax_log_spread = 0.0;
    return synthesize_sample(g, st, cfg, seed, tuning, "map");
}

} // namespace

TEST_CASE("barrier map of a clean dot yields candidates including the top-contrast point") {
    auto s = map_sample(1, 3);
    auto rec = barrier_map_record(s, s.dots[0].vt_plunger_v + 0.25, 0.35, 121, 4, 0.0);
    auto an = analyze_barrier_map(rec, 1);
    REQUIRE_FALSE(an.candidates.empty());
    const auto best = std::max_element(
        an.candidates.begin(), an.candidates.end(),
        [](const auto& a, const auto& b) { return a.contrast_a < b.contrast_a; });
    CHECK(an.mask_at(best->i_bs, best->i_bd));
    // oscillation mask marks a sizable region
    int on = 0;
    for (auto m : an.mask) on += m;
    CHECK(on > 50);
}

TEST_CASE("fully pinched barrier map yields no candidates") {
    auto s = map_sample(1, 5, /*vt_b=*/3.0); // thresholds far above the swept window
    auto rec = barrier_map_record(s, s.dots[0].vt_plunger_v + 0.25, 0.3, 81, 2, 0.001);
    // sweep sits entirely below threshold: override the window center
    auto plan = configure_row(s, 1);
    SweepSpec spec;
    spec.channels = {1};
    spec.axes = {SweepAxis::of_gate(plan.source_barrier, 0.2, 0.8, 81),
                 SweepAxis::of_gate(plan.drain_barrier, 0.2, 0.8, 81)};
    spec.fixed_biases_v[plan.plunger_gate] = s.dots[0].vt_plunger_v + 0.25;
    InstrumentConfig cfg;
    cfg.noise_rel = 0.001;
    rec = run_sweep(s, plan, spec, 2, cfg);
    auto an = analyze_barrier_map(rec, 1);
    CHECK(an.candidates.empty());
}

TEST_CASE("barrier map analysis needs a 2D record") {
    auto s = map_sample(1, 3);
    auto plan = configure_row(s, 1);
    SweepSpec spec;
    spec.channels = {1};
    spec.axes = {SweepAxis::of_gate(plan.source_barrier, 0.5, 1.2, 51)};
    spec.fixed_biases_v[plan.plunger_gate] = 1.0;
    spec.fixed_biases_v[plan.drain_barrier] = 1.0;
    auto rec = run_sweep(s, plan, spec, 0);
    CHECK_THROWS_AS(analyze_barrier_map(rec, 1), DimensionalityError);
}

TEST_CASE("oscillation detection survives an injected spurious dot") {
    auto s = map_sample(1, 3);
    s.spurious.push_back({1, 1, 0.05, 0.04, 0.5}); // source-barrier modulation
    auto rec = barrier_map_record(s, s.dots[0].vt_plunger_v + 0.25, 0.35, 121, 4, 0.0);
    auto an = analyze_barrier_map(rec, 1);
    CHECK_FALSE(an.candidates.empty());
}

TEST_CASE("common bias selection: all shared, split, all failed") {
    BarrierMapAnalysis a;
    a.n_bs = a.n_bd = 10;
    a.mask.assign(100, 0);
    for (int i = 3; i <= 5; ++i) a.candidates.push_back({i, 4, 0.1 * i, 0.4, 1e-10, 5e-11});

    // seven identical candidate sets: everyone shares
    std::vector<std::pair<int, const BarrierMapAnalysis*>> maps;
    for (int c = 1; c <= 7; ++c) maps.push_back({c, &a});
    auto d = select_common_bias(maps);
    CHECK(d.shared_ok.size() == 7);
    CHECK(d.individual_points.empty());
    CHECK(d.failed.empty());
    REQUIRE(d.shared_point.has_value());

    // six overlapping + one disjoint: 6 shared, 1 individual
    BarrierMapAnalysis b = a;
    b.candidates.clear();
    b.candidates.push_back({8, 8, 0.8, 0.8, 2e-10, 5e-11});
    maps.back() = {7, &b};
    d = select_common_bias(maps);
    CHECK(d.shared_ok.size() == 6);
    CHECK(d.individual_points.size() == 1);
    CHECK(d.individual_points.count(7) == 1);
    CHECK(d.individual_points.at(7).first == doctest::Approx(0.8));
    CHECK(d.failed.empty());

    // all empty: everyone fails
    BarrierMapAnalysis e;
    e.n_bs = e.n_bd = 10;
    e.mask.assign(100, 0);
    maps.clear();
    for (int c = 1; c <= 3; ++c) maps.push_back({c, &e});
    d = select_common_bias(maps);
    CHECK(d.failed.size() == 3);
    CHECK(d.shared_ok.empty());
    CHECK_FALSE(d.shared_point.has_value());
}

TEST_CASE("common bias point is maximal and the outputs partition the columns") {
    std::mt19937_64 gen(99);
    std::uniform_int_distribution<int> pos(0, 9), cnt(0, 6);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<BarrierMapAnalysis> store(5);
        std::vector<std::pair<int, const BarrierMapAnalysis*>> maps;
        for (int c = 0; c < 5; ++c) {
            store[c].n_bs = store[c].n_bd = 10;
            const int m = cnt(gen);
            for (int k = 0; k < m; ++k) {
                const int i = pos(gen), j = pos(gen);
                store[c].candidates.push_back({i, j, 0.1 * i, 0.1 * j, 1e-10, 5e-11});
            }
            maps.push_back({c + 1, &store[c]});
        }
        auto d = select_common_bias(maps);
        // partition
        std::set<int> all;
        for (int c : d.shared_ok) all.insert(c);
        for (const auto& [c, p] : d.individual_points) all.insert(c);
        for (int c : d.failed) all.insert(c);
        CHECK(all.size() == 5);
        CHECK(d.shared_ok.size() + d.individual_points.size() + d.failed.size() == 5);
        // maximality: no grid point covers more columns than the chosen one
        std::map<std::pair<int, int>, std::set<int>> cover;
        for (const auto& [c, m] : maps)
            for (const auto& cd : m->candidates) cover[{cd.i_bs, cd.i_bd}].insert(c);
        std::size_t best = 0;
        for (const auto& [k, v] : cover) best = std::max(best, v.size());
        CHECK(d.shared_ok.size() == best);
    }
}

TEST_CASE("spurious detection finds the modulated axis with the right period") {
    auto s = map_sample(1, 3);
    s.spurious.push_back({1, 1, 0.05, 0.04, 0.5}); // under B_1 = source barrier of row 1
    auto rec = barrier_map_record(s, s.dots[0].vt_plunger_v + 0.25, 0.5, 161, 4, 0.0);
    auto dets = detect_spurious(rec, 1);
    REQUIRE_FALSE(dets.empty());
    CHECK(dets[0].axis == BarrierAxis::Source);
    // one frequency bin at this span is 1.0/161-ish of the 1.0 V span
    const double bin_v = 1.0 / std::floor(1.0 / 0.04);
    CHECK(dets[0].period_v == doctest::Approx(0.04).epsilon(bin_v / 0.04));
    // the clean drain axis must not be reported
    for (const auto& det : dets) CHECK(det.axis != BarrierAxis::Drain);
}

TEST_CASE("no modulation, no detection") {
    auto s = map_sample(1, 3);
    auto rec = barrier_map_record(s, s.dots[0].vt_plunger_v + 0.25, 0.5, 161, 4, 0.0);
    CHECK(detect_spurious(rec, 1).empty());
}

TEST_CASE("axis exclusivity holds for depth 0.3 and at least 4 periods") {
    for (double period : {0.05, 0.1}) {
        auto s = map_sample(1, 17);
        s.spurious.push_back({2, 1, 0.05, period, 0.3}); // drain barrier of row 1
        auto rec = barrier_map_record(s, s.dots[0].vt_plunger_v + 0.25, 0.5, 161, 4, 0.0);
        auto dets = detect_spurious(rec, 1);
        REQUIRE_FALSE(dets.empty());
        for (const auto& det : dets) CHECK(det.axis == BarrierAxis::Drain);
    }
}

TEST_CASE("spurious dot under a shared barrier shows on both adjacent rows") {
    // rows 3 and 4 share barrier B_4: drain axis above, source axis below
    ArrayGeometry g;
    g.n = 7;
    OxideStack st{15.0, 4.5, 0.8};
    DisorderConfig cfg;
    cfg.spurious_rate_coeff_nm = 0.0;
    cfg.outlier_prob = 0.0;
    auto s = synthesize_sample(g, st, cfg, 23, {}, "two-row");
    s.spurious.push_back({4, 3, 0.05, 0.04, 0.5});

    for (int row : {3, 4}) {
        auto rec = barrier_map_record(s, 1.3, 0.5, 161, 6, 0.0, row);
        auto dets = detect_spurious(rec, 3);
        REQUIRE_FALSE(dets.empty());
        CHECK(dets[0].axis == (row == 3 ? BarrierAxis::Drain : BarrierAxis::Source));
        // a clean neighbouring column shows nothing
        CHECK(detect_spurious(rec, 4).empty());
    }
    // unaffected row
    auto rec = barrier_map_record(s, 1.3, 0.5, 161, 6, 0.0, 5);
    CHECK(detect_spurious(rec, 3).empty());
}

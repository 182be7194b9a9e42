#include "qdsim/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "qdsim/errors.hpp"
#include "qdsim/rng.hpp"

namespace qdsim::config {

using nlohmann::json;

namespace {

template <typename T>
void maybe(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

DisorderConfig parse_disorder(const json& j, DisorderConfig base) {
    maybe(j, "strain_coeff_a_mvnm", base.strain_coeff_a_mvnm);
    maybe(j, "pelgrom_coeff_b_mv_per_nm", base.pelgrom_coeff_b_mv_per_nm);
    maybe(j, "sigma0_mv", base.sigma0_mv);
    maybe(j, "outlier_prob", base.outlier_prob);
    maybe(j, "outlier_scale", base.outlier_scale);
    maybe(j, "spurious_rate_coeff_nm", base.spurious_rate_coeff_nm);
    maybe(j, "mean_vt_plunger_v", base.mean_vt_plunger_v);
    maybe(j, "mean_vt_barrier_v", base.mean_vt_barrier_v);
    if (j.contains("barrier_strain_coeff_a_mvnm") && !j.at("barrier_strain_coeff_a_mvnm").is_null())
        base.barrier_strain_coeff_a_mvnm = j.at("barrier_strain_coeff_a_mvnm").get<double>();
    if (j.contains("barrier_pelgrom_coeff_b_mv_per_nm") &&
        !j.at("barrier_pelgrom_coeff_b_mv_per_nm").is_null())
        base.barrier_pelgrom_coeff_b_mv_per_nm =
            j.at("barrier_pelgrom_coeff_b_mv_per_nm").get<double>();
    return base;
}

} // namespace

PipelineConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }

    PipelineConfig cfg;
    if (j.contains("seed")) {
        cfg.seed = j.at("seed").get<std::uint64_t>();
        cfg.seed_set = true;
    }
    maybe(j, "output", cfg.output);

    if (j.contains("geometry")) {
        const auto& g = j.at("geometry");
        maybe(g, "n", cfg.geometry.n);
        maybe(g, "pitch_nm", cfg.geometry.pitch_nm);
        maybe(g, "dot_width_nm", cfg.geometry.dot_width_nm);
        maybe(g, "dot_length_nm", cfg.geometry.dot_length_nm);
    }
    if (j.contains("disorder")) cfg.disorder = parse_disorder(j.at("disorder"), cfg.disorder);
    if (j.contains("tuning")) {
        const auto& t = j.at("tuning");
        maybe(t, "alpha0", cfg.tuning.alpha0);
        maybe(t, "alpha_rel_spread", cfg.tuning.alpha_rel_spread);
        maybe(t, "cp_rel_spread", cfg.tuning.cp_rel_spread);
        maybe(t, "gmax_mean_s", cfg.tuning.gmax_mean_s);
        maybe(t, "gmax_log_spread", cfg.tuning.gmax_log_spread);
        maybe(t, "lever_bs", cfg.tuning.lever_bs);
        maybe(t, "lever_bd", cfg.tuning.lever_bd);
    }
    if (j.contains("samples")) {
        for (const auto& sj : j.at("samples")) {
            SampleConfig s;
            if (!sj.contains("label")) throw ConfigError("config: sample without label");
            s.label = sj.at("label").get<std::string>();
            maybe(sj, "t1_nm", s.t1_nm);
            maybe(sj, "delta2_nm", s.delta2_nm);
            maybe(sj, "delta3_nm", s.delta3_nm);
            if (sj.contains("match_group")) s.match_group = sj.at("match_group").get<int>();
            if (sj.contains("dead_columns"))
                s.dead_columns = sj.at("dead_columns").get<std::vector<int>>();
            if (sj.contains("disorder"))
                s.disorder_override = parse_disorder(sj.at("disorder"), cfg.disorder);
            cfg.samples.push_back(std::move(s));
        }
    }
    if (j.contains("campaign")) {
        const auto& c = j.at("campaign");
        auto& cs = cfg.campaign;
        maybe(c, "temperature_k", cs.temperature_k);
        maybe(c, "v_sd_v", cs.v_sd_v);
        maybe(c, "noise_rel", cs.noise_rel);
        maybe(c, "turnon_start_v", cs.turnon_start_v);
        maybe(c, "turnon_stop_v", cs.turnon_stop_v);
        maybe(c, "turnon_points", cs.turnon_points);
        maybe(c, "barrier_half_span_v", cs.barrier_half_span_v);
        maybe(c, "barrier_points", cs.barrier_points);
        maybe(c, "diamond_points_vp", cs.diamond_points_vp);
        maybe(c, "diamond_points_vsd", cs.diamond_points_vsd);
        maybe(c, "diamond_span_periods", cs.diamond_span_periods);
        maybe(c, "diamond_span_tips", cs.diamond_span_tips);
        maybe(c, "plunger_margin_v", cs.plunger_margin_v);
        maybe(c, "confinement_bias_v", cs.instrument.confinement_bias_v);
        maybe(c, "accumulation_bias_v", cs.instrument.accumulation_bias_v);
    }
    cfg.campaign.instrument.noise_rel = cfg.campaign.noise_rel;
    if (j.contains("extraction")) {
        const auto& e = j.at("extraction");
        auto& eo = cfg.extraction;
        maybe(e, "smooth_window", eo.smooth_window);
        maybe(e, "contrast_window_px", eo.contrast_window_px);
        maybe(e, "theta_osc_floor_rel", eo.theta_osc_floor_rel);
        if (e.contains("current_window")) {
            const auto w = e.at("current_window").get<std::vector<double>>();
            if (w.size() != 2) throw ConfigError("config: current_window needs two entries");
            eo.current_window_lo = w[0];
            eo.current_window_hi = w[1];
        }
        maybe(e, "theta_sp", eo.theta_sp);
        maybe(e, "delta_cut_steps", eo.delta_cut_steps);
    }
    if (j.contains("statistics")) {
        const auto& s = j.at("statistics");
        maybe(s, "central_filter", cfg.statistics.central_filter);
        if (s.contains("filtered_estimator")) {
            const auto name = s.at("filtered_estimator").get<std::string>();
            if (name == "slope") cfg.statistics.estimator = stats::FilteredEstimator::Slope;
            else if (name == "truncated_sd")
                cfg.statistics.estimator = stats::FilteredEstimator::TruncatedSd;
            else throw ConfigError("config: unknown filtered_estimator: " + name);
        }
    }

    if (!cfg.seed_set) throw ConfigError("config: seed is required");
    return cfg;
}

PipelineConfig load_config(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open config: " + path);
    std::ostringstream buf;
    buf << f.rdbuf();
    return parse_config(buf.str());
}

std::uint64_t sample_seed(const PipelineConfig& cfg, std::size_t sample_index) {
    const auto& s = cfg.samples.at(sample_index);
    if (s.match_group)
        return rng::hash_u64(cfg.seed,
                             {rng::kSampleSeed, 1u, static_cast<std::uint64_t>(*s.match_group)});
    return rng::hash_u64(cfg.seed, {rng::kSampleSeed, 0u, static_cast<std::uint64_t>(sample_index)});
}

SampleInstance synthesize_from_config(const PipelineConfig& cfg, std::size_t sample_index) {
    const auto& s = cfg.samples.at(sample_index);
    OxideStack stack{s.t1_nm, s.delta2_nm, s.delta3_nm};
    const auto& disorder = s.disorder_override ? *s.disorder_override : cfg.disorder;
    return synthesize_sample(cfg.geometry, stack, disorder, sample_seed(cfg, sample_index),
                             cfg.tuning, s.label);
}

} // namespace qdsim::config

#include "qdsim/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "qdsim/errors.hpp"
#include "qdsim/rng.hpp"

namespace qdsim {

namespace {

std::string fmt_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double sigma_rss_mv(double a, double b, double sigma0, double t1_nm, double t_gate_nm) {
    if (t1_nm <= 0.0) throw SingularInputError("sigma_vt: t1 must be positive");
    if (t_gate_nm <= 0.0) throw SingularInputError("sigma_vt: t_gate must be positive");
    const double strain = a / t1_nm;
    const double pelgrom = b * t_gate_nm;
    return std::sqrt(strain * strain + pelgrom * pelgrom + sigma0 * sigma0);
}

} // namespace

const DotGroundTruth& SampleInstance::dot(int row, int col) const {
    const int n = geometry.n;
    if (row < 1 || row > n || col < 1 || col > n)
        throw AddressingError("dot index out of range");
    return dots[static_cast<std::size_t>((row - 1) * n + (col - 1))];
}

double SampleInstance::barrier_vt(int barrier_index) const {
    if (barrier_index < 1 || barrier_index > geometry.n + 1)
        throw AddressingError("barrier index out of range");
    return barrier_vts_v[static_cast<std::size_t>(barrier_index - 1)];
}

std::vector<SpuriousDotSpec> SampleInstance::spurious_for_dot(int row, int col) const {
    std::vector<SpuriousDotSpec> out;
    for (const auto& sp : spurious) {
        if (sp.col != col) continue;
        if (sp.barrier_index == row || sp.barrier_index == row + 1) out.push_back(sp);
    }
    return out;
}

EffectiveThicknesses effective_thicknesses(double t1_nominal_nm, double delta2_nm,
                                           double delta3_nm) {
    if (t1_nominal_nm <= 0.0)
        throw ConfigError("effective_thicknesses: t1 must be positive");
    if (delta2_nm < 0.0 || delta3_nm < 0.0)
        throw ConfigError("effective_thicknesses: inter-layer oxides must be non-negative");
    const double t2 = t1_nominal_nm + delta2_nm;
    return {t1_nominal_nm, t2, t2 + delta3_nm};
}

double sigma_vt_mv(double t1_nm, double t_gate_nm, const DisorderConfig& cfg) {
    return sigma_rss_mv(cfg.strain_coeff_a_mvnm, cfg.pelgrom_coeff_b_mv_per_nm, cfg.sigma0_mv,
                        t1_nm, t_gate_nm);
}

double sigma_vt_barrier_mv(double t1_nm, double t_gate_nm, const DisorderConfig& cfg) {
    const double a = cfg.barrier_strain_coeff_a_mvnm.value_or(cfg.strain_coeff_a_mvnm);
    const double b = cfg.barrier_pelgrom_coeff_b_mv_per_nm.value_or(cfg.pelgrom_coeff_b_mv_per_nm);
    return sigma_rss_mv(a, b, cfg.sigma0_mv, t1_nm, t_gate_nm);
}

double plunger_capacitance_af(double area_nm2, double t2_nm, const PhysicalConstants& c) {
    if (area_nm2 <= 0.0 || t2_nm <= 0.0)
        throw ConfigError("plunger_capacitance: area and t2 must be positive");
    const double farad = c.eps0 * c.epsr_sio2 * (area_nm2 * 1e-18) / (t2_nm * 1e-9);
    return farad * 1e18;
}

SampleInstance synthesize_sample(const ArrayGeometry& geometry, const OxideStack& stack,
                                 const DisorderConfig& cfg, std::uint64_t seed,
                                 const SynthesisTuning& tuning, const std::string& label) {
    if (geometry.n < 1) throw ConfigError("synthesize_sample: n must be >= 1");
    if (stack.t1_nm <= 0.0) throw ConfigError("synthesize_sample: t1 must be positive");
    if (cfg.outlier_prob < 0.0 || cfg.outlier_prob > 1.0)
        throw ConfigError("synthesize_sample: outlier_prob must be in [0,1]");

    SampleInstance s;
    s.geometry = geometry;
    s.stack = stack;
    s.seed = seed;
    s.label = label;

    const int n = geometry.n;
    // Both disorder terms taken at the gate family's own net oxide thickness:
    // t2 for plungers, t3 for barriers.
    const double sigma_p_v = sigma_vt_mv(stack.t2_nm(), stack.t2_nm(), cfg) * 1e-3;
    const double sigma_b_v = sigma_vt_barrier_mv(stack.t3_nm(), stack.t3_nm(), cfg) * 1e-3;
    const double cp_model_af = plunger_capacitance_af(geometry.dot_area_nm2(), stack.t2_nm());

    s.dots.reserve(static_cast<std::size_t>(n) * n);
    for (int r = 1; r <= n; ++r) {
        for (int c = 1; c <= n; ++c) {
            const auto R = static_cast<std::uint64_t>(r);
            const auto C = static_cast<std::uint64_t>(c);
            DotGroundTruth d;
            d.row = r;
            d.col = c;

            double scale = 1.0;
            if (cfg.outlier_prob > 0.0 &&
                rng::uniform(seed, {rng::kOutlierPlunger, R, C}) < cfg.outlier_prob)
                scale = cfg.outlier_scale;
            d.vt_plunger_v = cfg.mean_vt_plunger_v +
                             sigma_p_v * scale * rng::standard_normal(seed, {rng::kVtPlunger, R, C});

            double cp = cp_model_af;
            if (tuning.cp_rel_spread > 0.0)
                cp *= 1.0 + tuning.cp_rel_spread * rng::standard_normal(seed, {rng::kCp, R, C});
            d.c_p_af = std::max(cp, 0.05 * cp_model_af);

            double alpha = tuning.alpha0;
            if (tuning.alpha_rel_spread > 0.0)
                alpha *= 1.0 + tuning.alpha_rel_spread *
                                   rng::standard_normal(seed, {rng::kAlpha, R, C});
            alpha = std::clamp(alpha, tuning.alpha_min, tuning.alpha_max);
            d.c_sigma_af = d.c_p_af / alpha;

            double g = tuning.gmax_mean_s;
            if (tuning.gmax_log_spread > 0.0)
                g *= std::exp(tuning.gmax_log_spread *
                              rng::standard_normal(seed, {rng::kGmax, R, C}));
            d.gmax_s = g;

            d.lever_bs = tuning.lever_bs;
            d.lever_bd = tuning.lever_bd;
            s.dots.push_back(d);
        }
    }

    s.barrier_vts_v.resize(static_cast<std::size_t>(n) + 1);
    for (int k = 1; k <= n + 1; ++k) {
        const auto K = static_cast<std::uint64_t>(k);
        double scale = 1.0;
        if (cfg.outlier_prob > 0.0 &&
            rng::uniform(seed, {rng::kOutlierBarrier, K, 0}) < cfg.outlier_prob)
            scale = cfg.outlier_scale;
        s.barrier_vts_v[static_cast<std::size_t>(k - 1)] =
            cfg.mean_vt_barrier_v +
            sigma_b_v * scale * rng::standard_normal(seed, {rng::kVtBarrier, K, 0});
    }

    const double p_spur = std::min(1.0, cfg.spurious_rate_coeff_nm / stack.t1_nm);
    if (p_spur > 0.0) {
        for (int k = 1; k <= n + 1; ++k) {
            for (int c = 1; c <= n; ++c) {
                const auto K = static_cast<std::uint64_t>(k);
                const auto C = static_cast<std::uint64_t>(c);
                if (rng::uniform(seed, {rng::kSpuriousPresent, K, C}) >= p_spur) continue;
                SpuriousDotSpec sp;
                sp.barrier_index = k;
                sp.col = c;
                sp.period_v = tuning.spurious_period_min_v +
                              (tuning.spurious_period_max_v - tuning.spurious_period_min_v) *
                                  rng::uniform(seed, {rng::kSpuriousPeriod, K, C});
                sp.depth = tuning.spurious_depth_min +
                           (tuning.spurious_depth_max - tuning.spurious_depth_min) *
                               rng::uniform(seed, {rng::kSpuriousDepth, K, C});
                sp.coupling_lever = tuning.spurious_lever_min +
                                    (tuning.spurious_lever_max - tuning.spurious_lever_min) *
                                        rng::uniform(seed, {rng::kSpuriousLever, K, C});
                s.spurious.push_back(sp);
            }
        }
    }
    return s;
}

std::string sample_to_text(const SampleInstance& s) {
    std::ostringstream os;
    os << "# qdsim-sample v1\n";
    os << "label " << s.label << "\n";
    os << "seed " << s.seed << "\n";
    os << "geometry " << s.geometry.n << " " << fmt_g17(s.geometry.pitch_nm) << " "
       << fmt_g17(s.geometry.dot_width_nm) << " " << fmt_g17(s.geometry.dot_length_nm) << "\n";
    os << "stack " << fmt_g17(s.stack.t1_nm) << " " << fmt_g17(s.stack.delta2_nm) << " "
       << fmt_g17(s.stack.delta3_nm) << "\n";
    for (const auto& d : s.dots) {
        os << "dot " << d.row << " " << d.col << " " << fmt_g17(d.vt_plunger_v) << " "
           << fmt_g17(d.c_p_af) << " " << fmt_g17(d.c_sigma_af) << " " << fmt_g17(d.gmax_s) << " "
           << fmt_g17(d.lever_bs) << " " << fmt_g17(d.lever_bd) << "\n";
    }
    for (std::size_t k = 0; k < s.barrier_vts_v.size(); ++k)
        os << "barrier " << (k + 1) << " " << fmt_g17(s.barrier_vts_v[k]) << "\n";
    for (const auto& sp : s.spurious) {
        os << "spurious " << sp.barrier_index << " " << sp.col << " "
           << fmt_g17(sp.coupling_lever) << " " << fmt_g17(sp.period_v) << " "
           << fmt_g17(sp.depth) << "\n";
    }
    return os.str();
}

SampleInstance sample_from_text(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line)) throw ParseError("sample: empty file");
    if (line.rfind("# qdsim-sample ", 0) != 0)
        throw ParseError("sample: missing header");
    if (line != "# qdsim-sample v1")
        throw VersionError("sample: unsupported schema version: " + line);

    SampleInstance s;
    bool have_geometry = false, have_stack = false;
    int dot_count = 0;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "label") {
            std::string rest;
            std::getline(ls, rest);
            if (!rest.empty() && rest[0] == ' ') rest.erase(0, 1);
            s.label = rest;
        } else if (key == "seed") {
            ls >> s.seed;
        } else if (key == "geometry") {
            ls >> s.geometry.n >> s.geometry.pitch_nm >> s.geometry.dot_width_nm >>
                s.geometry.dot_length_nm;
            have_geometry = true;
        } else if (key == "stack") {
            ls >> s.stack.t1_nm >> s.stack.delta2_nm >> s.stack.delta3_nm;
            have_stack = true;
        } else if (key == "dot") {
            DotGroundTruth d;
            ls >> d.row >> d.col >> d.vt_plunger_v >> d.c_p_af >> d.c_sigma_af >> d.gmax_s >>
                d.lever_bs >> d.lever_bd;
            if (ls.fail()) throw ParseError("sample: malformed dot line");
            s.dots.push_back(d);
            ++dot_count;
        } else if (key == "barrier") {
            int k;
            double v;
            ls >> k >> v;
            if (ls.fail()) throw ParseError("sample: malformed barrier line");
            if (static_cast<int>(s.barrier_vts_v.size()) + 1 != k)
                throw ParseError("sample: barrier lines out of order");
            s.barrier_vts_v.push_back(v);
        } else if (key == "spurious") {
            SpuriousDotSpec sp;
            ls >> sp.barrier_index >> sp.col >> sp.coupling_lever >> sp.period_v >> sp.depth;
            if (ls.fail()) throw ParseError("sample: malformed spurious line");
            s.spurious.push_back(sp);
        } else {
            throw ParseError("sample: unknown key: " + key);
        }
    }
    if (!have_geometry || !have_stack) throw ParseError("sample: missing geometry or stack");
    const int n = s.geometry.n;
    if (dot_count != n * n) throw ParseError("sample: truncated dot grid");
    if (static_cast<int>(s.barrier_vts_v.size()) != n + 1)
        throw ParseError("sample: truncated barrier table");
    return s;
}

void save_sample(const SampleInstance& s, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open for writing: " + path);
    f << sample_to_text(s);
}

SampleInstance load_sample(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open for reading: " + path);
    std::ostringstream buf;
    buf << f.rdbuf();
    return sample_from_text(buf.str());
}

} // namespace qdsim

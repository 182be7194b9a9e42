#include "qdsim/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qdsim/errors.hpp"
#include "qdsim/numerics.hpp"
#include "qdsim/rng.hpp"
#include "qdsim/svg.hpp"

namespace qdsim::pipeline {

namespace fs = std::filesystem;
using instrument::Gate;
using instrument::MeasurementRecord;
using instrument::SweepAxis;
using instrument::SweepSpec;

namespace {

std::string fmt_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string mode_name(stats::BiasMode m) {
    switch (m) {
        case stats::BiasMode::Shared: return "shared";
        case stats::BiasMode::Individual: return "individual";
        case stats::BiasMode::Failed: return "failed";
        case stats::BiasMode::Dead: return "dead";
    }
    return "?";
}

stats::BiasMode mode_parse(const std::string& s) {
    if (s == "shared") return stats::BiasMode::Shared;
    if (s == "individual") return stats::BiasMode::Individual;
    if (s == "failed") return stats::BiasMode::Failed;
    if (s == "dead") return stats::BiasMode::Dead;
    throw ParseError("manifest: bad bias mode: " + s);
}

bool is_dead(const std::vector<int>& dead, int col) {
    return std::find(dead.begin(), dead.end(), col) != dead.end();
}

} // namespace

int Manifest::record_count() const {
    int count = static_cast<int>(rows.size()) * 4;
    for (const auto& d : dots)
        if (!d.diamond_file.empty()) ++count;
    return count;
}

std::string manifest_to_text(const Manifest& m) {
    std::ostringstream os;
    os << "# qdsim-manifest v1\n";
    os << "sample_file " << m.sample_file << "\n";
    os << "label " << m.label << "\n";
    os << "n " << m.n << "\n";
    os << "dead_columns";
    for (int c : m.dead_columns) os << " " << c;
    os << "\n";
    for (std::size_t r = 0; r < m.rows.size(); ++r) {
        os << "row " << (r + 1) << " " << m.rows[r].turnon_plunger << " " << m.rows[r].turnon_bs
           << " " << m.rows[r].turnon_bd << " " << m.rows[r].barrier_map << "\n";
        if (m.shared_bias[r])
            os << "bias " << (r + 1) << " " << fmt_g17(m.shared_bias[r]->first) << " "
               << fmt_g17(m.shared_bias[r]->second) << "\n";
        else
            os << "bias " << (r + 1) << " none\n";
    }
    for (const auto& d : m.dots) {
        os << "dot " << d.row << " " << d.col << " " << mode_name(d.mode) << " "
           << (d.diamond_file.empty() ? "-" : d.diamond_file) << " " << fmt_g17(d.v_bs) << " "
           << fmt_g17(d.v_bd) << "\n";
    }
    return os.str();
}

Manifest manifest_from_text(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line)) throw ParseError("manifest: empty file");
    if (line.rfind("# qdsim-manifest ", 0) != 0) throw ParseError("manifest: missing header");
    if (line != "# qdsim-manifest v1")
        throw VersionError("manifest: unsupported schema version: " + line);

    Manifest m;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "sample_file") ls >> m.sample_file;
        else if (key == "label") {
            std::string rest;
            std::getline(ls, rest);
            if (!rest.empty() && rest[0] == ' ') rest.erase(0, 1);
            m.label = rest;
        } else if (key == "n") {
            ls >> m.n;
            m.rows.resize(m.n);
            m.shared_bias.resize(m.n);
        } else if (key == "dead_columns") {
            int c;
            while (ls >> c) m.dead_columns.push_back(c);
        } else if (key == "row") {
            int r;
            ls >> r;
            if (r < 1 || r > m.n) throw ParseError("manifest: row out of range");
            auto& rp = m.rows[static_cast<std::size_t>(r - 1)];
            ls >> rp.turnon_plunger >> rp.turnon_bs >> rp.turnon_bd >> rp.barrier_map;
        } else if (key == "bias") {
            int r;
            std::string a;
            ls >> r >> a;
            if (r < 1 || r > m.n) throw ParseError("manifest: bias row out of range");
            if (a != "none") {
                double vb = std::stod(a), vd;
                ls >> vd;
                m.shared_bias[static_cast<std::size_t>(r - 1)] = {vb, vd};
            }
        } else if (key == "dot") {
            DotEntry d;
            std::string mode, file;
            ls >> d.row >> d.col >> mode >> file >> d.v_bs >> d.v_bd;
            if (ls.fail()) throw ParseError("manifest: malformed dot line");
            d.mode = mode_parse(mode);
            if (file != "-") d.diamond_file = file;
            m.dots.push_back(d);
        } else {
            throw ParseError("manifest: unknown key: " + key);
        }
    }
    if (m.n <= 0) throw ParseError("manifest: missing n");
    return m;
}

void save_manifest(const Manifest& m, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open for writing: " + path);
    f << manifest_to_text(m);
}

Manifest load_manifest(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open for reading: " + path);
    std::ostringstream buf;
    buf << f.rdbuf();
    return manifest_from_text(buf.str());
}

Manifest run_campaign(const SampleInstance& sample, const CampaignSettings& settings,
                      std::uint64_t seed, const std::string& outdir) {
    fs::create_directories(outdir);
    const int n = sample.geometry.n;
    const auto& icfg = settings.instrument;

    Manifest manifest;
    manifest.sample_file = sample.label + ".qdsample";
    manifest.label = sample.label;
    manifest.n = n;
    manifest.dead_columns = icfg.dead_columns;
    manifest.rows.resize(n);
    manifest.shared_bias.resize(n);

    // planning values from the configured geometry/stack
    const double cp_exp = plunger_capacitance_af(sample.geometry.dot_area_nm2(),
                                                 sample.stack.t2_nm());
    const double period_exp = charge_over_capacitance_v(cp_exp);
    const double tip_exp = charge_over_capacitance_v(cp_exp / 0.165);

    std::vector<int> live_channels;
    for (int c = 1; c <= n; ++c)
        if (!is_dead(icfg.dead_columns, c)) live_channels.push_back(c);

    auto record_seed = [&](int row, int kind, int col = 0) {
        return rng::hash_u64(seed, {rng::kRecordSeed, static_cast<std::uint64_t>(row),
                                    static_cast<std::uint64_t>(kind),
                                    static_cast<std::uint64_t>(col)});
    };

    for (int row = 1; row <= n; ++row) {
        const auto plan = instrument::configure_row(sample, row, icfg);
        auto& files = manifest.rows[static_cast<std::size_t>(row - 1)];
        const std::string base = outdir + "/row" + std::to_string(row);

        // turn-on sweeps: the two non-swept row gates sit at the accumulation bias
        SweepSpec ton;
        ton.v_sd_v = settings.v_sd_v;
        ton.temperature_k = settings.temperature_k;
        ton.channels = live_channels.empty() ? std::vector<int>{1} : live_channels;

        SweepSpec ton_p = ton;
        ton_p.axes = {SweepAxis::of_gate(plan.plunger_gate, settings.turnon_start_v,
                                         settings.turnon_stop_v, settings.turnon_points)};
        ton_p.fixed_biases_v[plan.source_barrier] = plan.accumulation_bias_v;
        ton_p.fixed_biases_v[plan.drain_barrier] = plan.accumulation_bias_v;
        auto rec_p = instrument::run_sweep(sample, plan, ton_p, record_seed(row, 1), icfg);
        files.turnon_plunger = "row" + std::to_string(row) + "_turnon_p.qdrec";
        instrument::save_record(rec_p, outdir + "/" + files.turnon_plunger);

        // inline thresholds steer the rest of the row protocol
        std::map<int, double> vt_now;
        for (int c : ton.channels) {
            const int k = rec_p.channel_pos(c);
            std::vector<double> vv(rec_p.points1()), ii(rec_p.points1());
            for (int i = 0; i < rec_p.points1(); ++i) {
                vv[static_cast<std::size_t>(i)] = rec_p.spec.axes[0].value(i);
                ii[static_cast<std::size_t>(i)] = rec_p.current(i, 0, k);
            }
            try {
                auto f = extraction::fit_threshold(vv, ii);
                if (f.converged) vt_now[c] = f.v_t_v;
            } catch (const FitError&) {
            }
        }
        double vt_max = 0.0;
        for (const auto& [c, vt] : vt_now) vt_max = std::max(vt_max, vt);
        if (vt_now.empty()) vt_max = 0.8; // fall back to a generic bias
        const double v_open = vt_max + settings.plunger_margin_v;

        SweepSpec ton_bs = ton;
        ton_bs.axes = {SweepAxis::of_gate(plan.source_barrier, settings.turnon_start_v,
                                          settings.turnon_stop_v, settings.turnon_points)};
        ton_bs.fixed_biases_v[plan.plunger_gate] = v_open;
        ton_bs.fixed_biases_v[plan.drain_barrier] = plan.accumulation_bias_v;
        auto rec_bs = instrument::run_sweep(sample, plan, ton_bs, record_seed(row, 2), icfg);
        files.turnon_bs = "row" + std::to_string(row) + "_turnon_bs.qdrec";
        instrument::save_record(rec_bs, outdir + "/" + files.turnon_bs);

        SweepSpec ton_bd = ton;
        ton_bd.axes = {SweepAxis::of_gate(plan.drain_barrier, settings.turnon_start_v,
                                          settings.turnon_stop_v, settings.turnon_points)};
        ton_bd.fixed_biases_v[plan.plunger_gate] = v_open;
        ton_bd.fixed_biases_v[plan.source_barrier] = plan.accumulation_bias_v;
        auto rec_bd = instrument::run_sweep(sample, plan, ton_bd, record_seed(row, 3), icfg);
        files.turnon_bd = "row" + std::to_string(row) + "_turnon_bd.qdrec";
        instrument::save_record(rec_bd, outdir + "/" + files.turnon_bd);

        // barrier map centered between the measured barrier thresholds
        auto fitted_vt = [&](const MeasurementRecord& rec) -> std::optional<double> {
            std::vector<double> vts;
            for (int c : ton.channels) {
                const int k = rec.channel_pos(c);
                std::vector<double> vv(rec.points1()), ii(rec.points1());
                for (int i = 0; i < rec.points1(); ++i) {
                    vv[static_cast<std::size_t>(i)] = rec.spec.axes[0].value(i);
                    ii[static_cast<std::size_t>(i)] = rec.current(i, 0, k);
                }
                try {
                    auto f = extraction::fit_threshold(vv, ii);
                    if (f.converged) vts.push_back(f.v_t_v);
                } catch (const FitError&) {
                }
            }
            if (vts.empty()) return std::nullopt;
            return num::median(std::move(vts));
        };
        const auto vt_bs = fitted_vt(rec_bs), vt_bd = fitted_vt(rec_bd);
        const double b_center =
            (vt_bs && vt_bd) ? 0.5 * (*vt_bs + *vt_bd) : (vt_bs ? *vt_bs : vt_bd.value_or(0.85));
        SweepSpec map = ton;
        map.axes = {SweepAxis::of_gate(plan.source_barrier,
                                       b_center - settings.barrier_half_span_v,
                                       b_center + settings.barrier_half_span_v,
                                       settings.barrier_points),
                    SweepAxis::of_gate(plan.drain_barrier,
                                       b_center - settings.barrier_half_span_v,
                                       b_center + settings.barrier_half_span_v,
                                       settings.barrier_points)};
        map.fixed_biases_v[plan.plunger_gate] = v_open;
        auto rec_map = instrument::run_sweep(sample, plan, map, record_seed(row, 4), icfg);
        files.barrier_map = "row" + std::to_string(row) + "_barrier_map.qdrec";
        instrument::save_record(rec_map, outdir + "/" + files.barrier_map);

        // common bias from the per-channel candidate sets
        std::vector<extraction::BarrierMapAnalysis> analyses;
        analyses.reserve(ton.channels.size());
        std::vector<std::pair<int, const extraction::BarrierMapAnalysis*>> maps;
        for (int c : ton.channels) analyses.push_back(extraction::analyze_barrier_map(rec_map, c));
        for (std::size_t i = 0; i < analyses.size(); ++i)
            maps.push_back({ton.channels[i], &analyses[i]});
        const auto decision = extraction::select_common_bias(maps);
        manifest.shared_bias[static_cast<std::size_t>(row - 1)] = decision.shared_point;

        // per-dot diamond scans at the chosen bias
        for (int c = 1; c <= n; ++c) {
            DotEntry entry;
            entry.row = row;
            entry.col = c;
            if (is_dead(icfg.dead_columns, c)) {
                entry.mode = stats::BiasMode::Dead;
                manifest.dots.push_back(entry);
                continue;
            }
            std::pair<double, double> bias;
            if (decision.shared_ok.count(c) && decision.shared_point) {
                entry.mode = stats::BiasMode::Shared;
                bias = *decision.shared_point;
            } else if (decision.individual_points.count(c)) {
                entry.mode = stats::BiasMode::Individual;
                bias = decision.individual_points.at(c);
            } else {
                entry.mode = stats::BiasMode::Failed;
                manifest.dots.push_back(entry);
                continue;
            }
            if (!vt_now.count(c)) {
                entry.mode = stats::BiasMode::Failed;
                manifest.dots.push_back(entry);
                continue;
            }
            entry.v_bs = bias.first;
            entry.v_bd = bias.second;

            const double vstart = vt_now[c] + settings.diamond_start_offset_periods * period_exp;
            SweepSpec dia;
            dia.v_sd_v = settings.v_sd_v;
            dia.temperature_k = settings.temperature_k;
            dia.channels = {c};
            dia.axes = {SweepAxis::of_gate(plan.plunger_gate, vstart,
                                           vstart + settings.diamond_span_periods * period_exp,
                                           settings.diamond_points_vp),
                        SweepAxis::source_drain(-settings.diamond_span_tips * tip_exp,
                                                settings.diamond_span_tips * tip_exp,
                                                settings.diamond_points_vsd)};
            dia.fixed_biases_v[plan.source_barrier] = bias.first;
            dia.fixed_biases_v[plan.drain_barrier] = bias.second;
            auto rec_dia = instrument::run_sweep(sample, plan, dia, record_seed(row, 5, c), icfg);
            entry.diamond_file =
                "row" + std::to_string(row) + "_col" + std::to_string(c) + "_diamond.qdrec";
            instrument::save_record(rec_dia, outdir + "/" + entry.diamond_file);
            manifest.dots.push_back(entry);
        }
    }

    save_manifest(manifest, outdir + "/manifest.qdmanifest");
    return manifest;
}

std::string extraction_report_to_text(const ExtractionReport& r) {
    std::ostringstream os;
    os << "# qdsim-extraction v1\n";
    os << "label " << r.label << "\n";
    os << "stack " << fmt_g17(r.stack.t1_nm) << " " << fmt_g17(r.stack.delta2_nm) << " "
       << fmt_g17(r.stack.delta3_nm) << "\n";
    os << "n " << r.n << "\n";
    for (const auto& d : r.dots) {
        os << "dot " << d.row << " " << d.col << " " << mode_name(d.mode) << " "
           << fmt_g17(d.vt_plunger_v) << " " << fmt_g17(d.vt_bs_v) << " " << fmt_g17(d.vt_bd_v)
           << " " << (d.diamond_ok ? 1 : 0) << " " << fmt_g17(d.c_p_af) << " "
           << fmt_g17(d.c_sigma_af) << " " << fmt_g17(d.alpha) << " " << fmt_g17(d.e_c_mev)
           << " " << fmt_g17(d.quality) << " " << (d.spurious_bs ? 1 : 0) << " "
           << fmt_g17(d.spurious_bs_period_v) << " " << (d.spurious_bd ? 1 : 0) << " "
           << fmt_g17(d.spurious_bd_period_v) << "\n";
    }
    return os.str();
}

ExtractionReport extraction_report_from_text(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line)) throw ParseError("extraction report: empty file");
    if (line.rfind("# qdsim-extraction ", 0) != 0)
        throw ParseError("extraction report: missing header");
    if (line != "# qdsim-extraction v1")
        throw VersionError("extraction report: unsupported schema version: " + line);
    ExtractionReport r;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "label") {
            std::string rest;
            std::getline(ls, rest);
            if (!rest.empty() && rest[0] == ' ') rest.erase(0, 1);
            r.label = rest;
        } else if (key == "stack") {
            ls >> r.stack.t1_nm >> r.stack.delta2_nm >> r.stack.delta3_nm;
        } else if (key == "n") {
            ls >> r.n;
        } else if (key == "dot") {
            DotExtraction d;
            std::string mode;
            int ok, sbs, sbd;
            // stream extraction rejects "nan"; parse doubles via strtod
            auto next_double = [&ls]() {
                std::string tok;
                ls >> tok;
                if (tok.empty()) throw ParseError("extraction report: malformed dot line");
                char* end = nullptr;
                const double v = std::strtod(tok.c_str(), &end);
                if (end == tok.c_str()) throw ParseError("extraction report: malformed dot line");
                return v;
            };
            ls >> d.row >> d.col >> mode;
            d.vt_plunger_v = next_double();
            d.vt_bs_v = next_double();
            d.vt_bd_v = next_double();
            ls >> ok;
            d.c_p_af = next_double();
            d.c_sigma_af = next_double();
            d.alpha = next_double();
            d.e_c_mev = next_double();
            d.quality = next_double();
            ls >> sbs;
            d.spurious_bs_period_v = next_double();
            ls >> sbd;
            d.spurious_bd_period_v = next_double();
            if (ls.fail()) throw ParseError("extraction report: malformed dot line");
            d.mode = mode_parse(mode);
            d.diamond_ok = ok != 0;
            d.spurious_bs = sbs != 0;
            d.spurious_bd = sbd != 0;
            r.dots.push_back(d);
        } else {
            throw ParseError("extraction report: unknown key: " + key);
        }
    }
    if (r.n <= 0) throw ParseError("extraction report: missing n");
    return r;
}

void save_extraction_report(const ExtractionReport& r, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open for writing: " + path);
    f << extraction_report_to_text(r);
}

ExtractionReport load_extraction_report(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open for reading: " + path);
    std::ostringstream buf;
    buf << f.rdbuf();
    return extraction_report_from_text(buf.str());
}

ExtractionReport extract_campaign(const Manifest& manifest, const std::string& dir,
                                  const extraction::ExtractionOptions& opts) {
    ExtractionReport report;
    report.label = manifest.label;
    report.n = manifest.n;
    {
        // stack travels with the sample file when present
        const auto sample_path = fs::path(dir) / manifest.sample_file;
        if (fs::exists(sample_path)) {
            const auto sample = load_sample(sample_path.string());
            report.stack = sample.stack;
        }
    }

    std::map<std::pair<int, int>, DotExtraction> dots;
    for (const auto& d : manifest.dots) {
        DotExtraction e;
        e.row = d.row;
        e.col = d.col;
        e.mode = d.mode;
        dots[{d.row, d.col}] = e;
    }

    for (int row = 1; row <= manifest.n; ++row) {
        const auto& files = manifest.rows[static_cast<std::size_t>(row - 1)];
        if (files.turnon_plunger.empty()) continue;
        const auto rec_p = instrument::load_record(dir + "/" + files.turnon_plunger);
        const auto rec_bs = instrument::load_record(dir + "/" + files.turnon_bs);
        const auto rec_bd = instrument::load_record(dir + "/" + files.turnon_bd);
        const auto rec_map = instrument::load_record(dir + "/" + files.barrier_map);

        auto fit_trace = [&](const MeasurementRecord& rec, int col) -> double {
            const int k = rec.channel_pos(col);
            std::vector<double> vv(rec.points1()), ii(rec.points1());
            for (int i = 0; i < rec.points1(); ++i) {
                vv[static_cast<std::size_t>(i)] = rec.spec.axes[0].value(i);
                ii[static_cast<std::size_t>(i)] = rec.current(i, 0, k);
            }
            auto f = extraction::fit_threshold(vv, ii);
            if (!f.converged) throw FitError("threshold fit did not converge");
            return f.v_t_v;
        };

        for (int col = 1; col <= manifest.n; ++col) {
            auto it = dots.find({row, col});
            if (it == dots.end() || it->second.mode == stats::BiasMode::Dead) continue;
            auto& e = it->second;
            try { e.vt_plunger_v = fit_trace(rec_p, col); } catch (const Error&) {}
            try { e.vt_bs_v = fit_trace(rec_bs, col); } catch (const Error&) {}
            try { e.vt_bd_v = fit_trace(rec_bd, col); } catch (const Error&) {}
            try {
                for (const auto& det : extraction::detect_spurious(rec_map, col, opts)) {
                    if (det.axis == extraction::BarrierAxis::Source) {
                        e.spurious_bs = true;
                        e.spurious_bs_period_v = det.period_v;
                    } else {
                        e.spurious_bd = true;
                        e.spurious_bd_period_v = det.period_v;
                    }
                }
            } catch (const Error&) {}
        }
    }

    for (const auto& d : manifest.dots) {
        auto& e = dots[{d.row, d.col}];
        if (d.diamond_file.empty()) continue;
        try {
            const auto rec = instrument::load_record(dir + "/" + d.diamond_file);
            const auto fit = extraction::fit_diamond(rec, d.col, opts);
            e.diamond_ok = true;
            e.c_p_af = fit.c_p_af;
            e.c_sigma_af = fit.c_sigma_af;
            e.alpha = fit.alpha;
            e.e_c_mev = fit.e_c_mev;
            e.quality = fit.quality;
        } catch (const FitError&) {
            e.diamond_ok = false;
        }
    }

    for (auto& [key, e] : dots) report.dots.push_back(e);
    return report;
}

StatsReport compute_stats(std::span<const ExtractionReport> reports,
                          const StatsSettings& settings) {
    if (reports.empty()) throw InsufficientDataError("compute_stats: no extraction reports");

    StatsReport out;
    for (const auto& rep : reports) {
        SampleStats s;
        s.label = rep.label;
        s.stack = rep.stack;
        const int n = rep.n;

        std::vector<stats::DotOutcome> outcomes;
        std::vector<double> vt_p_mv;
        std::map<int, std::vector<double>> vt_b_by_gate_mv; // per barrier gate, central area
        std::vector<double> cps, css;
        for (const auto& d : rep.dots) {
            outcomes.push_back({d.row, d.col, d.mode, d.diamond_ok});
            const bool central = !settings.central_filter ||
                                 (d.row > 1 && d.row < n && d.col > 1 && d.col < n);
            if (central && d.mode != stats::BiasMode::Dead) {
                if (std::isfinite(d.vt_plunger_v)) vt_p_mv.push_back(d.vt_plunger_v * 1e3);
                if (std::isfinite(d.vt_bs_v))
                    vt_b_by_gate_mv[d.row].push_back(d.vt_bs_v * 1e3);
                if (std::isfinite(d.vt_bd_v))
                    vt_b_by_gate_mv[d.row + 1].push_back(d.vt_bd_v * 1e3);
            }
            if (d.diamond_ok && std::isfinite(d.c_p_af)) {
                cps.push_back(d.c_p_af);
                css.push_back(d.c_sigma_af);
                ++s.diamonds_ok;
            }
        }
        s.yield = stats::yield_metrics(outcomes);

        auto family = [&](std::span<const double> values) -> std::optional<stats::GateFamilyStats> {
            if (values.size() < 3) return std::nullopt;
            try {
                const auto pr = stats::gaussian_sigma_filtered(values, settings.estimator);
                stats::GateFamilyStats g;
                g.sigma_raw_mv = pr.sigma_raw;
                g.sigma_filtered_mv = pr.sigma_filtered;
                g.mu_filtered_mv = pr.mu_filtered;
                g.n = static_cast<int>(values.size());
                return g;
            } catch (const Error&) {
                return std::nullopt;
            }
        };
        s.plunger = family(vt_p_mv);
        // one value per central barrier gate: the median across its columns
        std::vector<double> vt_b_mv;
        for (auto& [gate, vals] : vt_b_by_gate_mv) {
            const bool central_gate = !settings.central_filter || (gate >= 2 && gate <= n);
            if (central_gate && !vals.empty()) vt_b_mv.push_back(num::median(vals));
        }
        s.barrier = family(vt_b_mv);

        if (!cps.empty()) {
            s.cp_mean_af = num::mean(cps);
            s.cp_rsd = s.cp_mean_af != 0.0 ? num::stdev(cps) / s.cp_mean_af : 0.0;
            s.csigma_mean_af = num::mean(css);
            s.csigma_rsd = s.csigma_mean_af != 0.0 ? num::stdev(css) / s.csigma_mean_af : 0.0;
        }
        out.samples.push_back(std::move(s));
    }

    // parallel-plate fit over per-t1 mean plunger capacitances
    std::map<double, std::pair<double, int>> by_t1;
    for (const auto& s : out.samples) {
        if (s.cp_mean_af <= 0.0) continue;
        auto& acc = by_t1[s.stack.t1_nm];
        acc.first += s.cp_mean_af;
        acc.second += 1;
    }
    if (by_t1.size() >= 2) {
        std::vector<std::pair<double, double>> pts;
        for (const auto& [t1, acc] : by_t1) pts.push_back({t1, acc.first / acc.second});
        try {
            out.cap_fit = stats::fit_parallel_plate(pts);
        } catch (const Error&) {
        }
    }

    if (out.samples.size() >= 2) {
        std::vector<stats::SampleVariability> sv;
        for (const auto& s : out.samples) {
            stats::SampleVariability v;
            v.label = s.label;
            v.stack = s.stack;
            v.plunger = s.plunger;
            v.barrier = s.barrier;
            sv.push_back(v);
        }
        try {
            out.curve = stats::variability_curve(sv);
        } catch (const Error&) {
        }
    }
    return out;
}

std::string stats_report_to_text(const StatsReport& r) {
    std::ostringstream os;
    os << "# qdsim-stats v1\n";
    for (const auto& s : r.samples) {
        os << "sample " << s.label << " t1 " << fmt_g17(s.stack.t1_nm) << " t2 "
           << fmt_g17(s.stack.t2_nm()) << " t3 " << fmt_g17(s.stack.t3_nm()) << " measured "
           << s.yield.measured << " shared_ok " << s.yield.shared_ok << " individual_ok "
           << s.yield.individual_ok << " row_shared_yield " << fmt_g17(s.yield.row_shared_yield)
           << " total_yield " << fmt_g17(s.yield.total_yield);
        if (s.plunger)
            os << " sigma_p_raw_mv " << fmt_g17(s.plunger->sigma_raw_mv) << " sigma_p_filt_mv "
               << fmt_g17(s.plunger->sigma_filtered_mv) << " n_p " << s.plunger->n;
        if (s.barrier)
            os << " sigma_b_raw_mv " << fmt_g17(s.barrier->sigma_raw_mv) << " sigma_b_filt_mv "
               << fmt_g17(s.barrier->sigma_filtered_mv) << " n_b " << s.barrier->n;
        os << " cp_mean_af " << fmt_g17(s.cp_mean_af) << " cp_rsd " << fmt_g17(s.cp_rsd)
           << " csigma_mean_af " << fmt_g17(s.csigma_mean_af) << " csigma_rsd "
           << fmt_g17(s.csigma_rsd) << " diamonds_ok " << s.diamonds_ok << "\n";
    }
    if (r.cap_fit) {
        os << "capfit area_nm2 " << fmt_g17(r.cap_fit->area_nm2) << " delta2_nm "
           << fmt_g17(r.cap_fit->delta2_nm) << " residual_af "
           << fmt_g17(r.cap_fit->residual_af) << "\n";
    }
    if (r.curve) {
        for (const auto& row : r.curve->rows) {
            os << "curve " << row.family << " t_gate_nm " << fmt_g17(row.t_gate_nm)
               << " sigma_raw_mv " << fmt_g17(row.sigma_raw_mv) << " sigma_filt_mv "
               << fmt_g17(row.sigma_filtered_mv) << " label " << row.label << "\n";
        }
    }
    return os.str();
}

void save_stats_report(const StatsReport& r, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open for writing: " + path);
    f << stats_report_to_text(r);
}

void write_stats_outputs(const StatsReport& r, const std::string& outdir, bool with_svg) {
    fs::create_directories(outdir);
    save_stats_report(r, outdir + "/stats.qdstats");

    // yield table
    {
        std::ofstream f(outdir + "/yield.tsv", std::ios::binary);
        f << "label\tt1_nm\trow_shared_yield\ttotal_yield\n";
        for (const auto& s : r.samples)
            f << s.label << "\t" << fmt_g17(s.stack.t1_nm) << "\t"
              << fmt_g17(s.yield.row_shared_yield) << "\t" << fmt_g17(s.yield.total_yield)
              << "\n";
    }
    // variability curve table
    if (r.curve) {
        std::ofstream f(outdir + "/variability_curve.tsv", std::ios::binary);
        f << "family\tt_gate_nm\tsigma_raw_mv\tsigma_filt_mv\tlabel\n";
        for (const auto& row : r.curve->rows)
            f << row.family << "\t" << fmt_g17(row.t_gate_nm) << "\t"
              << fmt_g17(row.sigma_raw_mv) << "\t" << fmt_g17(row.sigma_filtered_mv) << "\t"
              << row.label << "\n";
    }
    if (!with_svg) return;

    if (r.curve) {
        svg::Plot plot("oxide thickness (nm)", "sigma_Vt (mV)");
        std::vector<svg::Series> series(4);
        series[0].label = "plunger sigma";
        series[1].label = "plunger sigma_filt";
        series[2].label = "barrier sigma";
        series[3].label = "barrier sigma_filt";
        for (const auto& row : r.curve->rows) {
            const int base = row.family == "plunger" ? 0 : 2;
            series[static_cast<std::size_t>(base)].points.push_back(
                {row.t_gate_nm, row.sigma_raw_mv});
            series[static_cast<std::size_t>(base + 1)].points.push_back(
                {row.t_gate_nm, row.sigma_filtered_mv});
        }
        plot.series = series;
        svg::write_plot(plot, outdir + "/variability_curve.svg");
    }
    {
        svg::Plot plot("sample", "yield");
        svg::Series shared, total;
        shared.label = "row-shared";
        total.label = "total";
        double x = 0.0;
        for (const auto& s : r.samples) {
            shared.points.push_back({x, s.yield.row_shared_yield});
            total.points.push_back({x, s.yield.total_yield});
            x += 1.0;
        }
        plot.series = {shared, total};
        svg::write_plot(plot, outdir + "/yield.svg");
    }
}

} // namespace qdsim::pipeline

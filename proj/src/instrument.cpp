#include "qdsim/instrument.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "qdsim/errors.hpp"
#include "qdsim/rng.hpp"

namespace qdsim::instrument {

namespace {

std::string fmt_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_e9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.8e", v);
    return buf;
}

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

} // namespace

std::string Gate::name() const {
    switch (kind) {
        case GateKind::Plunger: return "P" + std::to_string(index);
        case GateKind::Barrier: return "B" + std::to_string(index);
        case GateKind::Confinement: return "C" + std::to_string(index);
        case GateKind::Source: return "S" + std::to_string(index);
        case GateKind::Drain: return "D";
    }
    return "?";
}

Gate Gate::parse(const std::string& s) {
    if (s.empty()) throw ParseError("gate: empty name");
    if (s == "D") return drain();
    const char k = s[0];
    int idx = 0;
    try {
        idx = std::stoi(s.substr(1));
    } catch (...) {
        throw ParseError("gate: bad name: " + s);
    }
    switch (k) {
        case 'P': return plunger(idx);
        case 'B': return barrier(idx);
        case 'C': return confinement(idx);
        case 'S': return source(idx);
        default: throw ParseError("gate: bad name: " + s);
    }
}

int line_budget(int n) {
    if (n < 1) throw ConfigError("line_budget: n must be >= 1");
    return (n + 1) + n + (n + 1) + n + 1; // confinement + plungers + barriers + sources + drain
}

RoutingPlan configure_row(const SampleInstance& sample, int row, const InstrumentConfig& cfg) {
    const int n = sample.geometry.n;
    if (row < 1 || row > n)
        throw AddressingError("configure_row: row " + std::to_string(row) + " outside 1.." +
                              std::to_string(n));
    RoutingPlan plan;
    plan.row_under_test = row;
    plan.plunger_gate = Gate::plunger(row);
    plan.source_barrier = Gate::barrier(row);
    plan.drain_barrier = Gate::barrier(row + 1);
    plan.confinement_bias_v = cfg.confinement_bias_v;
    plan.accumulation_bias_v = cfg.accumulation_bias_v;
    for (int p = 1; p <= n; ++p)
        if (p != row) plan.extender_gates.push_back(Gate::plunger(p));
    for (int b = 1; b <= n + 1; ++b)
        if (b != row && b != row + 1) plan.extender_gates.push_back(Gate::barrier(b));
    return plan;
}

int MeasurementRecord::channel_pos(int column) const {
    for (std::size_t i = 0; i < spec.channels.size(); ++i)
        if (spec.channels[i] == column) return static_cast<int>(i);
    throw AddressingError("record: column " + std::to_string(column) + " not measured");
}

double quantize_current(double ampere) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.8e", ampere);
    return std::strtod(buf, nullptr);
}

MeasurementRecord run_sweep(const SampleInstance& sample, const RoutingPlan& plan,
                            const SweepSpec& spec, std::uint64_t noise_seed,
                            const InstrumentConfig& cfg) {
    const int n = sample.geometry.n;
    if (spec.axes.empty() || spec.axes.size() > 2)
        throw RoutingError("run_sweep: need 1 or 2 sweep axes");
    for (const auto& ax : spec.axes) {
        if (ax.points < 2) throw RoutingError("run_sweep: axis needs at least 2 points");
        if (ax.start_v == ax.stop_v) throw RoutingError("run_sweep: axis start equals stop");
        if (!ax.is_source_drain) {
            const bool routed = ax.gate == plan.plunger_gate || ax.gate == plan.source_barrier ||
                                ax.gate == plan.drain_barrier;
            if (!routed)
                throw RoutingError("run_sweep: gate " + ax.gate.name() +
                                   " is not routed to the row under test");
        }
    }
    if (spec.channels.empty()) throw RoutingError("run_sweep: no channels selected");
    for (int c : spec.channels)
        if (c < 1 || c > n) throw AddressingError("run_sweep: channel out of range");
    if (spec.temperature_k <= 0.0) throw ConfigError("run_sweep: temperature must be positive");

    // Shared-bias interconnect constraint: gates in a group must carry one bias.
    auto resolved_bias = [&](const Gate& g) -> std::optional<double> {
        for (const auto& ax : spec.axes)
            if (!ax.is_source_drain && ax.gate == g) return std::nullopt; // swept
        auto it = spec.fixed_biases_v.find(g);
        if (it != spec.fixed_biases_v.end()) return it->second;
        for (const auto& e : plan.extender_gates)
            if (e == g) return plan.accumulation_bias_v;
        if (g.kind == GateKind::Confinement) return plan.confinement_bias_v;
        if (g.kind == GateKind::Source || g.kind == GateKind::Drain)
            return plan.accumulation_bias_v;
        return std::nullopt;
    };
    for (const auto& group : spec.equal_bias_groups) {
        std::optional<double> common;
        for (const auto& g : group) {
            auto b = resolved_bias(g);
            if (!b)
                throw RoutingError("equal-bias group contains a swept or unresolved gate: " +
                                   g.name());
            if (!common) common = b;
            else if (*common != *b)
                throw RoutingError("equal-bias group violated at gate " + g.name());
        }
    }

    auto gate_value = [&](const Gate& g, double ax1, double ax2) -> double {
        if (!spec.axes.empty() && !spec.axes[0].is_source_drain && spec.axes[0].gate == g)
            return ax1;
        if (spec.axes.size() > 1 && !spec.axes[1].is_source_drain && spec.axes[1].gate == g)
            return ax2;
        auto it = spec.fixed_biases_v.find(g);
        if (it != spec.fixed_biases_v.end()) return it->second;
        for (const auto& e : plan.extender_gates)
            if (e == g) return plan.accumulation_bias_v;
        throw RoutingError("run_sweep: no bias resolved for gate " + g.name());
    };

    MeasurementRecord rec;
    rec.spec = spec;
    rec.routing = plan;
    rec.sample_label = sample.label;
    rec.noise_seed = noise_seed;
    rec.noise_rel = cfg.noise_rel;

    const int p1 = spec.axes[0].points;
    const int p2 = spec.axes.size() > 1 ? spec.axes[1].points : 1;
    const int nch = static_cast<int>(spec.channels.size());
    const int row = plan.row_under_test;

    rec.iopen_a.resize(nch);
    std::vector<transport::TransportContext> ctxs(nch);
    std::vector<std::vector<SpuriousDotSpec>> spurs(nch);
    std::vector<const DotGroundTruth*> dots(nch);
    std::vector<bool> dead(nch, false);
    for (int k = 0; k < nch; ++k) {
        const int col = spec.channels[k];
        dots[k] = &sample.dot(row, col);
        ctxs[k].vt_bs_v = sample.barrier_vt(row);
        ctxs[k].vt_bd_v = sample.barrier_vt(row + 1);
        ctxs[k].softness_per_v = cfg.softness_per_v;
        ctxs[k].visibility_gain = cfg.visibility_gain;
        spurs[k] = sample.spurious_for_dot(row, col);
        rec.iopen_a[k] = dots[k]->gmax_s * std::fabs(spec.v_sd_v);
        dead[k] = std::find(cfg.dead_columns.begin(), cfg.dead_columns.end(), col) !=
                  cfg.dead_columns.end();
    }

    rec.currents_a.resize(static_cast<std::size_t>(p1) * p2 * nch);
    for (int i2 = 0; i2 < p2; ++i2) {
        const double ax2 = spec.axes.size() > 1 ? spec.axes[1].value(i2) : 0.0;
        for (int i1 = 0; i1 < p1; ++i1) {
            const double ax1 = spec.axes[0].value(i1);
            transport::BiasPoint bias;
            bias.temperature_t0_k = spec.temperature_k;
            bias.v_sd_v = spec.v_sd_v;
            if (spec.axes[0].is_source_drain) bias.v_sd_v = ax1;
            if (spec.axes.size() > 1 && spec.axes[1].is_source_drain) bias.v_sd_v = ax2;
            bias.v_plunger_v = gate_value(plan.plunger_gate, ax1, ax2);
            bias.v_bs_v = gate_value(plan.source_barrier, ax1, ax2);
            bias.v_bd_v = gate_value(plan.drain_barrier, ax1, ax2);
            for (int k = 0; k < nch; ++k) {
                double i_a = 0.0;
                if (!dead[k]) {
                    i_a = transport::dot_current(*dots[k], ctxs[k], spurs[k], bias);
                    if (cfg.noise_rel > 0.0) {
                        const double sigma = cfg.noise_rel * rec.iopen_a[k];
                        i_a += sigma * rng::standard_normal(
                                           noise_seed,
                                           {rng::kNoise,
                                            static_cast<std::uint64_t>(spec.channels[k]),
                                            static_cast<std::uint64_t>(i1),
                                            static_cast<std::uint64_t>(i2)});
                    }
                }
                rec.currents_a[(static_cast<std::size_t>(i2) * p1 + i1) * nch + k] =
                    quantize_current(i_a);
            }
        }
    }
    return rec;
}

std::string record_to_text(const MeasurementRecord& rec) {
    std::ostringstream os;
    os << "# qdsim-record v1\n";
    os << "# sample " << rec.sample_label << "\n";
    os << "# row " << rec.routing.row_under_test << "\n";
    os << "# plunger " << rec.routing.plunger_gate.name() << "\n";
    os << "# source_barrier " << rec.routing.source_barrier.name() << "\n";
    os << "# drain_barrier " << rec.routing.drain_barrier.name() << "\n";
    os << "# confinement_bias " << fmt_g17(rec.routing.confinement_bias_v) << "\n";
    os << "# accumulation_bias " << fmt_g17(rec.routing.accumulation_bias_v) << "\n";
    os << "# extenders ";
    for (std::size_t i = 0; i < rec.routing.extender_gates.size(); ++i)
        os << (i ? "," : "") << rec.routing.extender_gates[i].name();
    os << "\n";
    for (const auto& ax : rec.spec.axes) {
        os << "# axis " << (ax.is_source_drain ? std::string("SD") : ax.gate.name()) << " "
           << fmt_g17(ax.start_v) << " " << fmt_g17(ax.stop_v) << " " << ax.points << "\n";
    }
    os << "# vsd " << fmt_g17(rec.spec.v_sd_v) << "\n";
    os << "# temperature " << fmt_g17(rec.spec.temperature_k) << "\n";
    os << "# channels ";
    for (std::size_t i = 0; i < rec.spec.channels.size(); ++i)
        os << (i ? "," : "") << rec.spec.channels[i];
    os << "\n";
    for (const auto& [g, v] : rec.spec.fixed_biases_v)
        os << "# fixed " << g.name() << " " << fmt_g17(v) << "\n";
    for (const auto& group : rec.spec.equal_bias_groups) {
        os << "# group ";
        for (std::size_t i = 0; i < group.size(); ++i) os << (i ? "," : "") << group[i].name();
        os << "\n";
    }
    os << "# noise_seed " << rec.noise_seed << "\n";
    os << "# noise_rel " << fmt_g17(rec.noise_rel) << "\n";
    os << "# iopen ";
    for (std::size_t i = 0; i < rec.iopen_a.size(); ++i)
        os << (i ? "," : "") << fmt_g17(rec.iopen_a[i]);
    os << "\n";
    os << "# timestamp " << rec.timestamp << "\n";
    os << "# data axis1" << (rec.spec.axes.size() > 1 ? " axis2" : "") << " channel current_A\n";

    const int p1 = rec.points1(), p2 = rec.points2();
    const int nch = rec.n_channels();
    for (int i2 = 0; i2 < p2; ++i2) {
        for (int i1 = 0; i1 < p1; ++i1) {
            for (int k = 0; k < nch; ++k) {
                os << fmt_e9(rec.spec.axes[0].value(i1));
                if (rec.spec.axes.size() > 1) os << " " << fmt_e9(rec.spec.axes[1].value(i2));
                os << " " << rec.spec.channels[k] << " " << fmt_e9(rec.current(i1, i2, k))
                   << "\n";
            }
        }
    }
    return os.str();
}

MeasurementRecord record_from_text(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line)) throw ParseError("record: empty file");
    if (line.rfind("# qdsim-record ", 0) != 0) throw ParseError("record: missing header");
    if (line != "# qdsim-record v1")
        throw VersionError("record: unsupported schema version: " + line);

    MeasurementRecord rec;
    bool in_data = false;
    std::size_t data_count = 0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (!in_data && line[0] == '#') {
            std::istringstream ls(line);
            std::string hash, key;
            ls >> hash >> key;
            if (key == "sample") {
                std::string rest;
                std::getline(ls, rest);
                if (!rest.empty() && rest[0] == ' ') rest.erase(0, 1);
                rec.sample_label = rest;
            } else if (key == "row") {
                ls >> rec.routing.row_under_test;
            } else if (key == "plunger") {
                std::string g; ls >> g; rec.routing.plunger_gate = Gate::parse(g);
            } else if (key == "source_barrier") {
                std::string g; ls >> g; rec.routing.source_barrier = Gate::parse(g);
            } else if (key == "drain_barrier") {
                std::string g; ls >> g; rec.routing.drain_barrier = Gate::parse(g);
            } else if (key == "confinement_bias") {
                ls >> rec.routing.confinement_bias_v;
            } else if (key == "accumulation_bias") {
                ls >> rec.routing.accumulation_bias_v;
            } else if (key == "extenders") {
                std::string list; ls >> list;
                for (const auto& s : split_csv(list))
                    rec.routing.extender_gates.push_back(Gate::parse(s));
            } else if (key == "axis") {
                std::string target;
                SweepAxis ax;
                ls >> target >> ax.start_v >> ax.stop_v >> ax.points;
                if (ls.fail()) throw ParseError("record: malformed axis line");
                if (target == "SD") ax.is_source_drain = true;
                else ax.gate = Gate::parse(target);
                rec.spec.axes.push_back(ax);
            } else if (key == "vsd") {
                ls >> rec.spec.v_sd_v;
            } else if (key == "temperature") {
                ls >> rec.spec.temperature_k;
            } else if (key == "channels") {
                std::string list; ls >> list;
                for (const auto& s : split_csv(list)) rec.spec.channels.push_back(std::stoi(s));
            } else if (key == "fixed") {
                std::string g; double v; ls >> g >> v;
                rec.spec.fixed_biases_v[Gate::parse(g)] = v;
            } else if (key == "group") {
                std::string list; ls >> list;
                std::vector<Gate> group;
                for (const auto& s : split_csv(list)) group.push_back(Gate::parse(s));
                rec.spec.equal_bias_groups.push_back(group);
            } else if (key == "noise_seed") {
                ls >> rec.noise_seed;
            } else if (key == "noise_rel") {
                ls >> rec.noise_rel;
            } else if (key == "iopen") {
                std::string list; ls >> list;
                for (const auto& s : split_csv(list)) rec.iopen_a.push_back(std::stod(s));
            } else if (key == "timestamp") {
                std::string rest;
                std::getline(ls, rest);
                if (!rest.empty() && rest[0] == ' ') rest.erase(0, 1);
                rec.timestamp = rest;
            } else if (key == "data") {
                if (rec.spec.axes.empty() || rec.spec.channels.empty())
                    throw ParseError("record: data before axes/channels");
                in_data = true;
                rec.currents_a.assign(static_cast<std::size_t>(rec.points1()) * rec.points2() *
                                          rec.n_channels(),
                                      0.0);
            } else {
                throw ParseError("record: unknown header key: " + key);
            }
            continue;
        }
        if (!in_data) throw ParseError("record: data without '# data' marker");
        std::istringstream ls(line);
        double a1, a2 = 0.0, cur;
        int ch;
        if (rec.spec.axes.size() > 1) ls >> a1 >> a2 >> ch >> cur;
        else ls >> a1 >> ch >> cur;
        if (ls.fail()) throw ParseError("record: malformed data line");
        if (data_count >= rec.currents_a.size()) throw ParseError("record: extra data lines");
        rec.currents_a[data_count++] = cur;
    }
    if (!in_data) throw ParseError("record: missing data section");
    if (data_count != rec.currents_a.size())
        throw ParseError("record: truncated data section");
    return rec;
}

void save_record(const MeasurementRecord& rec, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open for writing: " + path);
    f << record_to_text(rec);
}

MeasurementRecord load_record(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open for reading: " + path);
    std::ostringstream buf;
    buf << f.rdbuf();
    return record_from_text(buf.str());
}

} // namespace qdsim::instrument

#include <cstdio>
#include <filesystem>
#include <future>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qdsim/config.hpp"
#include "qdsim/core_model.hpp"
#include "qdsim/errors.hpp"
#include "qdsim/pipeline.hpp"
#include "qdsim/rng.hpp"

namespace fs = std::filesystem;
using namespace qdsim;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitFit = 4;

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int jobs = 1;
    std::string format = "table";
};

config::PipelineConfig load_effective_config(const CommonArgs& args) {
    auto cfg = config::load_config(args.config_path);
    if (args.seed_set) cfg.seed = args.seed;
    if (!args.out_dir.empty()) cfg.output = args.out_dir;
    return cfg;
}

int cmd_synth(const CommonArgs& args) {
    auto cfg = load_effective_config(args);
    if (cfg.samples.empty()) throw ConfigError("synth: config has no samples");
    fs::create_directories(cfg.output);
    for (std::size_t i = 0; i < cfg.samples.size(); ++i) {
        const auto sample = config::synthesize_from_config(cfg, i);
        const auto path = fs::path(cfg.output) / (sample.label + ".qdsample");
        save_sample(sample, path.string());
        std::cout << "wrote " << path.string() << "\n";
    }
    return kExitOk;
}

pipeline::Manifest measure_one(const SampleInstance& sample, const config::PipelineConfig& cfg,
                               const std::vector<int>& dead_columns, const std::string& outdir) {
    auto settings = cfg.campaign;
    settings.instrument.dead_columns = dead_columns;
    settings.instrument.noise_rel = settings.noise_rel;
    const auto seed = rng::hash_u64(cfg.seed, {rng::kRecordSeed, 0xC0FFEEu});
    fs::create_directories(outdir);
    save_sample(sample, outdir + "/" + sample.label + ".qdsample");
    return pipeline::run_campaign(sample, settings, seed, outdir);
}

int cmd_measure(const CommonArgs& args, const std::string& sample_path) {
    auto cfg = load_effective_config(args);
    const auto sample = load_sample(sample_path);
    std::vector<int> dead;
    for (const auto& sc : cfg.samples)
        if (sc.label == sample.label) dead = sc.dead_columns;
    const auto outdir = fs::path(cfg.output) / sample.label;
    const auto manifest = measure_one(sample, cfg, dead, outdir.string());
    std::cout << "wrote " << manifest.record_count() << " records + manifest under "
              << outdir.string() << "\n";
    return kExitOk;
}

int cmd_extract(const CommonArgs& args, const std::string& manifest_path) {
    auto cfg = load_effective_config(args);
    const auto manifest = pipeline::load_manifest(manifest_path);
    const auto dir = fs::path(manifest_path).parent_path().string();
    const auto report = pipeline::extract_campaign(manifest, dir.empty() ? "." : dir,
                                                   cfg.extraction);
    fs::create_directories(cfg.output);
    const auto path = fs::path(cfg.output) / (manifest.label + ".qdext");
    pipeline::save_extraction_report(report, path.string());
    std::cout << "wrote " << path.string() << "\n";
    return kExitOk;
}

int cmd_stats(const CommonArgs& args, const std::vector<std::string>& report_paths) {
    auto cfg = load_effective_config(args);
    if (report_paths.empty()) throw ConfigError("stats: no extraction reports given");
    std::vector<pipeline::ExtractionReport> reports;
    for (const auto& p : report_paths) reports.push_back(pipeline::load_extraction_report(p));
    const auto stats = pipeline::compute_stats(reports, cfg.statistics);
    pipeline::write_stats_outputs(stats, cfg.output, args.format == "vector-plot");
    std::cout << "wrote stats report under " << cfg.output << "\n";
    return kExitOk;
}

int cmd_pipeline(const CommonArgs& args) {
    auto cfg = load_effective_config(args);
    if (cfg.samples.empty()) throw ConfigError("pipeline: config has no samples");
    fs::create_directories(cfg.output);

    std::vector<pipeline::ExtractionReport> reports(cfg.samples.size());
    auto run_one = [&](std::size_t i) {
        const auto sample = config::synthesize_from_config(cfg, i);
        const auto outdir = fs::path(cfg.output) / sample.label;
        const auto manifest =
            measure_one(sample, cfg, cfg.samples[i].dead_columns, outdir.string());
        auto report = pipeline::extract_campaign(manifest, outdir.string(), cfg.extraction);
        pipeline::save_extraction_report(
            report, (fs::path(cfg.output) / (sample.label + ".qdext")).string());
        reports[i] = std::move(report);
    };

    const int jobs = std::max(1, args.jobs);
    if (jobs == 1) {
        for (std::size_t i = 0; i < cfg.samples.size(); ++i) run_one(i);
    } else {
        std::vector<std::future<void>> pending;
        std::size_t next = 0;
        while (next < cfg.samples.size() || !pending.empty()) {
            while (static_cast<int>(pending.size()) < jobs && next < cfg.samples.size()) {
                pending.push_back(std::async(std::launch::async, run_one, next));
                ++next;
            }
            pending.front().get();
            pending.erase(pending.begin());
        }
    }

    const auto stats = pipeline::compute_stats(reports, cfg.statistics);
    pipeline::write_stats_outputs(stats, cfg.output, args.format == "vector-plot");
    std::cout << "pipeline complete: " << cfg.samples.size() << " samples under " << cfg.output
              << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"quantum-dot array measurement and characterization simulator"};
    app.require_subcommand(1);

    CommonArgs args;
    std::string sample_path, manifest_path;
    std::vector<std::string> report_paths;

    auto add_common = [&](CLI::App* sub, bool need_config) {
        auto* copt = sub->add_option("--config", args.config_path, "pipeline config (json)");
        if (need_config) copt->required();
        sub->add_option("--out", args.out_dir, "output directory (overrides config)");
        sub->add_option("--seed", args.seed, "master seed (overrides config)")
            ->each([&](const std::string&) { args.seed_set = true; });
        sub->add_option("--jobs", args.jobs, "parallel sample jobs");
        sub->add_option("--format", args.format, "table | vector-plot")
            ->check(CLI::IsMember({"table", "vector-plot"}));
    };

    auto* synth = app.add_subcommand("synth", "synthesize sample files from a config");
    add_common(synth, true);

    auto* measure = app.add_subcommand("measure", "run the measurement campaign on a sample");
    add_common(measure, true);
    measure->add_option("--sample", sample_path, "sample file (.qdsample)")->required();

    auto* extract = app.add_subcommand("extract", "extract thresholds/diamonds from records");
    add_common(extract, true);
    extract->add_option("--manifest", manifest_path, "campaign manifest")->required();

    auto* stats_cmd = app.add_subcommand("stats", "array-level statistics from reports");
    add_common(stats_cmd, true);
    stats_cmd->add_option("--reports", report_paths, "extraction reports (.qdext)")
        ->required()
        ->expected(-1);

    auto* pipe = app.add_subcommand("pipeline", "synth + measure + extract + stats");
    add_common(pipe, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (synth->parsed()) return cmd_synth(args);
        if (measure->parsed()) return cmd_measure(args, sample_path);
        if (extract->parsed()) return cmd_extract(args, manifest_path);
        if (stats_cmd->parsed()) return cmd_stats(args, report_paths);
        if (pipe->parsed()) return cmd_pipeline(args);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const FitError& e) {
        std::cerr << "fit error: " << e.what() << "\n";
        return kExitFit;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitConfig;
}

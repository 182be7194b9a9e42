#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qdsim/core_model.hpp"
#include "qdsim/pipeline.hpp"

namespace qdsim::config {

struct SampleConfig {
    std::string label;
    double t1_nm = 15.0;
    double delta2_nm = 4.5;
    double delta3_nm = 0.8;
    std::optional<int> match_group; // samples in a group share disorder draws
    std::vector<int> dead_columns;
    std::optional<DisorderConfig> disorder_override;
};

struct PipelineConfig {
    std::uint64_t seed = 0;
    bool seed_set = false; // required; no wall-clock defaults
    std::string output = "out";
    ArrayGeometry geometry;
    DisorderConfig disorder;
    SynthesisTuning tuning;
    std::vector<SampleConfig> samples;
    pipeline::CampaignSettings campaign;
    extraction::ExtractionOptions extraction;
    pipeline::StatsSettings statistics;
};

PipelineConfig load_config(const std::string& path);
PipelineConfig parse_config(const std::string& json_text);

// Master seed fan-out: samples in a match group share their draw stream.
std::uint64_t sample_seed(const PipelineConfig& cfg, std::size_t sample_index);

SampleInstance synthesize_from_config(const PipelineConfig& cfg, std::size_t sample_index);

} // namespace qdsim::config

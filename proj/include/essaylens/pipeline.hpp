// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The essaylens Authors

#pragma once

#include "essaylens/attention.hpp"
#include "essaylens/baselines.hpp"
#include "essaylens/weighting.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace essaylens {

inline constexpr std::string_view kVersion = "0.1.0";

/// Declarative run configuration (YAML). Relative paths resolve against the
/// directory of the configuration file.
struct RunConfig {
    std::filesystem::path base_dir;
    std::uint64_t seed = 13;
    std::filesystem::path output = "out";
    std::size_t jobs = 1;

    std::vector<std::filesystem::path> corpus_paths;
    std::string class_rule = "human_vs_machine";
    int folds = 5;

    std::filesystem::path annotator_config;

    SelectionConfig selection;
    std::filesystem::path sentiment_lexicon; ///< optional
    std::vector<std::string> series_order;

    std::vector<std::filesystem::path> attention_exports;
    int attention_top_n = 20;
    AttentionDirection attention_direction = AttentionDirection::Received;
    std::string exclusive_class; ///< optional second report restricted to one class

    std::string qwk_bins = "auto"; ///< "auto", "native" or a bin count
    std::vector<ModelSpec> models;
    std::vector<std::filesystem::path> predictions;

    std::string formula = "auto"; ///< "auto" = full model minus single-level factors

    /// Checks values and that every referenced path exists.
    void validate() const;
};

RunConfig parse_run_config(std::string_view yaml, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

enum class Stage { Ingest, Annotate, Weigh, Attention, Benchmark, Stats, Report };

std::string to_string(Stage stage);
Stage parse_stage(std::string_view name);
/// Stages in execution order; "all" expands to every stage.
std::vector<Stage> all_stages();

/// Runs one stage. Outputs land in `<output>/<stage>/` with a manifest.json;
/// the directory is replaced only after the stage succeeds.
void run_stage(const RunConfig& config, Stage stage);
void run_pipeline(const RunConfig& config, const std::vector<Stage>& stages);

std::string sha256_hex(std::string_view bytes);

} // namespace essaylens

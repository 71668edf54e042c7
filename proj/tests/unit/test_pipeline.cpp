// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The essaylens Authors

#include "essaylens/error.hpp"
#include "essaylens/pipeline.hpp"
#include "essaylens/text_io.hpp"

#include <doctest.h>
#include <json.hpp>

#include <filesystem>

using namespace essaylens;
namespace fs = std::filesystem;

namespace {

const fs::path kSynthetic = fs::path(ESSAYLENS_SOURCE_DIR) / "data" / "synthetic";

RunConfig synthetic_config(const std::string& out_name) {
    auto cfg = load_run_config(kSynthetic / "run.yaml");
    cfg.output = fs::temp_directory_path() / out_name;
    fs::remove_all(cfg.output);
    return cfg;
}

} // namespace

TEST_CASE("sha256") {
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("stage names") {
    CHECK(all_stages().size() == 7);
    CHECK(parse_stage("weigh") == Stage::Weigh);
    CHECK(to_string(Stage::Benchmark) == "benchmark");
    CHECK_THROWS_AS(parse_stage("train"), ConfigError);
}

TEST_CASE("config parsing") {
    const auto cfg = parse_run_config("seed: 3\nweigh: {tw: 0.01, tc: 0.5, corr_scope: all_other_reps}\n", "/tmp");
    CHECK(cfg.seed == 3);
    CHECK(cfg.selection.t_w == 0.01);
    CHECK(cfg.selection.t_c == 0.5);
    CHECK(cfg.selection.scope == CorrelationScope::AllOtherReps);
    CHECK_THROWS_AS(parse_run_config("sede: 3\n", "/tmp"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("weigh: {tc: 1.5}\n", "/tmp").validate(), ConfigError);
    CHECK_THROWS_AS(parse_run_config("weigh: [\n", "/tmp"), ConfigError);
}

TEST_CASE("a missing upstream stage is a dependency error") {
    const auto cfg = synthetic_config("essaylens_pipeline_dep");
    CHECK_THROWS_AS(run_stage(cfg, Stage::Weigh), DependencyError);
    CHECK_FALSE(fs::exists(cfg.output / "weigh"));
    try {
        run_stage(cfg, Stage::Stats);
    } catch (const Error& e) {
        CHECK(e.exit_code() == 3);
    }
}

TEST_CASE("stages write artifacts with hashed manifests") {
    const auto cfg = synthetic_config("essaylens_pipeline_run");
    run_pipeline(cfg, {Stage::Ingest, Stage::Annotate, Stage::Weigh});
    for (const char* stage : {"ingest", "annotate", "weigh"}) {
        const auto dir = cfg.output / stage;
        REQUIRE(fs::exists(dir / "manifest.json"));
        CHECK_FALSE(fs::exists(cfg.output / (std::string(".") + stage + ".tmp")));
        const auto m = nlohmann::json::parse(read_file(dir / "manifest.json"));
        CHECK(m["stage"] == stage);
        CHECK(m["version"] == std::string(kVersion));
        CHECK(!m["artifacts"].empty());
        for (const auto& a : m["artifacts"]) {
            const auto bytes = read_file(dir / a["path"].get<std::string>());
            CHECK(a["sha256"] == sha256_hex(bytes));
            CHECK(a["bytes"] == bytes.size());
        }
    }
    const auto weigh = nlohmann::json::parse(read_file(cfg.output / "weigh" / "manifest.json"));
    const auto layers = read_file(cfg.output / "annotate" / "layers.jsonl");
    bool found = false;
    for (const auto& in : weigh["inputs"]) found = found || in["sha256"] == sha256_hex(layers);
    CHECK(found);
    CHECK(read_file(cfg.output / "weigh" / "expressive.csv").rfind("rep,", 0) == 0);
    fs::remove_all(cfg.output);
}

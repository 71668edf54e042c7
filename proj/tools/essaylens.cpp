// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The essaylens Authors

#include "essaylens/error.hpp"
#include "essaylens/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>

namespace {

struct Overrides {
    std::string config = "run.yaml";
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::size_t> jobs;
    std::optional<double> tw;
    std::optional<double> tc;
    std::optional<double> eps;
    std::optional<std::string> corr_scope;
    std::optional<std::string> qwk_bins;
};

essaylens::RunConfig build_config(const Overrides& o) {
    auto cfg = essaylens::load_run_config(o.config);
    if (o.seed) cfg.seed = *o.seed;
    if (o.out) cfg.output = *o.out;
    if (o.jobs) {
        if (*o.jobs < 1) throw essaylens::ConfigError("--jobs must be >= 1");
        cfg.jobs = *o.jobs;
    }
    if (o.tw) cfg.selection.t_w = *o.tw;
    if (o.tc) cfg.selection.t_c = *o.tc;
    if (o.eps) cfg.selection.smoothing_eps = *o.eps;
    if (o.corr_scope) cfg.selection.scope = essaylens::parse_correlation_scope(*o.corr_scope);
    if (o.qwk_bins) cfg.qwk_bins = *o.qwk_bins;
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Corpus-level comparison of essay collections and scoring models"};
    app.set_version_flag("--version", std::string(essaylens::kVersion));
    Overrides o;
    app.add_option("--config", o.config, "Run configuration (YAML)");
    app.add_option("--seed", o.seed, "Fold assignment seed");
    app.add_option("--out", o.out, "Output directory");
    app.add_option("--jobs", o.jobs, "Worker threads for per-document work");
    app.add_option("--tw", o.tw, "Token weight threshold");
    app.add_option("--tc", o.tc, "Redundancy (correlation) threshold");
    app.add_option("--eps", o.eps, "Add-eps smoothing of class probabilities");
    app.add_option("--corr-scope", o.corr_scope, "word_only or all_other_reps");
    app.add_option("--qwk-bins", o.qwk_bins, "auto, native or a bin count");
    app.require_subcommand(1);

    std::vector<essaylens::Stage> stages;
    for (auto s : essaylens::all_stages()) {
        auto* sub = app.add_subcommand(essaylens::to_string(s), "Run the " + essaylens::to_string(s) + " stage");
        sub->fallthrough();
        sub->callback([&stages, s] { stages = {s}; });
    }
    auto* all = app.add_subcommand("all", "Run every stage in order");
    all->fallthrough();
    all->callback([&stages] { stages = essaylens::all_stages(); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        const auto cfg = build_config(o);
        essaylens::run_pipeline(cfg, stages);
        for (auto s : stages) std::cout << essaylens::to_string(s) << ": ok -> " << (cfg.output / essaylens::to_string(s)).string() << "\n";
        return 0;
    } catch (const essaylens::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

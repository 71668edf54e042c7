// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The essaylens Authors

#include "essaylens/pipeline.hpp"

#include "essaylens/annotate.hpp"
#include "essaylens/corpus.hpp"
#include "essaylens/error.hpp"
#include "essaylens/metrics.hpp"
#include "essaylens/plot.hpp"
#include "essaylens/stats.hpp"
#include "essaylens/text_io.hpp"

#include <json.hpp>
#include <openssl/evp.h>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iterator>
#include <map>
#include <set>
#include <tuple>

namespace essaylens {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("SHA-256 digest failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xF]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Configuration

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
    fs::path path(p);
    return path.is_absolute() ? path : base / path;
}

template <typename T>
T scalar(const YAML::Node& node, const std::string& key, T fallback) {
    if (!node || !node[key]) return fallback;
    try {
        return node[key].as<T>();
    } catch (const YAML::Exception&) {
        throw ConfigError("config key '" + key + "' has the wrong type");
    }
}

std::vector<std::string> string_list(const YAML::Node& node, const std::string& key) {
    std::vector<std::string> out;
    if (!node || !node[key]) return out;
    const auto& n = node[key];
    if (n.IsScalar()) return {n.as<std::string>()};
    if (!n.IsSequence()) throw ConfigError("config key '" + key + "' must be a list");
    for (const auto& item : n) out.push_back(item.as<std::string>());
    return out;
}

void check_keys(const YAML::Node& node, const std::string& section, const std::set<std::string>& allowed) {
    if (!node) return;
    if (!node.IsMap()) throw ConfigError("config section '" + section + "' must be a mapping");
    for (const auto& kv : node) {
        const auto key = kv.first.as<std::string>();
        if (!allowed.count(key)) throw ConfigError("unknown config key '" + section + key + "'");
    }
}

} // namespace

RunConfig parse_run_config(std::string_view yaml, const fs::path& base_dir) {
    YAML::Node root;
    try {
        root = YAML::Load(std::string(yaml));
    } catch (const YAML::Exception& e) {
        throw ConfigError(std::string("run configuration is not valid YAML: ") + e.what());
    }
    if (!root.IsMap()) throw ConfigError("run configuration must be a mapping");
    check_keys(root, "", {"seed", "output", "jobs", "corpus", "annotate", "weigh", "attention", "benchmark", "stats"});

    RunConfig cfg;
    cfg.base_dir = base_dir;
    cfg.seed = scalar<std::uint64_t>(root, "seed", cfg.seed);
    cfg.output = resolve(base_dir, scalar<std::string>(root, "output", "out"));
    const auto jobs = scalar<long>(root, "jobs", 1);
    if (jobs < 1) throw ConfigError("jobs must be >= 1");
    cfg.jobs = static_cast<std::size_t>(jobs);

    const auto corpus = root["corpus"];
    check_keys(corpus, "corpus.", {"paths", "class_rule", "folds"});
    for (const auto& p : string_list(corpus, "paths")) cfg.corpus_paths.push_back(resolve(base_dir, p));
    cfg.class_rule = scalar<std::string>(corpus, "class_rule", cfg.class_rule);
    cfg.folds = scalar<int>(corpus, "folds", cfg.folds);

    const auto annotate = root["annotate"];
    check_keys(annotate, "annotate.", {"config"});
    if (annotate && annotate["config"]) cfg.annotator_config = resolve(base_dir, annotate["config"].as<std::string>());

    const auto weigh = root["weigh"];
    check_keys(weigh, "weigh.", {"tw", "tc", "eps", "corr_scope", "sentiment_lexicon", "series_order"});
    cfg.selection.t_w = scalar<double>(weigh, "tw", cfg.selection.t_w);
    cfg.selection.t_c = scalar<double>(weigh, "tc", cfg.selection.t_c);
    cfg.selection.smoothing_eps = scalar<double>(weigh, "eps", cfg.selection.smoothing_eps);
    cfg.selection.scope = parse_correlation_scope(scalar<std::string>(weigh, "corr_scope", "word_only"));
    if (weigh && weigh["sentiment_lexicon"]) {
        cfg.sentiment_lexicon = resolve(base_dir, weigh["sentiment_lexicon"].as<std::string>());
    }
    cfg.series_order = string_list(weigh, "series_order");

    const auto attention = root["attention"];
    check_keys(attention, "attention.", {"exports", "top_n", "direction", "exclusive_class"});
    for (const auto& p : string_list(attention, "exports")) cfg.attention_exports.push_back(resolve(base_dir, p));
    cfg.attention_top_n = scalar<int>(attention, "top_n", cfg.attention_top_n);
    cfg.attention_direction = parse_attention_direction(scalar<std::string>(attention, "direction", "received"));
    cfg.exclusive_class = scalar<std::string>(attention, "exclusive_class", "");

    const auto bench = root["benchmark"];
    check_keys(bench, "benchmark.", {"qwk_bins", "models", "predictions"});
    cfg.qwk_bins = scalar<std::string>(bench, "qwk_bins", cfg.qwk_bins);
    if (bench && bench["models"]) {
        if (!bench["models"].IsSequence()) throw ConfigError("benchmark.models must be a list");
        std::set<std::string> names;
        for (const auto& m : bench["models"]) {
            check_keys(m, "benchmark.models[].", {"model", "name", "k", "lambda", "features"});
            ModelSpec spec;
            spec.kind = parse_model_kind(scalar<std::string>(m, "model", ""));
            spec.name = scalar<std::string>(m, "name", to_string(spec.kind));
            spec.k = scalar<int>(m, "k", spec.k);
            spec.lambda = scalar<double>(m, "lambda", spec.lambda);
            spec.features = m["features"] ? string_list(m, "features") : std::vector<std::string>{"word"};
            if (spec.k < 1) throw ConfigError("model " + spec.name + ": k must be >= 1");
            if (!(spec.lambda > 0.0)) throw ConfigError("model " + spec.name + ": lambda must be > 0");
            if (!names.insert(spec.name).second) throw ConfigError("duplicate model name '" + spec.name + "'");
            cfg.models.push_back(std::move(spec));
        }
    }
    for (const auto& p : string_list(bench, "predictions")) cfg.predictions.push_back(resolve(base_dir, p));

    const auto stats = root["stats"];
    check_keys(stats, "stats.", {"formula"});
    cfg.formula = scalar<std::string>(stats, "formula", cfg.formula);
    return cfg;
}

RunConfig load_run_config(const fs::path& path) {
    if (!fs::exists(path)) throw ConfigError("run configuration not found: " + path.string());
    return parse_run_config(read_file(path), path.parent_path());
}

void RunConfig::validate() const {
    if (corpus_paths.empty()) throw ConfigError("corpus.paths is empty");
    auto must_exist = [](const fs::path& p, const std::string& what) {
        if (!fs::exists(p)) throw ConfigError(what + " not found: " + p.string());
    };
    for (const auto& p : corpus_paths) must_exist(p, "corpus file");
    if (annotator_config.empty()) throw ConfigError("annotate.config is required");
    must_exist(annotator_config, "annotator configuration");
    if (!sentiment_lexicon.empty()) must_exist(sentiment_lexicon, "sentiment lexicon");
    for (const auto& p : attention_exports) must_exist(p, "attention export");
    for (const auto& p : predictions) must_exist(p, "predictions file");
    if (folds < 2) throw ConfigError("corpus.folds must be >= 2");
    if (attention_top_n < 1) throw ConfigError("attention.top_n must be >= 1");
    parse_class_rule(class_rule);
    selection.validate();
    if (qwk_bins != "auto" && qwk_bins != "native") {
        auto b = parse_double(qwk_bins);
        if (!b || *b < 2 || *b != std::floor(*b)) throw ConfigError("benchmark.qwk_bins must be auto, native or an integer >= 2");
    }
    if (formula != "auto") ModelFormula::parse(formula);
}

// ---------------------------------------------------------------------------
// Stages

std::string to_string(Stage stage) {
    switch (stage) {
    case Stage::Ingest: return "ingest";
    case Stage::Annotate: return "annotate";
    case Stage::Weigh: return "weigh";
    case Stage::Attention: return "attention";
    case Stage::Benchmark: return "benchmark";
    case Stage::Stats: return "stats";
    case Stage::Report: return "report";
    }
    return "?";
}

Stage parse_stage(std::string_view name) {
    for (auto s : all_stages()) {
        if (to_string(s) == name) return s;
    }
    throw ConfigError("unknown stage '" + std::string(name) + "'");
}

std::vector<Stage> all_stages() {
    return {Stage::Ingest, Stage::Annotate, Stage::Weigh, Stage::Attention, Stage::Benchmark, Stage::Stats, Stage::Report};
}

namespace {

/// Collects a stage's outputs in a scratch directory and publishes them in one rename.
class StageWriter {
public:
    StageWriter(const RunConfig& cfg, Stage stage)
        : cfg_(cfg), stage_(stage), final_(cfg.output / to_string(stage)),
          tmp_(cfg.output / ("." + to_string(stage) + ".tmp")) {
        fs::remove_all(tmp_);
        fs::create_directories(tmp_);
    }
    ~StageWriter() {
        std::error_code ec;
        if (!committed_) fs::remove_all(tmp_, ec);
    }

    void write(const std::string& name, const std::string& content) {
        write_file(tmp_ / name, content);
        artifacts_.push_back({name, sha256_hex(content), content.size()});
    }
    void input(const fs::path& path) {
        inputs_.push_back({path.lexically_relative(cfg_.base_dir).generic_string(), sha256_hex(read_file_raw(path))});
    }
    /// Reads an artifact of an earlier stage and records its hash.
    std::string upstream(Stage s, const std::string& name) {
        const auto path = cfg_.output / to_string(s) / name;
        if (!fs::exists(path)) {
            throw DependencyError("artifact " + path.string() + " of stage '" + to_string(s) + "' is missing");
        }
        auto content = read_file_raw(path);
        inputs_.push_back({to_string(s) + "/" + name, sha256_hex(content)});
        return content;
    }
    void warn(std::string message) { warnings_.push_back(std::move(message)); }
    ordered_json& params() { return params_; }

    void commit() {
        ordered_json m;
        m["stage"] = to_string(stage_);
        m["version"] = std::string(kVersion);
        m["params"] = params_;
        m["inputs"] = ordered_json::array();
        for (const auto& [p, h] : inputs_) m["inputs"].push_back({{"path", p}, {"sha256", h}});
        m["artifacts"] = ordered_json::array();
        std::sort(artifacts_.begin(), artifacts_.end(),
                  [](const Artifact& a, const Artifact& b) { return a.name < b.name; });
        for (const auto& a : artifacts_) {
            m["artifacts"].push_back({{"path", a.name}, {"sha256", a.hash}, {"bytes", a.bytes}});
        }
        m["warnings"] = warnings_;
        m["created"] = timestamp();
        write_file(tmp_ / "manifest.json", m.dump(2) + "\n");
        fs::remove_all(final_);
        fs::rename(tmp_, final_);
        committed_ = true;
    }

private:
    struct Artifact {
        std::string name;
        std::string hash;
        std::size_t bytes;
    };

    static std::string read_file_raw(const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        if (!in) throw ValidationError("cannot read " + p.string());
        return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    }
    static std::string timestamp() {
        const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        std::tm tm{};
        gmtime_r(&t, &tm);
        char buf[32];
        std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
        return buf;
    }

    const RunConfig& cfg_;
    Stage stage_;
    fs::path final_;
    fs::path tmp_;
    bool committed_ = false;
    std::vector<std::pair<std::string, std::string>> inputs_;
    std::vector<Artifact> artifacts_;
    std::vector<std::string> warnings_;
    ordered_json params_ = ordered_json::object();
};

fs::path stage_dir(const RunConfig& cfg, Stage s) { return cfg.output / to_string(s); }

void require(const RunConfig& cfg, Stage needed, Stage by) {
    const auto manifest = stage_dir(cfg, needed) / "manifest.json";
    if (!fs::exists(manifest)) {
        throw DependencyError("stage '" + to_string(by) + "' requires outputs of stage '" + to_string(needed) +
                              "' (missing " + manifest.string() + "); run '" + to_string(needed) + "' first");
    }
}

struct ScoreScale {
    std::optional<std::pair<double, double>> native;
};

ScoreScale detect_scale(const Corpus& raw) {
    ScoreScale s;
    bool first = true;
    for (const auto& d : raw.documents()) {
        if (!d.scored()) continue;
        if (!d.score_min || !d.score_max) return {};
        const double lo = *d.score_min, hi = *d.score_max;
        if (lo != std::floor(lo) || hi != std::floor(hi)) return {};
        if (first) {
            s.native = {lo, hi};
            first = false;
        } else if (s.native->first != lo || s.native->second != hi) {
            return {};
        }
    }
    return s;
}

Corpus load_ingested(StageWriter& out) {
    return parse_corpus(out.upstream(Stage::Ingest, "corpus.jsonl"), CorpusFormat::Jsonl, "ingest/corpus.jsonl");
}

FoldPlan load_folds(StageWriter& out) { return parse_fold_plan(out.upstream(Stage::Ingest, "folds.csv")); }

std::vector<LayerSet> load_layers(StageWriter& out, const Corpus& corpus) {
    auto sets = parse_layersets(out.upstream(Stage::Annotate, "layers.jsonl"));
    if (sets.size() != corpus.size()) {
        throw DependencyError("annotate outputs cover " + std::to_string(sets.size()) + " documents, corpus has " +
                              std::to_string(corpus.size()) + "; rerun 'annotate'");
    }
    for (std::size_t i = 0; i < sets.size(); ++i) {
        if (sets[i].doc_id() != corpus.at(i).id) {
            throw DependencyError("annotate outputs are out of date for document " + corpus.at(i).id +
                                  "; rerun 'annotate'");
        }
    }
    return sets;
}

std::vector<std::string> labels_for(const RunConfig& cfg, const Corpus& corpus) {
    return corpus.class_labels(parse_class_rule(cfg.class_rule));
}

ordered_json selection_params(const RunConfig& cfg) {
    return {{"tw", cfg.selection.t_w},
            {"tc", cfg.selection.t_c},
            {"eps", cfg.selection.smoothing_eps},
            {"corr_scope", to_string(cfg.selection.scope)}};
}

std::string safe_name(std::string_view s) {
    std::string out;
    for (char c : s) out.push_back(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.' ? c : '_');
    return out;
}

// ---- ingest

void stage_ingest(const RunConfig& cfg) {
    StageWriter out(cfg, Stage::Ingest);
    std::vector<Corpus> parts;
    for (const auto& p : cfg.corpus_paths) {
        parts.push_back(load_corpus(p));
        out.input(p);
    }
    const auto raw = merge_corpora(parts);
    const auto scale = detect_scale(raw);
    const auto corpus = normalize_scores(raw);
    const auto labels = corpus.class_labels(parse_class_rule(cfg.class_rule));
    std::set<std::string> classes(labels.begin(), labels.end());
    if (classes.size() < 2) out.warn("corpus has fewer than two classes; weighting will fail");

    const auto plan = make_folds(corpus, cfg.folds, cfg.seed);
    out.write("corpus.jsonl", serialize_corpus(corpus));
    out.write("folds.csv", serialize_fold_plan(plan));
    ordered_json scale_json = ordered_json::object();
    if (scale.native) scale_json = {{"native_min", scale.native->first}, {"native_max", scale.native->second}};
    out.write("score_scale.json", scale_json.dump() + "\n");

    std::map<std::string, std::size_t> per_class;
    for (const auto& l : labels) ++per_class[l];
    out.params() = {{"seed", cfg.seed}, {"folds", cfg.folds}, {"class_rule", cfg.class_rule},
                    {"documents", corpus.size()}, {"classes", per_class}};
    out.commit();
}

// ---- annotate

void stage_annotate(const RunConfig& cfg) {
    require(cfg, Stage::Ingest, Stage::Annotate);
    StageWriter out(cfg, Stage::Annotate);
    const auto corpus = load_ingested(out);
    const auto acfg = load_annotator_config(cfg.annotator_config);
    out.input(cfg.annotator_config);
    for (const auto& spec : acfg.layers) {
        if (!spec.resource.empty()) out.input(spec.resource);
    }
    const auto sets = annotate_corpus(corpus, acfg, cfg.jobs);
    out.write("layers.jsonl", serialize_layersets(sets));
    std::vector<std::string> names;
    if (!sets.empty()) {
        for (const auto& l : sets.front().layers()) names.push_back(l.name);
    }
    out.params() = {{"layers", names}, {"documents", sets.size()}};
    out.commit();
}

// ---- weigh

void stage_weigh(const RunConfig& cfg) {
    require(cfg, Stage::Annotate, Stage::Weigh);
    StageWriter out(cfg, Stage::Weigh);
    const auto corpus = load_ingested(out);
    const auto sets = load_layers(out, corpus);
    std::optional<LexiconResource> sentiment;
    if (!cfg.sentiment_lexicon.empty()) {
        sentiment = load_lexicon(cfg.sentiment_lexicon, "sentiment", LexiconResource::Kind::SenseScored);
        out.input(cfg.sentiment_lexicon);
    }
    const auto table = compute_token_weights(sets, labels_for(cfg, corpus), cfg.selection,
                                             sentiment ? &*sentiment : nullptr, cfg.jobs);
    out.write("weights.csv", weights_to_csv(table));
    out.write("expressive.csv", series_to_csv(cumulative_expressive_series(table, cfg.series_order)));
    out.params() = selection_params(cfg);
    out.params()["classes"] = table.classes;
    out.commit();
}

TokenWeightTable recompute_weights(const RunConfig& cfg, const Corpus& corpus, const std::vector<LayerSet>& sets) {
    std::optional<LexiconResource> sentiment;
    if (!cfg.sentiment_lexicon.empty()) {
        sentiment = load_lexicon(cfg.sentiment_lexicon, "sentiment", LexiconResource::Kind::SenseScored);
    }
    return compute_token_weights(sets, labels_for(cfg, corpus), cfg.selection, sentiment ? &*sentiment : nullptr,
                                 cfg.jobs);
}

// ---- attention

void stage_attention(const RunConfig& cfg) {
    require(cfg, Stage::Weigh, Stage::Attention);
    StageWriter out(cfg, Stage::Attention);
    const auto corpus = load_ingested(out);
    const auto sets = load_layers(out, corpus);
    const auto plan = load_folds(out);
    const auto labels = labels_for(cfg, corpus);
    const auto table = recompute_weights(cfg, corpus, sets);

    std::map<std::string, std::vector<AttentionRecord>> by_model;
    for (const auto& p : cfg.attention_exports) {
        out.input(p);
        for (auto& r : load_attention_export(p)) {
            if (!corpus.find(r.doc_id)) {
                throw ValidationError(p.string() + ": attention for unknown document '" + r.doc_id + "'");
            }
            by_model[r.model_id].push_back(std::move(r));
        }
    }
    std::vector<std::string> models;
    for (auto& [model, records] : by_model) {
        models.push_back(model);
        const AttentionIndex index(std::move(records));
        AttentionReportOptions opt;
        opt.top_n = cfg.attention_top_n;
        opt.direction = cfg.attention_direction;
        opt.jobs = cfg.jobs;
        const auto rows = token_attention_report(table, corpus, sets, labels, index, plan, opt);
        out.write("tokens_" + safe_name(model) + ".csv", attention_report_to_csv(rows, table.classes));
        if (!cfg.exclusive_class.empty()) {
            opt.exclusivity = Exclusivity::ClassExclusive;
            opt.target_class = cfg.exclusive_class;
            const auto excl = token_attention_report(table, corpus, sets, labels, index, plan, opt);
            out.write("tokens_" + safe_name(model) + "_exclusive.csv", attention_report_to_csv(excl, table.classes));
        }
    }
    if (models.empty()) out.warn("no attention exports configured");
    out.params() = selection_params(cfg);
    out.params()["top_n"] = cfg.attention_top_n;
    out.params()["direction"] = cfg.attention_direction == AttentionDirection::Received ? "received" : "given";
    out.params()["exclusive_class"] = cfg.exclusive_class;
    out.params()["models"] = models;
    out.commit();
}

// ---- benchmark

QwkBinning binning_for(const RunConfig& cfg, StageWriter& out) {
    const auto scale = nlohmann::json::parse(out.upstream(Stage::Ingest, "score_scale.json"));
    const bool has_native = scale.contains("native_min");
    if (cfg.qwk_bins == "native" || (cfg.qwk_bins == "auto" && has_native)) {
        if (!has_native) throw ConfigError("qwk_bins=native needs a common integer score range in the corpus");
        return QwkBinning::native(scale["native_min"].get<double>(), scale["native_max"].get<double>());
    }
    if (cfg.qwk_bins == "auto") return QwkBinning::equal_width(10);
    return QwkBinning::equal_width(static_cast<int>(*parse_double(cfg.qwk_bins)));
}

/// One score per document: the held-out fold's prediction for in-plan
/// documents, the mean over every fold otherwise.
std::map<std::string, double> resolve_scores(const std::vector<Prediction>& preds, const FoldPlan& plan) {
    std::map<std::string, std::vector<const Prediction*>> by_doc;
    for (const auto& p : preds) by_doc[p.doc_id].push_back(&p);
    std::map<std::string, double> out;
    for (const auto& [doc, rows] : by_doc) {
        const auto f = plan.fold_of(doc);
        const Prediction* match = nullptr;
        if (f) {
            for (const auto* r : rows) {
                if (r->fold == *f) match = r;
            }
        }
        if (match) {
            out[doc] = match->score;
        } else {
            double sum = 0.0;
            for (const auto* r : rows) sum += r->score;
            out[doc] = sum / static_cast<double>(rows.size());
        }
    }
    return out;
}

void stage_benchmark(const RunConfig& cfg) {
    require(cfg, Stage::Annotate, Stage::Benchmark);
    StageWriter out(cfg, Stage::Benchmark);
    const auto corpus = load_ingested(out);
    const auto sets = load_layers(out, corpus);
    const auto plan = load_folds(out);
    const auto binning = binning_for(cfg, out);

    std::vector<Prediction> all;
    std::vector<NamedReport> reports;
    std::optional<MetricReport> reference;
    for (const auto& spec : cfg.models) {
        const auto cv = cross_validate(corpus, sets, plan, spec, binning, cfg.jobs);
        all.insert(all.end(), cv.predictions.begin(), cv.predictions.end());
        reports.push_back({spec.name, cv.report});
        if (!reference) reference = cv.reference_report;
    }
    for (const auto& p : cfg.predictions) {
        out.input(p);
        std::map<std::string, std::vector<Prediction>> by_model;
        for (auto& pr : load_predictions(p)) {
            if (!corpus.find(pr.doc_id)) {
                throw ValidationError(p.string() + ": prediction for unknown document '" + pr.doc_id + "'");
            }
            if (!(pr.score >= 0.0 && pr.score <= 1.0)) {
                throw ValidationError(p.string() + ": score for '" + pr.doc_id + "' is outside [0,1]");
            }
            by_model[pr.model_id].push_back(pr);
        }
        for (auto& [model, preds] : by_model) {
            for (const auto& r : reports) {
                if (r.model == model) throw ConfigError("model id '" + model + "' is defined twice");
            }
            const auto scores = resolve_scores(preds, plan);
            ScorePairs pairs;
            for (const auto& d : corpus.documents()) {
                if (!d.scored() || !plan.fold_of(d.id)) continue;
                auto it = scores.find(d.id);
                if (it == scores.end()) continue;
                pairs.gold.push_back(*d.gold_score);
                pairs.pred.push_back(it->second);
                pairs.doc_ids.push_back(d.id);
            }
            reports.push_back({model, evaluate_scores(pairs, binning)});
            all.insert(all.end(), preds.begin(), preds.end());
        }
    }
    if (reports.empty()) throw ConfigError("benchmark has no models and no prediction files");
    if (!reference) {
        ModelSpec mean;
        mean.kind = ModelSpec::Kind::Mean;
        mean.name = "mean";
        reference = cross_validate(corpus, sets, plan, mean, binning, cfg.jobs).report;
    }
    reports.push_back({"mean", *reference});
    std::sort(all.begin(), all.end(), [](const Prediction& a, const Prediction& b) {
        return std::tie(a.model_id, a.doc_id, a.fold) < std::tie(b.model_id, b.doc_id, b.fold);
    });
    out.write("predictions.jsonl", serialize_predictions(all));
    out.write("metrics.csv", metrics_to_csv(reports));
    out.params() = {{"qwk_bins", binning.describe()}, {"folds", plan.k}};
    ordered_json models = ordered_json::array();
    for (const auto& m : cfg.models) {
        models.push_back({{"name", m.name}, {"model", to_string(m.kind)}, {"k", m.k}, {"lambda", m.lambda},
                          {"features", m.features}});
    }
    out.params()["models"] = models;
    out.commit();
}

// ---- stats

const std::vector<std::string> kCellMeanSets{"AB", "AC", "BC", "ABC"};

ModelFormula auto_formula(const std::vector<StatRecord>& records, std::vector<std::string>& dropped) {
    std::map<char, std::set<std::string>> levels;
    std::set<double> d_values;
    for (const auto& r : records) {
        levels['A'].insert(r.genre);
        levels['B'].insert(r.respondent);
        levels['C'].insert(r.model);
        levels['E'].insert(r.testbed);
        d_values.insert(r.word_count);
    }
    auto usable = [&](char f) { return f == 'D' ? d_values.size() > 1 : levels[f].size() > 1; };
    ModelFormula full = ModelFormula::full();
    ModelFormula f;
    for (const auto& t : full.terms) {
        bool ok = std::all_of(t.factors.begin(), t.factors.end(), usable);
        if (ok) f.terms.push_back(t);
        else dropped.push_back(t.name());
    }
    std::set<std::string> prompts;
    for (const auto& r : records) prompts.insert(r.genre + "/" + r.prompt);
    f.random_prompt = prompts.size() > 1;
    return f;
}

void stage_stats(const RunConfig& cfg) {
    require(cfg, Stage::Benchmark, Stage::Stats);
    StageWriter out(cfg, Stage::Stats);
    const auto corpus = load_ingested(out);
    const auto sets = load_layers(out, corpus);
    const auto plan = load_folds(out);
    const auto preds = parse_predictions(out.upstream(Stage::Benchmark, "predictions.jsonl"));

    std::map<std::string, std::vector<Prediction>> by_model;
    for (const auto& p : preds) by_model[p.model_id].push_back(p);
    std::vector<StatRecord> records;
    for (const auto& [model, rows] : by_model) {
        const auto scores = resolve_scores(rows, plan);
        for (std::size_t i = 0; i < corpus.size(); ++i) {
            const auto& d = corpus.at(i);
            auto it = scores.find(d.id);
            if (it == scores.end()) continue;
            StatRecord r;
            r.y = it->second;
            r.genre = d.genre.str();
            r.prompt = d.prompt_id;
            r.respondent = d.respondent.str();
            r.model = model;
            r.word_count = static_cast<double>(std::max<std::size_t>(1, sets[i].length()));
            r.testbed = d.testbed;
            records.push_back(std::move(r));
        }
    }
    if (records.empty()) throw ValidationError("no predictions to analyze");
    out.write("records.csv", stat_records_to_csv(records));

    std::vector<std::string> dropped;
    const auto formula = cfg.formula == "auto" ? auto_formula(records, dropped) : ModelFormula::parse(cfg.formula);
    for (const auto& t : dropped) out.warn("term " + t + " dropped: a factor has a single level");
    const auto design = build_design_matrix(records, formula);
    for (const auto& w : design.warnings) out.warn(w);

    if (formula.random_prompt) {
        const auto fit = fit_random_intercept(records, formula);
        out.write("anova.csv", anova_to_csv(fit.anova));
        out.write("variance_components.csv", variance_components_to_csv(fit.variance));
        if (fit.variance.boundary) out.warn("prompt variance estimate is on the boundary");
    } else {
        out.write("anova.csv", anova_to_csv(anova_type3(design, response_vector(records))));
    }
    for (const auto& f : kCellMeanSets) {
        out.write("cell_means_" + f + ".csv", cell_means_to_csv(interaction_cell_means(records, f), f));
    }
    out.params() = {{"formula", formula.str()}, {"records", records.size()}};
    out.commit();
}

// ---- report

std::vector<std::map<std::string, std::string>> read_table(const std::string& csv) {
    const auto rows = parse_csv(csv);
    std::vector<std::map<std::string, std::string>> out;
    if (rows.empty()) return out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        std::map<std::string, std::string> m;
        for (std::size_t c = 0; c < rows[0].fields.size() && c < rows[r].fields.size(); ++c) {
            m[rows[0].fields[c]] = rows[r].fields[c];
        }
        out.push_back(std::move(m));
    }
    return out;
}

double as_number(const std::string& s) {
    auto v = parse_double(s);
    return v ? *v : std::nan("");
}

std::string interaction_plot(const std::string& csv, const std::string& factors) {
    const auto rows = read_table(csv);
    const std::string x_key(1, factors[0]), line_key(1, factors[1]);
    std::vector<std::string> xs;
    std::vector<std::string> lines;
    std::map<std::pair<std::string, std::string>, double> values;
    for (const auto& r : rows) {
        const auto& x = r.at(x_key);
        const auto& l = r.at(line_key);
        if (std::find(xs.begin(), xs.end(), x) == xs.end()) xs.push_back(x);
        if (std::find(lines.begin(), lines.end(), l) == lines.end()) lines.push_back(l);
        values[{x, l}] = as_number(r.at("mean"));
    }
    std::sort(xs.begin(), xs.end());
    std::sort(lines.begin(), lines.end());
    std::vector<PlotSeries> series;
    for (const auto& l : lines) {
        PlotSeries s{line_key + "=" + l, {}};
        for (const auto& x : xs) {
            auto it = values.find({x, l});
            s.values.push_back(it == values.end() ? std::nan("") : it->second);
        }
        series.push_back(std::move(s));
    }
    return svg_line_chart("Mean score by " + x_key + " x " + line_key, xs, series, "mean score");
}

void stage_report(const RunConfig& cfg) {
    require(cfg, Stage::Weigh, Stage::Report);
    require(cfg, Stage::Stats, Stage::Report);
    StageWriter out(cfg, Stage::Report);

    const auto series = read_table(out.upstream(Stage::Weigh, "expressive.csv"));
    std::vector<std::string> reps;
    PlotSeries cum{"cumulative", {}};
    for (const auto& r : series) {
        reps.push_back(r.at("rep"));
        cum.values.push_back(as_number(r.at("cumulative")));
    }
    out.write("expressive_power.svg",
              svg_line_chart("Cumulative expressive power", reps, {cum}, "cumulative e"));

    auto weights = read_table(out.upstream(Stage::Weigh, "weights.csv"));
    std::vector<std::pair<double, std::string>> word_rows;
    for (const auto& r : weights) {
        if (r.at("rep") == "word" && r.at("selected") == "1") word_rows.emplace_back(as_number(r.at("weight")), r.at("token"));
    }
    std::sort(word_rows.begin(), word_rows.end(),
              [](const auto& a, const auto& b) { return a.first != b.first ? a.first > b.first : a.second < b.second; });
    if (word_rows.size() > 20) word_rows.resize(20);
    std::vector<std::string> labels;
    std::vector<double> values;
    for (const auto& [w, t] : word_rows) {
        labels.push_back(t);
        values.push_back(w);
    }
    out.write("token_weights.svg", svg_bar_chart("Top word-token weights", labels, values, "weight"));

    const auto att_dir = stage_dir(cfg, Stage::Attention);
    if (fs::exists(att_dir / "manifest.json")) {
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(att_dir)) {
            if (e.path().extension() == ".csv") files.push_back(e.path());
        }
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
            const auto rows = read_table(out.upstream(Stage::Attention, f.filename().string()));
            if (rows.empty()) continue;
            std::vector<std::string> cols;
            for (const auto& [k, v] : rows.front()) {
                if (k.rfind("mean_A_", 0) == 0) cols.push_back(k);
            }
            for (const auto& col : cols) {
                std::vector<std::string> tl;
                std::vector<double> tv;
                for (const auto& r : rows) {
                    tl.push_back(r.at("token"));
                    tv.push_back(as_number(r.at(col)));
                }
                const auto stem = f.stem().string();
                out.write(stem + "_" + col + ".svg",
                          svg_bar_chart("Attention " + col.substr(7) + " (" + stem + ")", tl, tv, "mean attention"));
            }
        }
    }

    for (const auto& f : {std::string("AB"), std::string("AC"), std::string("BC")}) {
        out.write("interaction_" + f + ".svg",
                  interaction_plot(out.upstream(Stage::Stats, "cell_means_" + f + ".csv"), f));
    }
    out.commit();
}

} // namespace

void run_stage(const RunConfig& config, Stage stage) {
    switch (stage) {
    case Stage::Ingest: stage_ingest(config); break;
    case Stage::Annotate: stage_annotate(config); break;
    case Stage::Weigh: stage_weigh(config); break;
    case Stage::Attention: stage_attention(config); break;
    case Stage::Benchmark: stage_benchmark(config); break;
    case Stage::Stats: stage_stats(config); break;
    case Stage::Report: stage_report(config); break;
    }
}

void run_pipeline(const RunConfig& config, const std::vector<Stage>& stages) {
    config.validate();
    fs::create_directories(config.output);
    for (auto s : stages) run_stage(config, s);
}

} // namespace essaylens

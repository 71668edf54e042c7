// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The essaylens Authors

// Prints one PASS/FAIL line per acceptance criterion; exits non-zero on any FAIL.

#include "essaylens/attention.hpp"
#include "essaylens/error.hpp"
#include "essaylens/metrics.hpp"
#include "essaylens/pipeline.hpp"
#include "essaylens/stats.hpp"
#include "essaylens/text_io.hpp"
#include "essaylens/weighting.hpp"

#include "attention_oracle.hpp"
#include "f_oracle.hpp"
#include "random_corpus.hpp"
#include "weighting_oracle.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <set>
#include <sstream>

using namespace essaylens;
namespace fs = std::filesystem;

namespace {

constexpr double kRelTol = 1e-12;
constexpr double kWeightSeconds = 5.0;
constexpr double kPipelineSeconds = 60.0;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool rel_close(double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

struct Outcome {
    bool ok = true;
    std::ostringstream detail;

    void expect(bool cond, const std::string& what) {
        if (!cond && ok) detail << what;
        ok = ok && cond;
    }
};

// ---------------------------------------------------------------------------

Outcome weighting_oracle() {
    Outcome o;
    const auto t0 = Clock::now();
    int corpora = 0;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        auto rc = oracle::random_corpus(seed);
        for (double t_c : {0.3, 0.6, 0.95}) {
            for (bool all : {false, true}) {
                SelectionConfig cfg;
                cfg.t_c = t_c;
                cfg.scope = all ? CorrelationScope::AllOtherReps : CorrelationScope::WordOnly;
                rc.input.t_c = t_c;
                rc.input.all_other_reps = all;
                const auto table = compute_token_weights(rc.sets, rc.labels, cfg, &rc.sentiment);
                const auto expect = oracle::run(rc.input);
                ++corpora;
                for (std::size_t r = 0; r < table.reps.size(); ++r) {
                    o.expect(table.reps[r].tokens.size() == expect.reps[r].size(), "vocabulary size differs");
                    for (const auto& t : table.reps[r].tokens) {
                        const auto it = expect.reps[r].find(t.token);
                        if (it == expect.reps[r].end()) {
                            o.expect(false, "token " + t.token + " missing from oracle");
                            continue;
                        }
                        o.expect(rel_close(t.weight, it->second.weight, kRelTol), "weight of " + t.token);
                        o.expect(t.selected == it->second.selected, "indicator of " + t.token);
                    }
                    if (r > 0) o.expect(rel_close(expressive_power(table, r), expect.e[r], kRelTol), "expressive power");
                }
            }
        }
    }
    const double s = seconds_since(t0);
    o.expect(s < kWeightSeconds, "runtime over budget");
    o.detail << (o.ok ? "" : "; ") << corpora << " configurations, " << s << " s";
    return o;
}

Outcome relabel_invariance() {
    Outcome o;
    for (std::uint64_t seed = 1000; seed < 1100; ++seed) {
        const auto rc = oracle::random_corpus(seed);
        auto swapped = rc.labels;
        for (auto& l : swapped) l = l == "A" ? "B" : "A";
        const auto a = compute_token_weights(rc.sets, rc.labels, SelectionConfig{}, &rc.sentiment);
        const auto b = compute_token_weights(rc.sets, swapped, SelectionConfig{}, &rc.sentiment);
        for (std::size_t r = 0; r < a.reps.size(); ++r) {
            for (std::size_t i = 0; i < a.reps[r].tokens.size(); ++i) {
                o.expect(rel_close(a.reps[r].tokens[i].weight, b.reps[r].tokens[i].weight, kRelTol),
                         "weight changed for " + a.reps[r].tokens[i].token);
            }
        }
    }
    o.detail << (o.ok ? "" : "; ") << "100 corpora";
    return o;
}

std::set<std::string> selected_set(const TokenWeightTable& t) {
    std::set<std::string> out;
    for (const auto& rep : t.reps)
        for (const auto& tok : rep.tokens)
            if (tok.selected) out.insert(rep.name + "/" + tok.token);
    return out;
}

bool subset(const std::set<std::string>& a, const std::set<std::string>& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

Outcome threshold_monotonicity() {
    Outcome o;
    const std::vector<double> tws{1e-9, 1e-5, 1e-3, 0.01, 0.03, 0.1, 0.3, 1.0};
    const std::vector<double> tcs{0.05, 0.2, 0.4, 0.6, 0.8, 0.95, 1.0};
    int comparisons = 0;
    for (std::uint64_t seed = 200; seed < 220; ++seed) {
        const auto rc = oracle::random_corpus(seed);
        for (bool all : {false, true}) {
            std::vector<std::vector<std::set<std::string>>> grid(tws.size(), std::vector<std::set<std::string>>(tcs.size()));
            for (std::size_t i = 0; i < tws.size(); ++i) {
                for (std::size_t j = 0; j < tcs.size(); ++j) {
                    SelectionConfig cfg;
                    cfg.t_w = tws[i];
                    cfg.t_c = tcs[j];
                    cfg.scope = all ? CorrelationScope::AllOtherReps : CorrelationScope::WordOnly;
                    grid[i][j] = selected_set(compute_token_weights(rc.sets, rc.labels, cfg, &rc.sentiment));
                }
            }
            for (std::size_t i = 0; i < tws.size(); ++i) {
                for (std::size_t j = 0; j < tcs.size(); ++j) {
                    if (i + 1 < tws.size()) {
                        o.expect(subset(grid[i + 1][j], grid[i][j]), "raising t_w added a token");
                        ++comparisons;
                    }
                    if (j + 1 < tcs.size()) {
                        o.expect(subset(grid[i][j], grid[i][j + 1]), "raising t_c removed a token");
                        ++comparisons;
                    }
                }
            }
        }
    }
    o.detail << (o.ok ? "" : "; ") << comparisons << " nested-set comparisons";
    return o;
}

Outcome qwk_and_correlations() {
    Outcome o;
    o.expect(quadratic_weighted_kappa({0, 1, 2, 3, 4, 2}, {0, 1, 2, 3, 4, 2}, 5) == 1.0, "perfect agreement");
    o.expect(quadratic_weighted_kappa({0, 0, 1, 1}, {0, 1, 1, 1}, 2) == 0.5, "two-category example");
    std::mt19937_64 rng(20261016);
    std::uniform_int_distribution<int> u(0, 5);
    std::vector<int> g(10000), p(10000);
    for (auto& v : g) v = u(rng);
    for (auto& v : p) v = u(rng);
    const double kappa = quadratic_weighted_kappa(g, p, 6);
    o.expect(std::abs(kappa) < 0.05, "independent kappa too large");

    std::uniform_real_distribution<double> x01(0.0, 1.0);
    std::vector<double> x(200), affine, reversed;
    for (auto& v : x) v = x01(rng);
    for (double v : x) affine.push_back(-0.5 + 4.0 * v);
    for (double v : x) reversed.push_back(std::exp(-3.0 * v));
    const double pcc = pearson(x, affine);
    const double src = spearman(x, reversed);
    o.expect(std::abs(pcc - 1.0) <= 1e-12, "PCC affine invariance");
    o.expect(std::abs(src + 1.0) <= 1e-12, "SRC reversal");
    o.detail << (o.ok ? "" : "; ") << "independent kappa " << kappa << ", PCC-1 " << pcc - 1.0 << ", SRC+1 " << src + 1.0;
    return o;
}

StatRecord rec(double y, std::string a, std::string b = "H", std::string s = "s") {
    StatRecord r;
    r.y = y;
    r.genre = std::move(a);
    r.respondent = std::move(b);
    r.model = "m";
    r.prompt = std::move(s);
    r.testbed = "t";
    return r;
}

double term_value(const AnovaTable& t, const std::string& name, double AnovaRow::*field) {
    for (const auto& r : t.rows)
        if (r.term == name) return r.*field;
    throw std::runtime_error("missing term " + name);
}

Outcome anova_closed_form() {
    Outcome o;
    std::vector<StatRecord> one{rec(1, "g1"), rec(2, "g1"), rec(3, "g1"), rec(3, "g2"), rec(4, "g2"), rec(5, "g2")};
    const auto t = anova_type3(build_design_matrix(one, ModelFormula::parse("A")), response_vector(one));
    const double f = term_value(t, "A", &AnovaRow::f);
    const double p = term_value(t, "A", &AnovaRow::p);
    o.expect(term_value(t, "A", &AnovaRow::num_df) == 1 && term_value(t, "A", &AnovaRow::den_df) == 4, "df");
    o.expect(std::abs(f - 6.0) <= 1e-10, "F");
    o.expect(std::abs(p - oracle::f_upper_tail(6.0, 1, 4)) <= 1e-6, "p vs incomplete-beta quadrature");

    std::mt19937_64 rng(31);
    std::normal_distribution<double> z(0.0, 1.0);
    std::vector<StatRecord> two;
    for (const char* a : {"arg", "narr"})
        for (const char* b : {"H", "M"})
            for (int i = 0; i < 8; ++i) two.push_back(rec((a[0] == 'a' ? 1.0 : 0.0) + (b[0] == 'M' ? 0.4 : 0.0) + z(rng), a, b));
    const auto d = build_design_matrix(two, ModelFormula::parse("A + B + A:B"));
    const auto y = response_vector(two);
    const auto t3 = anova_type3(d, y);
    const auto t1 = anova_type1(d, y);
    const double tss = (y.array() - y.mean()).square().sum();
    double sum = t3.residual->ss;
    for (const char* term : {"A", "B", "A:B"}) {
        sum += term_value(t3, term, &AnovaRow::ss);
        o.expect(rel_close(term_value(t3, term, &AnovaRow::ss), term_value(t1, term, &AnovaRow::ss), 1e-8),
                 "Type III differs from Type I");
    }
    o.expect(rel_close(sum, tss, 1e-8), "SS additivity");
    o.detail << (o.ok ? "" : "; ") << "F=" << f << ", p=" << p;
    return o;
}

Outcome reml() {
    Outcome o;
    ModelFormula f;
    f.random_prompt = true;
    std::vector<StatRecord> small{rec(1, "a", "H", "s1"), rec(3, "a", "H", "s1"), rec(5, "a", "H", "s2"), rec(7, "a", "H", "s2")};
    const auto fit = fit_random_intercept(small, f);
    o.expect(std::abs(fit.variance.sigma2_residual - 2.0) <= 1e-6, "residual variance of the worked example");
    o.expect(std::abs(fit.variance.sigma2_group - 7.0) <= 1e-6, "group variance of the worked example");

    std::mt19937_64 rng(77);
    std::normal_distribution<double> z(0.0, 1.0);
    const double s2g = 0.5, s2e = 2.0;
    std::vector<StatRecord> sim;
    for (int g = 0; g < 200; ++g) {
        const double u = std::sqrt(s2g) * z(rng);
        for (int i = 0; i < 50; ++i) sim.push_back(rec(1.0 + u + std::sqrt(s2e) * z(rng), "a", "H", "s" + std::to_string(g)));
    }
    const auto sfit = fit_random_intercept(sim, f);
    o.expect(std::abs(sfit.variance.sigma2_group - s2g) <= 0.1 * s2g, "simulated group variance");
    o.expect(std::abs(sfit.variance.sigma2_residual - s2e) <= 0.1 * s2e, "simulated residual variance");

    std::vector<StatRecord> flat;
    for (const char* s : {"s1", "s2", "s3", "s4"})
        for (double v : {2.0, 3.0, 7.0}) flat.push_back(rec(v, "a", "H", s));
    const auto ffit = fit_random_intercept(flat, f);
    o.expect(ffit.variance.boundary && ffit.variance.sigma2_group == 0.0, "equal groups should sit on the zero boundary");
    o.detail << (o.ok ? "" : "; ") << "simulated (" << sfit.variance.sigma2_residual << ", " << sfit.variance.sigma2_group
             << ") vs (" << s2e << ", " << s2g << ")";
    return o;
}

AttentionRecord record_from(const oracle::Tensor4& a, std::vector<std::string> sub, std::vector<std::pair<int, int>> align,
                            std::string doc = "d", int fold = 0) {
    AttentionRecord r;
    r.doc_id = std::move(doc);
    r.fold = fold;
    r.model_id = "m";
    r.subword_tokens = std::move(sub);
    r.word_alignment = std::move(align);
    r.layers = static_cast<int>(a.size());
    r.heads = static_cast<int>(a[0].size());
    for (const auto& l : a)
        for (const auto& h : l)
            for (const auto& row : h)
                for (double v : row) r.attention.push_back(static_cast<float>(v));
    return r;
}

Outcome attention() {
    Outcome o;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<float> u(0.05f, 1.0f);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const int t = 9;
        oracle::Tensor4 a(2, std::vector<std::vector<std::vector<double>>>(2));
        for (auto& l : a)
            for (auto& h : l)
                for (int q = 0; q < t; ++q) {
                    std::vector<float> row(t);
                    float s = 0.0f;
                    for (auto& v : row) s += (v = u(rng));
                    std::vector<double> drow;
                    for (auto v : row) drow.push_back(static_cast<double>(v / s));
                    h.push_back(drow);
                }
        const auto r = record_from(a, {"[CLS]", "the", "sah", "##ara", "was", "hot", "##ter", ".", "[SEP]"},
                                   {{1, 2}, {2, 4}, {4, 5}, {5, 7}, {7, 8}});
        validate_attention_record(r);
        for (std::size_t w = 0; w < r.word_count(); ++w) {
            const double got = aggregate_word_attention(r, w);
            const double want = oracle::attention_received(a, r.word_alignment, w);
            worst = std::max(worst, std::abs(got - want));
        }
    }
    o.expect(worst <= 1e-12, "aggregation differs from the direct definition");

    for (int t : {4, 8, 16}) {
        oracle::Tensor4 uni(2, std::vector<std::vector<std::vector<double>>>(
                                   2, std::vector<std::vector<double>>(t, std::vector<double>(t, 1.0 / t))));
        std::vector<std::string> sub{"[CLS]"};
        std::vector<std::pair<int, int>> align;
        for (int i = 1; i < t - 1; ++i) {
            sub.push_back("w" + std::to_string(i));
            align.emplace_back(i, i + 1);
        }
        sub.push_back("[SEP]");
        const auto r = record_from(uni, sub, align);
        for (std::size_t w = 0; w < r.word_count(); ++w) {
            o.expect(aggregate_word_attention(r, w) == 1.0 / t, "uniform attention is not 1/T");
        }
    }

    FoldPlan plan;
    plan.k = 5;
    plan.assignments = {{"h", 3}};
    Document human;
    human.id = "h";
    Document machine;
    machine.id = "g";
    const LayerSet lh("h", {"word", {"hot"}});
    const LayerSet lg("g", {"word", {"hot"}});
    std::vector<AttentionRecord> recs;
    double mean = 0.0;
    for (int f = 0; f < 5; ++f) {
        const int t = 3 + f;
        oracle::Tensor4 uni(1, std::vector<std::vector<std::vector<double>>>(
                                   1, std::vector<std::vector<double>>(t, std::vector<double>(t, 1.0 / t))));
        std::vector<std::string> sub{"[CLS]", "hot"};
        while (static_cast<int>(sub.size()) < t) sub.push_back("[SEP]");
        recs.push_back(record_from(uni, sub, {{1, 2}}, "h", f));
        recs.push_back(record_from(uni, sub, {{1, 2}}, "g", f));
        mean += aggregate_word_attention(recs.back(), 0);
    }
    mean /= 5.0;
    const AttentionIndex index(recs);
    const auto in_fold = fold_average_attention(index, human, lh, plan, "hot");
    const auto out_of_sample = fold_average_attention(index, machine, lg, plan, "hot");
    o.expect(in_fold.per_fold.size() == 1 && in_fold.score == aggregate_word_attention(*index.find("h", 3), 0),
             "in-fold document should use its held-out fold only");
    o.expect(out_of_sample.per_fold.size() == 5 && out_of_sample.score == mean,
             "out-of-sample document should average all five folds");
    o.detail << (o.ok ? "" : "; ") << "max deviation " << worst;
    return o;
}

// ---------------------------------------------------------------------------

const fs::path kSynthetic = fs::path(ESSAYLENS_SOURCE_DIR) / "data" / "synthetic";

struct PipelineRuns {
    fs::path serial;
    fs::path parallel;
    double seconds_serial = 0.0;
    double seconds_parallel = 0.0;
    std::string error;
};

const PipelineRuns& pipeline_runs() {
    static const PipelineRuns runs = [] {
        PipelineRuns r;
        const auto root = fs::temp_directory_path() / "essaylens_acceptance";
        fs::remove_all(root);
        r.serial = root / "jobs1";
        r.parallel = root / "jobs8";
        try {
            for (auto [dir, jobs, secs] : {std::tuple{r.serial, std::size_t{1}, &r.seconds_serial},
                                           std::tuple{r.parallel, std::size_t{8}, &r.seconds_parallel}}) {
                auto cfg = load_run_config(kSynthetic / "run.yaml");
                cfg.output = dir;
                cfg.jobs = jobs;
                const auto t0 = Clock::now();
                run_pipeline(cfg, all_stages());
                *secs = seconds_since(t0);
            }
        } catch (const std::exception& e) {
            r.error = e.what();
        }
        return r;
    }();
    return runs;
}

Outcome determinism() {
    Outcome o;
    const auto& runs = pipeline_runs();
    if (!runs.error.empty()) {
        o.expect(false, "pipeline failed: " + runs.error);
        return o;
    }
    int files = 0;
    for (const auto& e : fs::recursive_directory_iterator(runs.serial)) {
        if (!e.is_regular_file() || e.path().extension() != ".csv") continue;
        const auto rel = fs::relative(e.path(), runs.serial);
        const auto other = runs.parallel / rel;
        o.expect(fs::exists(other), rel.string() + " missing from the parallel run");
        if (fs::exists(other)) o.expect(read_file(e.path()) == read_file(other), rel.string() + " differs");
        ++files;
    }
    o.expect(files > 0, "no CSV artifacts");
    o.expect(runs.seconds_serial + runs.seconds_parallel < kPipelineSeconds, "runtime over budget");
    o.detail << (o.ok ? "" : "; ") << files << " CSV files, " << runs.seconds_serial << " s + " << runs.seconds_parallel << " s";
    return o;
}

std::map<std::string, std::vector<std::string>> csv_by_first_column(const fs::path& path) {
    std::map<std::string, std::vector<std::string>> out;
    for (const auto& row : parse_csv(read_file(path))) {
        if (!row.fields.empty()) out[row.fields[0]] = row.fields;
    }
    return out;
}

Outcome direction_of_effect() {
    Outcome o;
    const auto& runs = pipeline_runs();
    if (!runs.error.empty()) {
        o.expect(false, "pipeline failed: " + runs.error);
        return o;
    }
    const auto e = csv_by_first_column(runs.serial / "weigh" / "expressive.csv");
    const auto m = csv_by_first_column(runs.serial / "benchmark" / "metrics.csv");
    if (!e.count("marker") || !e.count("redundant") || !m.count("knn") || !m.count("mean")) {
        o.expect(false, "expected rows are missing");
        return o;
    }
    const double e_marker = std::stod(e.at("marker")[1]);
    const double e_redundant = std::stod(e.at("redundant")[1]);
    const double mse_knn = std::stod(m.at("knn")[1]);
    const double mse_mean = std::stod(m.at("mean")[1]);
    o.expect(e_marker > e_redundant, "marked layer is not more expressive than the uninformative one");
    o.expect(mse_knn < 0.8 * mse_mean, "KNN does not beat 0.8x the mean predictor");
    o.detail << (o.ok ? "" : "; ") << "e(marker)=" << e_marker << " e(redundant)=" << e_redundant
             << ", MSE knn/mean=" << mse_knn / mse_mean;
    return o;
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"weighting oracle equivalence", weighting_oracle},
        {"class-relabel invariance", relabel_invariance},
        {"threshold monotonicity", threshold_monotonicity},
        {"QWK, PCC and SRC properties", qwk_and_correlations},
        {"ANOVA closed form", anova_closed_form},
        {"REML variance components", reml},
        {"attention aggregation and fold policy", attention},
        {"end-to-end determinism", determinism},
        {"direction of effect on planted data", direction_of_effect},
    };
    int failed = 0;
    for (const auto& [name, run] : criteria) {
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o.ok = false;
            o.detail << "exception: " << e.what();
        }
        std::printf("%s %s (%s)\n", o.ok ? "PASS" : "FAIL", name.c_str(), o.detail.str().c_str());
        failed += o.ok ? 0 : 1;
    }
    fs::remove_all(fs::temp_directory_path() / "essaylens_acceptance");
    return failed == 0 ? 0 : 1;
}

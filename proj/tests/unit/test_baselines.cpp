// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The essaylens Authors

#include "essaylens/baselines.hpp"
#include "essaylens/error.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>

using namespace essaylens;

namespace {

FeatureVector fv(std::string id, std::vector<std::uint32_t> sparse) {
    return {std::move(id), std::vector<double>(kDenseFeatures, 0.0), std::move(sparse)};
}

struct Planted {
    Corpus corpus;
    std::vector<LayerSet> layers;
    FoldPlan plan;
};

// Gold score is the share of "good" tokens; KNN over word presence should track it.
Planted planted(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> q(0.0, 1.0);
    std::vector<Document> docs;
    Planted p;
    for (int i = 0; i < 80; ++i) {
        const double quality = q(rng);
        std::vector<std::string> tokens;
        for (int t = 0; t < 30; ++t) {
            const bool good = q(rng) < quality;
            tokens.push_back(good ? "fine" + std::to_string(t % 6) : "plain" + std::to_string(t % 6));
        }
        tokens.push_back(".");
        Document d;
        d.id = "d" + std::to_string(100 + i);
        d.text = "x";
        d.gold_score = quality;
        d.score_min = 0.0;
        d.score_max = 1.0;
        docs.push_back(d);
        p.layers.emplace_back(d.id, TokenLayer{"word", tokens});
    }
    p.corpus = Corpus(docs);
    p.plan = make_folds(p.corpus, 5, seed);
    return p;
}

} // namespace

TEST_CASE("lexical measures on a two-sentence sample") {
    const auto word = tokenize("It was so hot outside, it was like the Sahara desert. I got out of the car with a huge grin on my face.");
    const auto m = lexical_measures(word);
    REQUIRE(m.size() == kDenseFeatures);
    CHECK(m[0] == 27.0);
    CHECK(m[2] == 2.0);
    CHECK(m[3] == 13.5);
    CHECK(m[1] == doctest::Approx(77.0 / 24.0).epsilon(1e-15));
}

TEST_CASE("feature space drops tokens it has not seen") {
    LayerSet a("a", {"word", {"red", "blue", "red"}});
    LayerSet b("b", {"word", {"green", "blue", "mauve"}});
    const auto space = FeatureSpace::fit({&a}, {"word"});
    CHECK(space.keys() == std::vector<std::string>{"word=blue", "word=red"});
    const auto x = featurize(b, space);
    CHECK(x.sparse == std::vector<std::uint32_t>{0});
    CHECK(x.dense.size() == kDenseFeatures);
}

TEST_CASE("KNN neighbours") {
    SUBCASE("k=1 returns the exact match") {
        KnnModel m({fv("a", {0}), fv("b", {1, 2}), fv("c", {3})}, {0.1, 0.7, 0.9}, 1);
        CHECK(m.predict(fv("q", {1, 2})) == 0.7);
    }
    SUBCASE("equidistant neighbours are averaged") {
        KnnModel m({fv("a", {0}), fv("b", {1}), fv("c", {0, 1, 2})}, {0.2, 0.6, 1.0}, 2);
        CHECK(m.predict(fv("q", {})) == doctest::Approx(0.4).epsilon(1e-15));
    }
    SUBCASE("k is clamped to the training size") {
        KnnModel m({fv("a", {0}), fv("b", {1}), fv("c", {2})}, {0.3, 0.6, 0.9}, 10);
        CHECK(m.effective_k() == 3);
        CHECK(m.predict(fv("q", {})) == doctest::Approx(0.6).epsilon(1e-15));
    }
    SUBCASE("training order does not matter") {
        KnnModel m1({fv("a", {0}), fv("b", {1}), fv("c", {2, 3})}, {0.1, 0.5, 0.8}, 2);
        KnnModel m2({fv("c", {2, 3}), fv("a", {0}), fv("b", {1})}, {0.8, 0.1, 0.5}, 2);
        for (const auto& q : {fv("q", {}), fv("q", {2}), fv("q", {0, 1})}) CHECK(m1.predict(q) == m2.predict(q));
    }
    CHECK_THROWS_AS(KnnModel({}, {}, 3), ValidationError);
    CHECK_THROWS_AS(KnnModel({fv("a", {})}, {0.5}, 0), ConfigError);
}

TEST_CASE("ridge recovers a planted sparse effect") {
    std::vector<FeatureVector> rows;
    std::vector<double> y;
    for (int i = 0; i < 40; ++i) {
        const bool on = i % 2 == 0;
        rows.push_back(fv("r" + std::to_string(i), on ? std::vector<std::uint32_t>{0} : std::vector<std::uint32_t>{1}));
        y.push_back(on ? 0.8 : 0.2);
    }
    RidgeModel r(rows, y, 2, 1e-6);
    CHECK(r.predict(fv("q", {0})) == doctest::Approx(0.8).epsilon(1e-5));
    CHECK(r.predict(fv("q", {1})) == doctest::Approx(0.2).epsilon(1e-5));
    CHECK_THROWS_AS(RidgeModel(rows, y, 2, 0.0), ConfigError);
}

TEST_CASE("mean predictor on constant gold is exact") {
    auto p = planted(3);
    std::vector<Document> docs = p.corpus.documents();
    for (auto& d : docs) d.gold_score = 0.5;
    const Corpus flat(docs);
    ModelSpec spec;
    spec.kind = ModelSpec::Kind::Mean;
    spec.name = "mean";
    const auto r = cross_validate(flat, p.layers, p.plan, spec, QwkBinning::equal_width(10));
    CHECK(r.report.mse == 0.0);
    CHECK(r.reference_report.mse == 0.0);
}

TEST_CASE("cross-validated KNN beats the mean on a planted signal and is deterministic") {
    const auto p = planted(9);
    ModelSpec spec;
    spec.kind = ModelSpec::Kind::Knn;
    spec.name = "knn";
    spec.k = 5;
    spec.features = {"word"};
    const auto serial = cross_validate(p.corpus, p.layers, p.plan, spec, QwkBinning::equal_width(10), 1);
    const auto parallel = cross_validate(p.corpus, p.layers, p.plan, spec, QwkBinning::equal_width(10), 4);
    CHECK(serial.predictions.size() == p.corpus.size());
    CHECK(serial.report.mse < 0.8 * serial.reference_report.mse);
    CHECK(serial.predictions == parallel.predictions);
    CHECK(std::is_sorted(serial.predictions.begin(), serial.predictions.end(), [](const auto& a, const auto& b) {
        return std::tie(a.doc_id, a.fold) < std::tie(b.doc_id, b.fold);
    }));
}

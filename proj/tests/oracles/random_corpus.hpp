// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The essaylens Authors

#pragma once

#include "essaylens/annotate.hpp"
#include "weighting_oracle.hpp"

#include <random>
#include <string>
#include <vector>

namespace oracle {

/// Small two-class corpus with a word layer and two derived tag layers, in
/// both library and oracle form. At most 20 documents and 100 distinct tokens.
struct RandomCorpus {
    std::vector<essaylens::LayerSet> sets;
    std::vector<std::string> labels;
    essaylens::LexiconResource sentiment;
    WeightingInput input;
};

inline RandomCorpus random_corpus(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto uniform = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    RandomCorpus rc;
    rc.sentiment.name = "sentiment";
    rc.sentiment.kind = essaylens::LexiconResource::Kind::SenseScored;
    for (int k = 0; k < 40; k += 3) {
        std::vector<std::pair<double, double>> senses;
        const int n = uniform(1, 3);
        for (int s = 0; s < n; ++s) {
            const double pos = uniform(0, 8) / 8.0;
            const double neg = uniform(0, 8) / 8.0;
            senses.emplace_back(pos, neg);
            rc.sentiment.senses["w" + std::to_string(k)].push_back({"S" + std::to_string(s), pos, neg});
        }
        rc.input.senses["w" + std::to_string(k)] = senses;
    }

    const int n_docs = uniform(6, 20);
    for (int d = 0; d < n_docs; ++d) {
        const bool b = d % 2 == 1 || (uniform(0, 3) == 0 && d > 0);
        const std::string label = b ? "B" : "A";
        std::vector<std::string> word, tag, grp;
        const int len = uniform(3, 12);
        for (int i = 0; i < len; ++i) {
            int k = uniform(0, 39);
            if (b && uniform(0, 2) == 0) k = uniform(0, 9);
            word.push_back("w" + std::to_string(k));
            tag.push_back(k < 28 ? "T" + std::to_string(k % 7) : word.back());
            grp.push_back("G" + std::to_string(k / 5));
        }
        essaylens::LayerSet ls("doc" + std::to_string(d), {"word", word});
        ls.add({"tag", tag});
        ls.add({"grp", grp});
        rc.sets.push_back(std::move(ls));
        rc.labels.push_back(label);
        rc.input.docs.push_back({word, tag, grp});
    }
    rc.input.labels = rc.labels;
    return rc;
}

} // namespace oracle

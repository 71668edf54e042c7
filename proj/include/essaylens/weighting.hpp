// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The essaylens Authors

#pragma once

#include "essaylens/annotate.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace essaylens {

enum class CorrelationScope {
    WordOnly,     ///< redundancy measured against word-layer tokens only
    AllOtherReps, ///< against every token of every other representation
};

CorrelationScope parse_correlation_scope(std::string_view text);
std::string to_string(CorrelationScope scope);

struct SelectionConfig {
    double t_w = 1e-5;
    double t_c = 0.95;
    CorrelationScope scope = CorrelationScope::WordOnly;
    double smoothing_eps = 0.5;

    void validate() const;
};

/// Vocabulary, occurrence counts and document postings of one representation.
struct RepresentationIndex {
    std::string name;
    std::vector<std::string> vocab;                      ///< sorted
    std::vector<std::int64_t> occurrences;               ///< z: total occurrences in the corpus
    std::vector<std::vector<std::int64_t>> class_occurrences; ///< [token][class]
    std::vector<std::vector<std::uint32_t>> postings;    ///< [token] -> sorted document indices
    std::vector<std::vector<std::uint32_t>> doc_tokens;  ///< [doc] -> sorted distinct token ids

    std::optional<std::uint32_t> id_of(std::string_view token) const;
};

/// Presence index over a labeled set of layer sets. Classes are sorted.
struct CorpusIndex {
    std::size_t n_docs = 0;
    std::vector<std::string> classes;
    std::vector<std::uint32_t> doc_class;
    std::vector<std::int64_t> class_sizes;
    std::vector<RepresentationIndex> reps;

    std::size_t rep_index(std::string_view name) const;
};

/// Builds the index; every layer set must carry the same layers in the same
/// order. Needs at least two non-empty classes.
CorpusIndex build_corpus_index(const std::vector<LayerSet>& layersets, const std::vector<std::string>& class_labels,
                               std::size_t jobs = 1);

/// Smoothed document-presence probabilities p(f|c) = (df_c(f) + eps) / (N_c + 2 eps).
class ClassProbTable {
public:
    ClassProbTable(const CorpusIndex& index, double smoothing_eps);

    double probability(std::size_t rep, std::uint32_t token, std::size_t cls) const;
    std::int64_t doc_frequency(std::size_t rep, std::uint32_t token, std::size_t cls) const;
    std::int64_t class_size(std::size_t cls) const { return class_sizes_.at(cls); }
    std::size_t class_count() const noexcept { return class_sizes_.size(); }
    /// All class probabilities of one token, in class order.
    std::vector<double> probabilities(std::size_t rep, std::uint32_t token) const;

private:
    double eps_;
    std::vector<std::int64_t> class_sizes_;
    std::vector<std::vector<std::vector<std::int64_t>>> df_; ///< [rep][token][class]
};

ClassProbTable class_conditional_probability(const CorpusIndex& index, double smoothing_eps);

/// Mean over senses of (positive - negative); 0 for tokens outside the lexicon.
double semantic_orientation(std::string_view token, const LexiconResource* sentiment_lexicon);

/// max over ordered class pairs (a,b), a != b, of p_a * ln(p_a / p_b), plus the orientation.
double token_weight(std::span<const double> class_probabilities, double orientation);

/// Pearson correlation of two binary presence vectors given their supports.
/// Zero-variance vectors correlate 0 with everything.
double presence_correlation(std::int64_t n_docs, std::int64_t count_a, std::int64_t count_b, std::int64_t both);

double token_correlation(const CorpusIndex& index, std::size_t rep_f, std::uint32_t f, std::size_t rep_g,
                         std::uint32_t g);

struct TokenStats {
    std::string token;
    double weight = 0.0;
    double orientation = 0.0;
    std::int64_t count = 0;                   ///< z
    std::vector<std::int64_t> class_counts;   ///< occurrences per class
    std::vector<std::int64_t> doc_frequency;  ///< documents per class containing the token
    bool selected = false;
};

struct RepresentationWeights {
    std::string name;
    std::vector<TokenStats> tokens; ///< sorted by token

    const TokenStats* find(std::string_view token) const;
};

struct TokenWeightTable {
    std::vector<std::string> classes;
    std::vector<RepresentationWeights> reps; ///< reps[0] is the word layer
    SelectionConfig config;

    const RepresentationWeights& rep(std::string_view name) const;
    std::size_t rep_index(std::string_view name) const;
};

/// Indicator for token f of representation rep (> 0): weight above
/// t_w and no in-scope token of another representation correlated above t_c.
bool selection_indicator(const CorpusIndex& index, std::size_t rep, std::uint32_t token, double weight,
                         const SelectionConfig& cfg);

/// Full weighting run: probabilities, weights, orientation and selection for
/// every token of every representation. Word-layer tokens are selected iff
/// their weight clears t_w (they never go through the redundancy filter).
TokenWeightTable compute_token_weights(const CorpusIndex& index, const SelectionConfig& cfg,
                                       const LexiconResource* sentiment_lexicon = nullptr, std::size_t jobs = 1);
TokenWeightTable compute_token_weights(const std::vector<LayerSet>& layersets,
                                       const std::vector<std::string>& class_labels, const SelectionConfig& cfg,
                                       const LexiconResource* sentiment_lexicon = nullptr, std::size_t jobs = 1);

/// Occurrence-weighted share of selected tokens, for a non-word representation.
double expressive_power(const TokenWeightTable& table, std::size_t rep);
double expressive_power(const TokenWeightTable& table, std::string_view rep);

struct SeriesPoint {
    std::string rep;
    double e = 0.0;
    double cumulative = 0.0;
};

/// Starts at 1.0 for the word layer and adds e(r) for each representation in
/// `order` (empty = table order).
std::vector<SeriesPoint> cumulative_expressive_series(const TokenWeightTable& table,
                                                      const std::vector<std::string>& order = {});

std::string weights_to_csv(const TokenWeightTable& table);
std::string series_to_csv(const std::vector<SeriesPoint>& series);

} // namespace essaylens

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The essaylens Authors

#pragma once

#include "essaylens/annotate.hpp"
#include "essaylens/corpus.hpp"
#include "essaylens/metrics.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace essaylens {

/// Lexical measures in the dense block, in this order.
inline constexpr std::size_t kDenseFeatures = 4; // word_count, mean_word_length, sentence_count, mean_sentence_length

/// Fixed index space of binary presence features, keyed "layer=token".
class FeatureSpace {
public:
    static FeatureSpace fit(const std::vector<const LayerSet*>& training, const std::vector<std::string>& layers);

    const std::vector<std::string>& layers() const noexcept { return layers_; }
    const std::vector<std::string>& keys() const noexcept { return keys_; }
    std::size_t size() const noexcept { return keys_.size(); }
    std::optional<std::uint32_t> index_of(std::string_view key) const;

private:
    std::vector<std::string> layers_;
    std::vector<std::string> keys_; ///< sorted
    std::unordered_map<std::string, std::uint32_t> index_;
};

struct FeatureVector {
    std::string doc_id;
    std::vector<double> dense;          ///< kDenseFeatures lexical measures
    std::vector<std::uint32_t> sparse;  ///< sorted indices of features present
};

std::vector<double> lexical_measures(const TokenLayer& word);

/// Tokens unseen by the feature space are dropped.
FeatureVector featurize(const LayerSet& layers, const FeatureSpace& space);

struct ModelSpec {
    enum class Kind { Knn, Ridge, Mean };
    std::string name;
    Kind kind = Kind::Knn;
    int k = 5;
    double lambda = 1.0;
    std::vector<std::string> features;
};

ModelSpec::Kind parse_model_kind(std::string_view text);
std::string to_string(ModelSpec::Kind kind);

/// Per-column z-scoring of the dense block fitted on training rows.
struct DenseScaler {
    std::vector<double> mean;
    std::vector<double> scale;

    static DenseScaler fit(const std::vector<FeatureVector>& rows);
    std::vector<double> apply(const std::vector<double>& dense) const;
};

class KnnModel {
public:
    /// Throws when the training set is empty or k < 1.
    KnnModel(std::vector<FeatureVector> train, std::vector<double> scores, int k);

    double predict(const FeatureVector& x) const;
    int effective_k() const noexcept { return k_eff_; }

private:
    DenseScaler scaler_;
    std::vector<FeatureVector> train_; ///< dense blocks already scaled
    std::vector<double> scores_;
    int k_eff_;
};

KnnModel knn_fit(std::vector<FeatureVector> train, std::vector<double> scores, int k);
double knn_predict(const KnnModel& model, const FeatureVector& x);

/// Closed-form L2-penalized least squares with an unpenalized intercept.
class RidgeModel {
public:
    RidgeModel(const std::vector<FeatureVector>& train, const std::vector<double>& scores, std::size_t sparse_dim,
               double lambda);

    double predict(const FeatureVector& x) const;

private:
    DenseScaler scaler_;
    std::size_t sparse_dim_;
    std::vector<double> coef_;
    double intercept_ = 0.0;
};

struct CvResult {
    std::vector<Prediction> predictions; ///< sorted by (doc_id, fold)
    std::vector<Prediction> reference;   ///< mean predictor, same layout
    MetricReport report;
    MetricReport reference_report;
};

/// Each document of the fold plan is predicted once, by the model trained
/// without its fold. Documents outside the plan are predicted by every fold
/// model. Metrics cover scored in-plan documents.
CvResult cross_validate(const Corpus& corpus, const std::vector<LayerSet>& layersets, const FoldPlan& plan,
                        const ModelSpec& spec, const QwkBinning& binning, std::size_t jobs = 1);

} // namespace essaylens

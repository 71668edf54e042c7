// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The essaylens Authors

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace essaylens {

struct ScorePairs {
    std::vector<double> gold;
    std::vector<double> pred;
    std::vector<std::string> doc_ids;

    /// Equal lengths, n >= 2, all values finite.
    void validate() const;
};

/// Maps a real score to an ordinal bin for QWK.
struct QwkBinning {
    enum class Kind { EqualWidth, Native };
    Kind kind = Kind::EqualWidth;
    int bins = 10;
    double native_min = 0.0; ///< Native: integer scale the [0,1] score is mapped back onto
    double native_max = 1.0;

    static QwkBinning equal_width(int bins);
    static QwkBinning native(double min, double max);

    int bin_count() const;
    int to_bin(double normalized_score) const;
    std::string describe() const;
};

struct MetricReport {
    std::size_t n = 0;
    double mse = 0.0;
    double mae = 0.0;
    double qwk = 0.0;
    std::optional<double> pcc; ///< empty when one side has zero variance
    std::optional<double> src;
    int bin_count = 0;
    std::vector<std::string> degenerate; ///< names of metrics that could not be computed
};

double pearson(const std::vector<double>& x, const std::vector<double>& y);
/// Ranks with ties sharing their average rank (1-based).
std::vector<double> average_ranks(const std::vector<double>& x);
double spearman(const std::vector<double>& x, const std::vector<double>& y);

/// kappa = 1 - sum(w O) / sum(w E), w_ij = (i-j)^2/(K-1)^2.
double quadratic_weighted_kappa(const std::vector<int>& gold_bins, const std::vector<int>& pred_bins, int k);

MetricReport evaluate_scores(const ScorePairs& pairs, const QwkBinning& binning);
MetricReport evaluate_scores(const ScorePairs& pairs, int bins);

struct Prediction {
    std::string doc_id;
    std::string model_id;
    int fold = 0;
    double score = 0.0;

    friend bool operator==(const Prediction&, const Prediction&) = default;
};

/// JSONL {doc_id, model_id, fold, score}; one row per line.
std::vector<Prediction> parse_predictions(std::string_view jsonl, const std::string& source = "<memory>");
std::vector<Prediction> load_predictions(const std::filesystem::path& path);
std::string serialize_predictions(const std::vector<Prediction>& predictions);

struct NamedReport {
    std::string model;
    MetricReport report;
};

/// model, MSE, MAE, QWK, PCC, SRC, n, qwk_bins.
std::string metrics_to_csv(const std::vector<NamedReport>& reports);

} // namespace essaylens

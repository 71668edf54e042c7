// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The essaylens Authors

#pragma once

#include "essaylens/annotate.hpp"
#include "essaylens/corpus.hpp"
#include "essaylens/weighting.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace essaylens {

/// Exported attention of one model over one document.
/// `attention` is row-major [layer][head][query][key].
struct AttentionRecord {
    std::string doc_id;
    int fold = 0;
    std::string model_id;
    std::vector<std::string> subword_tokens;
    std::vector<std::pair<int, int>> word_alignment; ///< half-open [start, end) subword range per word
    int layers = 0;
    int heads = 0;
    std::vector<float> attention;

    std::size_t seq_len() const noexcept { return subword_tokens.size(); }
    std::size_t word_count() const noexcept { return word_alignment.size(); }
    float at(int layer, int head, std::size_t query, std::size_t key) const;

    /// Positions not covered by the word alignment (delimiters such as [CLS]).
    std::vector<bool> special_mask() const;
};

inline constexpr double kRowSumTolerance = 1e-4;

/// Recognizes sequence delimiters such as [CLS], [SEP], <s>, </s>.
bool is_special_subword(std::string_view token);

/// Checks shape, row normalization and alignment coverage; throws ValidationError.
void validate_attention_record(const AttentionRecord& record);

/// Accepts a JSON array, a single object or JSONL; `.zst` files are decompressed.
std::vector<AttentionRecord> load_attention_export(const std::filesystem::path& path);
std::vector<AttentionRecord> parse_attention_export(std::string_view content, const std::string& source = "<memory>");
std::string serialize_attention_record(const AttentionRecord& record);

enum class AttentionDirection {
    Received, ///< mean over query rows of the word's key columns
    Given,    ///< mean over the word's query rows of attention paid to non-special keys
};

AttentionDirection parse_attention_direction(std::string_view text);

/// A_i for the word at `word_index`: per layer the head mean of the subword
/// mean of the query-averaged column, then the mean over layers.
double aggregate_word_attention(const AttentionRecord& record, std::size_t word_index,
                                AttentionDirection direction = AttentionDirection::Received);

/// Mean of aggregate_word_attention over every position where `word_tokens`
/// holds `token`; nullopt when the token does not occur.
std::optional<double> aggregate_token_attention(const AttentionRecord& record,
                                                const std::vector<std::string>& word_tokens, std::string_view token,
                                                AttentionDirection direction = AttentionDirection::Received);

/// Records indexed by (doc_id, fold) for one model.
class AttentionIndex {
public:
    AttentionIndex() = default;
    explicit AttentionIndex(std::vector<AttentionRecord> records);

    const AttentionRecord* find(std::string_view doc_id, int fold) const;
    const std::vector<AttentionRecord>& records() const noexcept { return records_; }

private:
    std::vector<AttentionRecord> records_;
    std::map<std::pair<std::string, int>, std::size_t> by_key_;
};

struct TokenAttention {
    std::string token;
    std::vector<double> per_fold;
    double score = 0.0;
};

/// In-fold documents use the model of the fold where they were held out;
/// documents outside the fold plan average every fold model.
TokenAttention fold_average_attention(const AttentionIndex& index, const Document& doc, const LayerSet& layers,
                                      const FoldPlan& plan, std::string_view token,
                                      AttentionDirection direction = AttentionDirection::Received);

enum class Exclusivity { All, ClassExclusive };

struct AttentionReportRow {
    std::string token;
    double weight = 0.0;
    std::int64_t count_total = 0;
    std::vector<std::int64_t> class_counts;
    std::vector<std::optional<double>> mean_attention; ///< per class; nullopt when no document had attention
};

struct AttentionReportOptions {
    int top_n = 20;
    Exclusivity exclusivity = Exclusivity::All;
    std::string target_class;        ///< required for ClassExclusive
    AttentionDirection direction = AttentionDirection::Received;
    std::size_t jobs = 1;
};

/// Highest-weight word tokens (selected, ties broken by token) with per-class
/// counts and per-class mean aggregated attention.
std::vector<AttentionReportRow> token_attention_report(const TokenWeightTable& weights, const Corpus& corpus,
                                                       const std::vector<LayerSet>& layersets,
                                                       const std::vector<std::string>& class_labels,
                                                       const AttentionIndex& attention, const FoldPlan& plan,
                                                       const AttentionReportOptions& options);

std::string attention_report_to_csv(const std::vector<AttentionReportRow>& rows,
                                    const std::vector<std::string>& classes);

} // namespace essaylens

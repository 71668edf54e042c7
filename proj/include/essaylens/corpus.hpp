// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The essaylens Authors

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace essaylens {

/// Author class of a document. `Other` keeps an arbitrary label so that
/// demographic splits (age, gender, ...) fit the same schema.
struct Respondent {
    enum class Kind { Human, Gpt35, Gpt4, Other };
    Kind kind = Kind::Human;
    std::string label; ///< only meaningful for Other

    static Respondent parse(std::string_view text);
    std::string str() const;
    bool is_machine() const noexcept { return kind == Kind::Gpt35 || kind == Kind::Gpt4; }

    friend bool operator==(const Respondent&, const Respondent&) = default;
};

/// Prompt genre (factor A of the statistical model).
struct Genre {
    enum class Kind { Unspecified, Arg, Resp, Narr, Lett, Comm, Sugg, Other };
    Kind kind = Kind::Unspecified;
    std::string label;

    static Genre parse(std::string_view text);
    std::string str() const;

    friend bool operator==(const Genre&, const Genre&) = default;
};

struct Document {
    std::string id;
    std::string text;
    Respondent respondent;
    std::string prompt_id;
    Genre genre;
    std::string testbed;
    std::optional<double> gold_score;
    std::optional<double> score_min;
    std::optional<double> score_max;
    std::optional<std::int64_t> word_count; ///< set once the word layer exists

    bool scored() const noexcept { return gold_score.has_value(); }
};

/// Named rule mapping a document to its analysis class.
enum class ClassRule {
    HumanVsMachine, ///< HUMAN vs every GPT respondent; OTHER labels are their own class
    Respondent,     ///< one class per respondent string
};

ClassRule parse_class_rule(std::string_view name);
std::string class_of(const Document& doc, ClassRule rule);

class Corpus {
public:
    Corpus() = default;
    /// Throws ValidationError on duplicate ids or broken score invariants.
    explicit Corpus(std::vector<Document> documents);

    const std::vector<Document>& documents() const noexcept { return docs_; }
    std::size_t size() const noexcept { return docs_.size(); }
    const Document& at(std::size_t i) const { return docs_.at(i); }
    const Document* find(std::string_view id) const;
    std::optional<std::size_t> index_of(std::string_view id) const;

    std::vector<std::string> class_labels(ClassRule rule) const;

    /// Replaces word counts. `counts` is aligned with documents().
    void set_word_counts(const std::vector<std::int64_t>& counts);

private:
    std::vector<Document> docs_;
    std::unordered_map<std::string, std::size_t> index_;
};

enum class CorpusFormat { Jsonl, Csv, Tsv };

/// Picks a format from the file extension (.jsonl/.json, .csv, .tsv).
CorpusFormat format_from_path(const std::filesystem::path& path);

Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format);
Corpus load_corpus(const std::filesystem::path& path);
Corpus parse_corpus(std::string_view content, CorpusFormat format, const std::string& source = "<memory>");

/// Concatenates corpora; duplicate ids across files are an error.
Corpus merge_corpora(const std::vector<Corpus>& parts);

/// JSONL serialization; parse_corpus(serialize_corpus(c)) reproduces c exactly.
std::string serialize_corpus(const Corpus& corpus);

/// Rescales every gold score to [0,1] using its declared range and rewrites the
/// range to [0,1]. Unscored documents pass through.
Corpus normalize_scores(const Corpus& corpus);

struct FoldPlan {
    int k = 0;
    std::map<std::string, int> assignments; ///< doc id -> fold in [0,k)

    std::optional<int> fold_of(std::string_view id) const;
    std::vector<std::string> fold_members(int fold) const;
};

/// Shuffles the sorted ids with a seeded generator and deals them round-robin.
FoldPlan make_folds(const std::vector<std::string>& ids, int k, std::uint64_t seed);
FoldPlan make_folds(const Corpus& corpus, int k, std::uint64_t seed);

std::string serialize_fold_plan(const FoldPlan& plan);
FoldPlan parse_fold_plan(std::string_view csv);

} // namespace essaylens

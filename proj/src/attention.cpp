// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The essaylens Authors

#include "essaylens/attention.hpp"

#include "essaylens/error.hpp"
#include "essaylens/parallel.hpp"
#include "essaylens/text_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <set>

namespace essaylens {

float AttentionRecord::at(int layer, int head, std::size_t query, std::size_t key) const {
    const std::size_t t = seq_len();
    return attention[((static_cast<std::size_t>(layer) * heads + head) * t + query) * t + key];
}

std::vector<bool> AttentionRecord::special_mask() const {
    std::vector<bool> special(seq_len(), true);
    for (auto [b, e] : word_alignment) {
        for (int i = std::max(b, 0); i < e && i < static_cast<int>(seq_len()); ++i) special[i] = false;
    }
    return special;
}

bool is_special_subword(std::string_view token) {
    if (token.size() >= 3 && token.front() == '[' && token.back() == ']') return true;
    if (token.size() >= 3 && token.front() == '<' && token.back() == '>') return true;
    return false;
}

void validate_attention_record(const AttentionRecord& r) {
    const auto where = "attention record for document " + r.doc_id + " (fold " + std::to_string(r.fold) + ")";
    if (r.layers < 1 || r.heads < 1) throw ValidationError(where + ": layers and heads must be positive");
    const std::size_t t = r.seq_len();
    if (t == 0) throw ValidationError(where + ": empty subword sequence");
    const std::size_t expected = static_cast<std::size_t>(r.layers) * r.heads * t * t;
    if (r.attention.size() != expected) {
        throw ValidationError(where + ": attention tensor has " + std::to_string(r.attention.size()) +
                              " values, expected " + std::to_string(expected));
    }
    for (int l = 0; l < r.layers; ++l) {
        for (int h = 0; h < r.heads; ++h) {
            for (std::size_t q = 0; q < t; ++q) {
                double sum = 0.0;
                for (std::size_t k = 0; k < t; ++k) {
                    const float v = r.at(l, h, q, k);
                    if (!std::isfinite(v) || v < 0.0f) {
                        throw ValidationError(where + ": invalid attention value at (layer " + std::to_string(l) +
                                              ", head " + std::to_string(h) + ", row " + std::to_string(q) + ")");
                    }
                    sum += v;
                }
                if (std::abs(sum - 1.0) > kRowSumTolerance) {
                    throw ValidationError(where + ": row sum " + format_double(sum) + " at (layer " +
                                          std::to_string(l) + ", head " + std::to_string(h) + ", row " +
                                          std::to_string(q) + ")");
                }
            }
        }
    }
    if (r.word_alignment.empty()) throw ValidationError(where + ": empty word alignment");
    int prev_end = 0;
    for (std::size_t w = 0; w < r.word_alignment.size(); ++w) {
        auto [b, e] = r.word_alignment[w];
        if (b < 0 || e > static_cast<int>(t) || b >= e) {
            throw ValidationError(where + ": invalid alignment range for word " + std::to_string(w));
        }
        if (b < prev_end) throw ValidationError(where + ": overlapping alignment at word " + std::to_string(w));
        for (int i = prev_end; i < b; ++i) {
            if (!is_special_subword(r.subword_tokens[i])) {
                throw ValidationError(where + ": alignment gap, subword " + std::to_string(i) + " ('" +
                                      r.subword_tokens[i] + "') is not covered");
            }
        }
        prev_end = e;
    }
    for (int i = prev_end; i < static_cast<int>(t); ++i) {
        if (!is_special_subword(r.subword_tokens[i])) {
            throw ValidationError(where + ": alignment gap, subword " + std::to_string(i) + " ('" +
                                  r.subword_tokens[i] + "') is not covered");
        }
    }
}

namespace {

AttentionRecord record_from_json(const nlohmann::json& obj, const std::string& where) {
    AttentionRecord r;
    try {
        r.doc_id = obj.at("doc_id").get<std::string>();
        r.fold = obj.at("fold").get<int>();
        r.model_id = obj.value("model_id", std::string());
        r.subword_tokens = obj.at("subword_tokens").get<std::vector<std::string>>();
        for (const auto& pair : obj.at("word_alignment")) {
            if (!pair.is_array() || pair.size() != 2) throw ValidationError(where + ": alignment entries must be [start,end]");
            r.word_alignment.emplace_back(pair[0].get<int>(), pair[1].get<int>());
        }
        r.layers = obj.at("layers").get<int>();
        r.heads = obj.at("heads").get<int>();
        const auto& att = obj.at("attention");
        const std::size_t t = r.subword_tokens.size();
        if (!att.is_array() || att.size() != static_cast<std::size_t>(r.layers)) {
            throw ValidationError(where + ": attention must have 'layers' entries");
        }
        r.attention.reserve(static_cast<std::size_t>(r.layers) * r.heads * t * t);
        for (const auto& layer : att) {
            if (layer.size() != static_cast<std::size_t>(r.heads)) throw ValidationError(where + ": wrong head count");
            for (const auto& head : layer) {
                if (head.size() != t) throw ValidationError(where + ": attention rows do not match subword count");
                for (const auto& row : head) {
                    if (row.size() != t) throw ValidationError(where + ": attention columns do not match subword count");
                    for (const auto& v : row) r.attention.push_back(v.get<float>());
                }
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(where + ": " + e.what());
    }
    validate_attention_record(r);
    return r;
}

} // namespace

std::vector<AttentionRecord> parse_attention_export(std::string_view content, const std::string& source) {
    std::vector<AttentionRecord> out;
    nlohmann::json whole;
    bool parsed = true;
    try {
        whole = nlohmann::json::parse(content);
    } catch (const nlohmann::json::parse_error&) {
        parsed = false;
    }
    if (parsed) {
        if (whole.is_array()) {
            for (std::size_t i = 0; i < whole.size(); ++i) {
                out.push_back(record_from_json(whole[i], source + " record " + std::to_string(i)));
            }
        } else {
            out.push_back(record_from_json(whole, source));
        }
        return out;
    }
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos < content.size()) {
        auto nl = content.find('\n', pos);
        if (nl == std::string_view::npos) nl = content.size();
        auto line = trim(content.substr(pos, nl - pos));
        pos = nl + 1;
        ++line_no;
        if (line.empty()) continue;
        const auto where = source + ":" + std::to_string(line_no);
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ValidationError(where + ": malformed JSON: " + e.what());
        }
        out.push_back(record_from_json(obj, where));
    }
    return out;
}

std::vector<AttentionRecord> load_attention_export(const std::filesystem::path& path) {
    std::string content;
    try {
        content = read_file(path);
    } catch (const ValidationError&) {
        throw DependencyError("cannot read attention export " + path.string());
    }
    return parse_attention_export(content, path.string());
}

std::string serialize_attention_record(const AttentionRecord& r) {
    nlohmann::ordered_json obj;
    obj["doc_id"] = r.doc_id;
    obj["fold"] = r.fold;
    obj["model_id"] = r.model_id;
    obj["subword_tokens"] = r.subword_tokens;
    auto align = nlohmann::ordered_json::array();
    for (auto [b, e] : r.word_alignment) align.push_back({b, e});
    obj["word_alignment"] = std::move(align);
    obj["layers"] = r.layers;
    obj["heads"] = r.heads;
    const std::size_t t = r.seq_len();
    auto att = nlohmann::ordered_json::array();
    for (int l = 0; l < r.layers; ++l) {
        auto layer = nlohmann::ordered_json::array();
        for (int h = 0; h < r.heads; ++h) {
            auto head = nlohmann::ordered_json::array();
            for (std::size_t q = 0; q < t; ++q) {
                auto row = nlohmann::ordered_json::array();
                for (std::size_t k = 0; k < t; ++k) row.push_back(r.at(l, h, q, k));
                head.push_back(std::move(row));
            }
            layer.push_back(std::move(head));
        }
        att.push_back(std::move(layer));
    }
    obj["attention"] = std::move(att);
    return obj.dump();
}

AttentionDirection parse_attention_direction(std::string_view text) {
    const auto s = to_lower(trim(text));
    if (s == "received" || s == "to" || s.empty()) return AttentionDirection::Received;
    if (s == "given" || s == "from") return AttentionDirection::Given;
    throw ConfigError("unknown attention direction '" + std::string(text) + "'");
}

double aggregate_word_attention(const AttentionRecord& r, std::size_t word_index, AttentionDirection direction) {
    if (word_index >= r.word_alignment.size()) {
        throw ValidationError("word index " + std::to_string(word_index) + " out of range for document " + r.doc_id +
                              " (" + std::to_string(r.word_alignment.size()) + " words)");
    }
    const auto special = r.special_mask();
    std::vector<std::size_t> content;
    for (std::size_t i = 0; i < special.size(); ++i) {
        if (!special[i]) content.push_back(i);
    }
    const auto [begin, end] = r.word_alignment[word_index];
    const double pieces = static_cast<double>(end - begin);

    double layer_sum = 0.0;
    for (int l = 0; l < r.layers; ++l) {
        double head_sum = 0.0;
        for (int h = 0; h < r.heads; ++h) {
            double piece_sum = 0.0;
            for (int s = begin; s < end; ++s) {
                double acc = 0.0;
                for (auto other : content) {
                    acc += direction == AttentionDirection::Received ? r.at(l, h, other, s) : r.at(l, h, s, other);
                }
                piece_sum += acc / static_cast<double>(content.size());
            }
            head_sum += piece_sum / pieces;
        }
        layer_sum += head_sum / static_cast<double>(r.heads);
    }
    return layer_sum / static_cast<double>(r.layers);
}

std::optional<double> aggregate_token_attention(const AttentionRecord& record,
                                                const std::vector<std::string>& word_tokens, std::string_view token,
                                                AttentionDirection direction) {
    if (word_tokens.size() != record.word_count()) {
        throw ValidationError("document " + record.doc_id + ": attention alignment has " +
                              std::to_string(record.word_count()) + " words, word layer has " +
                              std::to_string(word_tokens.size()));
    }
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < word_tokens.size(); ++i) {
        if (word_tokens[i] != token) continue;
        sum += aggregate_word_attention(record, i, direction);
        ++n;
    }
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
}

AttentionIndex::AttentionIndex(std::vector<AttentionRecord> records) : records_(std::move(records)) {
    for (std::size_t i = 0; i < records_.size(); ++i) {
        const auto& r = records_[i];
        if (!by_key_.emplace(std::make_pair(r.doc_id, r.fold), i).second) {
            throw ValidationError("duplicate attention record for document " + r.doc_id + " fold " +
                                  std::to_string(r.fold));
        }
    }
}

const AttentionRecord* AttentionIndex::find(std::string_view doc_id, int fold) const {
    auto it = by_key_.find(std::make_pair(std::string(doc_id), fold));
    return it == by_key_.end() ? nullptr : &records_[it->second];
}

TokenAttention fold_average_attention(const AttentionIndex& index, const Document& doc, const LayerSet& layers,
                                      const FoldPlan& plan, std::string_view token, AttentionDirection direction) {
    TokenAttention out;
    out.token = std::string(token);
    std::vector<int> folds;
    if (auto f = plan.fold_of(doc.id)) {
        folds.push_back(*f);
    } else {
        for (int f = 0; f < plan.k; ++f) folds.push_back(f);
    }
    if (folds.empty()) throw ValidationError("fold plan has no folds");
    for (int f : folds) {
        const auto* rec = index.find(doc.id, f);
        if (!rec) {
            throw DependencyError("missing attention record for document " + doc.id + " fold " + std::to_string(f));
        }
        auto a = aggregate_token_attention(*rec, layers.word().tokens, token, direction);
        if (!a) throw ValidationError("token '" + std::string(token) + "' does not occur in document " + doc.id);
        out.per_fold.push_back(*a);
    }
    double sum = 0.0;
    for (double v : out.per_fold) sum += v;
    out.score = sum / static_cast<double>(out.per_fold.size());
    return out;
}

std::vector<AttentionReportRow> token_attention_report(const TokenWeightTable& weights, const Corpus& corpus,
                                                       const std::vector<LayerSet>& layersets,
                                                       const std::vector<std::string>& class_labels,
                                                       const AttentionIndex& attention, const FoldPlan& plan,
                                                       const AttentionReportOptions& options) {
    if (options.top_n <= 0) throw ConfigError("top_n must be positive");
    if (layersets.size() != corpus.size() || class_labels.size() != corpus.size()) {
        throw ValidationError("attention report inputs are not aligned with the corpus");
    }
    const auto& classes = weights.classes;
    std::size_t target = classes.size();
    if (options.exclusivity == Exclusivity::ClassExclusive) {
        auto it = std::find(classes.begin(), classes.end(), options.target_class);
        if (it == classes.end()) throw ConfigError("unknown target class '" + options.target_class + "'");
        target = static_cast<std::size_t>(it - classes.begin());
    }

    std::vector<const TokenStats*> candidates;
    for (const auto& t : weights.reps.at(0).tokens) {
        if (!t.selected) continue;
        if (target < classes.size()) {
            bool exclusive = t.class_counts[target] > 0;
            for (std::size_t c = 0; c < classes.size(); ++c) {
                if (c != target && t.class_counts[c] != 0) exclusive = false;
            }
            if (!exclusive) continue;
        }
        candidates.push_back(&t);
    }
    std::sort(candidates.begin(), candidates.end(), [](const TokenStats* a, const TokenStats* b) {
        if (a->weight != b->weight) return a->weight > b->weight;
        return a->token < b->token;
    });
    if (candidates.size() > static_cast<std::size_t>(options.top_n)) candidates.resize(options.top_n);

    std::set<std::string, std::less<>> wanted;
    for (const auto* c : candidates) wanted.insert(c->token);

    // Per-document scores first; merged in corpus order.
    std::vector<std::vector<std::pair<std::string, double>>> per_doc(corpus.size());
    parallel_for(corpus.size(), options.jobs, [&](std::size_t d) {
        const auto& doc = corpus.at(d);
        bool any = false;
        for (int f = 0; f < std::max(plan.k, 1) && !any; ++f) any = attention.find(doc.id, f) != nullptr;
        if (!any) return;
        std::set<std::string> present;
        for (const auto& t : layersets[d].word().tokens) {
            if (wanted.count(t)) present.insert(t);
        }
        for (const auto& t : present) {
            auto ta = fold_average_attention(attention, doc, layersets[d], plan, t, options.direction);
            per_doc[d].emplace_back(t, ta.score);
        }
    });

    std::map<std::string, std::vector<std::pair<double, std::int64_t>>> sums;
    for (const auto& t : wanted) sums[t].assign(classes.size(), {0.0, 0});
    for (std::size_t d = 0; d < corpus.size(); ++d) {
        const auto c = static_cast<std::size_t>(
            std::lower_bound(classes.begin(), classes.end(), class_labels[d]) - classes.begin());
        if (c >= classes.size() || classes[c] != class_labels[d]) {
            throw ValidationError("document " + corpus.at(d).id + " has a class unknown to the weight table");
        }
        for (const auto& [t, score] : per_doc[d]) {
            sums[t][c].first += score;
            sums[t][c].second += 1;
        }
    }

    std::vector<AttentionReportRow> rows;
    for (const auto* c : candidates) {
        AttentionReportRow row;
        row.token = c->token;
        row.weight = c->weight;
        row.count_total = c->count;
        row.class_counts = c->class_counts;
        for (const auto& [sum, n] : sums[c->token]) {
            row.mean_attention.push_back(n > 0 ? std::optional<double>(sum / static_cast<double>(n)) : std::nullopt);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string attention_report_to_csv(const std::vector<AttentionReportRow>& rows,
                                    const std::vector<std::string>& classes) {
    CsvWriter w;
    std::vector<std::string> header{"token", "weight", "count_total"};
    for (std::size_t c = 0; c < classes.size(); ++c) header.push_back(std::string("count_class_") + char('a' + c));
    for (std::size_t c = 0; c < classes.size(); ++c) header.push_back(std::string("mean_A_class_") + char('a' + c));
    w.row(header);
    for (const auto& r : rows) {
        std::vector<std::string> row{r.token, format_double(r.weight), std::to_string(r.count_total)};
        for (auto n : r.class_counts) row.push_back(std::to_string(n));
        for (const auto& a : r.mean_attention) row.push_back(a ? format_double(*a) : std::string());
        w.row(row);
    }
    return w.str();
}

} // namespace essaylens

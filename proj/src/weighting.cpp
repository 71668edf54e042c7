// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The essaylens Authors

#include "essaylens/weighting.hpp"

#include "essaylens/error.hpp"
#include "essaylens/parallel.hpp"
#include "essaylens/text_io.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

namespace essaylens {

CorrelationScope parse_correlation_scope(std::string_view text) {
    const auto s = to_lower(trim(text));
    if (s == "word_only" || s == "word") return CorrelationScope::WordOnly;
    if (s == "all_other_reps" || s == "all") return CorrelationScope::AllOtherReps;
    throw ConfigError("unknown correlation scope '" + std::string(text) + "'");
}

std::string to_string(CorrelationScope scope) {
    return scope == CorrelationScope::WordOnly ? "word_only" : "all_other_reps";
}

void SelectionConfig::validate() const {
    if (!(t_w > 0.0)) throw ConfigError("t_w must be positive");
    if (!(t_c > 0.0 && t_c <= 1.0)) throw ConfigError("t_c must lie in (0, 1]");
    if (!(smoothing_eps > 0.0)) throw ConfigError("smoothing epsilon must be positive");
}

std::optional<std::uint32_t> RepresentationIndex::id_of(std::string_view token) const {
    auto it = std::lower_bound(vocab.begin(), vocab.end(), token);
    if (it == vocab.end() || *it != token) return std::nullopt;
    return static_cast<std::uint32_t>(it - vocab.begin());
}

std::size_t CorpusIndex::rep_index(std::string_view name) const {
    for (std::size_t r = 0; r < reps.size(); ++r) {
        if (reps[r].name == name) return r;
    }
    throw DependencyError("no representation named '" + std::string(name) + "'");
}

CorpusIndex build_corpus_index(const std::vector<LayerSet>& layersets, const std::vector<std::string>& class_labels,
                               std::size_t jobs) {
    if (layersets.size() != class_labels.size()) {
        throw ValidationError("class labels do not match the number of documents");
    }
    if (layersets.empty()) throw ValidationError("weighting needs at least one document");

    CorpusIndex index;
    index.n_docs = layersets.size();
    index.classes = class_labels;
    std::sort(index.classes.begin(), index.classes.end());
    index.classes.erase(std::unique(index.classes.begin(), index.classes.end()), index.classes.end());
    if (index.classes.size() < 2) {
        throw ValidationError("weighting needs at least two classes, found " + std::to_string(index.classes.size()));
    }
    index.class_sizes.assign(index.classes.size(), 0);
    for (const auto& label : class_labels) {
        auto c = static_cast<std::uint32_t>(std::lower_bound(index.classes.begin(), index.classes.end(), label) -
                                            index.classes.begin());
        index.doc_class.push_back(c);
        ++index.class_sizes[c];
    }

    const auto& first = layersets.front();
    for (const auto& ls : layersets) {
        if (ls.size() != first.size()) {
            throw ValidationError("document " + ls.doc_id() + " has a different layer roster than " + first.doc_id());
        }
        for (std::size_t r = 0; r < ls.size(); ++r) {
            if (ls.layers()[r].name != first.layers()[r].name) {
                throw ValidationError("document " + ls.doc_id() + " has layers in a different order");
            }
        }
    }

    const std::size_t n_reps = first.size();
    const std::size_t n_classes = index.classes.size();
    index.reps.resize(n_reps);
    for (std::size_t r = 0; r < n_reps; ++r) {
        auto& rep = index.reps[r];
        rep.name = first.layers()[r].name;
        for (const auto& ls : layersets) {
            const auto& toks = ls.layers()[r].tokens;
            rep.vocab.insert(rep.vocab.end(), toks.begin(), toks.end());
        }
        std::sort(rep.vocab.begin(), rep.vocab.end());
        rep.vocab.erase(std::unique(rep.vocab.begin(), rep.vocab.end()), rep.vocab.end());
        rep.doc_tokens.resize(index.n_docs);
    }

    // Per-document occurrence counts; merged below in document order.
    std::vector<std::vector<std::vector<std::pair<std::uint32_t, std::int64_t>>>> per_doc(
        index.n_docs, std::vector<std::vector<std::pair<std::uint32_t, std::int64_t>>>(n_reps));
    parallel_for(index.n_docs, jobs, [&](std::size_t d) {
        for (std::size_t r = 0; r < n_reps; ++r) {
            const auto& rep = index.reps[r];
            std::map<std::uint32_t, std::int64_t> local;
            for (const auto& t : layersets[d].layers()[r].tokens) ++local[*rep.id_of(t)];
            auto& ids = per_doc[d][r];
            ids.assign(local.begin(), local.end());
        }
    });

    for (std::size_t r = 0; r < n_reps; ++r) {
        auto& rep = index.reps[r];
        const auto v = rep.vocab.size();
        rep.occurrences.assign(v, 0);
        rep.class_occurrences.assign(v, std::vector<std::int64_t>(n_classes, 0));
        rep.postings.assign(v, {});
        for (std::size_t d = 0; d < index.n_docs; ++d) {
            auto& dt = rep.doc_tokens[d];
            dt.reserve(per_doc[d][r].size());
            for (auto [id, count] : per_doc[d][r]) {
                rep.occurrences[id] += count;
                rep.class_occurrences[id][index.doc_class[d]] += count;
                rep.postings[id].push_back(static_cast<std::uint32_t>(d));
                dt.push_back(id);
            }
        }
    }
    return index;
}

ClassProbTable::ClassProbTable(const CorpusIndex& index, double smoothing_eps)
    : eps_(smoothing_eps), class_sizes_(index.class_sizes) {
    if (!(smoothing_eps > 0.0)) throw ConfigError("smoothing epsilon must be positive");
    for (auto n : class_sizes_) {
        if (n < 1) throw ValidationError("every class needs at least one document");
    }
    df_.resize(index.reps.size());
    for (std::size_t r = 0; r < index.reps.size(); ++r) {
        const auto& rep = index.reps[r];
        df_[r].assign(rep.vocab.size(), std::vector<std::int64_t>(class_sizes_.size(), 0));
        for (std::size_t t = 0; t < rep.vocab.size(); ++t) {
            for (auto d : rep.postings[t]) ++df_[r][t][index.doc_class[d]];
        }
    }
}

double ClassProbTable::probability(std::size_t rep, std::uint32_t token, std::size_t cls) const {
    const double df = static_cast<double>(df_.at(rep).at(token).at(cls));
    const double n = static_cast<double>(class_sizes_[cls]);
    return (df + eps_) / (n + 2.0 * eps_);
}

std::int64_t ClassProbTable::doc_frequency(std::size_t rep, std::uint32_t token, std::size_t cls) const {
    return df_.at(rep).at(token).at(cls);
}

std::vector<double> ClassProbTable::probabilities(std::size_t rep, std::uint32_t token) const {
    std::vector<double> p(class_sizes_.size());
    for (std::size_t c = 0; c < p.size(); ++c) p[c] = probability(rep, token, c);
    return p;
}

ClassProbTable class_conditional_probability(const CorpusIndex& index, double smoothing_eps) {
    return ClassProbTable(index, smoothing_eps);
}

double semantic_orientation(std::string_view token, const LexiconResource* sentiment_lexicon) {
    if (!sentiment_lexicon) return 0.0;
    const auto* senses = sentiment_lexicon->senses_of(token);
    if (!senses || senses->empty()) return 0.0;
    double sum = 0.0;
    for (const auto& s : *senses) sum += s.positive - s.negative;
    return sum / static_cast<double>(senses->size());
}

double token_weight(std::span<const double> p, double orientation) {
    if (p.size() < 2) throw ValidationError("token weight needs probabilities for at least two classes");
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < p.size(); ++a) {
        for (std::size_t b = 0; b < p.size(); ++b) {
            if (a == b) continue;
            best = std::max(best, p[a] * std::log(p[a] / p[b]));
        }
    }
    return best + orientation;
}

double presence_correlation(std::int64_t n_docs, std::int64_t count_a, std::int64_t count_b, std::int64_t both) {
    const double n = static_cast<double>(n_docs);
    const double a = static_cast<double>(count_a);
    const double b = static_cast<double>(count_b);
    const double var_a = a * (n - a);
    const double var_b = b * (n - b);
    if (var_a <= 0.0 || var_b <= 0.0) return 0.0;
    return (n * static_cast<double>(both) - a * b) / std::sqrt(var_a * var_b);
}

namespace {

std::int64_t intersection_size(const std::vector<std::uint32_t>& x, const std::vector<std::uint32_t>& y) {
    std::int64_t c = 0;
    auto i = x.begin();
    auto j = y.begin();
    while (i != x.end() && j != y.end()) {
        if (*i < *j) ++i;
        else if (*j < *i) ++j;
        else {
            ++c;
            ++i;
            ++j;
        }
    }
    return c;
}

} // namespace

double token_correlation(const CorpusIndex& index, std::size_t rep_f, std::uint32_t f, std::size_t rep_g,
                         std::uint32_t g) {
    const auto& pf = index.reps.at(rep_f).postings.at(f);
    const auto& pg = index.reps.at(rep_g).postings.at(g);
    return presence_correlation(static_cast<std::int64_t>(index.n_docs), static_cast<std::int64_t>(pf.size()),
                                static_cast<std::int64_t>(pg.size()), intersection_size(pf, pg));
}

bool selection_indicator(const CorpusIndex& index, std::size_t rep, std::uint32_t token, double weight,
                         const SelectionConfig& cfg) {
    if (rep == 0) throw ValidationError("the word layer is not subject to the redundancy filter");
    if (!(weight > cfg.t_w)) return false;

    // Tokens that never co-occur with f have correlation <= 0 < t_c, so only
    // co-occurring tokens can violate the bound.
    const auto& postings = index.reps[rep].postings[token];
    const auto n = static_cast<std::int64_t>(index.n_docs);
    const auto count_f = static_cast<std::int64_t>(postings.size());
    for (std::size_t v = 0; v < index.reps.size(); ++v) {
        if (v == rep) continue;
        if (cfg.scope == CorrelationScope::WordOnly && v != 0) continue;
        const auto& other = index.reps[v];
        std::unordered_map<std::uint32_t, std::int64_t> both;
        for (auto d : postings) {
            for (auto g : other.doc_tokens[d]) ++both[g];
        }
        for (auto [g, c] : both) {
            const auto count_g = static_cast<std::int64_t>(other.postings[g].size());
            if (presence_correlation(n, count_f, count_g, c) > cfg.t_c) return false;
        }
    }
    return true;
}

TokenWeightTable compute_token_weights(const CorpusIndex& index, const SelectionConfig& cfg,
                                       const LexiconResource* sentiment_lexicon, std::size_t jobs) {
    cfg.validate();
    const ClassProbTable probs(index, cfg.smoothing_eps);

    TokenWeightTable table;
    table.classes = index.classes;
    table.config = cfg;
    table.reps.resize(index.reps.size());
    for (std::size_t r = 0; r < index.reps.size(); ++r) {
        const auto& rep = index.reps[r];
        auto& out = table.reps[r];
        out.name = rep.name;
        out.tokens.resize(rep.vocab.size());
        parallel_for(rep.vocab.size(), jobs, [&](std::size_t t) {
            auto& ts = out.tokens[t];
            const auto id = static_cast<std::uint32_t>(t);
            ts.token = rep.vocab[t];
            ts.count = rep.occurrences[t];
            ts.class_counts = rep.class_occurrences[t];
            ts.doc_frequency.resize(index.classes.size());
            for (std::size_t c = 0; c < index.classes.size(); ++c) ts.doc_frequency[c] = probs.doc_frequency(r, id, c);
            ts.orientation = semantic_orientation(ts.token, sentiment_lexicon);
            const auto p = probs.probabilities(r, id);
            ts.weight = token_weight(p, ts.orientation);
            ts.selected = r == 0 ? ts.weight > cfg.t_w : selection_indicator(index, r, id, ts.weight, cfg);
        });
    }
    return table;
}

TokenWeightTable compute_token_weights(const std::vector<LayerSet>& layersets,
                                       const std::vector<std::string>& class_labels, const SelectionConfig& cfg,
                                       const LexiconResource* sentiment_lexicon, std::size_t jobs) {
    return compute_token_weights(build_corpus_index(layersets, class_labels, jobs), cfg, sentiment_lexicon, jobs);
}

const TokenStats* RepresentationWeights::find(std::string_view token) const {
    auto it = std::lower_bound(tokens.begin(), tokens.end(), token,
                               [](const TokenStats& s, std::string_view t) { return s.token < t; });
    if (it == tokens.end() || it->token != token) return nullptr;
    return &*it;
}

std::size_t TokenWeightTable::rep_index(std::string_view name) const {
    for (std::size_t r = 0; r < reps.size(); ++r) {
        if (reps[r].name == name) return r;
    }
    throw DependencyError("no representation named '" + std::string(name) + "'");
}

const RepresentationWeights& TokenWeightTable::rep(std::string_view name) const { return reps[rep_index(name)]; }

double expressive_power(const TokenWeightTable& table, std::size_t rep) {
    if (rep == 0) throw ValidationError("expressive power is defined for non-word representations only");
    const auto& r = table.reps.at(rep);
    std::int64_t total = 0;
    std::int64_t kept = 0;
    for (const auto& t : r.tokens) {
        total += t.count;
        if (t.selected) kept += t.count;
    }
    if (total == 0) throw NumericError("representation '" + r.name + "' has no token occurrences");
    return static_cast<double>(kept) / static_cast<double>(total);
}

double expressive_power(const TokenWeightTable& table, std::string_view rep) {
    return expressive_power(table, table.rep_index(rep));
}

std::vector<SeriesPoint> cumulative_expressive_series(const TokenWeightTable& table,
                                                      const std::vector<std::string>& order) {
    if (table.reps.empty()) throw ValidationError("empty weight table");
    std::vector<SeriesPoint> out;
    out.push_back({table.reps[0].name, 1.0, 1.0});
    double acc = 1.0;
    auto push = [&](std::size_t r) {
        const double e = expressive_power(table, r);
        acc += e;
        out.push_back({table.reps[r].name, e, acc});
    };
    if (order.empty()) {
        for (std::size_t r = 1; r < table.reps.size(); ++r) push(r);
    } else {
        for (const auto& name : order) {
            const auto r = table.rep_index(name);
            if (r == 0) continue;
            push(r);
        }
    }
    return out;
}

std::string weights_to_csv(const TokenWeightTable& table) {
    CsvWriter w;
    std::vector<std::string> header{"rep", "token", "weight", "orientation", "count"};
    for (std::size_t c = 0; c < table.classes.size(); ++c) {
        header.push_back(std::string("count_class_") + static_cast<char>('a' + c));
    }
    header.push_back("selected");
    w.row(header);
    for (const auto& rep : table.reps) {
        for (const auto& t : rep.tokens) {
            std::vector<std::string> row{rep.name, t.token, format_double(t.weight), format_double(t.orientation),
                                         std::to_string(t.count)};
            for (auto c : t.class_counts) row.push_back(std::to_string(c));
            row.push_back(t.selected ? "1" : "0");
            w.row(row);
        }
    }
    return w.str();
}

std::string series_to_csv(const std::vector<SeriesPoint>& series) {
    CsvWriter w;
    w.row({"rep", "e", "cumulative"});
    for (const auto& p : series) w.row({p.rep, format_double(p.e), format_double(p.cumulative)});
    return w.str();
}

} // namespace essaylens

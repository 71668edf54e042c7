// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The essaylens Authors

#include "essaylens/corpus.hpp"

#include "essaylens/error.hpp"
#include "essaylens/text_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>

namespace essaylens {

using ordered_json = nlohmann::ordered_json;

Respondent Respondent::parse(std::string_view text) {
    const std::string up = to_upper(trim(text));
    if (up == "HUMAN") return {Kind::Human, {}};
    if (up == "GPT35" || up == "GPT-3.5" || up == "GPT3.5") return {Kind::Gpt35, {}};
    if (up == "GPT4" || up == "GPT-4") return {Kind::Gpt4, {}};
    return {Kind::Other, std::string(trim(text))};
}

std::string Respondent::str() const {
    switch (kind) {
    case Kind::Human: return "HUMAN";
    case Kind::Gpt35: return "GPT35";
    case Kind::Gpt4: return "GPT4";
    case Kind::Other: return label;
    }
    return label;
}

Genre Genre::parse(std::string_view text) {
    const std::string up = to_upper(trim(text));
    if (up.empty()) return {Kind::Unspecified, {}};
    if (up == "ARG") return {Kind::Arg, {}};
    if (up == "RESP") return {Kind::Resp, {}};
    if (up == "NARR") return {Kind::Narr, {}};
    if (up == "LETT") return {Kind::Lett, {}};
    if (up == "COMM") return {Kind::Comm, {}};
    if (up == "SUGG") return {Kind::Sugg, {}};
    return {Kind::Other, std::string(trim(text))};
}

std::string Genre::str() const {
    switch (kind) {
    case Kind::Unspecified: return "";
    case Kind::Arg: return "ARG";
    case Kind::Resp: return "RESP";
    case Kind::Narr: return "NARR";
    case Kind::Lett: return "LETT";
    case Kind::Comm: return "COMM";
    case Kind::Sugg: return "SUGG";
    case Kind::Other: return label;
    }
    return label;
}

ClassRule parse_class_rule(std::string_view name) {
    const std::string n = to_lower(trim(name));
    if (n == "human_vs_machine" || n.empty()) return ClassRule::HumanVsMachine;
    if (n == "respondent") return ClassRule::Respondent;
    throw ConfigError("unknown class rule '" + std::string(name) + "'");
}

std::string class_of(const Document& doc, ClassRule rule) {
    if (rule == ClassRule::HumanVsMachine) {
        if (doc.respondent.kind == Respondent::Kind::Human) return "HUMAN";
        if (doc.respondent.is_machine()) return "MACHINE";
    }
    return doc.respondent.str();
}

namespace {

void check_document(const Document& d, const std::string& where) {
    if (d.id.empty()) throw ValidationError(where + ": field 'id' is empty");
    if (d.score_min && d.score_max && !(*d.score_min < *d.score_max)) {
        throw ValidationError(where + ": field 'score_min' must be below 'score_max' (doc " + d.id + ")");
    }
    if (d.gold_score && d.score_min && d.score_max &&
        (*d.gold_score < *d.score_min || *d.gold_score > *d.score_max)) {
        throw ValidationError(where + ": field 'gold_score' outside [score_min, score_max] (doc " + d.id + ")");
    }
    if (d.word_count && *d.word_count < 1) {
        throw ValidationError(where + ": field 'word_count' must be >= 1 (doc " + d.id + ")");
    }
}

} // namespace

Corpus::Corpus(std::vector<Document> documents) : docs_(std::move(documents)) {
    index_.reserve(docs_.size());
    for (std::size_t i = 0; i < docs_.size(); ++i) {
        check_document(docs_[i], "document " + std::to_string(i));
        if (!index_.emplace(docs_[i].id, i).second) {
            throw ValidationError("duplicate document id '" + docs_[i].id + "'");
        }
    }
}

const Document* Corpus::find(std::string_view id) const {
    auto it = index_.find(std::string(id));
    return it == index_.end() ? nullptr : &docs_[it->second];
}

std::optional<std::size_t> Corpus::index_of(std::string_view id) const {
    auto it = index_.find(std::string(id));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::vector<std::string> Corpus::class_labels(ClassRule rule) const {
    std::vector<std::string> out;
    out.reserve(docs_.size());
    for (const auto& d : docs_) out.push_back(class_of(d, rule));
    return out;
}

void Corpus::set_word_counts(const std::vector<std::int64_t>& counts) {
    if (counts.size() != docs_.size()) {
        throw ValidationError("word count vector does not match corpus size");
    }
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (counts[i] < 1) throw ValidationError("document " + docs_[i].id + " has no tokens");
        docs_[i].word_count = counts[i];
    }
}

CorpusFormat format_from_path(const std::filesystem::path& path) {
    auto p = path;
    if (p.extension() == ".zst") p = p.stem();
    const auto ext = to_lower(p.extension().string());
    if (ext == ".jsonl" || ext == ".json") return CorpusFormat::Jsonl;
    if (ext == ".csv") return CorpusFormat::Csv;
    if (ext == ".tsv") return CorpusFormat::Tsv;
    throw ConfigError("cannot infer corpus format from '" + path.string() + "'");
}

namespace {

std::string field_error(const std::string& source, std::size_t line, const std::string& field,
                        const std::string& msg) {
    return source + ":" + std::to_string(line) + ": field '" + field + "': " + msg;
}

std::optional<double> json_number(const ordered_json& obj, const char* key, const std::string& source,
                                  std::size_t line) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    if (it->is_number()) return it->get<double>();
    if (it->is_string()) {
        const auto s = it->get<std::string>();
        if (trim(s).empty()) return std::nullopt;
        if (auto v = parse_double(s)) return v;
    }
    throw ValidationError(field_error(source, line, key, "expected a number"));
}

std::string json_string(const ordered_json& obj, const char* key, bool required, const std::string& source,
                        std::size_t line) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) {
        if (required) throw ValidationError(field_error(source, line, key, "missing required field"));
        return {};
    }
    if (it->is_string()) return it->get<std::string>();
    if (it->is_number_integer()) return std::to_string(it->get<long long>());
    throw ValidationError(field_error(source, line, key, "expected a string"));
}

Document document_from_json(const ordered_json& obj, const std::string& source, std::size_t line) {
    if (!obj.is_object()) throw ValidationError(source + ":" + std::to_string(line) + ": record is not an object");
    Document d;
    d.id = json_string(obj, "id", true, source, line);
    d.text = json_string(obj, "text", true, source, line);
    d.respondent = Respondent::parse(json_string(obj, "respondent", true, source, line));
    if (d.respondent.kind == Respondent::Kind::Other && d.respondent.label.empty()) {
        throw ValidationError(field_error(source, line, "respondent", "empty value"));
    }
    d.prompt_id = json_string(obj, "prompt_id", false, source, line);
    d.genre = Genre::parse(json_string(obj, "genre", false, source, line));
    d.testbed = json_string(obj, "testbed", false, source, line);
    d.gold_score = json_number(obj, "gold_score", source, line);
    d.score_min = json_number(obj, "score_min", source, line);
    d.score_max = json_number(obj, "score_max", source, line);
    if (auto wc = json_number(obj, "word_count", source, line)) {
        if (*wc != std::floor(*wc)) throw ValidationError(field_error(source, line, "word_count", "not an integer"));
        d.word_count = static_cast<std::int64_t>(*wc);
    }
    check_document(d, source + ":" + std::to_string(line));
    return d;
}

} // namespace

Corpus parse_corpus(std::string_view content, CorpusFormat format, const std::string& source) {
    std::vector<Document> docs;
    std::set<std::string> seen;
    auto add = [&](Document d, std::size_t line) {
        if (!seen.insert(d.id).second) {
            throw ValidationError(field_error(source, line, "id", "duplicate id '" + d.id + "'"));
        }
        docs.push_back(std::move(d));
    };

    if (format == CorpusFormat::Jsonl) {
        std::size_t line_no = 0;
        std::size_t pos = 0;
        while (pos <= content.size()) {
            auto nl = content.find('\n', pos);
            if (nl == std::string_view::npos) nl = content.size();
            ++line_no;
            auto line = trim(content.substr(pos, nl - pos));
            pos = nl + 1;
            if (line.empty()) {
                if (nl == content.size()) break;
                continue;
            }
            ordered_json obj;
            try {
                obj = ordered_json::parse(line);
            } catch (const nlohmann::json::parse_error& e) {
                throw ValidationError(source + ":" + std::to_string(line_no) + ": malformed JSON: " + e.what());
            }
            add(document_from_json(obj, source, line_no), line_no);
            if (nl == content.size()) break;
        }
    } else {
        const char sep = format == CorpusFormat::Csv ? ',' : '\t';
        auto records = parse_csv(content, sep);
        if (records.empty()) throw ValidationError(source + ": missing header row");
        const auto& header = records.front().fields;
        for (std::size_t r = 1; r < records.size(); ++r) {
            const auto& rec = records[r];
            if (rec.fields.size() != header.size()) {
                throw ValidationError(source + ":" + std::to_string(rec.line) + ": expected " +
                                      std::to_string(header.size()) + " fields, found " +
                                      std::to_string(rec.fields.size()));
            }
            ordered_json obj = ordered_json::object();
            for (std::size_t c = 0; c < header.size(); ++c) {
                const auto name = std::string(trim(header[c]));
                if (rec.fields[c].empty() && name != "text") continue;
                obj[name] = rec.fields[c];
            }
            add(document_from_json(obj, source, rec.line), rec.line);
        }
    }
    return Corpus(std::move(docs));
}

Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format) {
    return parse_corpus(read_file(path), format, path.string());
}

Corpus load_corpus(const std::filesystem::path& path) { return load_corpus(path, format_from_path(path)); }

Corpus merge_corpora(const std::vector<Corpus>& parts) {
    std::vector<Document> all;
    for (const auto& p : parts) {
        all.insert(all.end(), p.documents().begin(), p.documents().end());
    }
    return Corpus(std::move(all));
}

std::string serialize_corpus(const Corpus& corpus) {
    std::string out;
    for (const auto& d : corpus.documents()) {
        ordered_json obj;
        obj["id"] = d.id;
        obj["text"] = d.text;
        obj["respondent"] = d.respondent.str();
        obj["prompt_id"] = d.prompt_id;
        obj["genre"] = d.genre.str();
        obj["testbed"] = d.testbed;
        if (d.gold_score) obj["gold_score"] = *d.gold_score;
        if (d.score_min) obj["score_min"] = *d.score_min;
        if (d.score_max) obj["score_max"] = *d.score_max;
        if (d.word_count) obj["word_count"] = *d.word_count;
        out += obj.dump();
        out.push_back('\n');
    }
    return out;
}

Corpus normalize_scores(const Corpus& corpus) {
    std::vector<Document> docs = corpus.documents();
    for (auto& d : docs) {
        if (!d.gold_score) continue;
        if (!d.score_min || !d.score_max) {
            throw ValidationError("document " + d.id + " has a gold score but no declared score range");
        }
        const double lo = *d.score_min;
        const double hi = *d.score_max;
        if (lo == hi) throw ValidationError("document " + d.id + " has an empty score range");
        if (*d.gold_score < lo || *d.gold_score > hi) {
            throw ValidationError("document " + d.id + " gold score outside declared range");
        }
        d.gold_score = (*d.gold_score - lo) / (hi - lo);
        d.score_min = 0.0;
        d.score_max = 1.0;
    }
    return Corpus(std::move(docs));
}

std::optional<int> FoldPlan::fold_of(std::string_view id) const {
    auto it = assignments.find(std::string(id));
    if (it == assignments.end()) return std::nullopt;
    return it->second;
}

std::vector<std::string> FoldPlan::fold_members(int fold) const {
    std::vector<std::string> out;
    for (const auto& [id, f] : assignments) {
        if (f == fold) out.push_back(id);
    }
    return out;
}

namespace {

// std::uniform_int_distribution is implementation-defined; this keeps fold
// plans identical across standard libraries.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % bound;
}

} // namespace

FoldPlan make_folds(const std::vector<std::string>& ids, int k, std::uint64_t seed) {
    if (k < 2) throw ConfigError("fold count must be at least 2");
    if (static_cast<std::size_t>(k) > ids.size()) {
        throw ConfigError("fold count " + std::to_string(k) + " exceeds document count " +
                          std::to_string(ids.size()));
    }
    std::vector<std::string> order(ids);
    std::sort(order.begin(), order.end());
    if (std::adjacent_find(order.begin(), order.end()) != order.end()) {
        throw ValidationError("duplicate id in fold input");
    }
    std::mt19937_64 rng(seed);
    for (std::size_t i = order.size(); i > 1; --i) {
        std::swap(order[i - 1], order[bounded(rng, i)]);
    }
    FoldPlan plan;
    plan.k = k;
    for (std::size_t i = 0; i < order.size(); ++i) {
        plan.assignments[order[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
    }
    return plan;
}

FoldPlan make_folds(const Corpus& corpus, int k, std::uint64_t seed) {
    std::vector<std::string> ids;
    for (const auto& d : corpus.documents()) {
        if (d.scored()) ids.push_back(d.id);
    }
    return make_folds(ids, k, seed);
}

std::string serialize_fold_plan(const FoldPlan& plan) {
    CsvWriter w;
    w.row({"doc_id", "fold"});
    for (const auto& [id, f] : plan.assignments) w.row({id, std::to_string(f)});
    return w.str();
}

FoldPlan parse_fold_plan(std::string_view csv) {
    auto records = parse_csv(csv);
    if (records.empty() || records[0].fields.size() != 2) throw ValidationError("fold plan: bad header");
    FoldPlan plan;
    int max_fold = -1;
    for (std::size_t i = 1; i < records.size(); ++i) {
        const auto& r = records[i];
        if (r.fields.size() != 2) throw ValidationError("fold plan line " + std::to_string(r.line) + ": bad row");
        auto f = parse_double(r.fields[1]);
        if (!f || *f < 0 || *f != std::floor(*f)) {
            throw ValidationError("fold plan line " + std::to_string(r.line) + ": bad fold index");
        }
        if (!plan.assignments.emplace(r.fields[0], static_cast<int>(*f)).second) {
            throw ValidationError("fold plan line " + std::to_string(r.line) + ": duplicate id");
        }
        max_fold = std::max(max_fold, static_cast<int>(*f));
    }
    plan.k = max_fold + 1;
    return plan;
}

} // namespace essaylens

// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The essaylens Authors

#include "essaylens/annotate.hpp"

#include "essaylens/error.hpp"
#include "essaylens/parallel.hpp"
#include "essaylens/text_io.hpp"

#include <json.hpp>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cctype>
#include <unordered_map>

namespace essaylens {

// ---------------------------------------------------------------------------
// LayerSet

LayerSet::LayerSet(std::string doc_id, TokenLayer word) : doc_id_(std::move(doc_id)) {
    word.name = "word";
    layers_.push_back(std::move(word));
}

const TokenLayer* LayerSet::find(std::string_view name) const {
    for (const auto& l : layers_) {
        if (l.name == name) return &l;
    }
    return nullptr;
}

const TokenLayer& LayerSet::get(std::string_view name) const {
    if (const auto* l = find(name)) return *l;
    throw DependencyError("document " + doc_id_ + " has no layer '" + std::string(name) + "'");
}

void LayerSet::add(TokenLayer layer) {
    if (layer.name.empty()) throw ValidationError("layer name must not be empty");
    if (find(layer.name)) {
        throw ValidationError("document " + doc_id_ + ": duplicate layer '" + layer.name + "'");
    }
    if (!layers_.empty() && layer.size() != length()) {
        throw ValidationError("document " + doc_id_ + ": layer '" + layer.name + "' has " +
                              std::to_string(layer.size()) + " tokens, word layer has " +
                              std::to_string(length()));
    }
    for (const auto& t : layer.tokens) {
        if (t.empty()) throw ValidationError("document " + doc_id_ + ": empty token in layer '" + layer.name + "'");
    }
    layers_.push_back(std::move(layer));
}

// ---------------------------------------------------------------------------
// Lexicons

const std::string* LexiconResource::tag_of(std::string_view surface) const {
    auto it = tags.find(std::string(surface));
    return it == tags.end() ? nullptr : &it->second;
}

const std::vector<Sense>* LexiconResource::senses_of(std::string_view surface) const {
    auto it = senses.find(std::string(surface));
    return it == senses.end() ? nullptr : &it->second;
}

bool LexiconResource::contains(std::string_view surface) const {
    switch (kind) {
    case Kind::Tag: return tag_of(surface) != nullptr;
    case Kind::SenseScored: return senses_of(surface) != nullptr;
    case Kind::Dictionary: return words.count(std::string(surface)) > 0;
    }
    return false;
}

LexiconResource::Kind parse_lexicon_kind(std::string_view text) {
    const auto k = to_upper(trim(text));
    if (k == "TAG") return LexiconResource::Kind::Tag;
    if (k == "SENSE_SCORED") return LexiconResource::Kind::SenseScored;
    if (k == "DICTIONARY") return LexiconResource::Kind::Dictionary;
    throw ConfigError("unknown lexicon kind '" + std::string(text) + "'");
}

namespace {

std::vector<std::string> split_tabs(std::string_view line) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    for (;;) {
        auto tab = line.find('\t', pos);
        out.emplace_back(trim(line.substr(pos, tab == std::string_view::npos ? std::string_view::npos : tab - pos)));
        if (tab == std::string_view::npos) break;
        pos = tab + 1;
    }
    return out;
}

bool has_lowercase(std::string_view s) {
    return std::any_of(s.begin(), s.end(), [](unsigned char c) { return std::islower(c); });
}

} // namespace

LexiconResource parse_lexicon(std::string_view content, std::string name, LexiconResource::Kind kind,
                              const std::string& source) {
    LexiconResource lex;
    lex.name = std::move(name);
    lex.kind = kind;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < content.size()) {
        auto nl = content.find('\n', pos);
        if (nl == std::string_view::npos) nl = content.size();
        auto raw = content.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        auto line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        const auto where = source + ":" + std::to_string(line_no);
        auto cols = split_tabs(line);
        const auto surface = to_lower(cols[0]);
        if (surface.empty()) throw ValidationError(where + ": empty surface form");
        switch (kind) {
        case LexiconResource::Kind::Tag: {
            if (cols.size() != 2 || cols[1].empty()) throw ValidationError(where + ": expected surface<TAB>tag");
            if (has_lowercase(cols[1])) throw ValidationError(where + ": tag '" + cols[1] + "' is not uppercase");
            lex.tags[surface] = cols[1];
            break;
        }
        case LexiconResource::Kind::SenseScored: {
            if (cols.size() != 4) throw ValidationError(where + ": expected surface<TAB>sense<TAB>pos<TAB>neg");
            auto p = parse_double(cols[2]);
            auto n = parse_double(cols[3]);
            if (!p || !n) throw ValidationError(where + ": polarity is not a number");
            if (*p < 0 || *p > 1 || *n < 0 || *n > 1) throw ValidationError(where + ": polarity outside [0,1]");
            if (cols[1].empty() || has_lowercase(cols[1])) {
                throw ValidationError(where + ": sense id must be a non-empty uppercase tag");
            }
            lex.senses[surface].push_back(Sense{cols[1], *p, *n});
            break;
        }
        case LexiconResource::Kind::Dictionary:
            if (cols.size() != 1) throw ValidationError(where + ": expected one word per line");
            lex.words.insert(surface);
            break;
        }
    }
    return lex;
}

LexiconResource load_lexicon(const std::filesystem::path& path, std::string name, LexiconResource::Kind kind) {
    std::string content;
    try {
        content = read_file(path);
    } catch (const ValidationError&) {
        throw DependencyError("cannot load lexicon '" + name + "' from " + path.string());
    }
    return parse_lexicon(content, std::move(name), kind, path.string());
}

void LexiconRegistry::add(LexiconResource lexicon) {
    auto name = lexicon.name;
    if (!items_.emplace(name, std::move(lexicon)).second) {
        throw ConfigError("lexicon '" + name + "' registered twice");
    }
}

const LexiconResource& LexiconRegistry::get(std::string_view name) const {
    auto it = items_.find(name);
    if (it == items_.end()) throw ConfigError("unknown lexicon '" + std::string(name) + "'");
    return it->second;
}

bool LexiconRegistry::contains(std::string_view name) const { return items_.find(name) != items_.end(); }

// ---------------------------------------------------------------------------
// Tokenization and tagging

namespace {

bool is_ascii_punct(unsigned char c) { return c < 0x80 && std::ispunct(c); }

} // namespace

TokenLayer tokenize(std::string_view text) {
    TokenLayer layer{"word", {}};
    std::string current;
    auto flush = [&] {
        if (!current.empty()) {
            layer.tokens.push_back(std::move(current));
            current.clear();
        }
    };
    for (unsigned char c : text) {
        if (c < 0x80 && std::isspace(c)) {
            flush();
        } else if (is_ascii_punct(c)) {
            flush();
            layer.tokens.emplace_back(1, static_cast<char>(c));
        } else {
            current.push_back(static_cast<char>(c < 0x80 ? std::tolower(c) : c));
        }
    }
    flush();
    if (layer.tokens.empty()) throw ValidationError("cannot tokenize empty or whitespace-only text");
    return layer;
}

bool is_punctuation_token(std::string_view token) {
    return !token.empty() &&
           std::all_of(token.begin(), token.end(), [](unsigned char c) { return is_ascii_punct(c); });
}

bool is_alphabetic_token(std::string_view token) {
    bool any_letter = false;
    for (unsigned char c : token) {
        if (c >= 0x80) continue;
        if (!std::isalpha(c)) return false;
        any_letter = true;
    }
    return any_letter;
}

TokenLayer lexicon_tag(const TokenLayer& word, const LexiconResource& lexicon, bool passthrough,
                       std::string out_name) {
    if (lexicon.kind != LexiconResource::Kind::Tag) {
        throw ConfigError("lexicon '" + lexicon.name + "' is not a TAG lexicon");
    }
    TokenLayer out{out_name.empty() ? lexicon.name : std::move(out_name), {}};
    out.tokens.reserve(word.size());
    for (const auto& t : word.tokens) {
        if (const auto* tag = lexicon.tag_of(t)) out.tokens.push_back(*tag);
        else out.tokens.push_back(passthrough ? t : std::string("NONE"));
    }
    return out;
}

TokenLayer lexicon_tag(const TokenLayer& word, const LexiconRegistry& registry, std::string_view lexicon_name,
                       bool passthrough, std::string out_name) {
    return lexicon_tag(word, registry.get(lexicon_name), passthrough, std::move(out_name));
}

char polarity_bin(double polarity) {
    if (polarity < 1.0 / 3.0) return 'L';
    if (polarity < 2.0 / 3.0) return 'M';
    return 'H';
}

std::string sentiment_tag_for(const std::vector<Sense>& senses) {
    double pos = 0.0;
    double neg = 0.0;
    for (const auto& s : senses) {
        pos += s.positive;
        neg += s.negative;
    }
    const double v = static_cast<double>(senses.size());
    std::string tag;
    tag += polarity_bin(pos / v);
    tag += "POS";
    tag += polarity_bin(neg / v);
    tag += "NEG";
    return tag;
}

TokenLayer sentiment_tag(const TokenLayer& word, const LexiconResource& lexicon, std::string out_name) {
    if (lexicon.kind != LexiconResource::Kind::SenseScored) {
        throw ConfigError("lexicon '" + lexicon.name + "' is not SENSE_SCORED");
    }
    TokenLayer out{std::move(out_name), {}};
    out.tokens.reserve(word.size());
    for (const auto& t : word.tokens) {
        const auto* senses = lexicon.senses_of(t);
        out.tokens.push_back(senses && !senses->empty() ? sentiment_tag_for(*senses) : t);
    }
    return out;
}

TokenLayer sense_tag(const TokenLayer& word, const LexiconResource& lexicon, std::string out_name) {
    if (lexicon.kind != LexiconResource::Kind::SenseScored) {
        throw ConfigError("lexicon '" + lexicon.name + "' is not SENSE_SCORED");
    }
    TokenLayer out{std::move(out_name), {}};
    out.tokens.reserve(word.size());
    for (const auto& t : word.tokens) {
        const auto* senses = lexicon.senses_of(t);
        out.tokens.push_back(senses && !senses->empty() ? senses->front().id : t);
    }
    return out;
}

TokenLayer misspelling_tag(const TokenLayer& word, const LexiconResource& dictionary,
                           const std::set<std::string>& exclusions, std::string out_name) {
    if (dictionary.kind != LexiconResource::Kind::Dictionary) {
        throw ConfigError("lexicon '" + dictionary.name + "' is not a DICTIONARY");
    }
    TokenLayer out{std::move(out_name), {}};
    out.tokens.reserve(word.size());
    for (const auto& t : word.tokens) {
        const bool flagged = is_alphabetic_token(t) && !dictionary.contains(t) && !exclusions.count(t);
        out.tokens.push_back(flagged ? std::string("MISSPELLING") : t);
    }
    return out;
}

void legomena_tag(std::vector<LayerSet>& corpus_layers, const std::set<std::string>& training_ids,
                  std::string out_name) {
    if (training_ids.empty()) throw ValidationError("legomena tagging needs a non-empty training set");
    std::unordered_map<std::string, std::size_t> counts;
    for (const auto& ls : corpus_layers) {
        if (!training_ids.count(ls.doc_id())) continue;
        for (const auto& t : ls.word().tokens) ++counts[t];
    }
    for (auto& ls : corpus_layers) {
        TokenLayer out{out_name, {}};
        out.tokens.reserve(ls.length());
        for (const auto& t : ls.word().tokens) {
            auto it = counts.find(t);
            const std::size_t c = it == counts.end() ? 0 : it->second;
            out.tokens.push_back(c < 2 ? std::string("DIS") : t);
        }
        ls.add(std::move(out));
    }
}

TokenLayer combine_layers(const TokenLayer& base, const TokenLayer& aux, std::string_view separator,
                          bool only_where_differs, std::string out_name) {
    if (base.size() != aux.size()) {
        throw ValidationError("cannot combine layers '" + base.name + "' (" + std::to_string(base.size()) +
                              " tokens) and '" + aux.name + "' (" + std::to_string(aux.size()) + " tokens)");
    }
    TokenLayer out{out_name.empty() ? base.name + "_" + aux.name : std::move(out_name), {}};
    out.tokens.reserve(base.size());
    for (std::size_t i = 0; i < base.size(); ++i) {
        if (only_where_differs && base.tokens[i] == aux.tokens[i]) {
            out.tokens.push_back(base.tokens[i]);
        } else {
            out.tokens.push_back(base.tokens[i] + std::string(separator) + aux.tokens[i]);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// External annotations

AnnotationStore AnnotationStore::parse(std::string_view content, bool jsonl, const std::string& source) {
    AnnotationStore store;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    std::string current_doc;
    std::vector<std::string> current;
    auto flush = [&] {
        if (current_doc.empty()) {
            if (!current.empty()) {
                throw ValidationError(source + ":" + std::to_string(line_no) + ": tokens before '# doc_id =' header");
            }
            return;
        }
        if (!store.entries_.emplace(std::make_pair(current_doc, std::string()), std::move(current)).second) {
            throw ValidationError(source + ": document '" + current_doc + "' annotated twice");
        }
        current.clear();
        current_doc.clear();
    };
    while (pos < content.size()) {
        auto nl = content.find('\n', pos);
        if (nl == std::string_view::npos) nl = content.size();
        auto line = trim(content.substr(pos, nl - pos));
        pos = nl + 1;
        ++line_no;
        const auto where = source + ":" + std::to_string(line_no);
        if (jsonl) {
            if (line.empty()) continue;
            nlohmann::json obj;
            try {
                obj = nlohmann::json::parse(line);
                auto id = obj.at("doc_id").get<std::string>();
                auto layer = obj.value("layer", std::string());
                auto tokens = obj.at("tokens").get<std::vector<std::string>>();
                if (!store.entries_.emplace(std::make_pair(id, layer), std::move(tokens)).second) {
                    throw ValidationError(where + ": duplicate annotation for '" + id + "'");
                }
            } catch (const nlohmann::json::exception& e) {
                throw ValidationError(where + ": " + e.what());
            }
            continue;
        }
        if (line.empty()) {
            flush();
            continue;
        }
        if (line.front() == '#') {
            auto body = trim(line.substr(1));
            if (body.rfind("doc_id", 0) == 0) {
                auto eq = body.find('=');
                if (eq == std::string_view::npos) throw ValidationError(where + ": malformed doc_id header");
                flush();
                current_doc = std::string(trim(body.substr(eq + 1)));
            }
            continue;
        }
        auto cols = split_tabs(line);
        if (cols.size() < 2 || cols.back().empty()) throw ValidationError(where + ": expected token<TAB>tag");
        current.push_back(cols.back());
    }
    flush();
    return store;
}

AnnotationStore AnnotationStore::load(const std::filesystem::path& path) {
    std::string content;
    try {
        content = read_file(path);
    } catch (const ValidationError&) {
        throw DependencyError("cannot load annotation file " + path.string());
    }
    auto p = path.extension() == ".zst" ? path.stem() : path;
    return parse(content, p.extension() == ".jsonl", path.string());
}

const std::vector<std::string>* AnnotationStore::find(std::string_view doc_id, std::string_view layer) const {
    auto it = entries_.find(std::make_pair(std::string(doc_id), std::string(layer)));
    if (it != entries_.end()) return &it->second;
    it = entries_.find(std::make_pair(std::string(doc_id), std::string()));
    return it == entries_.end() ? nullptr : &it->second;
}

TokenLayer ingest_annotation_layer(const LayerSet& layers, const AnnotationStore& store, std::string_view layer_name,
                                   std::string_view source_layer) {
    const auto* tags = store.find(layers.doc_id(), source_layer.empty() ? layer_name : source_layer);
    if (!tags) {
        throw ValidationError("no '" + std::string(layer_name) + "' annotation for document " + layers.doc_id());
    }
    if (tags->size() != layers.length()) {
        throw ValidationError("alignment error for document " + layers.doc_id() + ": annotation layer '" +
                              std::string(layer_name) + "' has " + std::to_string(tags->size()) +
                              " tokens, word layer has " + std::to_string(layers.length()));
    }
    return TokenLayer{std::string(layer_name), *tags};
}

TokenLayer ingest_annotation_layer(const LayerSet& layers, const std::filesystem::path& path,
                                   std::string_view layer_name) {
    return ingest_annotation_layer(layers, AnnotationStore::load(path), layer_name);
}

// ---------------------------------------------------------------------------
// Configuration and orchestration

namespace {

LayerSpec::Kind parse_layer_kind(const std::string& s) {
    const auto k = to_lower(s);
    if (k == "lexicon" || k == "gazetteer") return LayerSpec::Kind::Lexicon;
    if (k == "sentiment") return LayerSpec::Kind::Sentiment;
    if (k == "sense") return LayerSpec::Kind::Sense;
    if (k == "misspelling") return LayerSpec::Kind::Misspelling;
    if (k == "legomena") return LayerSpec::Kind::Legomena;
    if (k == "external") return LayerSpec::Kind::External;
    if (k == "combine") return LayerSpec::Kind::Combine;
    throw ConfigError("unknown annotator kind '" + s + "'");
}

bool needs_resource(LayerSpec::Kind k) {
    return k != LayerSpec::Kind::Legomena && k != LayerSpec::Kind::Combine;
}

} // namespace

AnnotatorConfig parse_annotator_config(std::string_view yaml, const std::filesystem::path& base_dir) {
    AnnotatorConfig cfg;
    YAML::Node root;
    try {
        root = YAML::Load(std::string(yaml));
    } catch (const YAML::Exception& e) {
        throw ConfigError(std::string("annotator config: ") + e.what());
    }
    auto layers = root["layers"];
    if (!layers) return cfg;
    if (!layers.IsSequence()) throw ConfigError("annotator config: 'layers' must be a list");
    std::set<std::string> names{"word"};
    try {
        for (const auto& node : layers) {
            LayerSpec spec;
            spec.name = node["name"].as<std::string>();
            spec.kind = parse_layer_kind(node["kind"].as<std::string>());
            if (auto p = node["path"]) {
                std::filesystem::path rp = p.as<std::string>();
                spec.resource = rp.is_absolute() ? rp : base_dir / rp;
            }
            if (needs_resource(spec.kind) && spec.resource.empty()) {
                throw ConfigError("annotator config: layer '" + spec.name + "' needs a 'path'");
            }
            spec.passthrough = node["passthrough"].as<bool>(true);
            if (auto ex = node["exclusions"]) {
                for (const auto& e : ex) spec.exclusions.insert(to_lower(e.as<std::string>()));
            }
            spec.base = node["base"].as<std::string>("word");
            spec.aux = node["aux"].as<std::string>("");
            spec.only_where_differs = node["only_where_differs"].as<bool>(true);
            spec.separator = node["separator"].as<std::string>(std::string(kCombineSeparator));
            spec.source_layer = node["layer"].as<std::string>("");
            if (spec.kind == LayerSpec::Kind::Combine) {
                if (spec.aux.empty()) throw ConfigError("annotator config: combine layer '" + spec.name + "' needs 'aux'");
                if (!names.count(spec.base) || !names.count(spec.aux)) {
                    throw ConfigError("annotator config: combine layer '" + spec.name +
                                      "' references a layer that is not defined earlier");
                }
            }
            if (!names.insert(spec.name).second) throw ConfigError("annotator config: duplicate layer '" + spec.name + "'");
            cfg.layers.push_back(std::move(spec));
        }
    } catch (const YAML::Exception& e) {
        throw ConfigError(std::string("annotator config: ") + e.what());
    }
    return cfg;
}

AnnotatorConfig load_annotator_config(const std::filesystem::path& path) {
    std::string content;
    try {
        content = read_file(path);
    } catch (const ValidationError&) {
        throw ConfigError("cannot read annotator config " + path.string());
    }
    return parse_annotator_config(content, path.parent_path());
}

namespace {

/// Resources a configuration needs, loaded once and shared read-only.
struct LoadedResources {
    std::vector<LexiconResource> lexicons;      ///< aligned with config.layers (empty where unused)
    std::vector<std::unique_ptr<AnnotationStore>> stores;
};

LoadedResources load_resources(const AnnotatorConfig& config) {
    LoadedResources r;
    r.lexicons.resize(config.layers.size());
    r.stores.resize(config.layers.size());
    for (std::size_t i = 0; i < config.layers.size(); ++i) {
        const auto& spec = config.layers[i];
        switch (spec.kind) {
        case LayerSpec::Kind::Lexicon:
            r.lexicons[i] = load_lexicon(spec.resource, spec.name, LexiconResource::Kind::Tag);
            break;
        case LayerSpec::Kind::Sentiment:
        case LayerSpec::Kind::Sense:
            r.lexicons[i] = load_lexicon(spec.resource, spec.name, LexiconResource::Kind::SenseScored);
            break;
        case LayerSpec::Kind::Misspelling:
            r.lexicons[i] = load_lexicon(spec.resource, spec.name, LexiconResource::Kind::Dictionary);
            break;
        case LayerSpec::Kind::External:
            r.stores[i] = std::make_unique<AnnotationStore>(AnnotationStore::load(spec.resource));
            break;
        case LayerSpec::Kind::Legomena:
        case LayerSpec::Kind::Combine:
            break;
        }
    }
    return r;
}

} // namespace

std::vector<LayerSet> annotate_corpus(const Corpus& corpus, const AnnotatorConfig& config, std::size_t jobs) {
    const auto resources = load_resources(config);
    const auto& docs = corpus.documents();

    std::vector<LayerSet> out(docs.size());
    parallel_for(docs.size(), jobs, [&](std::size_t i) {
        try {
            out[i] = LayerSet(docs[i].id, tokenize(docs[i].text));
        } catch (const Error& e) {
            throw ValidationError("document " + docs[i].id + ": " + e.what());
        }
    });

    // Hapax counts are corpus-wide, so they are computed between the two passes.
    std::unordered_map<std::string, std::size_t> counts;
    const bool any_legomena = std::any_of(config.layers.begin(), config.layers.end(),
                                          [](const auto& s) { return s.kind == LayerSpec::Kind::Legomena; });
    if (any_legomena) {
        if (out.empty()) throw ValidationError("legomena tagging needs a non-empty training set");
        for (const auto& ls : out) {
            for (const auto& t : ls.word().tokens) ++counts[t];
        }
    }

    parallel_for(docs.size(), jobs, [&](std::size_t i) {
        auto& ls = out[i];
        try {
            for (std::size_t j = 0; j < config.layers.size(); ++j) {
                const auto& spec = config.layers[j];
                const auto& word = ls.word();
                switch (spec.kind) {
                case LayerSpec::Kind::Lexicon:
                    ls.add(lexicon_tag(word, resources.lexicons[j], spec.passthrough, spec.name));
                    break;
                case LayerSpec::Kind::Sentiment:
                    ls.add(sentiment_tag(word, resources.lexicons[j], spec.name));
                    break;
                case LayerSpec::Kind::Sense:
                    ls.add(sense_tag(word, resources.lexicons[j], spec.name));
                    break;
                case LayerSpec::Kind::Misspelling:
                    ls.add(misspelling_tag(word, resources.lexicons[j], spec.exclusions, spec.name));
                    break;
                case LayerSpec::Kind::Legomena: {
                    TokenLayer layer{spec.name, {}};
                    for (const auto& t : word.tokens) {
                        auto it = counts.find(t);
                        layer.tokens.push_back(it == counts.end() || it->second < 2 ? std::string("DIS") : t);
                    }
                    ls.add(std::move(layer));
                    break;
                }
                case LayerSpec::Kind::External:
                    ls.add(ingest_annotation_layer(ls, *resources.stores[j], spec.name, spec.source_layer));
                    break;
                case LayerSpec::Kind::Combine:
                    ls.add(combine_layers(ls.get(spec.base), ls.get(spec.aux), spec.separator,
                                          spec.only_where_differs, spec.name));
                    break;
                }
            }
        } catch (const Error& e) {
            throw ValidationError("document " + docs[i].id + ": " + e.what());
        }
    });
    return out;
}

std::string serialize_layersets(const std::vector<LayerSet>& sets) {
    std::string out;
    for (const auto& ls : sets) {
        nlohmann::ordered_json obj;
        obj["doc_id"] = ls.doc_id();
        auto layers = nlohmann::ordered_json::array();
        for (const auto& l : ls.layers()) {
            layers.push_back({{"name", l.name}, {"tokens", l.tokens}});
        }
        obj["layers"] = std::move(layers);
        out += obj.dump();
        out.push_back('\n');
    }
    return out;
}

std::vector<LayerSet> parse_layersets(std::string_view jsonl) {
    std::vector<LayerSet> out;
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos < jsonl.size()) {
        auto nl = jsonl.find('\n', pos);
        if (nl == std::string_view::npos) nl = jsonl.size();
        auto line = trim(jsonl.substr(pos, nl - pos));
        pos = nl + 1;
        ++line_no;
        if (line.empty()) continue;
        try {
            auto obj = nlohmann::json::parse(line);
            const auto& layers = obj.at("layers");
            if (layers.empty() || layers[0].at("name") != "word") {
                throw ValidationError("layer set line " + std::to_string(line_no) + ": first layer must be 'word'");
            }
            LayerSet ls(obj.at("doc_id").get<std::string>(),
                        TokenLayer{"word", layers[0].at("tokens").get<std::vector<std::string>>()});
            for (std::size_t i = 1; i < layers.size(); ++i) {
                ls.add(TokenLayer{layers[i].at("name").get<std::string>(),
                                  layers[i].at("tokens").get<std::vector<std::string>>()});
            }
            out.push_back(std::move(ls));
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError("layer set line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

} // namespace essaylens

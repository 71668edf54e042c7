// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The essaylens Authors

#pragma once

#include "essaylens/corpus.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace essaylens {

/// One parallel representation of a document: a token sequence aligned
/// index-by-index with the word layer.
struct TokenLayer {
    std::string name;
    std::vector<std::string> tokens;

    std::size_t size() const noexcept { return tokens.size(); }
    friend bool operator==(const TokenLayer&, const TokenLayer&) = default;
};

/// All layers of one document; layer 0 is always "word".
class LayerSet {
public:
    LayerSet() = default;
    LayerSet(std::string doc_id, TokenLayer word);

    const std::string& doc_id() const noexcept { return doc_id_; }
    const std::vector<TokenLayer>& layers() const noexcept { return layers_; }
    std::size_t size() const noexcept { return layers_.size(); }
    std::size_t length() const noexcept { return layers_.empty() ? 0 : layers_.front().size(); }

    const TokenLayer& word() const { return layers_.at(0); }
    const TokenLayer& get(std::string_view name) const;
    const TokenLayer* find(std::string_view name) const;

    /// Appends a layer; throws on a duplicate name or a length mismatch.
    void add(TokenLayer layer);

    friend bool operator==(const LayerSet&, const LayerSet&) = default;

private:
    std::string doc_id_;
    std::vector<TokenLayer> layers_;
};

struct Sense {
    std::string id;
    double positive = 0.0;
    double negative = 0.0;
};

/// Loaded lexicon. Surface forms are lowercase; tags are uppercase.
struct LexiconResource {
    enum class Kind { Tag, SenseScored, Dictionary };

    std::string name;
    Kind kind = Kind::Tag;
    std::unordered_map<std::string, std::string> tags;
    std::unordered_map<std::string, std::vector<Sense>> senses; ///< first sense = most frequent
    std::set<std::string> words;

    const std::string* tag_of(std::string_view surface) const;
    const std::vector<Sense>* senses_of(std::string_view surface) const;
    bool contains(std::string_view surface) const;
};

LexiconResource::Kind parse_lexicon_kind(std::string_view text);

/// TSV formats: TAG `surface<TAB>tag`; SENSE_SCORED `surface<TAB>sense<TAB>pos<TAB>neg`;
/// DICTIONARY one word per line. `#` starts a comment line.
LexiconResource parse_lexicon(std::string_view content, std::string name, LexiconResource::Kind kind,
                              const std::string& source = "<memory>");
LexiconResource load_lexicon(const std::filesystem::path& path, std::string name, LexiconResource::Kind kind);

class LexiconRegistry {
public:
    void add(LexiconResource lexicon);
    const LexiconResource& get(std::string_view name) const;
    bool contains(std::string_view name) const;

private:
    std::map<std::string, LexiconResource, std::less<>> items_;
};

inline constexpr std::string_view kCombineSeparator = "__";

/// Lowercases and splits off every ASCII punctuation character as its own token.
TokenLayer tokenize(std::string_view text);

bool is_punctuation_token(std::string_view token);
bool is_alphabetic_token(std::string_view token);

TokenLayer lexicon_tag(const TokenLayer& word, const LexiconResource& lexicon, bool passthrough,
                       std::string out_name = {});
TokenLayer lexicon_tag(const TokenLayer& word, const LexiconRegistry& registry, std::string_view lexicon_name,
                       bool passthrough, std::string out_name = {});

/// Low/medium/high bin of a polarity in [0,1]: [0,1/3) L, [1/3,2/3) M, [2/3,1] H.
char polarity_bin(double polarity);
std::string sentiment_tag_for(const std::vector<Sense>& senses);
TokenLayer sentiment_tag(const TokenLayer& word, const LexiconResource& lexicon, std::string out_name = "sentiment");

/// Most-frequent-sense assignment: in-lexicon tokens become their first sense id.
TokenLayer sense_tag(const TokenLayer& word, const LexiconResource& lexicon, std::string out_name = "sense");

TokenLayer misspelling_tag(const TokenLayer& word, const LexiconResource& dictionary,
                           const std::set<std::string>& exclusions, std::string out_name = "misspelling");

/// Adds a "legomena" layer: tokens seen fewer than twice across the training
/// documents' word layers become "DIS".
void legomena_tag(std::vector<LayerSet>& corpus_layers, const std::set<std::string>& training_ids,
                  std::string out_name = "legomena");

TokenLayer combine_layers(const TokenLayer& base, const TokenLayer& aux, std::string_view separator,
                          bool only_where_differs, std::string out_name = {});

/// External annotations keyed by document id. Two formats:
///  - CoNLL-style: `# doc_id = X` header, then `token<TAB>tag` lines, blank line between documents;
///  - JSONL: {"doc_id":..., "layer":..., "tokens":[...]}.
class AnnotationStore {
public:
    static AnnotationStore load(const std::filesystem::path& path);
    static AnnotationStore parse(std::string_view content, bool jsonl, const std::string& source = "<memory>");

    /// Tags for a document; `layer` filters JSONL rows (ignored for CoNLL files).
    const std::vector<std::string>* find(std::string_view doc_id, std::string_view layer = {}) const;

private:
    std::map<std::pair<std::string, std::string>, std::vector<std::string>> entries_;
};

TokenLayer ingest_annotation_layer(const LayerSet& layers, const AnnotationStore& store, std::string_view layer_name,
                                   std::string_view source_layer = {});
TokenLayer ingest_annotation_layer(const LayerSet& layers, const std::filesystem::path& path,
                                   std::string_view layer_name);

/// Declarative description of one layer to build.
struct LayerSpec {
    enum class Kind { Lexicon, Sentiment, Sense, Misspelling, Legomena, External, Combine };

    std::string name;
    Kind kind = Kind::Lexicon;
    std::filesystem::path resource;     ///< lexicon / dictionary / annotation file
    bool passthrough = true;            ///< lexicon
    std::set<std::string> exclusions;   ///< misspelling
    std::string base = "word";          ///< combine
    std::string aux;                    ///< combine
    bool only_where_differs = true;     ///< combine
    std::string separator{kCombineSeparator};
    std::string source_layer;           ///< external JSONL layer name (defaults to name)
};

struct AnnotatorConfig {
    std::vector<LayerSpec> layers; ///< built in order after "word"
};

/// YAML: `layers: [{name, kind, path, passthrough, exclusions, base, aux, only_where_differs, separator, layer}]`.
/// Relative paths resolve against `base_dir`.
AnnotatorConfig parse_annotator_config(std::string_view yaml, const std::filesystem::path& base_dir);
AnnotatorConfig load_annotator_config(const std::filesystem::path& path);

/// Builds every configured layer for every document. Resources load before
/// any document is touched. Output order follows the corpus.
std::vector<LayerSet> annotate_corpus(const Corpus& corpus, const AnnotatorConfig& config, std::size_t jobs = 1);

std::string serialize_layersets(const std::vector<LayerSet>& sets);
std::vector<LayerSet> parse_layersets(std::string_view jsonl);

} // namespace essaylens

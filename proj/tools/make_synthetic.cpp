// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The essaylens Authors

// Writes the bundled synthetic corpus: 200 human and 50 machine essays with a
// planted marker vocabulary, lexicons, configs, attention fixtures and an
// external prediction file.

#include "essaylens/annotate.hpp"
#include "essaylens/attention.hpp"
#include "essaylens/corpus.hpp"
#include "essaylens/metrics.hpp"
#include "essaylens/text_io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <random>
#include <set>

namespace fs = std::filesystem;
using namespace essaylens;

namespace {

struct Word {
    const char* text;
    const char* pos;
    const char* domain;   // "" when untagged
    const char* hypernym; // "" when untagged
};

const std::vector<Word> kGeneral{
    {"the", "DET", "", ""},          {"a", "DET", "", ""},           {"and", "CONJ", "", ""},
    {"but", "CONJ", "", ""},         {"of", "ADP", "", ""},          {"to", "ADP", "", ""},
    {"in", "ADP", "", ""},           {"with", "ADP", "", ""},        {"for", "ADP", "", ""},
    {"on", "ADP", "", ""},           {"i", "PRON", "", ""},          {"we", "PRON", "", ""},
    {"they", "PRON", "", ""},        {"it", "PRON", "", ""},         {"my", "PRON", "", ""},
    {"our", "PRON", "", ""},         {"is", "VERB", "", ""},         {"was", "VERB", "", ""},
    {"have", "VERB", "", ""},        {"think", "VERB", "", ""},      {"said", "VERB", "", ""},
    {"went", "VERB", "", ""},        {"make", "VERB", "", ""},       {"like", "VERB", "", ""},
    {"need", "VERB", "", ""},        {"help", "VERB", "", ""},       {"school", "NOUN", "SCHOOL", "INSTITUTION"},
    {"teacher", "NOUN", "SCHOOL", "PERSON"}, {"student", "NOUN", "SCHOOL", "PERSON"},
    {"class", "NOUN", "SCHOOL", "GROUP"},    {"homework", "NOUN", "SCHOOL", "ACTIVITY"},
    {"family", "NOUN", "FAMILY", "GROUP"},   {"mother", "NOUN", "FAMILY", "PERSON"},
    {"friend", "NOUN", "FAMILY", "PERSON"},  {"house", "NOUN", "FAMILY", "BUILDING"},
    {"computer", "NOUN", "TECH", "DEVICE"},  {"phone", "NOUN", "TECH", "DEVICE"},
    {"internet", "NOUN", "TECH", "NETWORK"}, {"game", "NOUN", "TECH", "ACTIVITY"},
    {"park", "NOUN", "NATURE", "PLACE"},     {"tree", "NOUN", "NATURE", "PLANT"},
    {"dog", "NOUN", "NATURE", "ANIMAL"},     {"river", "NOUN", "NATURE", "PLACE"},
    {"job", "NOUN", "WORK", "ACTIVITY"},     {"money", "NOUN", "WORK", "ASSET"},
    {"city", "NOUN", "", "PLACE"},   {"people", "NOUN", "", "PERSON"}, {"time", "NOUN", "", "MEASURE"},
    {"day", "NOUN", "", "MEASURE"},  {"idea", "NOUN", "", "COGNITION"}, {"good", "ADJ", "", ""},
    {"bad", "ADJ", "", ""},          {"happy", "ADJ", "", ""},       {"sad", "ADJ", "", ""},
    {"big", "ADJ", "", ""},          {"new", "ADJ", "", ""},         {"very", "ADV", "", ""},
    {"really", "ADV", "", ""},       {"always", "ADV", "", ""},      {"also", "ADV", "", ""},
    {"because", "CONJ", "", ""},     {"so", "CONJ", "", ""},         {"when", "CONJ", "", ""},
    {"love", "VERB", "", ""},        {"hate", "VERB", "", ""},       {"enjoy", "VERB", "", ""},
    {"worry", "VERB", "", ""},       {"problem", "NOUN", "", "COGNITION"}, {"fun", "NOUN", "", "ACTIVITY"},
};

// Register words track essay quality.
const std::vector<Word> kAdvanced{
    {"consequently", "ADV", "", ""},  {"perspective", "NOUN", "", "COGNITION"}, {"substantial", "ADJ", "", ""},
    {"elaborate", "VERB", "", ""},    {"hypothesis", "NOUN", "", "COGNITION"},  {"nevertheless", "ADV", "", ""},
    {"comprehensive", "ADJ", "", ""}, {"phenomenon", "NOUN", "", "EVENT"},      {"significant", "ADJ", "", ""},
    {"articulate", "VERB", "", ""},
};

// Over-used by the machine class.
const std::vector<Word> kMarkers{
    {"delve", "VERB", "", ""},      {"tapestry", "NOUN", "", "ARTIFACT"}, {"pivotal", "ADJ", "", ""},
    {"foster", "VERB", "", ""},     {"nuanced", "ADJ", "", ""},           {"realm", "NOUN", "", "PLACE"},
    {"underscore", "VERB", "", ""}, {"multifaceted", "ADJ", "", ""},
};

const std::map<std::string, std::vector<std::pair<double, double>>> kSentiment{
    {"good", {{0.75, 0.0}, {0.5, 0.125}}}, {"bad", {{0.0, 0.625}, {0.125, 0.5}}},
    {"happy", {{0.875, 0.0}}},             {"sad", {{0.0, 0.75}}},
    {"love", {{0.625, 0.0}, {0.375, 0.0}}}, {"hate", {{0.0, 0.875}}},
    {"enjoy", {{0.5, 0.0}}},               {"worry", {{0.0, 0.5}, {0.125, 0.25}}},
    {"fun", {{0.625, 0.0}}},               {"problem", {{0.0, 0.375}}},
    {"pivotal", {{0.375, 0.0}}},           {"foster", {{0.25, 0.0}}},
};

const std::vector<std::string> kGenres{"ARG", "RESP", "NARR", "LETT", "COMM", "SUGG"};
const std::vector<std::string> kTestbeds{"ta", "tb"};
const std::set<std::string> kPositive{"good", "happy", "love", "enjoy", "fun"};
const std::set<std::string> kNegative{"bad", "sad", "hate", "worry", "problem"};

std::string misspell(const std::string& w, std::mt19937_64& rng) {
    if (w.size() < 4) return w;
    std::string out = w;
    std::uniform_int_distribution<std::size_t> pos(1, w.size() - 2);
    const auto i = pos(rng);
    std::swap(out[i], out[i + 1]);
    return out == w ? w + "e" : out;
}

struct Essay {
    std::string text;
    double quality = 0.0;
};

Essay write_essay(bool machine, double quality, int sentences, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> gen(0, kGeneral.size() - 1);
    std::uniform_int_distribution<std::size_t> adv(0, kAdvanced.size() - 1);
    std::uniform_int_distribution<std::size_t> mark(0, kMarkers.size() - 1);
    std::uniform_int_distribution<int> len(6, 12);
    const double p_adv = 0.02 + 0.16 * quality;
    const double p_mark = machine ? 0.09 : 0.004;
    const double p_typo = machine ? 0.0 : 0.04 * (1.0 - quality);
    Essay e;
    e.quality = quality;
    for (int s = 0; s < sentences; ++s) {
        const int n = len(rng);
        for (int k = 0; k < n; ++k) {
            std::string w;
            const double r = u(rng);
            if (r < p_mark) w = kMarkers[mark(rng)].text;
            else if (r < p_mark + p_adv) w = kAdvanced[adv(rng)].text;
            else w = kGeneral[gen(rng)].text;
            if (u(rng) < p_typo) w = misspell(w, rng);
            if (k == 0) w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
            if (!e.text.empty()) e.text += ' ';
            e.text += w;
            if (k + 1 < n && u(rng) < 0.08) e.text += ',';
        }
        e.text += u(rng) < 0.1 ? "!" : ".";
    }
    return e;
}

std::string format6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

void write_lexicons(const fs::path& dir) {
    std::string domain = "# topic tags\n", hyper = "# noun hypernyms\n", affect = "# affect categories\n";
    std::string reg = "# register\n", marker = "# planted markers\n", redundant = "# one tag per word\n";
    std::string sentiment = "# surface\tsense\tpos\tneg\n", dict = "# dictionary\n";
    std::set<std::string> all;
    auto add = [&](const Word& w) {
        if (!all.insert(w.text).second) return;
        if (*w.domain) domain += std::string(w.text) + "\t" + w.domain + "\n";
        if (*w.hypernym) hyper += std::string(w.text) + "\t" + w.hypernym + "\n";
        if (kPositive.count(w.text)) affect += std::string(w.text) + "\tPOSEMO\n";
        if (kNegative.count(w.text)) affect += std::string(w.text) + "\tNEGEMO\n";
        redundant += std::string(w.text) + "\tR_" + to_upper(w.text) + "\n";
        dict += std::string(w.text) + "\n";
    };
    for (const auto& w : kGeneral) add(w);
    for (const auto& w : kAdvanced) {
        add(w);
        reg += std::string(w.text) + "\tADV\n";
    }
    for (const auto& w : kMarkers) {
        add(w);
        marker += std::string(w.text) + "\tMARK\n";
    }
    for (const auto& [word, senses] : kSentiment) {
        for (std::size_t i = 0; i < senses.size(); ++i) {
            sentiment += word + "\t" + to_upper(word) + "_S" + std::to_string(i + 1) + "\t" + format_double(senses[i].first) +
                         "\t" + format_double(senses[i].second) + "\n";
        }
    }
    write_file(dir / "lexicons/domain.tsv", domain);
    write_file(dir / "lexicons/hypernym.tsv", hyper);
    write_file(dir / "lexicons/affect.tsv", affect);
    write_file(dir / "lexicons/register.tsv", reg);
    write_file(dir / "lexicons/marker.tsv", marker);
    write_file(dir / "lexicons/redundant.tsv", redundant);
    write_file(dir / "lexicons/sentiment.tsv", sentiment);
    write_file(dir / "lexicons/dictionary.txt", dict);
}

const char* kAnnotators = R"(layers:
  - {name: domain, kind: lexicon, path: lexicons/domain.tsv}
  - {name: hypernym, kind: lexicon, path: lexicons/hypernym.tsv}
  - {name: affect, kind: lexicon, path: lexicons/affect.tsv}
  - {name: register, kind: lexicon, path: lexicons/register.tsv, passthrough: false}
  - {name: marker, kind: lexicon, path: lexicons/marker.tsv}
  - {name: redundant, kind: lexicon, path: lexicons/redundant.tsv}
  - {name: pos, kind: external, path: annotations/pos.conll}
  - {name: sentiment, kind: sentiment, path: lexicons/sentiment.tsv}
  - {name: sense, kind: sense, path: lexicons/sentiment.tsv}
  - {name: misspelling, kind: misspelling, path: lexicons/dictionary.txt}
  - {name: legomena, kind: legomena}
  - {name: word_hypernym, kind: combine, base: word, aux: hypernym}
  - {name: word_pos, kind: combine, base: word, aux: pos, only_where_differs: false}
)";

const char* kRun = R"(seed: 7
output: ../../out
jobs: 1
corpus:
  paths: [corpus.jsonl]
  class_rule: human_vs_machine
  folds: 5
annotate:
  config: annotators.yaml
weigh:
  tw: 1.0e-5
  tc: 0.95
  eps: 0.5
  corr_scope: word_only
  sentiment_lexicon: lexicons/sentiment.tsv
  series_order: [pos, word_pos, sense, sentiment, affect, domain, hypernym, word_hypernym, register, misspelling, legomena, marker, redundant]
attention:
  exports: [attention/bert-tiny.json.zst]
  top_n: 15
  direction: received
  exclusive_class: MACHINE
benchmark:
  qwk_bins: auto
  models:
    - {name: knn, model: knn, k: 5, features: [register]}
    - {name: knn_word, model: knn, k: 5, features: [word]}
    - {name: ridge, model: ridge, lambda: 10, features: [word, register]}
  predictions: [predictions/bert.jsonl]
stats:
  formula: auto
)";

AttentionRecord make_attention(const Document& doc, const TokenLayer& words, int fold, const std::set<std::string>& marks,
                               std::mt19937_64& rng) {
    AttentionRecord r;
    r.doc_id = doc.id;
    r.fold = fold;
    r.model_id = "bert-tiny";
    r.layers = 2;
    r.heads = 2;
    r.subword_tokens.push_back("[CLS]");
    std::vector<bool> marked{false};
    for (const auto& w : words.tokens) {
        const int start = static_cast<int>(r.subword_tokens.size());
        const bool m = marks.count(w) > 0;
        if (w.size() > 6) {
            r.subword_tokens.push_back(w.substr(0, 4));
            r.subword_tokens.push_back("##" + w.substr(4));
            marked.insert(marked.end(), 2, m);
        } else {
            r.subword_tokens.push_back(w);
            marked.push_back(m);
        }
        r.word_alignment.emplace_back(start, static_cast<int>(r.subword_tokens.size()));
    }
    r.subword_tokens.push_back("[SEP]");
    marked.push_back(false);
    const std::size_t t = r.subword_tokens.size();
    std::normal_distribution<double> noise(0.0, 0.5);
    r.attention.reserve(4 * t * t);
    for (int l = 0; l < r.layers; ++l) {
        for (int h = 0; h < r.heads; ++h) {
            for (std::size_t q = 0; q < t; ++q) {
                std::vector<double> row(t);
                double sum = 0.0;
                for (std::size_t k = 0; k < t; ++k) {
                    row[k] = std::exp(noise(rng) + (marked[k] ? 1.5 : 0.0) + (k == 0 ? 1.0 : 0.0));
                    sum += row[k];
                }
                for (double v : row) r.attention.push_back(static_cast<float>(std::stod(format6(v / sum))));
            }
        }
    }
    return r;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Generate the synthetic essay corpus"};
    std::string out = "data/synthetic";
    std::uint64_t seed = 20261016;
    app.add_option("--out", out, "Output directory");
    app.add_option("--seed", seed, "Generator seed");
    CLI11_PARSE(app, argc, argv);
    const fs::path dir(out);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, 1.0);

    // Two prompts per genre in each testbed.
    struct Prompt {
        std::string id, genre, testbed;
    };
    std::vector<Prompt> prompts;
    for (const auto& g : kGenres) {
        for (const auto& tb : kTestbeds) {
            for (int i = 1; i <= 2; ++i) prompts.push_back({tb + "-" + to_lower(g) + std::to_string(i), g, tb});
        }
    }
    std::vector<double> prompt_effect(prompts.size());
    for (auto& e : prompt_effect) e = 0.25 * noise(rng);

    std::vector<Document> docs;
    std::set<std::string> short_human, short_machine;
    auto add_doc = [&](int index, bool machine) {
        Document d;
        char id[16];
        std::snprintf(id, sizeof id, "%s%03d", machine ? "m" : "h", index);
        d.id = id;
        const auto pi = static_cast<std::size_t>(index) % prompts.size();
        d.prompt_id = prompts[pi].id;
        d.genre = Genre::parse(prompts[pi].genre);
        d.testbed = prompts[pi].testbed;
        const bool is_short = index < (machine ? 4 : 6);
        const double q = machine ? 0.55 + 0.4 * u(rng) : u(rng);
        const int sentences = is_short ? 2 : 4 + static_cast<int>(std::lround(8.0 * q)) + static_cast<int>(u(rng) * 2);
        auto essay = write_essay(machine, q, sentences, rng);
        d.text = essay.text;
        if (machine) {
            d.respondent = Respondent::parse(index % 2 == 0 ? "GPT-3.5" : "GPT-4");
            if (is_short) short_machine.insert(d.id);
        } else {
            d.respondent = Respondent::parse("HUMAN");
            const double latent = 1.0 + 5.0 * q + prompt_effect[pi] + 0.35 * noise(rng);
            d.gold_score = std::clamp(std::round(latent), 1.0, 6.0);
            d.score_min = 1.0;
            d.score_max = 6.0;
            if (is_short) short_human.insert(d.id);
        }
        docs.push_back(std::move(d));
    };
    for (int i = 0; i < 200; ++i) add_doc(i, false);
    for (int i = 0; i < 50; ++i) add_doc(i, true);
    const Corpus corpus(docs);

    write_file(dir / "corpus.jsonl", serialize_corpus(corpus));
    write_lexicons(dir);
    write_file(dir / "annotators.yaml", kAnnotators);
    write_file(dir / "run.yaml", kRun);

    std::map<std::string, std::string> pos_of;
    for (const auto* set : {&kGeneral, &kAdvanced, &kMarkers}) {
        for (const auto& w : *set) pos_of[w.text] = w.pos;
    }
    std::string conll;
    std::vector<TokenLayer> word_layers;
    for (const auto& d : corpus.documents()) {
        auto words = tokenize(d.text);
        conll += "# doc_id = " + d.id + "\n";
        for (const auto& t : words.tokens) {
            std::string tag = "X";
            if (is_punctuation_token(t)) tag = "PUNCT";
            else if (auto it = pos_of.find(t); it != pos_of.end()) tag = it->second;
            conll += t + "\t" + tag + "\n";
        }
        conll += "\n";
        word_layers.push_back(std::move(words));
    }
    write_file(dir / "annotations/pos.conll", conll);

    const auto plan = make_folds(corpus, 5, 7);
    std::set<std::string> marks;
    for (const auto& w : kMarkers) marks.insert(w.text);
    nlohmann::ordered_json records = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const auto& d = corpus.at(i);
        const bool human = short_human.count(d.id) > 0;
        if (!human && !short_machine.count(d.id)) continue;
        std::vector<int> folds;
        if (auto f = plan.fold_of(d.id)) folds = {*f};
        else folds = {0, 1, 2, 3, 4};
        for (int f : folds) {
            records.push_back(nlohmann::ordered_json::parse(
                serialize_attention_record(make_attention(d, word_layers[i], f, marks, rng))));
        }
    }
    write_file(dir / "attention/bert-tiny.json.zst", records.dump() + "\n");

    std::vector<Prediction> preds;
    for (const auto& d : corpus.documents()) {
        if (auto f = plan.fold_of(d.id)) {
            const double g = (*d.gold_score - 1.0) / 5.0;
            preds.push_back({d.id, "bert", *f, std::clamp(std::round((g + 0.12 * noise(rng)) * 1e4) / 1e4, 0.0, 1.0)});
        } else {
            for (int f = 0; f < 5; ++f) {
                preds.push_back({d.id, "bert", f, std::clamp(std::round((0.7 + 0.1 * noise(rng)) * 1e4) / 1e4, 0.0, 1.0)});
            }
        }
    }
    write_file(dir / "predictions/bert.jsonl", serialize_predictions(preds));
    std::cout << "wrote " << corpus.size() << " documents to " << dir.string() << "\n";
    return 0;
}

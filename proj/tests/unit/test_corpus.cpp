// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The essaylens Authors

#include "essaylens/corpus.hpp"
#include "essaylens/error.hpp"

#include <doctest.h>

#include <set>

using namespace essaylens;

namespace {

Document scored(std::string id, double gold, double lo, double hi) {
    Document d;
    d.id = std::move(id);
    d.text = "Some text.";
    d.gold_score = gold;
    d.score_min = lo;
    d.score_max = hi;
    return d;
}

std::vector<std::string> ids(int n) {
    std::vector<std::string> out;
    for (int i = 0; i < n; ++i) out.push_back("d" + std::to_string(i));
    return out;
}

} // namespace

TEST_CASE("a minimal JSONL record maps onto a document") {
    const auto c = parse_corpus(R"({"id":"a1","text":"It was hot.","respondent":"HUMAN"})", CorpusFormat::Jsonl);
    REQUIRE(c.size() == 1);
    CHECK(c.at(0).id == "a1");
    CHECK(c.at(0).respondent.kind == Respondent::Kind::Human);
    CHECK_FALSE(c.at(0).scored());
}

TEST_CASE("duplicate ids are rejected") {
    const std::string two = R"({"id":"a1","text":"x","respondent":"HUMAN"})"
                            "\n"
                            R"({"id":"a1","text":"y","respondent":"GPT-4"})";
    CHECK_THROWS_AS(parse_corpus(two, CorpusFormat::Jsonl), ValidationError);
}

TEST_CASE("errors name the source line and field") {
    try {
        parse_corpus("{\"id\":\"a\",\"text\":\"x\",\"respondent\":\"HUMAN\"}\n{\"id\":\"b\",\"respondent\":\"HUMAN\"}",
                     CorpusFormat::Jsonl, "in.jsonl");
        FAIL("expected an error");
    } catch (const ValidationError& e) {
        const std::string what = e.what();
        CHECK(what.find("in.jsonl:2") != std::string::npos);
        CHECK(what.find("text") != std::string::npos);
    }
}

TEST_CASE("CSV and TSV corpora load with a header row") {
    std::string csv = "id,text,respondent,prompt_id,genre,testbed,gold_score,score_min,score_max\n";
    for (int i = 0; i < 12; ++i) csv += "a" + std::to_string(i) + ",\"Text, with comma.\",HUMAN,p1,ARG,ta,3,1,6\n";
    std::string tsv = "id\ttext\trespondent\n";
    for (int i = 0; i < 5; ++i) tsv += "b" + std::to_string(i) + "\tWords here.\tGPT-3.5\n";
    const auto merged = merge_corpora({parse_corpus(csv, CorpusFormat::Csv), parse_corpus(tsv, CorpusFormat::Tsv)});
    CHECK(merged.size() == 17);
    CHECK(merged.find("a3")->text == "Text, with comma.");
    CHECK(merged.find("b0")->respondent.kind == Respondent::Kind::Gpt35);
    CHECK_THROWS_AS(merge_corpora({parse_corpus(tsv, CorpusFormat::Tsv), parse_corpus(tsv, CorpusFormat::Tsv)}),
                    ValidationError);
}

TEST_CASE("respondents and class rules") {
    CHECK(Respondent::parse("gpt-4").kind == Respondent::Kind::Gpt4);
    const auto other = Respondent::parse("age_18_25");
    CHECK(other.kind == Respondent::Kind::Other);
    CHECK(other.str() == "age_18_25");
    Document d;
    d.respondent = Respondent::parse("GPT-3.5");
    CHECK(class_of(d, ClassRule::HumanVsMachine) == "MACHINE");
    CHECK(class_of(d, ClassRule::Respondent) == d.respondent.str());
}

TEST_CASE("normalize_scores maps the declared range onto [0,1]") {
    const Corpus c({scored("s1", 7, 2, 12), scored("s2", 2, 2, 12)});
    const auto n = normalize_scores(c);
    CHECK(*n.at(0).gold_score == 0.5);
    CHECK(*n.at(1).gold_score == 0.0);
    CHECK(*n.at(0).score_min == 0.0);
    CHECK(*n.at(0).score_max == 1.0);
    const auto twice = normalize_scores(n);
    CHECK(*twice.at(0).gold_score == 0.5);
    CHECK(*twice.at(1).gold_score == 0.0);
}

TEST_CASE("out-of-range or range-less scores are errors") {
    CHECK_THROWS_AS(Corpus({scored("s1", 13, 2, 12)}), ValidationError);
    Document d;
    d.id = "x";
    d.text = "t";
    d.gold_score = 3.0;
    CHECK_THROWS_AS(normalize_scores(Corpus({d})), ValidationError);
}

TEST_CASE("folds are balanced, seeded and cover every id once") {
    const auto plan = make_folds(ids(10), 5, 42);
    for (int f = 0; f < 5; ++f) CHECK(plan.fold_members(f).size() == 2);
    CHECK(plan.assignments.size() == 10);
    CHECK(make_folds(ids(10), 5, 42).assignments == plan.assignments);

    const auto a = make_folds(ids(100), 5, 1);
    const auto b = make_folds(ids(100), 5, 2);
    CHECK(a.assignments != b.assignments);
    std::set<std::string> all;
    for (int f = 0; f < 5; ++f) {
        CHECK(a.fold_members(f).size() == b.fold_members(f).size());
        for (const auto& m : a.fold_members(f)) CHECK(all.insert(m).second);
    }
    CHECK(all.size() == 100);
}

TEST_CASE("fold plans ignore unscored documents and round-trip through CSV") {
    Document gpt;
    gpt.id = "g1";
    gpt.text = "t";
    gpt.respondent = Respondent::parse("GPT-4");
    const Corpus c({scored("h1", 1, 0, 2), scored("h2", 2, 0, 2), gpt});
    const auto plan = make_folds(c, 2, 3);
    CHECK_FALSE(plan.fold_of("g1").has_value());
    CHECK(parse_fold_plan(serialize_fold_plan(plan)).assignments == plan.assignments);
}

TEST_CASE("serialize then parse reproduces every field") {
    Document d = scored("z1", 4.25, 1, 6);
    d.text = "Line one.\nLine \"two\", with UTF-8 caf\xc3\xa9.";
    d.respondent = Respondent::parse("GPT-3.5");
    d.prompt_id = "p7";
    d.genre = Genre::parse("NARR");
    d.testbed = "tb";
    d.word_count = 12;
    const Corpus c({d, scored("z2", 0.1, 0, 1)});
    const auto back = parse_corpus(serialize_corpus(c), CorpusFormat::Jsonl);
    REQUIRE(back.size() == 2);
    const auto& b = back.at(0);
    CHECK(b.text == d.text);
    CHECK(b.respondent == d.respondent);
    CHECK(b.genre == d.genre);
    CHECK(b.prompt_id == "p7");
    CHECK(b.testbed == "tb");
    CHECK(*b.gold_score == 4.25);
    CHECK(*b.word_count == 12);
    CHECK(serialize_corpus(back) == serialize_corpus(c));
}

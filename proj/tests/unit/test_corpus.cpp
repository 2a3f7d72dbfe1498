#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "litscreen/corpus.hpp"
#include "litscreen/errors.hpp"
#include "litscreen/rng.hpp"

using namespace litscreen;
using corpus::Label;

namespace {

corpus::Corpus labeled(std::size_t relevant, std::size_t irrelevant) {
    std::vector<corpus::Document> docs;
    for (std::size_t i = 0; i < relevant + irrelevant; ++i)
        docs.push_back({"d" + std::to_string(i), "title " + std::to_string(i), "", i < relevant ? Label::Relevant : Label::Irrelevant, {}});
    return corpus::Corpus(std::move(docs));
}

}  // namespace

TEST_SUITE("corpus") {

TEST_CASE("jsonl with three rows") {
    const auto r = corpus::parse_corpus(
        "{\"id\":\"a\",\"title\":\"t\",\"abstract\":\"x\",\"label\":\"relevant\"}\n"
        "{\"id\":\"b\",\"title\":\"t\",\"abstract\":\"\",\"label\":\"irrelevant\"}\n"
        "{\"id\":\"c\",\"title\":\"\",\"abstract\":\"y\",\"label\":\"\"}\n",
        corpus::Format::Jsonl);
    CHECK(r.corpus.size() == 3);
    CHECK(r.corpus.counts().relevant == 1);
    CHECK(r.corpus.counts().irrelevant == 1);
    CHECK(r.corpus.counts().unlabeled == 1);
    CHECK_FALSE(r.corpus.fully_labeled());
}

TEST_CASE("duplicate id error names line 7") {
    std::string csv = "id,title,abstract,label\n";
    for (int i = 1; i <= 5; ++i) csv += "d" + std::to_string(i) + ",title,abstract,relevant\n";
    csv += "d3,again,abstract,irrelevant\n";  // line 7
    try {
        corpus::parse_corpus(csv, corpus::Format::Csv);
        FAIL("expected a duplicate-id error");
    } catch (const DataError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("line 7") != std::string::npos);
        CHECK(msg.find("d3") != std::string::npos);
    }
}

TEST_CASE("rows with empty title and abstract are excluded and counted") {
    const auto r = corpus::parse_corpus(
        "id,title,abstract,label\n"
        "a,One,,relevant\n"
        "b,,,irrelevant\n"
        "c,,Three,irrelevant\n"
        "d,Four,\"quoted, with comma\",irrelevant\n"
        "e,Five,x,\n",
        corpus::Format::Csv);
    CHECK(r.corpus.size() == 4);
    CHECK(r.report.rows_read == 5);
    CHECK(r.report.excluded == 1);
    CHECK(r.report.excluded_ids == std::vector<std::string>{"b"});
    CHECK(r.report.summary().find("1 excluded") != std::string::npos);
    CHECK(r.corpus[2].abstract == "quoted, with comma");
}

TEST_CASE("malformed rows name their line") {
    CHECK_THROWS_WITH_AS(corpus::parse_corpus("{\"id\":\"a\",\"title\":\"t\",\"abstract\":\"\",\"label\":\"\"}\nnot json\n",
                                              corpus::Format::Jsonl),
                         doctest::Contains("line 2"), IoError);
    CHECK_THROWS_WITH_AS(corpus::parse_corpus("id,title,abstract,label\na,b\n", corpus::Format::Csv),
                         doctest::Contains("line 2"), IoError);
    CHECK_THROWS_AS(corpus::parse_corpus("id,title,abstract,label\na,b,c,maybe\n", corpus::Format::Csv), Error);
}

TEST_CASE("csv and jsonl round trip") {
    std::vector<corpus::Document> docs{{"x1", "A \"quoted\" title", "line one,\nline two", Label::Relevant, "pubmed"},
                                       {"x2", "Second", "", std::nullopt, std::nullopt}};
    const corpus::Corpus c(docs);
    for (auto fmt : {corpus::Format::Csv, corpus::Format::Jsonl}) {
        const auto back = corpus::parse_corpus(corpus::serialize_corpus(c, fmt), fmt);
        REQUIRE(back.corpus.size() == 2);
        CHECK(back.corpus[0] == docs[0]);
        CHECK(back.corpus[1].id == "x2");
        CHECK_FALSE(back.corpus[1].label.has_value());
    }
}

TEST_CASE("labels() refuses unlabeled documents") {
    corpus::Corpus c({{"a", "t", "", std::nullopt, {}}});
    CHECK_THROWS_AS(c.labels("training"), DataError);
}

TEST_CASE("stratified k-fold on 10 documents with 2 relevant") {
    const auto c = labeled(2, 8);
    const auto plan = corpus::stratified_kfold(c, 5, 1);
    for (std::size_t f = 0; f < 5; ++f) {
        const auto rows = plan.validation_rows(f);
        CHECK(rows.size() == 2);
        const auto rel = std::count_if(rows.begin(), rows.end(), [&](auto r) { return c[r].label == Label::Relevant; });
        CHECK(rel <= 1);
    }
    CHECK(plan == corpus::stratified_kfold(c, 5, 1));
}

TEST_CASE("degenerate stratification") {
    CHECK_THROWS_AS(corpus::stratified_kfold(labeled(10, 0), 5, 1), DataError);
    CHECK_THROWS_AS(corpus::stratified_kfold(labeled(0, 20), 5, 1), DataError);
    CHECK_THROWS_AS(corpus::stratified_kfold(labeled(1, 2), 5, 1), DataError);
    CHECK_NOTHROW(corpus::stratified_kfold(labeled(3, 20), 5, 1));
    CHECK_THROWS_AS(corpus::stratified_kfold(labeled(10, 10), 1, 1), ConfigError);
}

TEST_CASE("property: stratification invariant on random label vectors") {
    Rng rng(99);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t k = 2 + rng.below(9);
        const std::size_t rel = k + rng.below(60);
        const std::size_t irr = k + rng.below(300);
        std::vector<Label> labels(rel + irr, Label::Irrelevant);
        std::fill_n(labels.begin(), rel, Label::Relevant);
        rng.shuffle(std::span(labels));
        const auto plan = corpus::stratified_kfold(labels, k, rng.next());
        REQUIRE(plan.fold_of.size() == labels.size());
        std::vector<std::array<std::size_t, 2>> per(k, {0, 0});
        for (std::size_t i = 0; i < labels.size(); ++i) {
            REQUIRE(plan.fold_of[i] < k);
            per[plan.fold_of[i]][static_cast<std::size_t>(labels[i])]++;
        }
        for (std::size_t f = 0; f < k; ++f) {
            CHECK(std::fabs(static_cast<double>(per[f][1]) - static_cast<double>(rel) / static_cast<double>(k)) < 1.0);
            CHECK(std::fabs(static_cast<double>(per[f][0]) - static_cast<double>(irr) / static_cast<double>(k)) < 1.0);
            const auto train = plan.training_rows(f);
            const auto val = plan.validation_rows(f);
            CHECK(train.size() + val.size() == labels.size());
        }
    }
}

TEST_CASE("subsample sizes") {
    CHECK(corpus::subsample_training(labeled(1171, 9547), 0.01, 5).train.size() == 107);

    const auto s = corpus::subsample_training(labeled(20, 180), 0.10, 3);
    CHECK(s.train.size() == 20);
    CHECK(s.train.counts().relevant == 2);
    CHECK(s.rest.size() == 180);

    const auto all = corpus::subsample_training(labeled(4, 6), 1.0, 3);
    CHECK(all.train.size() == 10);
    CHECK(all.rest.empty());

    CHECK_THROWS_AS(corpus::subsample_training(labeled(4, 6), 0.0, 3), ConfigError);
    CHECK_THROWS_AS(corpus::subsample_training(labeled(4, 6), 1.5, 3), ConfigError);
}

TEST_CASE("property: subsample partitions the corpus deterministically") {
    const auto c = labeled(37, 401);
    for (double f : {0.01, 0.05, 0.33, 0.5, 0.8, 0.999}) {
        const auto a = corpus::subsample_training(c, f, 11);
        const auto b = corpus::subsample_training(c, f, 11);
        CHECK(a.train.size() == static_cast<std::size_t>(std::llround(f * 438)));
        std::set<std::string> ids;
        for (const auto& d : a.train.documents()) ids.insert(d.id);
        for (const auto& d : a.rest.documents()) CHECK(ids.insert(d.id).second);
        CHECK(ids.size() == c.size());
        CHECK(std::equal(a.train.documents().begin(), a.train.documents().end(), b.train.documents().begin(),
                         b.train.documents().end()));
    }
}

}  // TEST_SUITE

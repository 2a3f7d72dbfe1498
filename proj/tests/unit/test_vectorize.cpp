#include <doctest.h>

#include <cmath>
#include <sstream>

#include "../oracles.hpp"
#include "litscreen/errors.hpp"
#include "litscreen/rng.hpp"
#include "litscreen/vectorize.hpp"

using namespace litscreen;
using textprep::TokenSequence;

namespace {

std::vector<TokenSequence> seqs(std::initializer_list<std::vector<std::string>> docs) {
    std::vector<TokenSequence> out;
    int i = 0;
    for (const auto& d : docs) out.push_back({"d" + std::to_string(i++), d});
    return out;
}

std::vector<std::vector<std::string>> random_docs(Rng& rng, std::size_t max_docs, std::size_t max_tokens) {
    const std::size_t d = 1 + rng.below(max_docs);
    const std::size_t p = 1 + rng.below(max_tokens);
    std::vector<std::vector<std::string>> docs(d);
    for (auto& doc : docs) {
        const auto len = rng.below(12);
        for (std::uint64_t i = 0; i < len; ++i) doc.push_back("t" + std::to_string(rng.below(p)));
    }
    if (std::all_of(docs.begin(), docs.end(), [](const auto& x) { return x.empty(); })) docs[0].push_back("t0");
    return docs;
}

}  // namespace

TEST_SUITE("vectorize") {

TEST_CASE("build_vocab") {
    const auto s = seqs({{"a", "b"}, {"b", "c"}});
    const auto v = vectorize::build_vocab(s, 1);
    CHECK(v.size() == 3);
    CHECK(v.df(*v.column("b")) == 2);
    const auto v2 = vectorize::build_vocab(s, 2);
    CHECK(v2.size() == 1);
    CHECK(v2.token(0) == "b");
    const auto v3 = vectorize::build_vocab(seqs({{"x", "x", "x"}}), 1);
    CHECK(v3.size() == 1);
    CHECK(v3.df(0) == 1);
    CHECK_THROWS_AS(vectorize::build_vocab(seqs({{}, {}}), 1), DataError);
}

TEST_CASE("count_matrix") {
    const auto vocab = vectorize::build_vocab(seqs({{"a", "b", "c"}}), 1);
    const auto m = vectorize::count_matrix(seqs({{"b", "b", "c"}, {}, {"zz", "yy"}}), vocab);
    CHECK(m.at(0, 0) == 0);
    CHECK(m.at(0, 1) == 2);
    CHECK(m.at(0, 2) == 1);
    CHECK(m.row(1).empty());
    CHECK(m.row(2).empty());
    CHECK(m.nnz() == 2);
}

TEST_CASE("tfidf examples") {
    const auto s = seqs({{"rare", "rare", "all"}, {"all"}, {"all", "x"}});
    const auto vocab = vectorize::build_vocab(s, 1);
    const auto t = vectorize::tfidf(vectorize::count_matrix(s, vocab));
    CHECK(t.weights.at(0, *vocab.column("rare")) == doctest::Approx(2.19722).epsilon(1e-5));
    CHECK(t.weights.at(0, *vocab.column("rare")) == 2.0 * std::log(3.0));
    for (std::size_t r = 0; r < 3; ++r) CHECK(t.weights.at(r, *vocab.column("all")) == 0.0);
    CHECK(t.weights.at(1, *vocab.column("rare")) == 0.0);
}

TEST_CASE("oracle: sparse tf-idf equals dense recomputation") {
    Rng rng(2024);
    for (int trial = 0; trial < 300; ++trial) {
        const auto docs = random_docs(rng, 20, 30);
        std::vector<TokenSequence> s;
        for (const auto& d : docs) s.push_back({"d", d});
        const auto vocab = vectorize::build_vocab(s, 1);
        const auto counts = vectorize::count_matrix(s, vocab);
        const auto t = vectorize::tfidf(counts);
        const auto o = oracle::dense_tfidf(docs);
        REQUIRE(vocab.size() == o.tokens.size());
        for (std::size_t j = 0; j < vocab.size(); ++j) {
            REQUIRE(vocab.token(j) == o.tokens[j]);
            CHECK(static_cast<double>(vocab.df(j)) == o.df[j]);
            CHECK(oracle::close_rel(t.idf[j], o.idf[j], 1e-12));
        }
        for (std::size_t d = 0; d < docs.size(); ++d)
            for (std::size_t j = 0; j < vocab.size(); ++j) {
                CHECK(static_cast<double>(counts.at(d, j)) == o.counts[d][j]);
                CHECK(oracle::close_rel(t.weights.at(d, j), o.weights[d][j], 1e-12));
            }
    }
}

TEST_CASE("property: stored entries are positive") {
    Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const auto docs = random_docs(rng, 20, 30);
        std::vector<TokenSequence> s;
        for (const auto& d : docs) s.push_back({"d", d});
        const auto counts = vectorize::count_matrix(s, vectorize::build_vocab(s, 1));
        const auto t = vectorize::tfidf(counts);
        for (std::size_t r = 0; r < counts.rows(); ++r) {
            for (const auto& e : counts.row(r)) CHECK(e.value > 0u);
            for (const auto& e : t.weights.row(r)) CHECK(e.value > 0.0);
        }
    }
}

TEST_CASE("property: idf strictly decreases as df grows below N") {
    const std::size_t n = 10;
    std::vector<std::vector<std::string>> docs(n, std::vector<std::string>{"filler"});
    double last = std::numeric_limits<double>::infinity();
    for (std::size_t df = 1; df <= n; ++df) {
        docs[df - 1].push_back("tok");
        std::vector<TokenSequence> s;
        for (const auto& d : docs) s.push_back({"d", d});
        const auto vocab = vectorize::build_vocab(s, 1);
        const auto idf = vectorize::fit_idf(vectorize::count_matrix(s, vocab))[*vocab.column("tok")];
        CHECK(idf < last);
        last = idf;
    }
    CHECK(last == 0.0);
}

TEST_CASE("idf fitted on training rows applies unchanged to other rows") {
    const auto train = seqs({{"a", "b"}, {"a"}});
    const auto vocab = vectorize::build_vocab(train, 1);
    const auto idf = vectorize::fit_idf(vectorize::count_matrix(train, vocab));
    const auto other = vectorize::apply_idf(vectorize::count_matrix(seqs({{"b", "b", "q"}}), vocab), idf);
    CHECK(other.at(0, *vocab.column("b")) == 2.0 * std::log(2.0));
    CHECK(other.at(0, *vocab.column("a")) == 0.0);
}

TEST_CASE("cluster config parsing") {
    const auto& c = vectorize::ClusterSet::builtin();
    CHECK(c.size() == 15);
    const auto names = c.names();
    for (std::size_t i = 0; i < 15; ++i) CHECK(names[i] == vectorize::kClusterNames[i]);
    CHECK_THROWS_AS(vectorize::ClusterSet::parse("hiv: hiv\n"), ConfigError);
    std::string text;
    for (auto n : vectorize::kClusterNames) text += std::string(n) + ": " + std::string(n) + "\n";
    CHECK(vectorize::ClusterSet::parse(text).size() == 15);
    CHECK_THROWS_AS(vectorize::ClusterSet::parse(text + "bogus: x\n"), ConfigError);
}

TEST_CASE("cluster membership conflicts are config errors") {
    vectorize::ClusterSet set({{"one", {{vectorize::ClusterPattern::Kind::Prefix, "vio"}}},
                               {"two", {{vectorize::ClusterPattern::Kind::Prefix, "violen"}}}});
    const auto vocab = vectorize::build_vocab(seqs({{"violenc", "other"}}), 1);
    CHECK_THROWS_AS(set.membership(vocab), ConfigError);
}

TEST_CASE("cluster_matrix sums member counts") {
    const auto& clusters = vectorize::ClusterSet::builtin();
    const auto s = seqs({{"rape", "rapist", "hiv"}, {"hiv"}, {"malaria"}});
    const auto vocab = vectorize::build_vocab(s, 1);
    const auto counts = vectorize::count_matrix(s, vocab);
    const auto tf = vectorize::cluster_counts(counts, clusters.membership(vocab), clusters.size());
    const auto names = clusters.names();
    const auto rape = std::find(names.begin(), names.end(), "rape") - names.begin();
    const auto hiv = std::find(names.begin(), names.end(), "hiv") - names.begin();
    CHECK(tf(0, rape) == 2.0);
    const auto m = vectorize::cluster_matrix(counts, vocab, clusters);
    CHECK(m.values(0, rape) == 2.0 * std::log(3.0));
    CHECK(m.values(0, hiv) == std::log(3.0 / 2.0));
    for (std::size_t c = 0; c < 15; ++c) CHECK(m.values(2, c) == 0.0);
    CHECK_FALSE(m.warnings.empty());  // most clusters have no member tokens here

    const auto all = seqs({{"hiv", "x"}, {"hiv"}});
    const auto va = vectorize::build_vocab(all, 1);
    const auto ma = vectorize::cluster_matrix(vectorize::count_matrix(all, va), va, clusters);
    CHECK(ma.values(0, hiv) == 0.0);
    CHECK(ma.values(1, hiv) == 0.0);
}

TEST_CASE("property: cluster column equals tf-idf of a rewritten corpus") {
    const auto& clusters = vectorize::ClusterSet::builtin();
    Rng rng(8);
    const std::vector<std::string> pool{"rape", "rapist", "violenc", "violent", "hiv", "aid", "abus", "victim",
                                        "malaria", "bednet", "water", "tortur", "murder", "homicid"};
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<TokenSequence> s(1 + rng.below(15));
        for (auto& d : s)
            for (std::uint64_t i = rng.below(8); i > 0; --i) d.tokens.push_back(pool[rng.below(pool.size())]);
        s[0].tokens.push_back("water");
        const auto vocab = vectorize::build_vocab(s, 1);
        const auto member = clusters.membership(vocab);
        const auto m = vectorize::cluster_matrix(vectorize::count_matrix(s, vocab), vocab, clusters);
        const auto names = clusters.names();
        for (std::size_t c = 0; c < clusters.size(); ++c) {
            std::vector<std::vector<std::string>> rewritten;
            for (const auto& d : s) {
                std::vector<std::string> r{"pad"};
                for (const auto& t : d.tokens)
                    if (const auto col = vocab.column(t); col && member[*col] == c) r.push_back("__cluster");
                rewritten.push_back(r);
            }
            const auto o = oracle::dense_tfidf(rewritten);
            const auto it = std::find(o.tokens.begin(), o.tokens.end(), "__cluster");
            for (std::size_t d = 0; d < s.size(); ++d) {
                const double expect = it == o.tokens.end() ? 0.0 : o.weights[d][it - o.tokens.begin()];
                CHECK(oracle::close_rel(m.values(d, c), expect, 1e-12));
            }
        }
    }
}

TEST_CASE("triplet export") {
    const auto s = seqs({{"a", "b", "b"}});
    const auto vocab = vectorize::build_vocab(s, 1);
    std::ostringstream out;
    vectorize::write_triplets(out, vectorize::count_matrix(s, vocab));
    CHECK(out.str() == "row,col,value\n0,0,1\n0,1,2\n");
}

}  // TEST_SUITE

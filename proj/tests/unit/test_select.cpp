#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "../oracles.hpp"
#include "litscreen/errors.hpp"
#include "litscreen/rng.hpp"
#include "litscreen/select.hpp"

using namespace litscreen;
using corpus::Label;
using vectorize::CsrMatrix;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

CsrMatrix<double> csr(const std::vector<std::vector<double>>& dense) {
    CsrMatrix<double> m(dense.empty() ? 0 : dense[0].size());
    for (const auto& row : dense) {
        std::vector<CsrMatrix<double>::Entry> entries;
        for (std::size_t j = 0; j < row.size(); ++j)
            if (row[j] != 0.0) entries.push_back({static_cast<std::uint32_t>(j), row[j]});
        m.push_row(entries);
    }
    return m;
}

// One column: relevant values then irrelevant values.
double t_of(const std::vector<double>& rel, const std::vector<double>& irr) {
    std::vector<std::vector<double>> dense;
    std::vector<Label> labels;
    for (double x : rel) dense.push_back({x}), labels.push_back(Label::Relevant);
    for (double x : irr) dense.push_back({x}), labels.push_back(Label::Irrelevant);
    return select::t_statistic(csr(dense), labels, 0);
}

vectorize::Vocabulary vocab_of(std::size_t p, std::size_t docs) {
    std::vector<std::string> tokens;
    for (std::size_t j = 0; j < p; ++j) tokens.push_back("w" + std::string(j < 10 ? "0" : "") + std::to_string(j));
    return vectorize::Vocabulary(tokens, std::vector<std::size_t>(p, 1), docs);
}

struct Fixture {
    std::vector<std::vector<double>> dense;
    std::vector<Label> labels;
};

Fixture random_fixture(Rng& rng, std::size_t p) {
    Fixture f;
    const std::size_t n = 4 + rng.below(40);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> row(p, 0.0);
        for (auto& x : row)
            if (rng.bernoulli(0.4)) x = std::round(rng.uniform() * 50.0) / 10.0;
        f.dense.push_back(row);
        f.labels.push_back(i < 2 ? static_cast<Label>(i) : (rng.bernoulli(0.3) ? Label::Relevant : Label::Irrelevant));
    }
    return f;
}

}  // namespace

TEST_SUITE("select") {

TEST_CASE("t-statistic examples") {
    CHECK(t_of({1, 2, 3}, {1, 2, 3}) == 0.0);
    CHECK(t_of({2, 2}, {0, 0, 0, 0}) == kInf);
    CHECK(t_of({0, 0}, {1, 1}) == -kInf);
    CHECK(t_of({1, 2}, {0, 1}) == doctest::Approx(1.41421).epsilon(1e-5));
    CHECK(t_of({0, 0}, {0, 0, 0}) == 0.0);
}

TEST_CASE("raw-variance variant") {
    std::vector<Label> labels{Label::Relevant, Label::Relevant, Label::Irrelevant, Label::Irrelevant};
    const auto m = csr({{1}, {2}, {0}, {1}});
    CHECK(select::t_statistic(m, labels, 0, select::TScore::RawVariance) == doctest::Approx(2.0));
}

TEST_CASE("oracle: statistics equal the textbook formula on random matrices") {
    Rng rng(31);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t p = 1 + rng.below(12);
        const auto f = random_fixture(rng, p);
        const auto t = select::t_statistics(csr(f.dense), f.labels);
        for (std::size_t j = 0; j < p; ++j) {
            std::vector<double> x1, x0;
            for (std::size_t i = 0; i < f.dense.size(); ++i)
                (f.labels[i] == Label::Relevant ? x1 : x0).push_back(f.dense[i][j]);
            const double o = oracle::welch_t(x1, x0);
            if (std::isinf(o)) {
                CHECK(t[j] == o);
            } else {
                CHECK(std::fabs(t[j] - o) <= 1e-12 * std::max(1.0, std::fabs(o)));
            }
        }
    }
}

TEST_CASE("single class is a data error") {
    std::vector<Label> labels{Label::Relevant, Label::Relevant};
    CHECK_THROWS_AS(select::t_statistics(csr({{1}, {2}}), labels), DataError);
}

TEST_CASE("ranking order: |t| descending, infinities first, ties by token") {
    // w00 -> +inf, w01 -> -inf, w02 and w03 tie, w04 -> 0
    std::vector<Label> labels{Label::Relevant, Label::Relevant, Label::Irrelevant, Label::Irrelevant};
    const auto m = csr({{1, 0, 2, 0, 1}, {1, 0, 1, 0, 1}, {0, 1, 0, 2, 1}, {0, 1, 0, 1, 1}});
    const auto r = select::rank_tokens(m, labels, vocab_of(5, 4), "p");
    REQUIRE(r.scores.size() == 5);
    CHECK(r.scores[0].token == "w00");
    CHECK(r.scores[1].token == "w01");
    CHECK(r.scores[2].token == "w02");
    CHECK(r.scores[3].token == "w03");
    CHECK(r.scores[4].token == "w04");
    CHECK(r.scores[2].t_stat == -r.scores[3].t_stat);
    for (std::size_t i = 0; i < 5; ++i) CHECK(r.scores[i].abs_rank == i + 1);

    std::ostringstream out;
    select::write_ranking_csv(out, r);
    CHECK(out.str().rfind("token,t_stat,rank\nw00,inf,1\nw01,-inf,2\n", 0) == 0);
}

TEST_CASE("planted token ranks first") {
    Rng rng(4);
    std::vector<std::vector<double>> dense;
    std::vector<Label> labels;
    for (int i = 0; i < 200; ++i) {
        const bool rel = i % 5 == 0;
        std::vector<double> row(20, 0.0);
        for (auto& x : row)
            if (rng.bernoulli(0.3)) x = 1.0 + rng.uniform();
        row[7] = rel ? 3.0 + rng.uniform() : (rng.bernoulli(0.1) ? rng.uniform() : 0.0);
        dense.push_back(row);
        labels.push_back(rel ? Label::Relevant : Label::Irrelevant);
    }
    const auto r = select::rank_tokens(csr(dense), labels, vocab_of(20, 200), "p");
    CHECK(r.scores[0].column == 7);
}

TEST_CASE("property: positive rescaling of a column leaves t unchanged") {
    Rng rng(12);
    for (int trial = 0; trial < 200; ++trial) {
        const auto f = random_fixture(rng, 3);
        auto scaled = f.dense;
        const double c = 0.1 + rng.uniform() * 20.0;
        for (auto& row : scaled) row[1] *= c;
        const auto a = select::t_statistics(csr(f.dense), f.labels);
        const auto b = select::t_statistics(csr(scaled), f.labels);
        if (std::isinf(a[1])) {
            CHECK(a[1] == b[1]);
        } else {
            CHECK(std::fabs(a[1] - b[1]) <= 1e-9 * std::max(1.0, std::fabs(a[1])));
        }
        CHECK(a[0] == b[0]);
    }
}

TEST_CASE("leakage guard") {
    const std::vector<std::string> train_ids{"a", "b"};
    const std::vector<std::string> other_ids{"a", "c"};
    const auto digest = select::rows_digest(train_ids);
    CHECK(digest == select::rows_digest(std::vector<std::string>{"b", "a"}));
    CHECK(digest != select::rows_digest(other_ids));
    std::vector<Label> labels{Label::Relevant, Label::Irrelevant};
    const auto r = select::rank_tokens(csr({{1, 0}, {0, 1}}), labels, vocab_of(2, 2), digest);
    std::vector<std::optional<std::size_t>> membership(2);
    CHECK_NOTHROW(select::select_features({}, r, membership, 1, digest));
    CHECK_THROWS_AS(select::select_features({}, r, membership, 1, select::rows_digest(other_ids)), DataError);
}

TEST_CASE("feature counts: clusters plus n_top tokens") {
    Rng rng(6);
    const std::size_t p = 40;
    auto f = random_fixture(rng, p);
    const auto tfidf = csr(f.dense);
    const auto r = select::rank_tokens(tfidf, f.labels, vocab_of(p, f.dense.size()), "p");
    std::vector<std::optional<std::size_t>> membership(p);
    membership[3] = 0;
    membership[9] = 1;
    const std::vector<std::string> clusters(15, "c");
    Matrix cluster_values(f.dense.size(), 15, 0.5);
    for (std::size_t n_top : {0u, 20u, 30u}) {
        const auto fs = select::select_features(clusters, r, membership, n_top, "p");
        CHECK(fs.size() == 15 + n_top);
        for (auto col : fs.token_columns) CHECK_FALSE(membership[col].has_value());
        const auto m = select::feature_matrix(fs, cluster_values, tfidf);
        CHECK(m.cols() == 15 + n_top);
        for (std::size_t i = 0; i < n_top; ++i)
            for (std::size_t row = 0; row < m.rows(); ++row)
                CHECK(m(row, 15 + i) == f.dense[row][fs.token_columns[i]]);
    }
    CHECK_THROWS_AS(select::select_features(clusters, r, membership, 39, "p"), DataError);
    select::SelectionOptions opts;
    opts.include_cluster_tokens = true;
    CHECK(select::select_features(clusters, r, membership, 40, "p", opts).size() == 55);
}

}  // TEST_SUITE

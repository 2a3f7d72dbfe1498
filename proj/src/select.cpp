#include "litscreen/select.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include "litscreen/errors.hpp"
#include "litscreen/hash.hpp"

namespace litscreen::select {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct ClassSizes {
    std::size_t relevant = 0;
    std::size_t irrelevant = 0;
};

ClassSizes class_sizes(std::span<const corpus::Label> labels) {
    ClassSizes s;
    for (auto l : labels) (l == corpus::Label::Relevant ? s.relevant : s.irrelevant)++;
    return s;
}

double combine(double mean1, double ss1, std::size_t n1, double mean2, double ss2, std::size_t n2, TScore mode) {
    const double var1 = n1 > 1 ? ss1 / static_cast<double>(n1 - 1) : 0.0;
    const double var2 = n2 > 1 ? ss2 / static_cast<double>(n2 - 1) : 0.0;
    const double spread = var1 / static_cast<double>(n1) + var2 / static_cast<double>(n2);
    const double diff = mean1 - mean2;
    if (spread == 0.0) {
        if (diff == 0.0) return 0.0;
        return diff > 0.0 ? kInf : -kInf;
    }
    return mode == TScore::Welch ? diff / std::sqrt(spread) : diff / spread;
}

}  // namespace

std::vector<double> t_statistics(const vectorize::CsrMatrix<double>& tfidf, std::span<const corpus::Label> labels,
                                 TScore mode) {
    if (labels.size() != tfidf.rows()) throw DataError("label count does not match matrix rows");
    const auto sizes = class_sizes(labels);
    if (sizes.relevant == 0 || sizes.irrelevant == 0)
        throw DataError("t-statistics need both classes in the training rows");

    const std::size_t p = tfidf.cols();
    // index 1 = relevant, 0 = irrelevant
    std::vector<double> sum[2] = {std::vector<double>(p, 0.0), std::vector<double>(p, 0.0)};
    std::vector<std::size_t> nnz[2] = {std::vector<std::size_t>(p, 0), std::vector<std::size_t>(p, 0)};
    for (std::size_t r = 0; r < tfidf.rows(); ++r) {
        const auto c = static_cast<std::size_t>(labels[r]);
        for (const auto& e : tfidf.row(r)) {
            sum[c][e.col] += e.value;
            ++nnz[c][e.col];
        }
    }
    const double n[2] = {static_cast<double>(sizes.irrelevant), static_cast<double>(sizes.relevant)};
    std::vector<double> mean[2] = {std::vector<double>(p), std::vector<double>(p)};
    for (std::size_t c = 0; c < 2; ++c)
        for (std::size_t j = 0; j < p; ++j) mean[c][j] = sum[c][j] / n[c];

    // Centered sums of squares: stored entries plus (n - nnz) implicit zeros.
    std::vector<double> ss[2] = {std::vector<double>(p, 0.0), std::vector<double>(p, 0.0)};
    for (std::size_t r = 0; r < tfidf.rows(); ++r) {
        const auto c = static_cast<std::size_t>(labels[r]);
        for (const auto& e : tfidf.row(r)) {
            const double d = e.value - mean[c][e.col];
            ss[c][e.col] += d * d;
        }
    }
    std::vector<double> t(p);
    for (std::size_t j = 0; j < p; ++j) {
        for (std::size_t c = 0; c < 2; ++c)
            ss[c][j] += (n[c] - static_cast<double>(nnz[c][j])) * mean[c][j] * mean[c][j];
        t[j] = combine(mean[1][j], ss[1][j], sizes.relevant, mean[0][j], ss[0][j], sizes.irrelevant, mode);
    }
    return t;
}

double t_statistic(const vectorize::CsrMatrix<double>& tfidf, std::span<const corpus::Label> labels,
                   std::size_t column, TScore mode) {
    if (column >= tfidf.cols()) throw DataError("column out of range");
    return t_statistics(tfidf, labels, mode)[column];
}

std::string rows_digest(std::span<const std::string> doc_ids) {
    std::vector<std::string_view> sorted(doc_ids.begin(), doc_ids.end());
    std::sort(sorted.begin(), sorted.end());
    std::string canonical;
    for (auto id : sorted) canonical.append(id).push_back('\n');
    return sha256_hex(canonical);
}

TokenRanking rank_tokens(const vectorize::CsrMatrix<double>& tfidf, std::span<const corpus::Label> labels,
                         const vectorize::Vocabulary& vocab, std::string provenance, TScore mode) {
    if (vocab.size() != tfidf.cols()) throw DataError("vocabulary does not match matrix columns");
    const auto t = t_statistics(tfidf, labels, mode);
    TokenRanking ranking;
    ranking.provenance = std::move(provenance);
    ranking.scores.reserve(t.size());
    for (std::size_t j = 0; j < t.size(); ++j)
        ranking.scores.push_back({vocab.token(j), static_cast<std::uint32_t>(j), t[j], 0});
    std::sort(ranking.scores.begin(), ranking.scores.end(), [](const TokenScore& a, const TokenScore& b) {
        const double fa = std::fabs(a.t_stat);
        const double fb = std::fabs(b.t_stat);
        if (fa != fb) return fa > fb;
        return a.token < b.token;
    });
    for (std::size_t i = 0; i < ranking.scores.size(); ++i) ranking.scores[i].abs_rank = i + 1;
    return ranking;
}

void write_ranking_csv(std::ostream& out, const TokenRanking& ranking) {
    out << "token,t_stat,rank\n";
    char buf[64];
    for (const auto& s : ranking.scores) {
        std::string_view value;
        if (std::isinf(s.t_stat)) {
            value = s.t_stat > 0 ? "inf" : "-inf";
        } else {
            const auto res = std::to_chars(buf, buf + sizeof buf, s.t_stat);
            value = std::string_view(buf, static_cast<std::size_t>(res.ptr - buf));
        }
        out << s.token << ',' << value << ',' << s.abs_rank << '\n';
    }
}

std::vector<std::string> FeatureSet::column_names() const {
    std::vector<std::string> out;
    out.reserve(size());
    for (const auto& c : cluster_names) out.push_back("cluster:" + c);
    for (const auto& t : token_names) out.push_back("token:" + t);
    return out;
}

FeatureSet select_features(std::span<const std::string> cluster_names, const TokenRanking& ranking,
                           std::span<const std::optional<std::size_t>> membership, std::size_t n_top,
                           std::string_view expected_provenance, SelectionOptions options) {
    if (ranking.provenance != expected_provenance)
        throw DataError("token ranking was computed on different rows than the training set (leakage guard)");
    FeatureSet fs;
    fs.cluster_names.assign(cluster_names.begin(), cluster_names.end());
    fs.n_top = n_top;
    for (const auto& s : ranking.scores) {
        if (fs.token_columns.size() == n_top) break;
        const bool in_cluster = s.column < membership.size() && membership[s.column].has_value();
        if (in_cluster && !options.include_cluster_tokens) continue;
        fs.token_columns.push_back(s.column);
        fs.token_names.push_back(s.token);
    }
    if (fs.token_columns.size() < n_top)
        throw DataError("n_top = " + std::to_string(n_top) + " exceeds the " +
                        std::to_string(fs.token_columns.size()) + " eligible vocabulary tokens");
    return fs;
}

Matrix feature_matrix(const FeatureSet& features, const Matrix& cluster_values,
                      const vectorize::CsrMatrix<double>& tfidf) {
    if (cluster_values.rows() != tfidf.rows()) throw DataError("cluster and token matrices have different row counts");
    if (cluster_values.cols() != features.cluster_names.size())
        throw DataError("cluster matrix has " + std::to_string(cluster_values.cols()) + " columns, feature set expects " +
                        std::to_string(features.cluster_names.size()));
    const std::size_t nc = features.cluster_names.size();
    Matrix out(tfidf.rows(), features.size());
    // vocabulary column -> feature position
    std::vector<std::int64_t> slot(tfidf.cols(), -1);
    for (std::size_t i = 0; i < features.token_columns.size(); ++i) {
        const auto col = features.token_columns[i];
        if (col >= tfidf.cols()) throw DataError("feature token column out of range");
        slot[col] = static_cast<std::int64_t>(nc + i);
    }
    for (std::size_t r = 0; r < tfidf.rows(); ++r) {
        auto row = out.row(r);
        for (std::size_t c = 0; c < nc; ++c) row[c] = cluster_values(r, c);
        for (const auto& e : tfidf.row(r))
            if (slot[e.col] >= 0) row[static_cast<std::size_t>(slot[e.col])] = e.value;
    }
    return out;
}

AssembledFeatures assemble_features(const vectorize::ClusterMatrix& clusters, std::span<const std::string> cluster_names,
                                    const vectorize::CsrMatrix<double>& tfidf, const TokenRanking& ranking,
                                    std::span<const std::optional<std::size_t>> membership, std::size_t n_top,
                                    std::string_view expected_provenance, SelectionOptions options) {
    auto fs = select_features(cluster_names, ranking, membership, n_top, expected_provenance, options);
    auto m = feature_matrix(fs, clusters.values, tfidf);
    return {std::move(fs), std::move(m)};
}

}  // namespace litscreen::select

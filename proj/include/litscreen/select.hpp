#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "litscreen/corpus.hpp"
#include "litscreen/matrix.hpp"
#include "litscreen/vectorize.hpp"

namespace litscreen::select {

enum class TScore {
    /// (mean1 - mean2) / sqrt(s1^2/n1 + s2^2/n2)
    Welch,
    /// (mean1 - mean2) / (s1^2/n1 + s2^2/n2), the literal "divided by the variance" reading.
    RawVariance,
};

/// Two-sample statistic of one column, relevant (class 1) vs irrelevant
/// (class 2), over every row of `tfidf`. Absent entries count as zero.
/// Sample variances use n - 1 (a class of one row has variance 0).
/// Zero spread with equal means gives 0; zero spread with different means
/// gives +/-infinity.
double t_statistic(const vectorize::CsrMatrix<double>& tfidf, std::span<const corpus::Label> labels,
                   std::size_t column, TScore mode = TScore::Welch);

/// Statistic for every column in one sweep over the matrix.
std::vector<double> t_statistics(const vectorize::CsrMatrix<double>& tfidf, std::span<const corpus::Label> labels,
                                 TScore mode = TScore::Welch);

struct TokenScore {
    std::string token;
    std::uint32_t column = 0;
    double t_stat = 0.0;
    std::size_t abs_rank = 0;  // 1-based
};

struct TokenRanking {
    /// Sorted by |t| descending (infinities first), ties by token.
    std::vector<TokenScore> scores;
    /// Identifies the rows the scores were computed from.
    std::string provenance;
};

/// Digest of a set of document ids, used as ranking provenance.
std::string rows_digest(std::span<const std::string> doc_ids);

/// Throws DataError when `labels` holds a single class.
TokenRanking rank_tokens(const vectorize::CsrMatrix<double>& tfidf, std::span<const corpus::Label> labels,
                         const vectorize::Vocabulary& vocab, std::string provenance,
                         TScore mode = TScore::Welch);

void write_ranking_csv(std::ostream& out, const TokenRanking& ranking);

struct FeatureSet {
    std::vector<std::string> cluster_names;
    /// Vocabulary columns of the selected tokens, in rank order.
    std::vector<std::uint32_t> token_columns;
    std::vector<std::string> token_names;
    std::size_t n_top = 0;

    std::size_t size() const noexcept { return cluster_names.size() + token_columns.size(); }
    std::vector<std::string> column_names() const;
    bool operator==(const FeatureSet&) const = default;
};

struct SelectionOptions {
    /// Let tokens that belong to a cluster compete for top-N slots too.
    bool include_cluster_tokens = false;
};

/// Picks the n_top best-ranked eligible tokens. `expected_provenance` must
/// match the ranking's provenance (guards against scoring on held-out rows).
FeatureSet select_features(std::span<const std::string> cluster_names, const TokenRanking& ranking,
                           std::span<const std::optional<std::size_t>> membership, std::size_t n_top,
                           std::string_view expected_provenance, SelectionOptions options = {});

/// Clusters first (fixed order), then the selected token columns.
Matrix feature_matrix(const FeatureSet& features, const Matrix& cluster_values,
                      const vectorize::CsrMatrix<double>& tfidf);

struct AssembledFeatures {
    FeatureSet features;
    Matrix matrix;
};

AssembledFeatures assemble_features(const vectorize::ClusterMatrix& clusters, std::span<const std::string> cluster_names,
                                    const vectorize::CsrMatrix<double>& tfidf, const TokenRanking& ranking,
                                    std::span<const std::optional<std::size_t>> membership, std::size_t n_top,
                                    std::string_view expected_provenance, SelectionOptions options = {});

}  // namespace litscreen::select

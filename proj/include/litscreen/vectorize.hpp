#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "litscreen/matrix.hpp"
#include "litscreen/textprep.hpp"

namespace litscreen::vectorize {

/// Compressed sparse row matrix. Only non-zero entries are stored and column
/// indices are ascending within each row.
template <typename T>
class CsrMatrix {
public:
    struct Entry {
        std::uint32_t col;
        T value;

        bool operator==(const Entry&) const = default;
    };

    CsrMatrix() : row_ptr_(1, 0) {}
    explicit CsrMatrix(std::size_t cols) : cols_(cols), row_ptr_(1, 0) {}

    /// Appends a row; entries must have ascending columns. Zero values are dropped.
    void push_row(std::span<const Entry> entries) {
        for (const auto& e : entries)
            if (e.value != T{}) entries_.push_back(e);
        row_ptr_.push_back(entries_.size());
    }

    std::size_t rows() const noexcept { return row_ptr_.size() - 1; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t nnz() const noexcept { return entries_.size(); }

    std::span<const Entry> row(std::size_t r) const {
        return {entries_.data() + row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]};
    }

    T at(std::size_t r, std::size_t c) const {
        for (const auto& e : row(r))
            if (e.col == c) return e.value;
        return T{};
    }

    bool operator==(const CsrMatrix&) const = default;

private:
    std::size_t cols_ = 0;
    std::vector<std::size_t> row_ptr_;
    std::vector<Entry> entries_;
};

using DocTermMatrix = CsrMatrix<std::uint32_t>;

struct TfidfMatrix {
    CsrMatrix<double> weights;
    std::vector<double> idf;
};

/// Token index with document frequencies. Columns are assigned in
/// lexicographic token order.
class Vocabulary {
public:
    Vocabulary() = default;
    /// tokens must be sorted and unique; df aligned with tokens.
    Vocabulary(std::vector<std::string> tokens, std::vector<std::size_t> df, std::size_t documents);

    std::size_t size() const noexcept { return tokens_.size(); }
    std::size_t documents() const noexcept { return documents_; }
    std::optional<std::uint32_t> column(std::string_view token) const;
    const std::string& token(std::size_t col) const { return tokens_[col]; }
    std::size_t df(std::size_t col) const { return df_[col]; }
    std::span<const std::string> tokens() const noexcept { return tokens_; }
    std::span<const std::size_t> dfs() const noexcept { return df_; }
    /// SHA-256 over tokens and document frequencies.
    std::string content_hash() const;

private:
    std::vector<std::string> tokens_;
    std::vector<std::size_t> df_;
    std::size_t documents_ = 0;
    std::unordered_map<std::string, std::uint32_t> index_;
};

/// Throws DataError when every sequence is empty.
Vocabulary build_vocab(std::span<const textprep::TokenSequence> seqs, std::size_t min_df = 1);

/// Out-of-vocabulary tokens are skipped.
DocTermMatrix count_matrix(std::span<const textprep::TokenSequence> seqs, const Vocabulary& vocab);

/// Documents per column with a positive count.
std::vector<std::size_t> document_frequency(const DocTermMatrix& counts);

/// ln(N / df) per column, with df recomputed from the matrix; columns with
/// df = 0 get idf 0.
std::vector<double> fit_idf(const DocTermMatrix& counts);

/// tf * idf for every entry, using a previously fitted idf.
CsrMatrix<double> apply_idf(const DocTermMatrix& counts, std::span<const double> idf);

TfidfMatrix tfidf(const DocTermMatrix& counts);

void write_triplets(std::ostream& out, const CsrMatrix<double>& m);
void write_triplets(std::ostream& out, const DocTermMatrix& m);

// --- semantic clusters ---

struct ClusterPattern {
    enum class Kind { Prefix, Exact };
    Kind kind = Kind::Prefix;
    std::string text;

    bool matches(std::string_view stem) const {
        return kind == Kind::Exact ? stem == text : stem.starts_with(text);
    }
    bool operator==(const ClusterPattern&) const = default;
};

struct ClusterSpec {
    std::string name;
    std::vector<ClusterPattern> patterns;

    bool matches(std::string_view stem) const;
    bool operator==(const ClusterSpec&) const = default;
};

inline constexpr std::array<std::string_view, 15> kClusterNames{
    "hiv",     "fsw",    "violence", "offense", "abuse",    "torture", "rape",   "victim",
    "assault", "harass", "extort",   "homicide", "coercion", "ipv",     "exploit"};

class ClusterSet {
public:
    ClusterSet() = default;
    /// Accepts any list of clusters; the order given is the column order.
    explicit ClusterSet(std::vector<ClusterSpec> clusters);

    /// Parses "name: prefix, prefix, exact=\"token\"" lines ('#' comments).
    /// The result must name exactly the 15 standard clusters and is returned
    /// in the standard order.
    static ClusterSet parse(std::string_view text);
    static ClusterSet load(const std::filesystem::path& path);
    static const ClusterSet& builtin();

    std::size_t size() const noexcept { return clusters_.size(); }
    std::span<const ClusterSpec> clusters() const noexcept { return clusters_; }
    std::vector<std::string> names() const;
    const std::string& content_hash() const noexcept { return hash_; }

    /// Cluster index of each vocabulary column (nullopt when none).
    /// Throws ConfigError if a token matches two clusters.
    std::vector<std::optional<std::size_t>> membership(const Vocabulary& vocab) const;

private:
    std::vector<ClusterSpec> clusters_;
    std::string hash_;
};

/// Dense documents x clusters TF-IDF matrix.
struct ClusterMatrix {
    Matrix values;
    std::vector<double> idf;
    std::vector<std::string> warnings;
};

/// Per-document summed counts of each cluster's member tokens (dense D x C).
Matrix cluster_counts(const DocTermMatrix& counts, std::span<const std::optional<std::size_t>> membership,
                      std::size_t n_clusters);

/// ln(N / df_c) where df_c counts documents with a positive cluster total.
/// Clusters with no member tokens (or df_c = 0) get idf 0 and a warning.
std::vector<double> fit_cluster_idf(const Matrix& cluster_tf, std::span<const ClusterSpec> clusters,
                                    std::span<const std::size_t> members_per_cluster,
                                    std::vector<std::string>* warnings = nullptr);

Matrix apply_cluster_idf(const Matrix& cluster_tf, std::span<const double> idf);

ClusterMatrix cluster_matrix(const DocTermMatrix& counts, const Vocabulary& vocab, const ClusterSet& clusters);

}  // namespace litscreen::vectorize

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace litscreen::corpus {

enum class Label : std::uint8_t { Irrelevant = 0, Relevant = 1 };

/// Parses "relevant"/"irrelevant" (any case); blank yields nullopt.
/// Throws DataError on anything else.
std::optional<Label> parse_label(std::string_view text);
std::string_view label_name(Label label) noexcept;

struct Document {
    std::string id;
    std::string title;
    std::string abstract;
    std::optional<Label> label;
    std::optional<std::string> source;

    bool operator==(const Document&) const = default;
};

struct ClassCounts {
    std::size_t total = 0;
    std::size_t relevant = 0;
    std::size_t irrelevant = 0;
    std::size_t unlabeled = 0;
};

/// Ordered, id-unique collection of documents. Immutable after construction.
class Corpus {
public:
    Corpus() = default;
    /// Throws DataError if two documents share an id.
    explicit Corpus(std::vector<Document> documents);

    std::span<const Document> documents() const noexcept { return documents_; }
    const Document& operator[](std::size_t i) const { return documents_[i]; }
    std::size_t size() const noexcept { return documents_.size(); }
    bool empty() const noexcept { return documents_.empty(); }
    const ClassCounts& counts() const noexcept { return counts_; }

    std::optional<std::size_t> index_of(std::string_view id) const;
    bool fully_labeled() const noexcept { return counts_.unlabeled == 0; }

    /// Labels in document order. Throws DataError if any document is unlabeled;
    /// `purpose` names the operation in the message.
    std::vector<Label> labels(std::string_view purpose = "this operation") const;

    /// Sub-corpus holding the given indices, in the order given.
    Corpus subset(std::span<const std::size_t> indices) const;

private:
    std::vector<Document> documents_;
    std::unordered_map<std::string, std::size_t> by_id_;
    ClassCounts counts_;
};

enum class Format { Jsonl, Csv };

/// Deduces the format from a file extension (.jsonl/.json/.ndjson or .csv).
Format format_from_path(const std::filesystem::path& path);

struct LoadReport {
    std::size_t rows_read = 0;
    std::size_t excluded = 0;
    std::vector<std::string> excluded_ids;

    /// One-line human summary, e.g. "read 5 rows, kept 4, 1 excluded (empty title and abstract)".
    std::string summary() const;
};

struct LoadResult {
    Corpus corpus;
    LoadReport report;
};

/// Reads a JSONL or CSV corpus. Rows with both title and abstract empty are
/// dropped and counted in the report. Malformed rows raise IoError naming the
/// line; duplicate ids raise DataError naming the id and line.
LoadResult load_corpus(const std::filesystem::path& path, Format format);
LoadResult load_corpus(const std::filesystem::path& path);

/// Same as load_corpus but from an in-memory buffer.
LoadResult parse_corpus(std::string_view content, Format format);

void save_corpus(const Corpus& corpus, const std::filesystem::path& path, Format format);
std::string serialize_corpus(const Corpus& corpus, Format format);

/// Fold assignment for stratified k-fold cross-validation.
struct SplitPlan {
    std::size_t k = 0;
    std::uint64_t seed = 0;
    /// fold index per document, in corpus order.
    std::vector<std::size_t> fold_of;
    std::unordered_map<std::string, std::size_t> fold_by_id;

    /// Document indices in fold f (validation rows), ascending.
    std::vector<std::size_t> validation_rows(std::size_t fold) const;
    /// Document indices outside fold f (training rows), ascending.
    std::vector<std::size_t> training_rows(std::size_t fold) const;

    bool operator==(const SplitPlan& other) const {
        return k == other.k && seed == other.seed && fold_of == other.fold_of;
    }
};

/// Each class is shuffled independently with the seed, then dealt round-robin
/// into folds; dealing continues where the previous class stopped so fold
/// sizes differ by at most one. A class with fewer than k members leaves
/// some folds without it. Throws DataError when a class is absent or there
/// are fewer documents than folds.
SplitPlan stratified_kfold(const Corpus& corpus, std::size_t k, std::uint64_t seed);

/// Same as above on a bare label vector.
SplitPlan stratified_kfold(std::span<const Label> labels, std::size_t k, std::uint64_t seed);

struct Subsample {
    Corpus train;
    Corpus rest;
};

/// Number of documents per class a stratified subsample of `fraction` takes:
/// total is round(fraction * N); per-class counts are floors of the exact
/// shares topped up by largest remainder.
std::pair<std::size_t, std::size_t> stratified_take(std::size_t relevant, std::size_t irrelevant,
                                                    double fraction);

/// Draws round(fraction * N) documents stratified by class. Both outputs keep
/// corpus order.
Subsample subsample_training(const Corpus& corpus, double fraction, std::uint64_t seed);

}  // namespace litscreen::corpus

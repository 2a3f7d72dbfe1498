#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "litscreen/corpus.hpp"
#include "litscreen/matrix.hpp"

namespace litscreen::forest {

enum class Balance {
    /// Per tree, bootstrap n_min rows from each class (n_min = minority size).
    DownsampleMajority,
    /// Per tree, ordinary bootstrap of all rows.
    None,
};

struct ForestConfig {
    std::size_t n_trees = 500;
    /// Features tried per split; 0 means ceil(sqrt(n_features)).
    std::size_t mtry = 0;
    std::optional<std::size_t> max_depth;
    std::size_t min_leaf = 1;
    std::uint64_t seed = 0;
    Balance balance = Balance::DownsampleMajority;
    /// Worker threads for training and batch prediction; 0 = hardware concurrency.
    /// Results do not depend on this value.
    std::size_t threads = 1;

    std::size_t resolved_mtry(std::size_t n_features) const;
    /// Throws ConfigError on out-of-range knobs.
    void validate(std::size_t n_features) const;
};

struct TreeNode {
    std::int32_t feature = -1;  // -1 marks a leaf
    double threshold = 0.0;     // value <= threshold goes left
    std::uint32_t left = 0;
    std::uint32_t right = 0;
    std::uint32_t n_irrelevant = 0;
    std::uint32_t n_relevant = 0;

    bool is_leaf() const noexcept { return feature < 0; }
    /// Majority class of the node's training rows; ties vote relevant.
    bool votes_relevant() const noexcept { return n_relevant >= n_irrelevant; }
    bool operator==(const TreeNode&) const = default;
};

class DecisionTree {
public:
    DecisionTree() = default;
    explicit DecisionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

    std::span<const TreeNode> nodes() const noexcept { return nodes_; }
    const TreeNode& leaf_for(std::span<const double> row) const;
    bool votes_relevant(std::span<const double> row) const { return leaf_for(row).votes_relevant(); }
    std::size_t depth() const;

    bool operator==(const DecisionTree&) const = default;

private:
    std::vector<TreeNode> nodes_;  // root at index 0
};

/// Seed of tree `index` under a master seed.
std::uint64_t tree_seed(std::uint64_t master_seed, std::size_t index);

/// Bootstrap n_min rows (with replacement) from each class of `rows`;
/// returns 2 * n_min row indices. Throws DataError if a class is absent.
std::vector<std::size_t> balanced_sample(std::span<const corpus::Label> labels, std::span<const std::size_t> rows,
                                         std::uint64_t seed);

/// Grows one CART tree on `sample` (row indices into `features`, repeats
/// allowed) with Gini impurity and midpoint thresholds.
DecisionTree train_tree(const Matrix& features, std::span<const corpus::Label> labels,
                        std::span<const std::size_t> sample, const ForestConfig& config, std::uint64_t tree_seed);

struct ForestModel {
    ForestConfig config;
    std::size_t n_features = 0;
    std::size_t train_relevant = 0;
    std::size_t train_irrelevant = 0;
    std::vector<std::uint64_t> tree_seeds;
    std::vector<DecisionTree> trees;

    /// Share of trees voting relevant. Throws DataError on a width mismatch.
    double predict_proba(std::span<const double> row) const;
    std::vector<double> predict_proba(const Matrix& rows) const;

    /// Line-based text format; doubles use shortest round-trip notation.
    void save(std::ostream& out) const;
    static ForestModel load(std::istream& in);
    std::string serialize() const;

    bool operator==(const ForestModel& other) const;
};

ForestModel train_forest(const Matrix& features, std::span<const corpus::Label> labels, const ForestConfig& config);

/// Relevant iff p_hat >= cutoff.
corpus::Label classify(const ForestModel& model, std::span<const double> row, double cutoff);

}  // namespace litscreen::forest

#include "litscreen/forest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "litscreen/errors.hpp"
#include "litscreen/parallel.hpp"
#include "litscreen/rng.hpp"

namespace litscreen::forest {

using corpus::Label;

std::size_t ForestConfig::resolved_mtry(std::size_t n_features) const {
    if (mtry != 0) return mtry;
    auto m = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n_features))));
    return std::clamp<std::size_t>(m, 1, std::max<std::size_t>(n_features, 1));
}

void ForestConfig::validate(std::size_t n_features) const {
    if (n_trees < 1) throw ConfigError("n_trees must be >= 1");
    if (n_features < 1) throw ConfigError("forest needs at least one feature");
    const auto m = resolved_mtry(n_features);
    if (m < 1 || m > n_features)
        throw ConfigError("mtry must lie in [1, " + std::to_string(n_features) + "], got " + std::to_string(m));
    if (min_leaf < 1) throw ConfigError("min_leaf must be >= 1");
    if (max_depth && *max_depth < 1) throw ConfigError("max_depth must be >= 1 when set");
}

const TreeNode& DecisionTree::leaf_for(std::span<const double> row) const {
    std::size_t i = 0;
    while (!nodes_[i].is_leaf()) {
        const auto& n = nodes_[i];
        i = row[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return nodes_[i];
}

std::size_t DecisionTree::depth() const {
    if (nodes_.empty()) return 0;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
    std::size_t best = 0;
    while (!stack.empty()) {
        auto [i, d] = stack.back();
        stack.pop_back();
        best = std::max(best, d);
        if (!nodes_[i].is_leaf()) {
            stack.emplace_back(nodes_[i].left, d + 1);
            stack.emplace_back(nodes_[i].right, d + 1);
        }
    }
    return best;
}

std::uint64_t tree_seed(std::uint64_t master_seed, std::size_t index) { return derive_seed(master_seed, index); }

std::vector<std::size_t> balanced_sample(std::span<const Label> labels, std::span<const std::size_t> rows,
                                         std::uint64_t seed) {
    std::vector<std::size_t> by_class[2];
    for (auto r : rows) by_class[static_cast<std::size_t>(labels[r])].push_back(r);
    if (by_class[0].empty() || by_class[1].empty())
        throw DataError("balanced sampling needs both classes; got " + std::to_string(by_class[1].size()) +
                        " relevant and " + std::to_string(by_class[0].size()) + " irrelevant rows");
    const std::size_t n_min = std::min(by_class[0].size(), by_class[1].size());
    Rng rng(seed);
    std::vector<std::size_t> out;
    out.reserve(2 * n_min);
    for (const std::size_t c : {std::size_t{1}, std::size_t{0}})
        for (std::size_t t = 0; t < n_min; ++t) out.push_back(by_class[c][rng.below(by_class[c].size())]);
    return out;
}

namespace {

// Column-major view of the training matrix; split search gathers one
// feature at a time.
class ColumnStore {
public:
    explicit ColumnStore(const Matrix& m) : rows_(m.rows()), data_(m.rows() * m.cols()) {
        for (std::size_t r = 0; r < m.rows(); ++r)
            for (std::size_t c = 0; c < m.cols(); ++c) data_[c * rows_ + r] = m(r, c);
    }
    double at(std::size_t row, std::size_t col) const { return data_[col * rows_ + row]; }

private:
    std::size_t rows_;
    std::vector<double> data_;
};

struct Split {
    std::int32_t feature = -1;
    double threshold = 0.0;
    double score = -std::numeric_limits<double>::infinity();
};

double midpoint(double lo, double hi) {
    const double mid = lo + (hi - lo) / 2.0;
    return mid < hi ? mid : lo;
}

class TreeBuilder {
public:
    TreeBuilder(const ColumnStore& columns, std::size_t n_features, std::span<const Label> labels,
                const ForestConfig& config, std::uint64_t seed)
        : columns_(columns), n_features_(n_features), labels_(labels), config_(config),
          mtry_(config.resolved_mtry(n_features)), rng_(derive_seed(seed, 2)) {
        pool_.resize(n_features);
        for (std::size_t f = 0; f < n_features; ++f) pool_[f] = static_cast<std::uint32_t>(f);
    }

    DecisionTree build(std::span<const std::size_t> sample) {
        rows_.assign(sample.begin(), sample.end());
        nodes_.clear();
        nodes_.emplace_back();
        struct Task {
            std::size_t node, begin, end, depth;
        };
        std::vector<Task> stack{{0, 0, rows_.size(), 0}};
        while (!stack.empty()) {
            const Task t = stack.back();
            stack.pop_back();
            std::uint32_t counts[2] = {0, 0};
            for (std::size_t i = t.begin; i < t.end; ++i) ++counts[static_cast<std::size_t>(labels_[rows_[i]])];
            nodes_[t.node].n_irrelevant = counts[0];
            nodes_[t.node].n_relevant = counts[1];

            const std::size_t n = t.end - t.begin;
            const bool pure = counts[0] == 0 || counts[1] == 0;
            const bool too_small = n < 2 * config_.min_leaf;
            const bool too_deep = config_.max_depth && t.depth >= *config_.max_depth;
            if (pure || too_small || too_deep) continue;

            const Split s = best_split(t.begin, t.end, counts);
            if (s.feature < 0) continue;

            const auto f = static_cast<std::size_t>(s.feature);
            const auto mid = std::partition(rows_.begin() + static_cast<std::ptrdiff_t>(t.begin),
                                            rows_.begin() + static_cast<std::ptrdiff_t>(t.end),
                                            [&](std::size_t r) { return columns_.at(r, f) <= s.threshold; });
            const auto split_at = static_cast<std::size_t>(mid - rows_.begin());

            const auto left = static_cast<std::uint32_t>(nodes_.size());
            nodes_.emplace_back();
            nodes_.emplace_back();
            auto& node = nodes_[t.node];
            node.feature = s.feature;
            node.threshold = s.threshold;
            node.left = left;
            node.right = left + 1;
            stack.push_back({left + 1u, split_at, t.end, t.depth + 1});
            stack.push_back({left, t.begin, split_at, t.depth + 1});
        }
        return DecisionTree(std::move(nodes_));
    }

private:
    const ColumnStore& columns_;
    std::size_t n_features_;
    std::span<const Label> labels_;
    const ForestConfig& config_;
    std::size_t mtry_;
    Rng rng_;
    std::vector<std::uint32_t> pool_;
    std::vector<std::size_t> rows_;
    std::vector<TreeNode> nodes_;
    std::vector<std::pair<double, std::uint8_t>> values_;

    // Candidate features are drawn without replacement until mtry features
    // with more than one distinct value have been scored (or none are left).
    Split best_split(std::size_t begin, std::size_t end, const std::uint32_t (&counts)[2]) {
        Split best;
        std::size_t scored = 0;
        for (std::size_t t = 0; t < n_features_ && scored < mtry_; ++t) {
            const auto j = t + static_cast<std::size_t>(rng_.below(n_features_ - t));
            std::swap(pool_[t], pool_[j]);
            if (scan_feature(pool_[t], begin, end, counts, best)) ++scored;
        }
        return best;
    }

    // Returns false when the feature is constant over the node.
    bool scan_feature(std::uint32_t f, std::size_t begin, std::size_t end, const std::uint32_t (&counts)[2],
                      Split& best) {
        values_.clear();
        std::uint32_t zeros[2] = {0, 0};
        for (std::size_t i = begin; i < end; ++i) {
            const std::size_t r = rows_[i];
            const double v = columns_.at(r, f);
            const auto c = static_cast<std::uint8_t>(labels_[r]);
            if (v == 0.0)
                ++zeros[c];
            else
                values_.emplace_back(v, c);
        }
        const std::size_t n_zero = zeros[0] + zeros[1];
        if (values_.empty()) return false;
        std::sort(values_.begin(), values_.end());
        if (n_zero == 0 && values_.front().first == values_.back().first) return false;

        const double total = static_cast<double>(counts[0] + counts[1]);
        const auto min_leaf = static_cast<double>(config_.min_leaf);
        double left[2] = {0.0, 0.0};
        double prev = 0.0;
        bool have_prev = false;
        bool split_seen = false;

        auto consume = [&](double value, std::uint32_t irr, std::uint32_t rel) {
            if (have_prev && value != prev) {
                split_seen = true;
                const double nl = left[0] + left[1];
                const double nr = total - nl;
                if (nl >= min_leaf && nr >= min_leaf) {
                    const double r0 = counts[0] - left[0];
                    const double r1 = counts[1] - left[1];
                    const double score = (left[0] * left[0] + left[1] * left[1]) / nl + (r0 * r0 + r1 * r1) / nr;
                    if (score > best.score) {
                        best.score = score;
                        best.feature = static_cast<std::int32_t>(f);
                        best.threshold = midpoint(prev, value);
                    }
                }
            }
            left[0] += irr;
            left[1] += rel;
            prev = value;
            have_prev = true;
        };

        const auto first_positive =
            std::upper_bound(values_.begin(), values_.end(), std::pair<double, std::uint8_t>{0.0, 255});
        for (auto it = values_.begin(); it != first_positive; ++it)
            consume(it->first, it->second == 0, it->second == 1);
        if (n_zero > 0) consume(0.0, zeros[0], zeros[1]);
        for (auto it = first_positive; it != values_.end(); ++it)
            consume(it->first, it->second == 0, it->second == 1);
        return split_seen;
    }
};

DecisionTree train_on_store(const ColumnStore& store, std::size_t n_features, std::span<const Label> labels,
                            std::span<const std::size_t> sample, const ForestConfig& config, std::uint64_t seed) {
    bool has[2] = {false, false};
    for (auto r : sample) has[static_cast<std::size_t>(labels[r])] = true;
    if (sample.size() < 2 || !has[0] || !has[1])
        throw DataError("tree training needs at least two rows covering both classes");
    TreeBuilder builder(store, n_features, labels, config, seed);
    return builder.build(sample);
}

void write_double(std::ostream& out, double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    out.write(buf, res.ptr - buf);
}

double read_double(const std::string& s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) throw IoError("model file: bad number '" + s + "'");
    return v;
}

template <typename T>
T read_uint(const std::string& s) {
    T v{};
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) throw IoError("model file: bad integer '" + s + "'");
    return v;
}

// Reads "key value" and checks the key.
std::string expect_field(std::istream& in, std::string_view key) {
    std::string k, v;
    if (!(in >> k >> v) || k != key) throw IoError("model file: expected '" + std::string(key) + "'");
    return v;
}

}  // namespace

DecisionTree train_tree(const Matrix& features, std::span<const Label> labels, std::span<const std::size_t> sample,
                        const ForestConfig& config, std::uint64_t seed) {
    if (labels.size() != features.rows()) throw DataError("label count does not match feature rows");
    config.validate(features.cols());
    const ColumnStore store(features);
    return train_on_store(store, features.cols(), labels, sample, config, seed);
}

ForestModel train_forest(const Matrix& features, std::span<const Label> labels, const ForestConfig& config) {
    if (labels.size() != features.rows()) throw DataError("label count does not match feature rows");
    config.validate(features.cols());

    ForestModel model;
    model.config = config;
    model.n_features = features.cols();
    for (auto l : labels) (l == Label::Relevant ? model.train_relevant : model.train_irrelevant)++;
    if (model.train_relevant == 0 || model.train_irrelevant == 0)
        throw DataError("forest training needs both classes; got " + std::to_string(model.train_relevant) +
                        " relevant and " + std::to_string(model.train_irrelevant) + " irrelevant rows");

    std::vector<std::size_t> all_rows(features.rows());
    for (std::size_t i = 0; i < all_rows.size(); ++i) all_rows[i] = i;

    const ColumnStore store(features);
    model.tree_seeds.resize(config.n_trees);
    model.trees.resize(config.n_trees);
    parallel_for(config.n_trees, config.threads, [&](std::size_t i) {
        const auto seed = tree_seed(config.seed, i);
        model.tree_seeds[i] = seed;
        std::vector<std::size_t> sample;
        if (config.balance == Balance::DownsampleMajority) {
            sample = balanced_sample(labels, all_rows, derive_seed(seed, 1));
        } else {
            Rng rng(derive_seed(seed, 1));
            sample.resize(all_rows.size());
            for (auto& s : sample) s = rng.below(all_rows.size());
        }
        model.trees[i] = train_on_store(store, features.cols(), labels, sample, config, seed);
    });
    return model;
}

double ForestModel::predict_proba(std::span<const double> row) const {
    if (row.size() != n_features)
        throw DataError("feature row has " + std::to_string(row.size()) + " columns, model expects " +
                        std::to_string(n_features));
    std::size_t votes = 0;
    for (const auto& t : trees) votes += t.votes_relevant(row) ? 1 : 0;
    return static_cast<double>(votes) / static_cast<double>(trees.size());
}

std::vector<double> ForestModel::predict_proba(const Matrix& rows) const {
    if (rows.rows() > 0 && rows.cols() != n_features)
        throw DataError("feature matrix has " + std::to_string(rows.cols()) + " columns, model expects " +
                        std::to_string(n_features));
    std::vector<double> out(rows.rows());
    constexpr std::size_t kChunk = 256;
    const std::size_t chunks = (rows.rows() + kChunk - 1) / kChunk;
    parallel_for(chunks, config.threads, [&](std::size_t c) {
        const std::size_t end = std::min(rows.rows(), (c + 1) * kChunk);
        for (std::size_t r = c * kChunk; r < end; ++r) out[r] = predict_proba(rows.row(r));
    });
    return out;
}

void ForestModel::save(std::ostream& out) const {
    out << "litscreen-forest 1\n";
    out << "n_trees " << config.n_trees << '\n';
    out << "mtry " << config.resolved_mtry(n_features) << '\n';
    out << "max_depth " << (config.max_depth ? std::to_string(*config.max_depth) : "none") << '\n';
    out << "min_leaf " << config.min_leaf << '\n';
    out << "seed " << config.seed << '\n';
    out << "balance " << (config.balance == Balance::DownsampleMajority ? "downsample" : "none") << '\n';
    out << "n_features " << n_features << '\n';
    out << "train_relevant " << train_relevant << '\n';
    out << "train_irrelevant " << train_irrelevant << '\n';
    for (std::size_t i = 0; i < trees.size(); ++i) {
        const auto nodes = trees[i].nodes();
        out << "tree " << i << ' ' << tree_seeds[i] << ' ' << nodes.size() << '\n';
        for (const auto& n : nodes) {
            if (n.is_leaf()) {
                out << "L " << n.n_irrelevant << ' ' << n.n_relevant << '\n';
            } else {
                out << "S " << n.feature << ' ';
                write_double(out, n.threshold);
                out << ' ' << n.left << ' ' << n.right << ' ' << n.n_irrelevant << ' ' << n.n_relevant << '\n';
            }
        }
    }
    out << "end-forest\n";
}

ForestModel ForestModel::load(std::istream& in) {
    std::string magic, version;
    if (!(in >> magic >> version) || magic != "litscreen-forest") throw IoError("not a litscreen forest model");
    if (version != "1") throw IoError("unsupported forest model version " + version);
    ForestModel m;
    m.config.n_trees = read_uint<std::size_t>(expect_field(in, "n_trees"));
    m.config.mtry = read_uint<std::size_t>(expect_field(in, "mtry"));
    const auto depth = expect_field(in, "max_depth");
    if (depth != "none") m.config.max_depth = read_uint<std::size_t>(depth);
    m.config.min_leaf = read_uint<std::size_t>(expect_field(in, "min_leaf"));
    m.config.seed = read_uint<std::uint64_t>(expect_field(in, "seed"));
    const auto balance = expect_field(in, "balance");
    if (balance == "downsample")
        m.config.balance = Balance::DownsampleMajority;
    else if (balance == "none")
        m.config.balance = Balance::None;
    else
        throw IoError("model file: unknown balance '" + balance + "'");
    m.n_features = read_uint<std::size_t>(expect_field(in, "n_features"));
    m.train_relevant = read_uint<std::size_t>(expect_field(in, "train_relevant"));
    m.train_irrelevant = read_uint<std::size_t>(expect_field(in, "train_irrelevant"));

    for (std::size_t t = 0; t < m.config.n_trees; ++t) {
        std::string tag, idx, seed, count;
        if (!(in >> tag >> idx >> seed >> count) || tag != "tree" || read_uint<std::size_t>(idx) != t)
            throw IoError("model file: expected tree " + std::to_string(t));
        m.tree_seeds.push_back(read_uint<std::uint64_t>(seed));
        const auto n_nodes = read_uint<std::size_t>(count);
        std::vector<TreeNode> nodes(n_nodes);
        for (auto& n : nodes) {
            std::string kind;
            in >> kind;
            std::string a, b, c, d, e, f;
            if (kind == "L") {
                if (!(in >> a >> b)) throw IoError("model file: truncated leaf");
                n.n_irrelevant = read_uint<std::uint32_t>(a);
                n.n_relevant = read_uint<std::uint32_t>(b);
            } else if (kind == "S") {
                if (!(in >> a >> b >> c >> d >> e >> f)) throw IoError("model file: truncated split");
                n.feature = static_cast<std::int32_t>(read_uint<std::uint32_t>(a));
                n.threshold = read_double(b);
                n.left = read_uint<std::uint32_t>(c);
                n.right = read_uint<std::uint32_t>(d);
                n.n_irrelevant = read_uint<std::uint32_t>(e);
                n.n_relevant = read_uint<std::uint32_t>(f);
                if (n.left >= n_nodes || n.right >= n_nodes || static_cast<std::size_t>(n.feature) >= m.n_features)
                    throw IoError("model file: split node out of range");
            } else {
                throw IoError("model file: unknown node kind '" + kind + "'");
            }
        }
        m.trees.emplace_back(std::move(nodes));
    }
    std::string end;
    if (!(in >> end) || end != "end-forest") throw IoError("model file: missing end-forest marker");
    return m;
}

std::string ForestModel::serialize() const {
    std::ostringstream os;
    save(os);
    return os.str();
}

bool ForestModel::operator==(const ForestModel& o) const {
    return config.n_trees == o.config.n_trees && config.resolved_mtry(n_features) == o.config.resolved_mtry(o.n_features) &&
           config.max_depth == o.config.max_depth && config.min_leaf == o.config.min_leaf &&
           config.seed == o.config.seed && config.balance == o.config.balance && n_features == o.n_features &&
           train_relevant == o.train_relevant && train_irrelevant == o.train_irrelevant &&
           tree_seeds == o.tree_seeds && trees == o.trees;
}

Label classify(const ForestModel& model, std::span<const double> row, double cutoff) {
    if (!(cutoff >= 0.0 && cutoff <= 1.0)) throw ConfigError("cutoff must lie in [0, 1]");
    return model.predict_proba(row) >= cutoff ? Label::Relevant : Label::Irrelevant;
}

}  // namespace litscreen::forest

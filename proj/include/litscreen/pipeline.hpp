#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "litscreen/boolquery.hpp"
#include "litscreen/corpus.hpp"
#include "litscreen/forest.hpp"
#include "litscreen/matrix.hpp"
#include "litscreen/select.hpp"
#include "litscreen/textprep.hpp"
#include "litscreen/vectorize.hpp"

namespace litscreen::pipeline {

/// Which of the three screening models to run.
struct Recipe {
    enum class Kind {
        Boolean,       // model1: keyword query
        Clusters,      // model2: forest on the 15 cluster features
        ClustersTopN,  // model3: forest on clusters + top-N t-ranked tokens
    };
    Kind kind = Kind::Clusters;
    std::size_t n_top = 0;

    static Recipe model1() { return {Kind::Boolean, 0}; }
    static Recipe model2() { return {Kind::Clusters, 0}; }
    static Recipe model3(std::size_t n) { return {Kind::ClustersTopN, n}; }

    /// "model1", "model2", "model3:250" (also "model3_250").
    static Recipe parse(std::string_view text);
    /// Canonical spelling accepted by parse, e.g. "model3:250".
    std::string name() const;
    /// File-name-safe id, e.g. "model3_n250".
    std::string id() const;
    bool uses_forest() const noexcept { return kind != Kind::Boolean; }

    bool operator==(const Recipe&) const = default;
};

enum class SelectionScope {
    /// Vocabulary, idf and token ranking refit on each training fold.
    Nested,
    /// Features fitted once on the whole labeled corpus; only the forest is refit per fold.
    Pooled,
};

struct PipelineOptions {
    forest::ForestConfig forest;
    std::size_t min_df = 1;
    select::TScore tscore = select::TScore::Welch;
    select::SelectionOptions selection;
    SelectionScope scope = SelectionScope::Nested;
};

/// Preprocessing inputs shared by every model.
struct Resources {
    textprep::LemmaTable lemmas = textprep::LemmaTable::builtin();
    vectorize::ClusterSet clusters = vectorize::ClusterSet::builtin();
    boolquery::BooleanQuery query = boolquery::BooleanQuery::builtin();
};

/// SHA-256 over the query's terms.
std::string query_hash(const boolquery::BooleanQuery& query);

/// Fitted vocabulary, idf weights, cluster weights and selected feature
/// columns. Maps token sequences to the model's feature matrix.
class FeaturePipeline {
public:
    /// Fits on training documents. `provenance` identifies the training rows
    /// (see select::rows_digest).
    static FeaturePipeline fit(std::span<const textprep::TokenSequence> train, std::span<const corpus::Label> labels,
                               const vectorize::ClusterSet& clusters, const Recipe& recipe,
                               const PipelineOptions& options, const std::string& provenance);

    Matrix transform(std::span<const textprep::TokenSequence> docs) const;

    const vectorize::Vocabulary& vocabulary() const noexcept { return vocab_; }
    std::span<const double> idf() const noexcept { return idf_; }
    std::span<const double> cluster_idf() const noexcept { return cluster_idf_; }
    const select::FeatureSet& features() const noexcept { return features_; }
    const std::optional<select::TokenRanking>& ranking() const noexcept { return ranking_; }
    std::span<const std::string> warnings() const noexcept { return warnings_; }

    void save(std::ostream& out) const;
    /// Rebuilds cluster membership against `clusters`.
    static FeaturePipeline load(std::istream& in, const vectorize::ClusterSet& clusters);

private:
    vectorize::Vocabulary vocab_;
    std::vector<double> idf_;
    std::vector<std::optional<std::size_t>> membership_;
    std::size_t n_clusters_ = 0;
    std::vector<double> cluster_idf_;
    select::FeatureSet features_;
    std::optional<select::TokenRanking> ranking_;
    std::vector<std::string> warnings_;
};

/// A model trained on a whole labeled corpus, with the hashes of the
/// preprocessing inputs it was built from.
struct TrainedModel {
    Recipe recipe;
    std::string lemma_hash;
    std::string cluster_hash;
    std::string keyword_hash;
    std::optional<FeaturePipeline> features;
    std::optional<forest::ForestModel> forest;

    /// p_hat per document. Throws ProvenanceError when `resources` differ from
    /// those used in training.
    std::vector<double> score(const corpus::Corpus& corpus, const Resources& resources) const;
    void check_provenance(const Resources& resources) const;

    void save(std::ostream& out) const;
    static TrainedModel load(std::istream& in, const vectorize::ClusterSet& clusters);
    std::string serialize() const;
};

TrainedModel train_model(const corpus::Corpus& corpus, const Recipe& recipe, const Resources& resources,
                         const PipelineOptions& options);

/// Document ids in the given rows.
std::vector<std::string> ids_of(const corpus::Corpus& corpus, std::span<const std::size_t> rows);

}  // namespace litscreen::pipeline

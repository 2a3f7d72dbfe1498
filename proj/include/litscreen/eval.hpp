#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "litscreen/boolquery.hpp"
#include "litscreen/corpus.hpp"
#include "litscreen/pipeline.hpp"

namespace litscreen::eval {

struct ScoredDoc {
    std::string doc_id;
    corpus::Label label = corpus::Label::Irrelevant;
    double p_hat = 0.0;
};

enum class CurveKind { Roc, Pr };

struct CurvePoint {
    double cutoff = 0.0;  // +inf for the sentinel above every score
    double x = 0.0;       // FPR (roc) or recall (pr)
    double y = 0.0;       // TPR (roc) or precision (pr)
};

struct Curve {
    CurveKind kind = CurveKind::Roc;
    std::vector<CurvePoint> points;
    double auc = 0.0;
};

enum class PrIntegrator {
    Trapezoid,          // trapezoid rule over recall
    AveragePrecision,   // sum of (recall step) * precision
};

/// Sweeps every distinct score from high to low, starting at the (0, 0)
/// sentinel. AUC by the trapezoid rule. Throws DataError unless both classes
/// are present.
Curve roc_curve(std::span<const ScoredDoc> scored);

/// (recall, precision) at every distinct cutoff, high to low, anchored at
/// recall 0 with the precision of the top-scored block. Throws DataError when
/// no document is relevant.
Curve pr_curve(std::span<const ScoredDoc> scored, PrIntegrator integrator = PrIntegrator::Trapezoid);

struct OperatingPoint {
    double cutoff = 0.0;
    std::size_t flagged = 0;
    double precision = 0.0;  // NaN when nothing is flagged
    double recall = 0.0;
    double fpr = 0.0;
};

/// Documents with p_hat >= cutoff count as flagged relevant.
OperatingPoint operating_point(std::span<const ScoredDoc> scored, double cutoff);

struct Workload {
    double target_recall = 0.0;
    double cutoff = 0.0;
    std::size_t flagged = 0;
    std::size_t total = 0;
    double precision_at = 0.0;
    double recall_at = 0.0;
    double reading_reduction = 0.0;  // 1 - flagged / total
    std::vector<std::string> warnings;
};

/// Picks the largest cutoff whose recall reaches the target. Targets above 1
/// are clamped with a warning.
Workload workload(std::span<const ScoredDoc> scored, double target_recall);

enum class Direction { LabeledIrrelevantPredictedRelevant, LabeledRelevantPredictedIrrelevant };
std::string_view direction_name(Direction d) noexcept;

struct AuditEntry {
    std::string doc_id;
    corpus::Label label = corpus::Label::Irrelevant;
    double p_hat = 0.0;
    Direction direction = Direction::LabeledIrrelevantPredictedRelevant;
};

/// Irrelevant-labeled docs with p_hat >= high and relevant-labeled docs with
/// p_hat <= low, most confident first (|p_hat - 0.5| descending, then id).
std::vector<AuditEntry> audit_disagreements(std::span<const ScoredDoc> scored, double high, double low);

struct FoldResult {
    std::size_t fold = 0;
    std::size_t n_train = 0;
    std::size_t n_validation = 0;
    double auc_roc = 0.0;
    double auc_pr = 0.0;
};

struct EvalOptions {
    pipeline::PipelineOptions pipeline;
    PrIntegrator pr_integrator = PrIntegrator::Trapezoid;
    double target_recall = 0.8;
    std::vector<double> cutoffs{0.5};
};

struct EvalReport {
    std::string model_id;
    std::string recipe;
    std::uint64_t seed = 0;
    std::size_t k = 0;
    std::size_t n_documents = 0;
    std::size_t n_relevant = 0;
    std::optional<Curve> roc;
    std::optional<Curve> pr;
    std::optional<boolquery::BooleanPoint> boolean;
    std::vector<OperatingPoint> operating_points;
    std::optional<Workload> workload;
    std::vector<FoldResult> folds;
    /// Pooled out-of-fold scores in corpus order.
    std::vector<ScoredDoc> scored;
    std::vector<std::string> notes;

    /// AUCs, or NaN for the Boolean model.
    double auc_roc() const;
    double auc_pr() const;
};

/// k-fold cross-validation of one recipe. Features (and the model3 token
/// ranking) are fitted on training folds only unless the pipeline scope is
/// Pooled. The forest of fold f uses seed derive_seed(seed, 1000 + f).
/// The Boolean model needs no training and is scored on the whole corpus.
EvalReport cross_validate(const corpus::Corpus& corpus, const pipeline::Recipe& recipe, std::size_t k,
                          std::uint64_t seed, const pipeline::Resources& resources, const EvalOptions& options);

struct SensitivityRow {
    double fraction = 0.0;
    std::size_t train_size = 0;
    std::size_t replicates_ok = 0;
    std::size_t replicates_failed = 0;
    double mean_auc_roc = 0.0;  // NaN when every replicate failed
    double mean_auc_pr = 0.0;
    std::vector<double> auc_roc;
    std::vector<double> auc_pr;
    std::vector<std::string> failures;
};

/// Trains on a stratified subsample of each fraction and evaluates on the
/// remainder, averaging over replicates.
std::vector<SensitivityRow> sensitivity_sweep(const corpus::Corpus& corpus, const pipeline::Recipe& recipe,
                                              std::span<const double> fractions, std::uint64_t seed,
                                              std::size_t replicates, const pipeline::Resources& resources,
                                              const EvalOptions& options);

// --- report writers ---

nlohmann::ordered_json to_json(const EvalReport& report);
nlohmann::ordered_json to_json(std::span<const SensitivityRow> rows, const pipeline::Recipe& recipe,
                               std::uint64_t seed);
void write_curve_csv(std::ostream& out, const Curve& curve);
void write_scores_csv(std::ostream& out, std::span<const ScoredDoc> scored);
void write_audit_csv(std::ostream& out, std::span<const AuditEntry> entries);
void write_sensitivity_csv(std::ostream& out, std::span<const SensitivityRow> rows);

/// Shortest round-trip text for a double; "inf", "-inf", "nan" for specials.
std::string format_double(double v);

}  // namespace litscreen::eval

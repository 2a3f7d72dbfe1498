#include "litscreen/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>

#include "litscreen/errors.hpp"
#include "litscreen/rng.hpp"
#include "litscreen/select.hpp"

namespace litscreen::eval {

using corpus::Label;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// A block of documents sharing one score, in descending score order.
struct Block {
    double score;
    std::size_t relevant;
    std::size_t irrelevant;
};

std::vector<Block> score_blocks(std::span<const ScoredDoc> scored) {
    std::vector<std::pair<double, Label>> v;
    v.reserve(scored.size());
    for (const auto& s : scored) v.emplace_back(s.p_hat, s.label);
    std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    std::vector<Block> blocks;
    for (const auto& [score, label] : v) {
        if (blocks.empty() || blocks.back().score != score) blocks.push_back({score, 0, 0});
        (label == Label::Relevant ? blocks.back().relevant : blocks.back().irrelevant)++;
    }
    return blocks;
}

struct Totals {
    std::size_t relevant = 0;
    std::size_t irrelevant = 0;
};

Totals totals(std::span<const ScoredDoc> scored) {
    Totals t;
    for (const auto& s : scored) (s.label == Label::Relevant ? t.relevant : t.irrelevant)++;
    return t;
}

double ratio(std::size_t a, std::size_t b) {
    return b == 0 ? kNaN : static_cast<double>(a) / static_cast<double>(b);
}

nlohmann::ordered_json number(double v) {
    if (std::isnan(v)) return nullptr;
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

std::vector<ScoredDoc> subset_scores(std::span<const ScoredDoc> all, std::span<const std::size_t> rows) {
    std::vector<ScoredDoc> out;
    out.reserve(rows.size());
    for (auto r : rows) out.push_back(all[r]);
    return out;
}

std::vector<textprep::TokenSequence> pick(std::span<const textprep::TokenSequence> seqs,
                                          std::span<const std::size_t> rows) {
    std::vector<textprep::TokenSequence> out;
    out.reserve(rows.size());
    for (auto r : rows) out.push_back(seqs[r]);
    return out;
}

std::vector<Label> pick(std::span<const Label> labels, std::span<const std::size_t> rows) {
    std::vector<Label> out;
    out.reserve(rows.size());
    for (auto r : rows) out.push_back(labels[r]);
    return out;
}

Matrix pick(const Matrix& m, std::span<const std::size_t> rows) {
    Matrix out(rows.size(), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) std::copy_n(m.row(rows[i]).begin(), m.cols(), out.row(i).begin());
    return out;
}

}  // namespace

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

Curve roc_curve(std::span<const ScoredDoc> scored) {
    const auto t = totals(scored);
    if (t.relevant == 0 || t.irrelevant == 0) throw DataError("ROC curve needs both classes");
    Curve c;
    c.kind = CurveKind::Roc;
    c.points.push_back({kInf, 0.0, 0.0});
    std::size_t tp = 0, fp = 0;
    double auc = 0.0;
    for (const auto& b : score_blocks(scored)) {
        const auto& prev = c.points.back();
        tp += b.relevant;
        fp += b.irrelevant;
        const double x = static_cast<double>(fp) / static_cast<double>(t.irrelevant);
        const double y = static_cast<double>(tp) / static_cast<double>(t.relevant);
        auc += (x - prev.x) * (y + prev.y) / 2.0;
        c.points.push_back({b.score, x, y});
    }
    c.auc = auc;
    return c;
}

Curve pr_curve(std::span<const ScoredDoc> scored, PrIntegrator integrator) {
    const auto t = totals(scored);
    if (t.relevant == 0) throw DataError("precision-recall curve needs at least one relevant document");
    const auto blocks = score_blocks(scored);
    Curve c;
    c.kind = CurveKind::Pr;
    const auto& top = blocks.front();
    c.points.push_back({kInf, 0.0, static_cast<double>(top.relevant) / static_cast<double>(top.relevant + top.irrelevant)});
    std::size_t tp = 0, flagged = 0;
    double auc = 0.0;
    for (const auto& b : blocks) {
        const auto& prev = c.points.back();
        tp += b.relevant;
        flagged += b.relevant + b.irrelevant;
        const double recall = static_cast<double>(tp) / static_cast<double>(t.relevant);
        const double precision = static_cast<double>(tp) / static_cast<double>(flagged);
        if (integrator == PrIntegrator::Trapezoid)
            auc += (recall - prev.x) * (precision + prev.y) / 2.0;
        else
            auc += (recall - prev.x) * precision;
        c.points.push_back({b.score, recall, precision});
    }
    c.auc = auc;
    return c;
}

OperatingPoint operating_point(std::span<const ScoredDoc> scored, double cutoff) {
    const auto t = totals(scored);
    std::size_t tp = 0, fp = 0;
    for (const auto& s : scored) {
        if (s.p_hat < cutoff) continue;
        (s.label == Label::Relevant ? tp : fp)++;
    }
    return {cutoff, tp + fp, ratio(tp, tp + fp), ratio(tp, t.relevant), ratio(fp, t.irrelevant)};
}

Workload workload(std::span<const ScoredDoc> scored, double target_recall) {
    const auto t = totals(scored);
    if (t.relevant == 0) throw DataError("workload needs at least one relevant document");
    if (!(target_recall >= 0.0)) throw ConfigError("target recall must be >= 0");
    Workload w;
    w.total = scored.size();
    if (target_recall > 1.0) {
        w.warnings.push_back("target recall " + format_double(target_recall) + " clamped to 1");
        target_recall = 1.0;
    }
    w.target_recall = target_recall;

    auto settle = [&](double cutoff, std::size_t tp, std::size_t flagged) {
        w.cutoff = cutoff;
        w.flagged = flagged;
        w.precision_at = ratio(tp, flagged);
        w.recall_at = static_cast<double>(tp) / static_cast<double>(t.relevant);
        w.reading_reduction = 1.0 - static_cast<double>(flagged) / static_cast<double>(w.total);
    };
    // Exact comparison tp >= target * R avoids recall rounding at the boundary.
    const double needed = target_recall * static_cast<double>(t.relevant);
    if (needed <= 0.0) {
        settle(kInf, 0, 0);
        return w;
    }
    std::size_t tp = 0, flagged = 0;
    for (const auto& b : score_blocks(scored)) {
        tp += b.relevant;
        flagged += b.relevant + b.irrelevant;
        if (static_cast<double>(tp) >= needed) {
            settle(b.score, tp, flagged);
            return w;
        }
    }
    settle(-kInf, tp, flagged);
    return w;
}

std::string_view direction_name(Direction d) noexcept {
    return d == Direction::LabeledIrrelevantPredictedRelevant ? "labeled-irrelevant, predicted-relevant"
                                                              : "labeled-relevant, predicted-irrelevant";
}

std::vector<AuditEntry> audit_disagreements(std::span<const ScoredDoc> scored, double high, double low) {
    if (!(high > low)) throw ConfigError("audit thresholds need high > low");
    std::vector<AuditEntry> out;
    for (const auto& s : scored) {
        if (s.label == Label::Irrelevant && s.p_hat >= high)
            out.push_back({s.doc_id, s.label, s.p_hat, Direction::LabeledIrrelevantPredictedRelevant});
        else if (s.label == Label::Relevant && s.p_hat <= low)
            out.push_back({s.doc_id, s.label, s.p_hat, Direction::LabeledRelevantPredictedIrrelevant});
    }
    std::sort(out.begin(), out.end(), [](const AuditEntry& a, const AuditEntry& b) {
        const double da = std::fabs(a.p_hat - 0.5);
        const double db = std::fabs(b.p_hat - 0.5);
        if (da != db) return da > db;
        return a.doc_id < b.doc_id;
    });
    return out;
}

double EvalReport::auc_roc() const { return roc ? roc->auc : kNaN; }
double EvalReport::auc_pr() const { return pr ? pr->auc : kNaN; }

EvalReport cross_validate(const corpus::Corpus& corpus, const pipeline::Recipe& recipe, std::size_t k,
                          std::uint64_t seed, const pipeline::Resources& resources, const EvalOptions& options) {
    EvalReport report;
    report.model_id = recipe.id();
    report.recipe = recipe.name();
    report.seed = seed;
    report.k = k;
    const auto labels = corpus.labels("cross-validation");
    report.n_documents = corpus.size();
    report.n_relevant = corpus.counts().relevant;

    if (!recipe.uses_forest()) {
        report.k = 0;
        report.boolean = boolquery::boolean_point(corpus, resources.query);
        report.notes.push_back("Boolean query needs no training; evaluated on the full labeled corpus");
        report.notes.push_back("deterministic classifier: single operating point, no curve and no AUC");
        for (const auto& n : report.boolean->notes) report.notes.push_back(n);
        report.scored.reserve(corpus.size());
        for (std::size_t i = 0; i < corpus.size(); ++i) {
            const bool hit = boolquery::classify_boolean(corpus[i], resources.query) == Label::Relevant;
            report.scored.push_back({corpus[i].id, labels[i], hit ? 1.0 : 0.0});
        }
        return report;
    }

    const auto plan = corpus::stratified_kfold(corpus, k, seed);
    const auto seqs = textprep::preprocess_all(corpus, resources.lemmas);
    report.scored.resize(corpus.size());

    std::optional<Matrix> pooled_x;
    if (options.pipeline.scope == pipeline::SelectionScope::Pooled) {
        std::vector<std::string> ids;
        for (const auto& d : corpus.documents()) ids.push_back(d.id);
        const auto provenance = select::rows_digest(ids);
        const auto fp = pipeline::FeaturePipeline::fit(seqs, labels, resources.clusters, recipe, options.pipeline,
                                                       provenance);
        pooled_x = fp.transform(seqs);
        report.notes.push_back("pooled scope: features and token ranking fitted once on all labeled documents");
        for (const auto& w : fp.warnings()) report.notes.push_back(w);
    }

    for (std::size_t f = 0; f < k; ++f) {
        const auto train_rows = plan.training_rows(f);
        const auto val_rows = plan.validation_rows(f);
        const auto train_labels = pick(std::span<const Label>(labels), train_rows);

        Matrix x_train, x_val;
        if (pooled_x) {
            x_train = pick(*pooled_x, train_rows);
            x_val = pick(*pooled_x, val_rows);
        } else {
            const auto train_seqs = pick(seqs, train_rows);
            const auto provenance = select::rows_digest(pipeline::ids_of(corpus, train_rows));
            const auto fp = pipeline::FeaturePipeline::fit(train_seqs, train_labels, resources.clusters, recipe,
                                                           options.pipeline, provenance);
            for (const auto& w : fp.warnings()) report.notes.push_back("fold " + std::to_string(f) + ": " + w);
            x_train = fp.transform(train_seqs);
            x_val = fp.transform(pick(seqs, val_rows));
        }

        auto forest_config = options.pipeline.forest;
        forest_config.seed = derive_seed(seed, 1000 + f);
        const auto model = forest::train_forest(x_train, train_labels, forest_config);
        const auto p = model.predict_proba(x_val);
        for (std::size_t i = 0; i < val_rows.size(); ++i) {
            const auto r = val_rows[i];
            report.scored[r] = {corpus[r].id, labels[r], p[i]};
        }

        const auto fold_scores = subset_scores(report.scored, val_rows);
        FoldResult fr{f, train_rows.size(), val_rows.size(), kNaN, kNaN};
        const auto t = totals(fold_scores);
        if (t.relevant > 0 && t.irrelevant > 0) {
            fr.auc_roc = roc_curve(fold_scores).auc;
            fr.auc_pr = pr_curve(fold_scores, options.pr_integrator).auc;
        }
        report.folds.push_back(fr);
    }

    report.roc = roc_curve(report.scored);
    report.pr = pr_curve(report.scored, options.pr_integrator);
    for (double c : options.cutoffs) report.operating_points.push_back(operating_point(report.scored, c));
    report.workload = workload(report.scored, options.target_recall);
    return report;
}

std::vector<SensitivityRow> sensitivity_sweep(const corpus::Corpus& corpus, const pipeline::Recipe& recipe,
                                              std::span<const double> fractions, std::uint64_t seed,
                                              std::size_t replicates, const pipeline::Resources& resources,
                                              const EvalOptions& options) {
    if (replicates < 1) throw ConfigError("sensitivity sweep needs at least one replicate");
    corpus.labels("sensitivity sweep");
    std::vector<SensitivityRow> rows;
    for (std::size_t fi = 0; fi < fractions.size(); ++fi) {
        SensitivityRow row;
        row.fraction = fractions[fi];
        const auto [take_rel, take_irr] =
            corpus::stratified_take(corpus.counts().relevant, corpus.counts().irrelevant, row.fraction);
        row.train_size = take_rel + take_irr;
        for (std::size_t r = 0; r < replicates; ++r) {
            const auto rep_seed = derive_seed(derive_seed(seed, 5000 + fi), r);
            const auto sub = corpus::subsample_training(corpus, row.fraction, rep_seed);
            const auto& tc = sub.train.counts();
            const auto& rc = sub.rest.counts();
            std::string why;
            if (tc.relevant == 0 || tc.irrelevant == 0)
                why = "training subsample lacks a class";
            else if (rc.relevant == 0 || rc.irrelevant == 0)
                why = "held-out remainder lacks a class";
            if (why.empty()) {
                try {
                    auto opts = options.pipeline;
                    opts.forest.seed = derive_seed(rep_seed, 7);
                    const auto model = pipeline::train_model(sub.train, recipe, resources, opts);
                    const auto p = model.score(sub.rest, resources);
                    std::vector<ScoredDoc> scored;
                    scored.reserve(p.size());
                    for (std::size_t i = 0; i < p.size(); ++i)
                        scored.push_back({sub.rest[i].id, *sub.rest[i].label, p[i]});
                    row.auc_roc.push_back(roc_curve(scored).auc);
                    row.auc_pr.push_back(pr_curve(scored, options.pr_integrator).auc);
                    ++row.replicates_ok;
                    continue;
                } catch (const DataError& e) {
                    why = e.what();
                }
            }
            ++row.replicates_failed;
            row.failures.push_back("replicate " + std::to_string(r) + ": " + why);
        }
        auto mean = [](const std::vector<double>& v) {
            return v.empty() ? kNaN : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
        };
        row.mean_auc_roc = mean(row.auc_roc);
        row.mean_auc_pr = mean(row.auc_pr);
        rows.push_back(std::move(row));
    }
    return rows;
}

nlohmann::ordered_json to_json(const EvalReport& r) {
    nlohmann::ordered_json j;
    j["model_id"] = r.model_id;
    j["recipe"] = r.recipe;
    j["seed"] = r.seed;
    j["k"] = r.k;
    j["n_documents"] = r.n_documents;
    j["n_relevant"] = r.n_relevant;
    if (r.roc) {
        j["auc_roc"] = number(r.roc->auc);
        j["auc_pr"] = number(r.pr->auc);
    } else {
        j["auc_roc"] = "n/a";
        j["auc_pr"] = "n/a";
    }
    if (r.boolean) {
        const auto& b = *r.boolean;
        j["boolean"] = {{"tp", b.tp},
                        {"fp", b.fp},
                        {"fn", b.fn},
                        {"tn", b.tn},
                        {"precision", number(b.precision)},
                        {"recall", number(b.recall)},
                        {"fpr", number(b.fpr)},
                        {"tpr", number(b.tpr)},
                        {"f1", number(b.f1)}};
    }
    auto ops = nlohmann::ordered_json::array();
    for (const auto& o : r.operating_points)
        ops.push_back({{"cutoff", number(o.cutoff)},
                       {"flagged", o.flagged},
                       {"precision", number(o.precision)},
                       {"recall", number(o.recall)},
                       {"fpr", number(o.fpr)}});
    j["operating_points"] = ops;
    if (r.workload) {
        const auto& w = *r.workload;
        j["workload"] = {{"target_recall", number(w.target_recall)},
                         {"cutoff", number(w.cutoff)},
                         {"flagged", w.flagged},
                         {"total", w.total},
                         {"precision_at", number(w.precision_at)},
                         {"recall_at", number(w.recall_at)},
                         {"reading_reduction", number(w.reading_reduction)},
                         {"warnings", w.warnings}};
    }
    auto folds = nlohmann::ordered_json::array();
    for (const auto& f : r.folds)
        folds.push_back({{"fold", f.fold},
                         {"n_train", f.n_train},
                         {"n_validation", f.n_validation},
                         {"auc_roc", number(f.auc_roc)},
                         {"auc_pr", number(f.auc_pr)}});
    j["folds"] = folds;
    j["notes"] = r.notes;
    return j;
}

nlohmann::ordered_json to_json(std::span<const SensitivityRow> rows, const pipeline::Recipe& recipe,
                               std::uint64_t seed) {
    nlohmann::ordered_json j;
    j["model_id"] = recipe.id();
    j["recipe"] = recipe.name();
    j["seed"] = seed;
    auto arr = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
        nlohmann::ordered_json e;
        e["fraction"] = r.fraction;
        e["train_size"] = r.train_size;
        e["replicates_ok"] = r.replicates_ok;
        e["replicates_failed"] = r.replicates_failed;
        e["mean_auc_roc"] = number(r.mean_auc_roc);
        e["mean_auc_pr"] = number(r.mean_auc_pr);
        e["auc_roc"] = r.auc_roc;
        e["auc_pr"] = r.auc_pr;
        e["failures"] = r.failures;
        arr.push_back(std::move(e));
    }
    j["rows"] = arr;
    return j;
}

void write_curve_csv(std::ostream& out, const Curve& curve) {
    out << (curve.kind == CurveKind::Roc ? "cutoff,fpr,tpr\n" : "cutoff,recall,precision\n");
    for (const auto& p : curve.points)
        out << format_double(p.cutoff) << ',' << format_double(p.x) << ',' << format_double(p.y) << '\n';
}

void write_scores_csv(std::ostream& out, std::span<const ScoredDoc> scored) {
    out << "doc_id,label,p_hat\n";
    for (const auto& s : scored)
        out << s.doc_id << ',' << corpus::label_name(s.label) << ',' << format_double(s.p_hat) << '\n';
}

void write_audit_csv(std::ostream& out, std::span<const AuditEntry> entries) {
    out << "doc_id,label,p_hat,direction\n";
    for (const auto& e : entries)
        out << e.doc_id << ',' << corpus::label_name(e.label) << ',' << format_double(e.p_hat) << ",\""
            << direction_name(e.direction) << "\"\n";
}

void write_sensitivity_csv(std::ostream& out, std::span<const SensitivityRow> rows) {
    out << "fraction,train_size,replicates_ok,replicates_failed,mean_auc_roc,mean_auc_pr\n";
    for (const auto& r : rows)
        out << format_double(r.fraction) << ',' << r.train_size << ',' << r.replicates_ok << ','
            << r.replicates_failed << ',' << format_double(r.mean_auc_roc) << ',' << format_double(r.mean_auc_pr)
            << '\n';
}

}  // namespace litscreen::eval

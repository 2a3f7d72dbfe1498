// litscreen: batch front end for training, evaluating and applying the
// screening models.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "litscreen/errors.hpp"
#include "litscreen/eval.hpp"
#include "litscreen/pipeline.hpp"
#include "litscreen/svg.hpp"
#include "litscreen/synthetic.hpp"
#include "run_config.hpp"

namespace fs = std::filesystem;
using namespace litscreen;
using cli::RunConfig;

namespace {

class Log {
public:
    explicit Log(const fs::path& file) : file_(file, std::ios::binary) {}
    void operator()(const std::string& line) {
        std::cerr << line << '\n';
        if (file_) file_ << line << '\n';
    }

private:
    std::ofstream file_;
};

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    body(out);
    out.flush();
    if (!out) throw IoError("error writing " + path.string());
}

void write_json(const fs::path& path, const nlohmann::ordered_json& j) {
    write_file(path, [&](std::ostream& out) { out << j.dump(2) << '\n'; });
}

fs::path existing(const RunConfig& cfg, std::string_view key, std::string_view what) {
    const fs::path p = cfg.text(key);
    if (!fs::is_regular_file(p)) throw ConfigError(std::string(what) + " not found: " + p.string());
    return p;
}

pipeline::Resources resources(const RunConfig& cfg) {
    pipeline::Resources r;
    if (!cfg.empty("lemmas")) r.lemmas = textprep::LemmaTable::load(existing(cfg, "lemmas", "lemma table"));
    if (!cfg.empty("clusters")) r.clusters = vectorize::ClusterSet::load(existing(cfg, "clusters", "cluster config"));
    if (!cfg.empty("keywords")) r.query = boolquery::BooleanQuery::load(existing(cfg, "keywords", "keyword config"));
    return r;
}

corpus::Corpus input_corpus(const RunConfig& cfg, Log& log) {
    if (cfg.empty("corpus")) throw ConfigError("no corpus given (--corpus)");
    const fs::path path = cfg.text("corpus");
    const auto& f = cfg.text("format");
    corpus::LoadResult loaded;
    if (f == "auto")
        loaded = corpus::load_corpus(path);
    else if (f == "jsonl")
        loaded = corpus::load_corpus(path, corpus::Format::Jsonl);
    else if (f == "csv")
        loaded = corpus::load_corpus(path, corpus::Format::Csv);
    else
        throw ConfigError("format must be auto, jsonl or csv");
    log(path.filename().string() + ": " + loaded.report.summary());
    return std::move(loaded.corpus);
}

std::uint64_t required_seed(const RunConfig& cfg, std::string_view command) {
    if (cfg.empty("seed")) throw ConfigError(std::string(command) + " requires --seed");
    return cfg.u64("seed");
}

std::vector<pipeline::Recipe> recipes(const RunConfig& cfg) {
    std::vector<pipeline::Recipe> out;
    for (const auto& w : cfg.words("recipes")) {
        if (w == "model3") {
            for (const auto& n : cfg.words("n_top")) out.push_back(pipeline::Recipe::parse("model3:" + n));
        } else {
            out.push_back(pipeline::Recipe::parse(w));
        }
    }
    if (out.empty()) throw ConfigError("no recipes given");
    return out;
}

eval::EvalOptions eval_options(const RunConfig& cfg) {
    eval::EvalOptions o;
    auto& f = o.pipeline.forest;
    f.n_trees = cfg.size("n_trees");
    f.mtry = cfg.size("mtry");
    f.max_depth = cfg.optional_size("max_depth");
    f.min_leaf = cfg.size("min_leaf");
    f.threads = cfg.size("threads");
    const auto& balance = cfg.text("balance");
    if (balance == "downsample")
        f.balance = forest::Balance::DownsampleMajority;
    else if (balance == "none")
        f.balance = forest::Balance::None;
    else
        throw ConfigError("balance must be downsample or none");
    if (!cfg.empty("seed")) f.seed = cfg.u64("seed");

    o.pipeline.min_df = cfg.size("min_df");
    const auto& t = cfg.text("tscore");
    if (t == "welch")
        o.pipeline.tscore = select::TScore::Welch;
    else if (t == "raw")
        o.pipeline.tscore = select::TScore::RawVariance;
    else
        throw ConfigError("tscore must be welch or raw");
    const auto& scope = cfg.text("scope");
    if (scope == "nested")
        o.pipeline.scope = pipeline::SelectionScope::Nested;
    else if (scope == "pooled")
        o.pipeline.scope = pipeline::SelectionScope::Pooled;
    else
        throw ConfigError("scope must be nested or pooled");
    o.pipeline.selection.include_cluster_tokens = cfg.flag("include_cluster_tokens");

    const auto& integ = cfg.text("pr_integrator");
    if (integ == "trapezoid")
        o.pr_integrator = eval::PrIntegrator::Trapezoid;
    else if (integ == "ap")
        o.pr_integrator = eval::PrIntegrator::AveragePrecision;
    else
        throw ConfigError("pr_integrator must be trapezoid or ap");
    o.target_recall = cfg.real("target_recall");
    o.cutoffs = cfg.reals("cutoffs");
    return o;
}

fs::path output_dir(const RunConfig& cfg) {
    const fs::path dir = cfg.text("out");
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    return dir;
}

void echo_config(const RunConfig& cfg, const fs::path& dir, std::string_view command) {
    write_file(dir / ("config_" + std::string(command) + ".cfg"), [&](std::ostream& out) {
        out << "# resolved configuration of `litscreen " << command << "`\n";
        cfg.write(out);
    });
}

std::string tag(const std::string& id, std::uint64_t seed) { return id + "_seed" + std::to_string(seed); }

std::vector<eval::ScoredDoc> scored_docs(const corpus::Corpus& c, std::span<const double> p) {
    std::vector<eval::ScoredDoc> out;
    out.reserve(c.size());
    for (std::size_t i = 0; i < c.size(); ++i)
        out.push_back({c[i].id, c[i].label.value_or(corpus::Label::Irrelevant), p[i]});
    return out;
}

// --- subcommands ---

int cmd_evaluate(const RunConfig& cfg) {
    const auto seed = required_seed(cfg, "evaluate");
    const auto dir = output_dir(cfg);
    Log log(dir / "evaluate.log");
    echo_config(cfg, dir, "evaluate");
    const auto res = resources(cfg);
    const auto corpus = input_corpus(cfg, log);
    const auto opts = eval_options(cfg);
    const auto k = cfg.size("k");

    std::vector<svg::Series> roc_series, pr_series;
    auto summary = nlohmann::ordered_json::array();
    for (const auto& recipe : recipes(cfg)) {
        log("evaluating " + recipe.name() + " (" + std::to_string(k) + "-fold, seed " + std::to_string(seed) + ")");
        const auto report = eval::cross_validate(corpus, recipe, k, seed, res, opts);
        const auto t = tag(recipe.id(), seed);
        write_json(dir / ("eval_" + t + ".json"), eval::to_json(report));
        write_file(dir / ("scores_" + t + ".csv"), [&](std::ostream& o) { eval::write_scores_csv(o, report.scored); });

        nlohmann::ordered_json row;
        row["model_id"] = recipe.id();
        if (report.roc) {
            write_file(dir / ("roc_" + t + ".csv"), [&](std::ostream& o) { eval::write_curve_csv(o, *report.roc); });
            write_file(dir / ("pr_" + t + ".csv"), [&](std::ostream& o) { eval::write_curve_csv(o, *report.pr); });
            const auto audit =
                eval::audit_disagreements(report.scored, cfg.real("audit_high"), cfg.real("audit_low"));
            write_file(dir / ("audit_" + t + ".csv"), [&](std::ostream& o) { eval::write_audit_csv(o, audit); });
            roc_series.push_back(svg::curve_series(recipe.name() + " (AUC " + eval::format_double(
                                                       std::round(report.roc->auc * 1000) / 1000) + ")",
                                                   *report.roc));
            pr_series.push_back(svg::curve_series(recipe.name() + " (AUC " + eval::format_double(
                                                      std::round(report.pr->auc * 1000) / 1000) + ")",
                                                  *report.pr));
            row["auc_roc"] = report.roc->auc;
            row["auc_pr"] = report.pr->auc;
            row["reading_reduction"] = report.workload->reading_reduction;
            log("  AUC-ROC " + eval::format_double(report.roc->auc) + ", AUC-PR " +
                eval::format_double(report.pr->auc));
        } else {
            const auto& b = *report.boolean;
            roc_series.push_back({recipe.name(), {{b.fpr, b.tpr}}, true});
            pr_series.push_back({recipe.name(), {{b.recall, b.precision}}, true});
            row["precision"] = b.precision;
            row["recall"] = b.recall;
            row["f1"] = b.f1;
            row["auc"] = "n/a";
            log("  precision " + eval::format_double(b.precision) + ", recall " + eval::format_double(b.recall) +
                ", F1 " + eval::format_double(b.f1));
        }
        summary.push_back(row);
    }
    write_json(dir / ("summary_seed" + std::to_string(seed) + ".json"), summary);
    if (cfg.flag("svg")) {
        const auto s = std::to_string(seed);
        write_file(dir / ("roc_overlay_seed" + s + ".svg"),
                   [&](std::ostream& o) { svg::write_chart(o, "ROC", "false positive rate", "true positive rate", roc_series); });
        write_file(dir / ("pr_overlay_seed" + s + ".svg"),
                   [&](std::ostream& o) { svg::write_chart(o, "Precision-recall", "recall", "precision", pr_series); });
    }
    return 0;
}

int cmd_train(const RunConfig& cfg) {
    const auto seed = required_seed(cfg, "train");
    const auto dir = output_dir(cfg);
    Log log(dir / "train.log");
    echo_config(cfg, dir, "train");
    const auto res = resources(cfg);
    const auto corpus = input_corpus(cfg, log);
    const auto opts = eval_options(cfg);
    for (const auto& recipe : recipes(cfg)) {
        log("training " + recipe.name() + " on " + std::to_string(corpus.size()) + " documents");
        const auto model = pipeline::train_model(corpus, recipe, res, opts.pipeline);
        const auto t = tag(recipe.id(), seed);
        write_file(dir / ("model_" + t + ".model"), [&](std::ostream& o) { model.save(o); });

        nlohmann::ordered_json j;
        j["model_id"] = recipe.id();
        j["recipe"] = recipe.name();
        j["seed"] = seed;
        j["n_documents"] = corpus.size();
        j["n_relevant"] = corpus.counts().relevant;
        j["lemma_hash"] = model.lemma_hash;
        j["cluster_hash"] = model.cluster_hash;
        j["keyword_hash"] = model.keyword_hash;
        if (model.features) {
            j["vocabulary_size"] = model.features->vocabulary().size();
            j["features"] = model.features->features().column_names();
            j["warnings"] = model.features->warnings();
            if (model.features->ranking())
                write_file(dir / ("tokens_" + t + ".csv"),
                           [&](std::ostream& o) { select::write_ranking_csv(o, *model.features->ranking()); });
        }
        if (model.forest) {
            j["n_trees"] = model.forest->trees.size();
            j["mtry"] = model.forest->config.resolved_mtry(model.forest->n_features);
        }
        write_json(dir / ("train_" + t + ".json"), j);
    }
    return 0;
}

struct LoadedModel {
    pipeline::TrainedModel model;
    std::string stem;
};

LoadedModel load_model(const RunConfig& cfg, const pipeline::Resources& res) {
    if (cfg.empty("model")) throw ConfigError("no model file given (--model)");
    const fs::path path = cfg.text("model");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read model file " + path.string());
    auto stem = path.stem().string();
    if (stem.starts_with("model_")) stem.erase(0, 6);
    return {pipeline::TrainedModel::load(in, res.clusters), stem};
}

int cmd_rank(const RunConfig& cfg) {
    const auto dir = output_dir(cfg);
    Log log(dir / "rank.log");
    echo_config(cfg, dir, "rank");
    const auto res = resources(cfg);
    const auto [model, stem] = load_model(cfg, res);
    const auto corpus = input_corpus(cfg, log);
    const auto p = model.score(corpus, res);
    std::vector<std::size_t> order(corpus.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (p[a] != p[b]) return p[a] > p[b];
        return corpus[a].id < corpus[b].id;
    });
    write_file(dir / ("ranked_" + stem + ".csv"), [&](std::ostream& o) {
        o << "doc_id,p_hat\n";
        for (auto i : order) o << corpus[i].id << ',' << eval::format_double(p[i]) << '\n';
    });
    log("ranked " + std::to_string(corpus.size()) + " documents");
    return 0;
}

int cmd_audit(const RunConfig& cfg) {
    const auto dir = output_dir(cfg);
    Log log(dir / "audit.log");
    echo_config(cfg, dir, "audit");
    const auto res = resources(cfg);
    const auto [model, stem] = load_model(cfg, res);
    const auto corpus = input_corpus(cfg, log);
    corpus.labels("audit (it requires labels)");
    const auto p = model.score(corpus, res);
    const auto entries = eval::audit_disagreements(scored_docs(corpus, p), cfg.real("audit_high"), cfg.real("audit_low"));
    write_file(dir / ("audit_" + stem + ".csv"), [&](std::ostream& o) { eval::write_audit_csv(o, entries); });
    log(std::to_string(entries.size()) + " disagreements");
    return 0;
}

int cmd_sensitivity(const RunConfig& cfg) {
    const auto seed = required_seed(cfg, "sensitivity");
    const auto dir = output_dir(cfg);
    Log log(dir / "sensitivity.log");
    echo_config(cfg, dir, "sensitivity");
    const auto res = resources(cfg);
    const auto corpus = input_corpus(cfg, log);
    const auto opts = eval_options(cfg);
    const auto fractions = cfg.reals("fractions");
    const auto replicates = cfg.size("replicates");
    for (const auto& recipe : recipes(cfg)) {
        log("sensitivity sweep for " + recipe.name());
        const auto rows = eval::sensitivity_sweep(corpus, recipe, fractions, seed, replicates, res, opts);
        const auto t = tag(recipe.id(), seed);
        write_json(dir / ("sensitivity_" + t + ".json"), eval::to_json(rows, recipe, seed));
        write_file(dir / ("sensitivity_" + t + ".csv"), [&](std::ostream& o) { eval::write_sensitivity_csv(o, rows); });
        for (const auto& r : rows)
            log("  fraction " + eval::format_double(r.fraction) + ": AUC-ROC " + eval::format_double(r.mean_auc_roc) +
                ", AUC-PR " + eval::format_double(r.mean_auc_pr) + " (" + std::to_string(r.replicates_failed) +
                " failed)");
        if (cfg.flag("svg")) {
            svg::Series roc{"AUC-ROC", {}, false}, pr{"AUC-PR", {}, false};
            for (const auto& r : rows) {
                if (std::isnan(r.mean_auc_roc)) continue;
                roc.points.emplace_back(r.fraction, r.mean_auc_roc);
                pr.points.emplace_back(r.fraction, r.mean_auc_pr);
            }
            const std::vector<svg::Series> series{roc, pr};
            write_file(dir / ("sensitivity_" + t + ".svg"), [&](std::ostream& o) {
                svg::write_chart(o, "AUC by training fraction, " + recipe.name(), "training fraction", "AUC", series);
            });
        }
    }
    return 0;
}

int cmd_gen_synthetic(const RunConfig& cfg) {
    const std::uint64_t seed = cfg.empty("seed") ? 1 : cfg.u64("seed");
    const auto dir = output_dir(cfg);
    Log log(dir / "gen-synthetic.log");
    echo_config(cfg, dir, "gen-synthetic");
    synthetic::Options o;
    o.seed = seed;
    o.n_documents = cfg.size("n_documents");
    o.relevant_share = cfg.real("relevant_share");
    o.n_planted = cfg.size("n_planted");
    o.noise_vocabulary = cfg.size("noise_vocabulary");
    const auto g = synthetic::generate(o);
    const fs::path path = cfg.empty("corpus") ? dir / ("synthetic_seed" + std::to_string(seed) + ".jsonl")
                                              : fs::path(cfg.text("corpus"));
    const auto& f = cfg.text("format");
    corpus::save_corpus(g.corpus, path, f == "auto" ? corpus::format_from_path(path)
                                        : f == "csv" ? corpus::Format::Csv
                                                     : corpus::Format::Jsonl);
    log("wrote " + std::to_string(g.corpus.size()) + " documents (" + std::to_string(g.corpus.counts().relevant) +
        " relevant) to " + path.string());
    return 0;
}

int exit_code(const std::exception& e, std::string& kind) {
    if (dynamic_cast<const ConfigError*>(&e)) return kind = "config error", 2;
    if (dynamic_cast<const IoError*>(&e)) return kind = "I/O error", 3;
    if (dynamic_cast<const DataError*>(&e)) return kind = "data error", 4;
    if (dynamic_cast<const ProvenanceError*>(&e)) return kind = "provenance error", 5;
    return kind = "error", 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Screening models for systematic reviews: Boolean query and random forests"};
    app.require_subcommand(1);

    struct Command {
        const char* name;
        const char* help;
        int (*run)(const RunConfig&);
    };
    const std::vector<Command> commands = {
        {"evaluate", "cross-validate each recipe and write reports", cmd_evaluate},
        {"train", "train each recipe on the whole labeled corpus", cmd_train},
        {"rank", "score a corpus with a trained model, highest first", cmd_rank},
        {"sensitivity", "AUC against training fraction", cmd_sensitivity},
        {"audit", "list labeled documents the model confidently disagrees with", cmd_audit},
        {"gen-synthetic", "write the planted-signal synthetic corpus", cmd_gen_synthetic},
    };

    std::string config_path;
    std::map<std::string, std::string> overrides;
    std::vector<std::pair<CLI::App*, const Command*>> subs;
    std::map<CLI::App*, std::vector<std::pair<std::string, CLI::Option*>>> flags;
    for (const auto& c : commands) {
        auto* sub = app.add_subcommand(c.name, c.help);
        sub->add_option("--config", config_path, "key = value config file");
        for (const auto& k : cli::known_keys()) {
            const std::string key(k.name);
            auto* opt = sub->add_option("--" + key, overrides[key], std::string(k.help));
            if (!k.fallback.empty()) opt->description(std::string(k.help) + " [" + std::string(k.fallback) + "]");
            flags[sub].emplace_back(key, opt);
        }
        subs.emplace_back(sub, &c);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    for (const auto& [sub, command] : subs) {
        if (!sub->parsed()) continue;
        try {
            RunConfig cfg;
            if (!config_path.empty()) cfg.merge_file(config_path);
            for (const auto& [key, opt] : flags[sub])
                if (opt->count() > 0) cfg.set(key, overrides[key]);
            return command->run(cfg);
        } catch (const std::exception& e) {
            std::string kind;
            const int rc = exit_code(e, kind);
            std::cerr << "litscreen " << command->name << ": " << kind << ": " << e.what() << '\n';
            return rc;
        }
    }
    return 2;
}

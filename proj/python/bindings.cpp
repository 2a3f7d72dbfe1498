#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "litscreen/errors.hpp"
#include "litscreen/eval.hpp"
#include "litscreen/pipeline.hpp"
#include "litscreen/synthetic.hpp"
#include "litscreen/textprep.hpp"

namespace py = pybind11;
using namespace litscreen;

namespace {

corpus::Label to_label(bool relevant) { return relevant ? corpus::Label::Relevant : corpus::Label::Irrelevant; }

std::vector<eval::ScoredDoc> scored_from(const std::vector<bool>& relevant, const std::vector<double>& scores) {
    if (relevant.size() != scores.size()) throw DataError("labels and scores differ in length");
    std::vector<eval::ScoredDoc> out;
    out.reserve(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) out.push_back({std::to_string(i), to_label(relevant[i]), scores[i]});
    return out;
}

eval::EvalOptions options(std::size_t n_trees, std::size_t threads) {
    eval::EvalOptions o;
    o.pipeline.forest.n_trees = n_trees;
    o.pipeline.forest.threads = threads;
    return o;
}

py::dict document(const corpus::Document& d) {
    py::dict out;
    out["id"] = d.id;
    out["title"] = d.title;
    out["abstract"] = d.abstract;
    if (d.label)
        out["label"] = std::string(corpus::label_name(*d.label));
    else
        out["label"] = py::none();
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "litscreen core bindings";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);
    py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
    py::register_exception<ProvenanceError>(m, "ProvenanceError", PyExc_RuntimeError);

    m.def("tokenize", [](const std::string& text) { return textprep::tokenize(text); });
    m.def("porter_stem", [](const std::string& word) { return textprep::porter_stem(word); });
    m.def("lemmatize", [](const std::vector<std::string>& tokens) {
        return textprep::lemmatize(tokens, textprep::LemmaTable::builtin());
    });
    m.def(
        "preprocess",
        [](const std::string& title, const std::string& abstract) {
            const corpus::Document d{"doc", title, abstract, std::nullopt, std::nullopt};
            return textprep::preprocess(d, textprep::LemmaTable::builtin()).tokens;
        },
        py::arg("title"), py::arg("abstract") = "");

    m.def(
        "boolean_match",
        [](const std::string& title, const std::string& abstract) {
            const corpus::Document d{"doc", title, abstract, std::nullopt, std::nullopt};
            return boolquery::classify_boolean(d, boolquery::BooleanQuery::builtin()) == corpus::Label::Relevant;
        },
        py::arg("title"), py::arg("abstract") = "");

    m.def("roc_auc", [](const std::vector<bool>& relevant, const std::vector<double>& scores) {
        return eval::roc_curve(scored_from(relevant, scores)).auc;
    });
    m.def(
        "pr_auc",
        [](const std::vector<bool>& relevant, const std::vector<double>& scores, bool average_precision) {
            return eval::pr_curve(scored_from(relevant, scores), average_precision ? eval::PrIntegrator::AveragePrecision
                                                                                   : eval::PrIntegrator::Trapezoid)
                .auc;
        },
        py::arg("relevant"), py::arg("scores"), py::arg("average_precision") = false);
    m.def("workload", [](const std::vector<bool>& relevant, const std::vector<double>& scores, double target) {
        const auto w = eval::workload(scored_from(relevant, scores), target);
        py::dict out;
        out["cutoff"] = w.cutoff;
        out["flagged"] = w.flagged;
        out["precision_at"] = w.precision_at;
        out["recall_at"] = w.recall_at;
        out["reading_reduction"] = w.reading_reduction;
        out["warnings"] = w.warnings;
        return out;
    });

    m.def(
        "generate_synthetic",
        [](std::size_t n_documents, std::uint64_t seed) {
            synthetic::Options o;
            o.n_documents = n_documents;
            o.seed = seed;
            const auto g = synthetic::generate(o);
            py::list docs;
            for (const auto& d : g.corpus.documents()) docs.append(document(d));
            return docs;
        },
        py::arg("n_documents") = 10000, py::arg("seed") = 1);

    m.def(
        "load_corpus",
        [](const std::string& path) {
            const auto r = corpus::load_corpus(path);
            py::list docs;
            for (const auto& d : r.corpus.documents()) docs.append(document(d));
            return docs;
        },
        py::arg("path"));

    m.def(
        "cross_validate_json",
        [](const std::string& corpus_path, const std::string& recipe, std::size_t k, std::uint64_t seed,
           std::size_t n_trees, std::size_t threads) {
            const auto c = corpus::load_corpus(corpus_path).corpus;
            py::gil_scoped_release release;
            const auto report = eval::cross_validate(c, pipeline::Recipe::parse(recipe), k, seed,
                                                     pipeline::Resources{}, options(n_trees, threads));
            return eval::to_json(report).dump();
        },
        py::arg("corpus_path"), py::arg("recipe"), py::arg("k") = 5, py::arg("seed"), py::arg("n_trees") = 500,
        py::arg("threads") = 1);

    m.def(
        "train",
        [](const std::string& corpus_path, const std::string& recipe, std::uint64_t seed, const std::string& model_path,
           std::size_t n_trees) {
            const auto c = corpus::load_corpus(corpus_path).corpus;
            pipeline::PipelineOptions o;
            o.forest.n_trees = n_trees;
            o.forest.seed = seed;
            const auto model = pipeline::train_model(c, pipeline::Recipe::parse(recipe), pipeline::Resources{}, o);
            std::ofstream out(model_path, std::ios::binary);
            if (!out) throw IoError("cannot write " + model_path);
            model.save(out);
        },
        py::arg("corpus_path"), py::arg("recipe"), py::arg("seed"), py::arg("model_path"), py::arg("n_trees") = 500);

    m.def(
        "score",
        [](const std::string& model_path, const std::string& corpus_path) {
            const pipeline::Resources res;
            std::ifstream in(model_path, std::ios::binary);
            if (!in) throw IoError("cannot read " + model_path);
            const auto model = pipeline::TrainedModel::load(in, res.clusters);
            const auto c = corpus::load_corpus(corpus_path).corpus;
            const auto p = model.score(c, res);
            std::vector<std::pair<std::string, double>> out;
            for (std::size_t i = 0; i < c.size(); ++i) out.emplace_back(c[i].id, p[i]);
            return out;
        },
        py::arg("model_path"), py::arg("corpus_path"));
}

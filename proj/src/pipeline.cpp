#include "litscreen/pipeline.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

#include "litscreen/errors.hpp"
#include "litscreen/hash.hpp"

namespace litscreen::pipeline {

namespace {

void write_double(std::ostream& out, double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    out.write(buf, res.ptr - buf);
}

double parse_double(const std::string& s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) throw IoError("model file: bad number '" + s + "'");
    return v;
}

std::size_t parse_size(const std::string& s) {
    std::size_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) throw IoError("model file: bad integer '" + s + "'");
    return v;
}

std::string read_word(std::istream& in, std::string_view what) {
    std::string w;
    if (!(in >> w)) throw IoError("model file: truncated while reading " + std::string(what));
    return w;
}

void expect(std::istream& in, std::string_view word) {
    const auto w = read_word(in, word);
    if (w != word) throw IoError("model file: expected '" + std::string(word) + "', found '" + w + "'");
}

}  // namespace

Recipe Recipe::parse(std::string_view text) {
    if (text == "model1") return model1();
    if (text == "model2") return model2();
    for (std::string_view prefix : {"model3:", "model3_n", "model3_", "model3="}) {
        if (text.starts_with(prefix)) {
            const auto num = text.substr(prefix.size());
            std::size_t n = 0;
            const auto res = std::from_chars(num.data(), num.data() + num.size(), n);
            if (res.ec != std::errc{} || res.ptr != num.data() + num.size() || num.empty())
                throw ConfigError("bad model3 token count in '" + std::string(text) + "'");
            return model3(n);
        }
    }
    throw ConfigError("unknown model recipe '" + std::string(text) + "' (use model1, model2 or model3:N)");
}

std::string Recipe::name() const {
    switch (kind) {
        case Kind::Boolean:
            return "model1";
        case Kind::Clusters:
            return "model2";
        case Kind::ClustersTopN:
            return "model3:" + std::to_string(n_top);
    }
    return {};
}

std::string Recipe::id() const {
    return kind == Kind::ClustersTopN ? "model3_n" + std::to_string(n_top) : name();
}

std::string query_hash(const boolquery::BooleanQuery& query) {
    std::string canonical;
    for (const auto* cat : {&query.fsw, &query.hiv, &query.violence}) {
        canonical.append("[").append(cat->name).append("]\n");
        for (const auto& t : cat->terms) {
            for (const auto& w : t.words) canonical.append(w).append(" ");
            canonical.append(t.kind == boolquery::Term::Kind::Prefix ? "*\n" : "\n");
        }
    }
    return sha256_hex(canonical);
}

std::vector<std::string> ids_of(const corpus::Corpus& corpus, std::span<const std::size_t> rows) {
    std::vector<std::string> ids;
    ids.reserve(rows.size());
    for (auto r : rows) ids.push_back(corpus[r].id);
    return ids;
}

FeaturePipeline FeaturePipeline::fit(std::span<const textprep::TokenSequence> train,
                                     std::span<const corpus::Label> labels, const vectorize::ClusterSet& clusters,
                                     const Recipe& recipe, const PipelineOptions& options,
                                     const std::string& provenance) {
    if (train.size() != labels.size()) throw DataError("training documents and labels differ in length");
    FeaturePipeline p;
    p.vocab_ = vectorize::build_vocab(train, options.min_df);
    const auto counts = vectorize::count_matrix(train, p.vocab_);
    p.idf_ = vectorize::fit_idf(counts);
    p.membership_ = clusters.membership(p.vocab_);
    p.n_clusters_ = clusters.size();

    std::vector<std::size_t> members(clusters.size(), 0);
    for (const auto& m : p.membership_)
        if (m) ++members[*m];
    const auto cluster_tf = vectorize::cluster_counts(counts, p.membership_, clusters.size());
    p.cluster_idf_ = vectorize::fit_cluster_idf(cluster_tf, clusters.clusters(), members, &p.warnings_);

    const auto names = clusters.names();
    if (recipe.kind == Recipe::Kind::ClustersTopN && recipe.n_top > 0) {
        const auto weights = vectorize::apply_idf(counts, p.idf_);
        p.ranking_ = select::rank_tokens(weights, labels, p.vocab_, provenance, options.tscore);
        p.features_ = select::select_features(names, *p.ranking_, p.membership_, recipe.n_top, provenance,
                                              options.selection);
    } else {
        p.features_.cluster_names = names;
        p.features_.n_top = 0;
    }
    return p;
}

Matrix FeaturePipeline::transform(std::span<const textprep::TokenSequence> docs) const {
    const auto counts = vectorize::count_matrix(docs, vocab_);
    const auto weights = vectorize::apply_idf(counts, idf_);
    const auto cluster_tf = vectorize::cluster_counts(counts, membership_, n_clusters_);
    const auto cluster_values = vectorize::apply_cluster_idf(cluster_tf, cluster_idf_);
    return select::feature_matrix(features_, cluster_values, weights);
}

void FeaturePipeline::save(std::ostream& out) const {
    out << "feature-pipeline 1\n";
    out << "vocab " << vocab_.size() << ' ' << vocab_.documents() << '\n';
    for (std::size_t i = 0; i < vocab_.size(); ++i) {
        out << vocab_.token(i) << ' ' << vocab_.df(i) << ' ';
        write_double(out, idf_[i]);
        out << '\n';
    }
    out << "vocab_hash " << vocab_.content_hash() << '\n';
    out << "clusters " << features_.cluster_names.size() << '\n';
    for (std::size_t c = 0; c < features_.cluster_names.size(); ++c) {
        out << features_.cluster_names[c] << ' ';
        write_double(out, cluster_idf_[c]);
        out << '\n';
    }
    out << "tokens " << features_.n_top << ' ' << features_.token_columns.size() << '\n';
    for (std::size_t i = 0; i < features_.token_columns.size(); ++i)
        out << features_.token_columns[i] << ' ' << features_.token_names[i] << '\n';
    out << "end-pipeline\n";
}

FeaturePipeline FeaturePipeline::load(std::istream& in, const vectorize::ClusterSet& clusters) {
    expect(in, "feature-pipeline");
    expect(in, "1");
    expect(in, "vocab");
    const auto p_size = parse_size(read_word(in, "vocabulary size"));
    const auto n_docs = parse_size(read_word(in, "document count"));
    std::vector<std::string> tokens;
    std::vector<std::size_t> df;
    FeaturePipeline p;
    tokens.reserve(p_size);
    df.reserve(p_size);
    p.idf_.reserve(p_size);
    for (std::size_t i = 0; i < p_size; ++i) {
        tokens.push_back(read_word(in, "token"));
        df.push_back(parse_size(read_word(in, "df")));
        p.idf_.push_back(parse_double(read_word(in, "idf")));
    }
    p.vocab_ = vectorize::Vocabulary(std::move(tokens), std::move(df), n_docs);
    expect(in, "vocab_hash");
    if (read_word(in, "vocabulary hash") != p.vocab_.content_hash())
        throw ProvenanceError("model file: vocabulary does not match its recorded hash");

    expect(in, "clusters");
    const auto n_clusters = parse_size(read_word(in, "cluster count"));
    if (n_clusters != clusters.size())
        throw ProvenanceError("model expects " + std::to_string(n_clusters) + " clusters, config has " +
                              std::to_string(clusters.size()));
    for (std::size_t c = 0; c < n_clusters; ++c) {
        auto name = read_word(in, "cluster name");
        if (name != clusters.clusters()[c].name)
            throw ProvenanceError("model cluster '" + name + "' does not match config cluster '" +
                                  clusters.clusters()[c].name + "'");
        p.features_.cluster_names.push_back(std::move(name));
        p.cluster_idf_.push_back(parse_double(read_word(in, "cluster idf")));
    }
    p.n_clusters_ = n_clusters;
    p.membership_ = clusters.membership(p.vocab_);

    expect(in, "tokens");
    p.features_.n_top = parse_size(read_word(in, "n_top"));
    const auto n_tokens = parse_size(read_word(in, "token count"));
    for (std::size_t i = 0; i < n_tokens; ++i) {
        const auto col = parse_size(read_word(in, "token column"));
        auto name = read_word(in, "token name");
        if (col >= p.vocab_.size() || p.vocab_.token(col) != name)
            throw ProvenanceError("model feature token '" + name + "' does not match its vocabulary column");
        p.features_.token_columns.push_back(static_cast<std::uint32_t>(col));
        p.features_.token_names.push_back(std::move(name));
    }
    expect(in, "end-pipeline");
    return p;
}

void TrainedModel::check_provenance(const Resources& resources) const {
    if (recipe.uses_forest()) {
        if (resources.lemmas.content_hash() != lemma_hash)
            throw ProvenanceError("lemma table differs from the one the model was trained with (hash " +
                                  resources.lemmas.content_hash().substr(0, 12) + " vs " + lemma_hash.substr(0, 12) +
                                  ")");
        if (resources.clusters.content_hash() != cluster_hash)
            throw ProvenanceError("cluster config differs from the one the model was trained with");
    } else if (query_hash(resources.query) != keyword_hash) {
        throw ProvenanceError("keyword config differs from the one the model was built with");
    }
}

std::vector<double> TrainedModel::score(const corpus::Corpus& corpus, const Resources& resources) const {
    check_provenance(resources);
    std::vector<double> out;
    out.reserve(corpus.size());
    if (!recipe.uses_forest()) {
        for (const auto& d : corpus.documents())
            out.push_back(boolquery::classify_boolean(d, resources.query) == corpus::Label::Relevant ? 1.0 : 0.0);
        return out;
    }
    const auto seqs = textprep::preprocess_all(corpus, resources.lemmas);
    const auto x = features->transform(seqs);
    if (x.cols() != forest->n_features)
        throw ProvenanceError("feature dimension " + std::to_string(x.cols()) + " does not match the model's " +
                              std::to_string(forest->n_features));
    return forest->predict_proba(x);
}

void TrainedModel::save(std::ostream& out) const {
    out << "litscreen-model 1\n";
    out << "recipe " << recipe.name() << '\n';
    out << "lemma_hash " << lemma_hash << '\n';
    out << "cluster_hash " << cluster_hash << '\n';
    out << "keyword_hash " << keyword_hash << '\n';
    if (recipe.uses_forest()) {
        features->save(out);
        forest->save(out);
    }
    out << "end-model\n";
}

TrainedModel TrainedModel::load(std::istream& in, const vectorize::ClusterSet& clusters) {
    expect(in, "litscreen-model");
    const auto version = read_word(in, "version");
    if (version != "1") throw IoError("unsupported model file version " + version);
    TrainedModel m;
    expect(in, "recipe");
    m.recipe = Recipe::parse(read_word(in, "recipe"));
    expect(in, "lemma_hash");
    m.lemma_hash = read_word(in, "lemma hash");
    expect(in, "cluster_hash");
    m.cluster_hash = read_word(in, "cluster hash");
    expect(in, "keyword_hash");
    m.keyword_hash = read_word(in, "keyword hash");
    if (m.recipe.uses_forest()) {
        if (clusters.content_hash() != m.cluster_hash)
            throw ProvenanceError("cluster config differs from the one the model was trained with");
        m.features = FeaturePipeline::load(in, clusters);
        m.forest = forest::ForestModel::load(in);
        if (m.forest->n_features != m.features->features().size())
            throw ProvenanceError("model forest width does not match its feature set");
    }
    expect(in, "end-model");
    return m;
}

std::string TrainedModel::serialize() const {
    std::ostringstream os;
    save(os);
    return os.str();
}

TrainedModel train_model(const corpus::Corpus& corpus, const Recipe& recipe, const Resources& resources,
                         const PipelineOptions& options) {
    TrainedModel m;
    m.recipe = recipe;
    m.lemma_hash = resources.lemmas.content_hash();
    m.cluster_hash = resources.clusters.content_hash();
    m.keyword_hash = query_hash(resources.query);
    if (!recipe.uses_forest()) return m;

    const auto labels = corpus.labels("training");
    const auto seqs = textprep::preprocess_all(corpus, resources.lemmas);
    std::vector<std::string> ids;
    for (const auto& d : corpus.documents()) ids.push_back(d.id);
    const auto provenance = select::rows_digest(ids);
    m.features = FeaturePipeline::fit(seqs, labels, resources.clusters, recipe, options, provenance);
    const auto x = m.features->transform(seqs);
    m.forest = forest::train_forest(x, labels, options.forest);
    return m;
}

}  // namespace litscreen::pipeline

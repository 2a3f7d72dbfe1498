#include "litscreen/vectorize.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "litscreen/assets.hpp"
#include "litscreen/errors.hpp"
#include "litscreen/hash.hpp"

namespace litscreen::vectorize {

Vocabulary::Vocabulary(std::vector<std::string> tokens, std::vector<std::size_t> df, std::size_t documents)
    : tokens_(std::move(tokens)), df_(std::move(df)), documents_(documents) {
    if (tokens_.size() != df_.size()) throw DataError("vocabulary: token and df lengths differ");
    index_.reserve(tokens_.size());
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
        if (i > 0 && !(tokens_[i - 1] < tokens_[i]))
            throw DataError("vocabulary tokens must be sorted and unique");
        index_.emplace(tokens_[i], static_cast<std::uint32_t>(i));
    }
}

std::optional<std::uint32_t> Vocabulary::column(std::string_view token) const {
    const auto it = index_.find(std::string(token));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::string Vocabulary::content_hash() const {
    std::string canonical = std::to_string(documents_) + "\n";
    for (std::size_t i = 0; i < tokens_.size(); ++i)
        canonical.append(tokens_[i]).append("\t").append(std::to_string(df_[i])).append("\n");
    return sha256_hex(canonical);
}

Vocabulary build_vocab(std::span<const textprep::TokenSequence> seqs, std::size_t min_df) {
    std::map<std::string, std::size_t, std::less<>> df;
    std::vector<std::string_view> distinct;
    bool any = false;
    for (const auto& seq : seqs) {
        if (seq.tokens.empty()) continue;
        any = true;
        distinct.assign(seq.tokens.begin(), seq.tokens.end());
        std::sort(distinct.begin(), distinct.end());
        distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
        for (auto t : distinct) {
            auto it = df.find(t);
            if (it == df.end())
                df.emplace(std::string(t), 1);
            else
                ++it->second;
        }
    }
    if (!any) throw DataError("cannot build a vocabulary: every token sequence is empty");

    std::vector<std::string> tokens;
    std::vector<std::size_t> counts;
    for (auto& [token, n] : df) {
        if (n < min_df) continue;
        tokens.push_back(token);
        counts.push_back(n);
    }
    return Vocabulary(std::move(tokens), std::move(counts), seqs.size());
}

DocTermMatrix count_matrix(std::span<const textprep::TokenSequence> seqs, const Vocabulary& vocab) {
    DocTermMatrix m(vocab.size());
    std::vector<std::uint32_t> cols;
    std::vector<DocTermMatrix::Entry> row;
    for (const auto& seq : seqs) {
        cols.clear();
        for (const auto& t : seq.tokens)
            if (auto c = vocab.column(t)) cols.push_back(*c);
        std::sort(cols.begin(), cols.end());
        row.clear();
        for (std::size_t i = 0; i < cols.size();) {
            std::size_t j = i;
            while (j < cols.size() && cols[j] == cols[i]) ++j;
            row.push_back({cols[i], static_cast<std::uint32_t>(j - i)});
            i = j;
        }
        m.push_row(row);
    }
    return m;
}

std::vector<std::size_t> document_frequency(const DocTermMatrix& counts) {
    std::vector<std::size_t> df(counts.cols(), 0);
    for (std::size_t r = 0; r < counts.rows(); ++r)
        for (const auto& e : counts.row(r)) ++df[e.col];
    return df;
}

std::vector<double> fit_idf(const DocTermMatrix& counts) {
    const auto df = document_frequency(counts);
    const auto n = static_cast<double>(counts.rows());
    std::vector<double> idf(df.size(), 0.0);
    for (std::size_t i = 0; i < df.size(); ++i)
        if (df[i] > 0 && df[i] < counts.rows()) idf[i] = std::log(n / static_cast<double>(df[i]));
    return idf;
}

CsrMatrix<double> apply_idf(const DocTermMatrix& counts, std::span<const double> idf) {
    if (idf.size() != counts.cols()) throw DataError("idf length does not match matrix columns");
    CsrMatrix<double> w(counts.cols());
    std::vector<CsrMatrix<double>::Entry> row;
    for (std::size_t r = 0; r < counts.rows(); ++r) {
        row.clear();
        for (const auto& e : counts.row(r)) row.push_back({e.col, static_cast<double>(e.value) * idf[e.col]});
        w.push_row(row);
    }
    return w;
}

TfidfMatrix tfidf(const DocTermMatrix& counts) {
    if (counts.rows() == 0) throw DataError("tf-idf of an empty matrix");
    auto idf = fit_idf(counts);
    auto weights = apply_idf(counts, idf);
    return {std::move(weights), std::move(idf)};
}

namespace {

template <typename T>
void write_triplets_impl(std::ostream& out, const CsrMatrix<T>& m) {
    out << "row,col,value\n";
    char buf[64];
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (const auto& e : m.row(r)) {
            const auto res = std::to_chars(buf, buf + sizeof buf, e.value);
            out << r << ',' << e.col << ',' << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf))
                << '\n';
        }
    }
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

bool is_lower_word(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= 'a' && c <= 'z'; });
}

}  // namespace

void write_triplets(std::ostream& out, const CsrMatrix<double>& m) { write_triplets_impl(out, m); }
void write_triplets(std::ostream& out, const DocTermMatrix& m) { write_triplets_impl(out, m); }

bool ClusterSpec::matches(std::string_view stem) const {
    return std::any_of(patterns.begin(), patterns.end(), [&](const auto& p) { return p.matches(stem); });
}

ClusterSet::ClusterSet(std::vector<ClusterSpec> clusters) : clusters_(std::move(clusters)) {
    std::string canonical;
    for (const auto& c : clusters_) {
        canonical.append(c.name).append(":");
        for (const auto& p : c.patterns)
            canonical.append(p.kind == ClusterPattern::Kind::Exact ? " =" : " ").append(p.text);
        canonical.append("\n");
    }
    hash_ = sha256_hex(canonical);
}

ClusterSet ClusterSet::parse(std::string_view text) {
    std::map<std::string, ClusterSpec, std::less<>> by_name;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    auto fail = [&](const std::string& what) {
        throw ConfigError("cluster config line " + std::to_string(line_no) + ": " + what);
    };
    while (std::getline(in, line)) {
        ++line_no;
        const auto body = trim(line);
        if (body.empty() || body.front() == '#') continue;
        const auto colon = body.find(':');
        if (colon == std::string_view::npos) fail("expected 'name: pattern, ...'");
        const auto name = std::string(trim(body.substr(0, colon)));
        if (std::find(kClusterNames.begin(), kClusterNames.end(), name) == kClusterNames.end())
            fail("unknown cluster '" + name + "'");
        if (by_name.contains(name)) fail("cluster '" + name + "' defined twice");

        ClusterSpec spec{name, {}};
        auto rest = body.substr(colon + 1);
        while (!rest.empty()) {
            const auto comma = rest.find(',');
            const auto item = trim(rest.substr(0, comma));
            rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
            if (item.empty()) fail("empty pattern");
            if (item.starts_with("exact=")) {
                auto v = item.substr(6);
                if (v.size() < 2 || v.front() != '"' || v.back() != '"') fail("exact pattern must be quoted");
                v = v.substr(1, v.size() - 2);
                if (!is_lower_word(v)) fail("pattern '" + std::string(v) + "' is not a lowercase word");
                spec.patterns.push_back({ClusterPattern::Kind::Exact, std::string(v)});
            } else {
                if (!is_lower_word(item)) fail("pattern '" + std::string(item) + "' is not a lowercase word");
                spec.patterns.push_back({ClusterPattern::Kind::Prefix, std::string(item)});
            }
        }
        if (spec.patterns.empty()) fail("cluster '" + name + "' has no patterns");
        by_name.emplace(name, std::move(spec));
    }
    std::vector<ClusterSpec> ordered;
    for (auto name : kClusterNames) {
        auto it = by_name.find(name);
        if (it == by_name.end()) throw ConfigError("cluster config is missing cluster '" + std::string(name) + "'");
        ordered.push_back(std::move(it->second));
    }
    return ClusterSet(std::move(ordered));
}

ClusterSet ClusterSet::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open cluster config '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

const ClusterSet& ClusterSet::builtin() {
    static const ClusterSet set = parse(assets::cluster_config());
    return set;
}

std::vector<std::string> ClusterSet::names() const {
    std::vector<std::string> out;
    for (const auto& c : clusters_) out.push_back(c.name);
    return out;
}

std::vector<std::optional<std::size_t>> ClusterSet::membership(const Vocabulary& vocab) const {
    std::vector<std::optional<std::size_t>> member(vocab.size());
    for (std::size_t col = 0; col < vocab.size(); ++col) {
        const auto& tok = vocab.token(col);
        for (std::size_t c = 0; c < clusters_.size(); ++c) {
            if (!clusters_[c].matches(tok)) continue;
            if (member[col])
                throw ConfigError("token '" + tok + "' matches clusters '" + clusters_[*member[col]].name +
                                  "' and '" + clusters_[c].name + "'");
            member[col] = c;
        }
    }
    return member;
}

Matrix cluster_counts(const DocTermMatrix& counts, std::span<const std::optional<std::size_t>> membership,
                      std::size_t n_clusters) {
    if (membership.size() != counts.cols()) throw DataError("cluster membership does not match vocabulary");
    Matrix tf(counts.rows(), n_clusters);
    for (std::size_t r = 0; r < counts.rows(); ++r)
        for (const auto& e : counts.row(r))
            if (const auto c = membership[e.col]) tf(r, *c) += static_cast<double>(e.value);
    return tf;
}

std::vector<double> fit_cluster_idf(const Matrix& cluster_tf, std::span<const ClusterSpec> clusters,
                                    std::span<const std::size_t> members_per_cluster,
                                    std::vector<std::string>* warnings) {
    const std::size_t n = cluster_tf.rows();
    std::vector<double> idf(cluster_tf.cols(), 0.0);
    for (std::size_t c = 0; c < cluster_tf.cols(); ++c) {
        std::size_t df = 0;
        for (std::size_t r = 0; r < n; ++r)
            if (cluster_tf(r, c) > 0.0) ++df;
        const auto& name = c < clusters.size() ? clusters[c].name : std::to_string(c);
        if (c < members_per_cluster.size() && members_per_cluster[c] == 0) {
            if (warnings) warnings->push_back("cluster '" + name + "' matches no vocabulary token; column set to zero");
            continue;
        }
        if (df == 0) {
            if (warnings) warnings->push_back("cluster '" + name + "' occurs in no document; column set to zero");
            continue;
        }
        if (df < n) idf[c] = std::log(static_cast<double>(n) / static_cast<double>(df));
    }
    return idf;
}

Matrix apply_cluster_idf(const Matrix& cluster_tf, std::span<const double> idf) {
    if (idf.size() != cluster_tf.cols()) throw DataError("cluster idf length does not match columns");
    Matrix out(cluster_tf.rows(), cluster_tf.cols());
    for (std::size_t r = 0; r < cluster_tf.rows(); ++r)
        for (std::size_t c = 0; c < cluster_tf.cols(); ++c) out(r, c) = cluster_tf(r, c) * idf[c];
    return out;
}

ClusterMatrix cluster_matrix(const DocTermMatrix& counts, const Vocabulary& vocab, const ClusterSet& clusters) {
    const auto member = clusters.membership(vocab);
    std::vector<std::size_t> members_per_cluster(clusters.size(), 0);
    for (const auto& m : member)
        if (m) ++members_per_cluster[*m];
    ClusterMatrix out;
    const auto tf = cluster_counts(counts, member, clusters.size());
    out.idf = fit_cluster_idf(tf, clusters.clusters(), members_per_cluster, &out.warnings);
    out.values = apply_cluster_idf(tf, out.idf);
    return out;
}

}  // namespace litscreen::vectorize

#include "litscreen/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <string_view>
#include <unordered_set>

#include "litscreen/boolquery.hpp"
#include "litscreen/errors.hpp"
#include "litscreen/rng.hpp"
#include "litscreen/textprep.hpp"
#include "litscreen/vectorize.hpp"

namespace litscreen::synthetic {

namespace {

using Forms = std::vector<std::string_view>;

// Concept surface forms. "seen" forms hit the keyword query; "hidden" forms
// reach a cluster (or plain tokens) but not the query.
const Forms kSexWorkBoth = {"prostitution", "prostitutes", "fsw", "csw"};
const Forms kSexWorkQueryOnly = {"commercial sex", "transactional sex", "sex worker"};
const Forms kSexWorkClusterOnly = {"sexworkers", "sexwork"};
const Forms kSexWorkNeither = {"sex workers", "female sex workers"};
const Forms kHiv = {"hiv", "aids", "hiv infection", "hiv prevalence", "human immunodeficiency virus"};
const Forms kViolenceSeen = {"violence", "abuse", "victims", "rape", "assault", "exploitation", "coercion",
                             "intimidation", "extortion", "battered"};
const Forms kViolenceHidden = {"harassment", "torture", "murder", "offenders", "criminalization", "abusive"};

const Forms kFunctionWords = {"the",  "of",   "and",   "in",    "to",      "a",       "with",   "for",
                              "among", "was", "were",  "study", "results", "methods", "we",     "this",
                              "that", "on",   "by",    "from",  "data",    "women",   "health", "analysis"};

constexpr std::string_view kConsonants = "bdfgklmnprstvz";
constexpr std::string_view kVowels = "aeiou";

std::size_t poisson(Rng& rng, double mean) {
    const double limit = std::exp(-mean);
    std::size_t k = 0;
    double p = rng.uniform();
    while (p > limit) {
        ++k;
        p *= rng.uniform();
    }
    return k;
}

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& items) {
    return items[static_cast<std::size_t>(rng.below(items.size()))];
}

// Produces pronounceable pseudo-words whose stems are unique and collide with
// no cluster, keyword, lemma or fixed vocabulary entry.
class WordFactory {
public:
    explicit WordFactory(std::uint64_t seed) : rng_(seed) {
        const auto reserve = [&](const Forms& forms) {
            for (auto f : forms)
                for (const auto& t : textprep::tokenize(f)) stems_.insert(textprep::porter_stem(t));
        };
        for (const auto* forms : {&kSexWorkBoth, &kSexWorkQueryOnly, &kSexWorkClusterOnly, &kSexWorkNeither, &kHiv, &kViolenceSeen, &kViolenceHidden,
                                  &kFunctionWords})
            reserve(*forms);
    }

    std::string next() {
        for (;;) {
            std::string w;
            const auto syllables = 2 + rng_.below(3);
            for (std::uint64_t s = 0; s < syllables; ++s) {
                w.push_back(kConsonants[rng_.below(kConsonants.size())]);
                w.push_back(kVowels[rng_.below(kVowels.size())]);
            }
            if (rng_.bernoulli(0.5)) w.push_back(kConsonants[rng_.below(kConsonants.size())]);
            if (usable(w)) return w;
        }
    }

private:
    bool usable(const std::string& w) {
        if (textprep::LemmaTable::builtin().lookup(w) != w) return false;
        auto stem = textprep::porter_stem(w);
        if (stems_.contains(stem)) return false;
        for (const auto& c : vectorize::ClusterSet::builtin().clusters())
            if (c.matches(stem)) return false;
        const textprep::Tokens tokens{w};
        const auto& q = boolquery::BooleanQuery::builtin();
        for (const auto* cat : {&q.fsw, &q.hiv, &q.violence})
            if (boolquery::match_category(tokens, w, *cat)) return false;
        stems_.insert(std::move(stem));
        return true;
    }

    Rng rng_;
    std::unordered_set<std::string> stems_;
};

struct Sampler {
    Rng& rng;
    std::vector<std::string>& units;

    void mention(const Forms& forms, std::size_t count) {
        for (std::size_t i = 0; i < count; ++i) units.emplace_back(forms[rng.below(forms.size())]);
    }
    // Each mention comes from `seen` with probability `seen_share`.
    void mention(const Forms& seen, const Forms& hidden, double seen_share, std::size_t count) {
        for (std::size_t i = 0; i < count; ++i) mention(rng.bernoulli(seen_share) ? seen : hidden, 1);
    }
    // Shares of query+cluster, query-only and cluster-only forms; the rest
    // reach neither.
    void sex_work(std::size_t count, std::array<double, 3> share) {
        for (std::size_t i = 0; i < count; ++i) {
            const double u = rng.uniform();
            if (u < share[0])
                mention(kSexWorkBoth, 1);
            else if (u < share[0] + share[1])
                mention(kSexWorkQueryOnly, 1);
            else if (u < share[0] + share[1] + share[2])
                mention(kSexWorkClusterOnly, 1);
            else
                mention(kSexWorkNeither, 1);
        }
    }
    void hiv(std::size_t count) { mention(kHiv, count); }
    void violence(std::size_t count) { mention(kViolenceSeen, kViolenceHidden, 0.5, count); }
    void maybe(double p, auto&& fn) {
        if (rng.bernoulli(p)) fn();
    }
};

constexpr std::array<double, 3> kFocusForms{0.30, 0.10, 0.35};
constexpr std::array<double, 3> kPassingForms{0.45, 0.25, 0.10};

void relevant_mentions(Sampler& s) {
    s.maybe(0.95, [&] { s.sex_work(1 + poisson(s.rng, 2.5), kFocusForms); });
    const double u = s.rng.uniform();
    if (u < 0.55) {
        s.hiv(1 + poisson(s.rng, 2.0));
    } else if (u < 0.85) {
        s.violence(1 + poisson(s.rng, 2.0));
    } else {
        s.hiv(1 + poisson(s.rng, 1.5));
        s.violence(1 + poisson(s.rng, 1.5));
    }
}

void irrelevant_mentions(Sampler& s) {
    const double u = s.rng.uniform();
    if (u < 0.35) {  // HIV studies of other populations
        s.hiv(1 + poisson(s.rng, 1.5));
        s.maybe(0.35, [&] { s.sex_work(1, kPassingForms); });
        s.maybe(0.10, [&] { s.violence(1); });
    } else if (u < 0.60) {  // violence studies of other populations
        s.violence(1 + poisson(s.rng, 1.5));
        s.maybe(0.15, [&] { s.sex_work(1, kPassingForms); });
        s.maybe(0.15, [&] { s.hiv(1); });
    } else if (u < 0.66) {  // sex work without HIV or violence data
        s.sex_work(1 + poisson(s.rng, 1.5), kPassingForms);
        s.maybe(0.30, [&] { s.hiv(1); });
        s.maybe(0.20, [&] { s.violence(1); });
    } else {
        s.maybe(0.03, [&] { s.sex_work(1, kPassingForms); });
        s.maybe(0.03, [&] { s.hiv(1); });
        s.maybe(0.03, [&] { s.violence(1); });
    }
}

std::string join(std::span<const std::string> units) {
    std::string out;
    for (const auto& u : units) {
        if (!out.empty()) out.push_back(' ');
        out += u;
    }
    return out;
}

}  // namespace

Generated generate(const Options& o) {
    if (o.n_documents < 2) throw ConfigError("synthetic corpus needs at least 2 documents");
    if (!(o.relevant_share > 0.0 && o.relevant_share < 1.0)) throw ConfigError("relevant_share must be in (0, 1)");
    if (o.min_length < 1 || o.max_length < o.min_length) throw ConfigError("bad synthetic document length range");
    if (o.noise_vocabulary < 1) throw ConfigError("noise vocabulary must be non-empty");

    Generated g;
    WordFactory words(derive_seed(o.seed, 1));
    for (std::size_t i = 0; i < o.n_planted; ++i) g.planted.push_back(words.next());
    for (std::size_t i = 0; i < o.noise_vocabulary; ++i) g.noise.push_back(words.next());

    // Zipf(1) cumulative weights over the noise vocabulary.
    std::vector<double> cdf(g.noise.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < cdf.size(); ++i) cdf[i] = acc += 1.0 / static_cast<double>(i + 1);
    for (auto& c : cdf) c /= acc;

    const auto n_relevant = static_cast<std::size_t>(
        std::llround(static_cast<double>(o.n_documents) * o.relevant_share));
    std::vector<corpus::Label> labels(o.n_documents, corpus::Label::Irrelevant);
    std::fill_n(labels.begin(), std::min(n_relevant, o.n_documents), corpus::Label::Relevant);
    Rng rng(derive_seed(o.seed, 2));
    rng.shuffle(std::span(labels));

    std::vector<corpus::Document> docs;
    docs.reserve(o.n_documents);
    std::vector<std::string> units;
    for (std::size_t d = 0; d < o.n_documents; ++d) {
        units.clear();
        const bool relevant = labels[d] == corpus::Label::Relevant;
        const auto length = o.min_length + rng.below(o.max_length - o.min_length + 1);
        for (std::uint64_t i = 0; i < length; ++i) {
            if (rng.bernoulli(0.3)) {
                units.emplace_back(kFunctionWords[rng.below(kFunctionWords.size())]);
            } else {
                const auto it = std::upper_bound(cdf.begin(), cdf.end(), rng.uniform());
                units.push_back(g.noise[std::min<std::size_t>(it - cdf.begin(), cdf.size() - 1)]);
            }
        }
        Sampler s{rng, units};
        relevant ? relevant_mentions(s) : irrelevant_mentions(s);
        const double rate = relevant ? o.planted_rate_relevant : o.planted_rate_irrelevant;
        for (const auto& w : g.planted)
            if (rng.bernoulli(rate)) units.insert(units.end(), 1 + rng.below(2), w);
        rng.shuffle(std::span(units));

        const std::size_t title_len = std::min<std::size_t>(10, units.size());
        char id[32];
        std::snprintf(id, sizeof id, "syn%06zu", d + 1);
        docs.push_back({id, join(std::span(units).first(title_len)), join(std::span(units).subspan(title_len)),
                        labels[d], std::string("synthetic")});
    }
    g.corpus = corpus::Corpus(std::move(docs));
    return g;
}

}  // namespace litscreen::synthetic

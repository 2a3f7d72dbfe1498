#include <doctest.h>

#include <cctype>
#include <cmath>

#include "litscreen/boolquery.hpp"
#include "litscreen/errors.hpp"
#include "litscreen/rng.hpp"

using namespace litscreen;
using boolquery::Term;
using corpus::Label;

namespace {

corpus::Document doc(std::string text, std::optional<Label> label = std::nullopt) {
    return {"d", std::move(text), "", label, std::nullopt};
}

Label classify(const std::string& text) { return boolquery::classify_boolean(doc(text), boolquery::BooleanQuery::builtin()); }

// Reference matcher: splits the lowercased text into letter runs and walks
// them with plain loops.
std::vector<std::string> words_of(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : text) {
        if (std::isalpha(static_cast<unsigned char>(ch))) {
            cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
        } else if (!cur.empty()) {
            out.push_back(cur);
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

bool ref_term(const std::vector<std::string>& words, const Term& t) {
    const auto n = t.words.size();
    for (std::size_t i = 0; i + n <= words.size(); ++i) {
        bool ok = true;
        for (std::size_t j = 0; j < n && ok; ++j) {
            const auto& w = words[i + j];
            const auto& q = t.words[j];
            const bool last = j + 1 == n;
            if (last && t.kind == Term::Kind::Prefix)
                ok = w.size() >= q.size() && w.compare(0, q.size(), q) == 0;
            else
                ok = w == q;
        }
        if (ok) return true;
    }
    return false;
}

bool ref_category(const std::vector<std::string>& words, const boolquery::KeywordCategory& c) {
    for (const auto& t : c.terms)
        if (ref_term(words, t)) return true;
    return false;
}

Label ref_classify(const std::string& text) {
    const auto& q = boolquery::BooleanQuery::builtin();
    const auto w = words_of(text);
    return ref_category(w, q.fsw) && (ref_category(w, q.hiv) || ref_category(w, q.violence)) ? Label::Relevant
                                                                                             : Label::Irrelevant;
}

const std::vector<std::string> kPool{
    "sex", "Sex", "worker", "workers", "commercial", "trade", "HIV", "hiv", "aids", "aid", "violence", "violent",
    "prostitute", "sw", "switch", "FSW", "rape", "rapeseed", "crime", "crimes", "human", "immunodeficiency",
    "virus", "viruses", "acquired", "syndrome", "domestic", "battered", "women", "malaria", "transactional",
    "victims", "the", "of", "ipv", "abuse", "exploited"};

std::string random_text(Rng& rng) {
    std::string s;
    for (auto n = rng.below(14); n > 0; --n) {
        s += kPool[rng.below(kPool.size())];
        s += rng.bernoulli(0.2) ? "  " : " ";
    }
    return s;
}

}  // namespace

TEST_SUITE("boolquery") {

TEST_CASE("term parsing") {
    CHECK(boolquery::parse_term("prostitut*") == Term{Term::Kind::Prefix, {"prostitut"}});
    CHECK(boolquery::parse_term("fsw") == Term{Term::Kind::Exact, {"fsw"}});
    CHECK(boolquery::parse_term("\"Commercial Sex\"") == Term{Term::Kind::Exact, {"commercial", "sex"}});
    CHECK(boolquery::parse_term("\"human immunodeficiency virus*\"") ==
          Term{Term::Kind::Prefix, {"human", "immunodeficiency", "virus"}});
    CHECK_THROWS_AS(boolquery::parse_term("*"), ConfigError);
    CHECK_THROWS_AS(boolquery::parse_term("two words"), ConfigError);
    CHECK_THROWS_AS(boolquery::BooleanQuery::parse("[fsw]\nfsw\n[hiv]\nhiv\n"), ConfigError);
    CHECK_THROWS_AS(boolquery::BooleanQuery::parse("fsw\n"), ConfigError);
}

TEST_CASE("match_category examples") {
    const auto& q = boolquery::BooleanQuery::builtin();
    {
        const auto t = boolquery::MatchText::of(doc("Prostitution in cities"));
        CHECK(boolquery::match_category(t.tokens, t.normalized, q.fsw));
    }
    {
        const auto t = boolquery::MatchText::of(doc("A study of commercial sex work"));
        CHECK(boolquery::match_category(t.tokens, t.normalized, q.fsw));
    }
    {
        const auto t = boolquery::MatchText::of(doc("malaria bednet"));
        CHECK_FALSE(boolquery::match_category(t.tokens, t.normalized, q.hiv));
    }
}

TEST_CASE("acronyms match whole tokens only") {
    const auto& q = boolquery::BooleanQuery::builtin();
    const auto t = boolquery::MatchText::of(doc("switch the aid program"));
    CHECK_FALSE(boolquery::match_category(t.tokens, t.normalized, q.fsw));
    CHECK_FALSE(boolquery::match_category(t.tokens, t.normalized, q.hiv));
}

TEST_CASE("classify_boolean examples") {
    CHECK(classify("The sex trade and HIV") == Label::Relevant);
    CHECK(classify("HIV incidence in adults") == Label::Irrelevant);
    CHECK(classify("FSW reporting rape") == Label::Relevant);
}

TEST_CASE("structure: removing violence terms flips a document without HIV terms") {
    CHECK(classify("prostitution and violence") == Label::Relevant);
    CHECK(classify("prostitution and policy") == Label::Irrelevant);
    CHECK(classify("prostitution and policy and hiv") == Label::Relevant);
}

TEST_CASE("confusion point definitions") {
    const auto p = boolquery::confusion_point(2, 1, 0, 7);
    CHECK(p.precision == doctest::Approx(2.0 / 3.0));
    CHECK(p.recall == 1.0);
    CHECK(p.fpr == doctest::Approx(1.0 / 8.0));
    CHECK(p.f1 == doctest::Approx(0.8));
    const auto none = boolquery::confusion_point(0, 0, 3, 7);
    CHECK(std::isnan(none.precision));
    CHECK(none.recall == 0.0);
    CHECK_FALSE(none.notes.empty());
    const auto no_rel = boolquery::confusion_point(0, 2, 0, 8);
    CHECK(std::isnan(no_rel.recall));
}

TEST_CASE("ten-document fixture enumerated by hand") {
    // text, label, expected Boolean decision
    const std::vector<std::tuple<std::string, Label, bool>> rows{
        {"HIV among female sex workers in Kenya", Label::Relevant, false},     // "sex workers": no exact phrase
        {"Prostitutes and HIV testing", Label::Relevant, true},
        {"Violence against FSW", Label::Relevant, true},
        {"Commercial sex and AIDS", Label::Irrelevant, true},
        {"Malaria bednets", Label::Irrelevant, false},
        {"Domestic violence in couples", Label::Irrelevant, false},
        {"Transactional sex and abuse", Label::Relevant, true},
        {"CSW switch programs", Label::Irrelevant, false},
        {"sw crimes", Label::Relevant, true},
        {"HIV incidence", Label::Irrelevant, false},
    };
    std::vector<corpus::Document> docs;
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& [text, label, hit] = rows[i];
        docs.push_back({"d" + std::to_string(i), text, "", label, std::nullopt});
        CHECK_MESSAGE(classify(text) == (hit ? Label::Relevant : Label::Irrelevant), text);
        if (hit) (label == Label::Relevant ? tp : fp)++;
        else (label == Label::Relevant ? fn : tn)++;
    }
    const auto p = boolquery::boolean_point(corpus::Corpus(docs), boolquery::BooleanQuery::builtin());
    CHECK(p.tp == 4);
    CHECK(p.fp == 1);
    CHECK(p.fn == 1);
    CHECK(p.tn == 4);
    CHECK(p.tp == tp);
    CHECK(p.fp == fp);
}

TEST_CASE("property: agrees with the reference matcher") {
    Rng rng(17);
    for (int i = 0; i < 3000; ++i) {
        const auto text = random_text(rng);
        CHECK_MESSAGE(classify(text) == ref_classify(text), text);
    }
}

TEST_CASE("property: adding text never flips relevant to irrelevant") {
    Rng rng(18);
    for (int i = 0; i < 2000; ++i) {
        const auto a = random_text(rng);
        if (classify(a) != Label::Relevant) continue;
        const auto b = random_text(rng);
        CHECK(classify(a + " " + b) == Label::Relevant);
        CHECK(classify(b + " " + a) == Label::Relevant);
    }
}

}  // TEST_SUITE

#include "litscreen/boolquery.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "litscreen/assets.hpp"
#include "litscreen/errors.hpp"

namespace litscreen::boolquery {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

bool is_letter(char c) { return c >= 'a' && c <= 'z'; }

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

double ratio(std::size_t num, std::size_t den) {
    return den == 0 ? kNaN : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

Term parse_term(std::string_view text) {
    auto body = trim(text);
    bool quoted = false;
    if (body.size() >= 2 && body.front() == '"' && body.back() == '"') {
        quoted = true;
        body = trim(body.substr(1, body.size() - 2));
    }
    Term term;
    if (!body.empty() && body.back() == '*') {
        term.kind = Term::Kind::Prefix;
        body = trim(body.substr(0, body.size() - 1));
    }
    std::istringstream in{normalize_text(body)};
    for (std::string w; in >> w;) {
        if (!std::all_of(w.begin(), w.end(), is_letter))
            throw ConfigError("keyword term '" + std::string(text) + "' must contain only letters");
        term.words.push_back(std::move(w));
    }
    if (term.words.empty()) throw ConfigError("empty keyword term '" + std::string(text) + "'");
    if (term.words.size() > 1 && !quoted)
        throw ConfigError("multi-word keyword '" + std::string(text) + "' must be quoted");
    return term;
}

BooleanQuery BooleanQuery::parse(std::string_view text) {
    BooleanQuery q;
    q.fsw.name = "fsw";
    q.hiv.name = "hiv";
    q.violence.name = "violence";
    KeywordCategory* current = nullptr;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto body = trim(line);
        if (body.empty() || body.front() == '#') continue;
        if (body.front() == '[') {
            if (body.back() != ']')
                throw ConfigError("keyword config line " + std::to_string(line_no) + ": malformed section header");
            const auto name = normalize_text(body.substr(1, body.size() - 2));
            if (name == "fsw")
                current = &q.fsw;
            else if (name == "hiv")
                current = &q.hiv;
            else if (name == "violence")
                current = &q.violence;
            else
                throw ConfigError("keyword config line " + std::to_string(line_no) + ": unknown section '" + name +
                                  "'");
            continue;
        }
        if (!current)
            throw ConfigError("keyword config line " + std::to_string(line_no) + ": term outside a section");
        try {
            current->terms.push_back(parse_term(body));
        } catch (const ConfigError& e) {
            throw ConfigError("keyword config line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    for (const auto* cat : {&q.fsw, &q.hiv, &q.violence})
        if (cat->terms.empty()) throw ConfigError("keyword config: category '" + cat->name + "' has no terms");
    return q;
}

BooleanQuery BooleanQuery::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open keyword config '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

const BooleanQuery& BooleanQuery::builtin() {
    static const BooleanQuery q = parse(assets::keyword_config());
    return q;
}

std::string normalize_text(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    for (const char ch : text) {
        if (is_space(ch)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(ch >= 'A' && ch <= 'Z' ? static_cast<char>(ch - 'A' + 'a') : ch);
    }
    return out;
}

MatchText MatchText::of(const corpus::Document& doc) {
    std::string text = doc.title + " " + doc.abstract;
    return {textprep::tokenize(text), normalize_text(text)};
}

bool match_term(const textprep::Tokens& tokens, std::string_view normalized, const Term& term) {
    if (!term.is_phrase()) {
        const auto& w = term.words.front();
        if (term.kind == Term::Kind::Exact)
            return std::find(tokens.begin(), tokens.end(), w) != tokens.end();
        return std::any_of(tokens.begin(), tokens.end(), [&](const std::string& t) { return t.starts_with(w); });
    }
    std::string phrase = term.words.front();
    for (std::size_t i = 1; i < term.words.size(); ++i) phrase.append(" ").append(term.words[i]);
    for (auto pos = normalized.find(phrase); pos != std::string_view::npos; pos = normalized.find(phrase, pos + 1)) {
        const bool left_ok = pos == 0 || !is_letter(normalized[pos - 1]);
        const auto end = pos + phrase.size();
        const bool right_ok =
            term.kind == Term::Kind::Prefix || end == normalized.size() || !is_letter(normalized[end]);
        if (left_ok && right_ok) return true;
    }
    return false;
}

bool match_category(const textprep::Tokens& tokens, std::string_view normalized, const KeywordCategory& category) {
    return std::any_of(category.terms.begin(), category.terms.end(),
                       [&](const Term& t) { return match_term(tokens, normalized, t); });
}

corpus::Label classify_boolean(const corpus::Document& doc, const BooleanQuery& query) {
    const auto text = MatchText::of(doc);
    const bool fsw = match_category(text.tokens, text.normalized, query.fsw);
    const bool relevant = fsw && (match_category(text.tokens, text.normalized, query.hiv) ||
                                  match_category(text.tokens, text.normalized, query.violence));
    return relevant ? corpus::Label::Relevant : corpus::Label::Irrelevant;
}

BooleanPoint confusion_point(std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn) {
    BooleanPoint p;
    p.tp = tp;
    p.fp = fp;
    p.fn = fn;
    p.tn = tn;
    p.precision = ratio(tp, tp + fp);
    p.recall = ratio(tp, tp + fn);
    p.tpr = p.recall;
    p.fpr = ratio(fp, fp + tn);
    if (tp + fp == 0) p.notes.push_back("precision undefined: no documents retrieved");
    if (tp + fn == 0) p.notes.push_back("recall undefined: no relevant documents");
    if (fp + tn == 0) p.notes.push_back("false positive rate undefined: no irrelevant documents");
    if (std::isnan(p.precision) || std::isnan(p.recall))
        p.f1 = kNaN;
    else
        p.f1 = p.precision + p.recall > 0.0 ? 2.0 * p.precision * p.recall / (p.precision + p.recall) : 0.0;
    return p;
}

BooleanPoint boolean_point(const corpus::Corpus& corpus, const BooleanQuery& query) {
    const auto labels = corpus.labels("Boolean evaluation");
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const bool predicted = classify_boolean(corpus[i], query) == corpus::Label::Relevant;
        const bool actual = labels[i] == corpus::Label::Relevant;
        if (predicted && actual)
            ++tp;
        else if (predicted)
            ++fp;
        else if (actual)
            ++fn;
        else
            ++tn;
    }
    return confusion_point(tp, fp, fn, tn);
}

}  // namespace litscreen::boolquery

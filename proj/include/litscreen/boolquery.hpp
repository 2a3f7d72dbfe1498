#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "litscreen/corpus.hpp"
#include "litscreen/textprep.hpp"

namespace litscreen::boolquery {

struct Term {
    enum class Kind { Exact, Prefix };
    Kind kind = Kind::Exact;
    /// One word for token terms, several for phrases. For a prefix phrase the
    /// last word is the prefix.
    std::vector<std::string> words;

    bool is_phrase() const noexcept { return words.size() > 1; }
    bool operator==(const Term&) const = default;
};

struct KeywordCategory {
    std::string name;
    std::vector<Term> terms;
};

/// Hard-wired structure FSW AND (HIV OR Violence).
struct BooleanQuery {
    KeywordCategory fsw;
    KeywordCategory hiv;
    KeywordCategory violence;

    /// Keyword file with [fsw], [hiv] and [violence] sections. Throws ConfigError.
    static BooleanQuery parse(std::string_view text);
    static BooleanQuery load(const std::filesystem::path& path);
    static const BooleanQuery& builtin();
};

/// Parses one keyword line: word, word*, "a phrase", "a phrase*".
Term parse_term(std::string_view text);

/// Lowercases and collapses whitespace runs into single spaces.
std::string normalize_text(std::string_view text);

/// Text a document is matched against: its unstemmed tokens and the
/// normalized title + abstract.
struct MatchText {
    textprep::Tokens tokens;
    std::string normalized;

    static MatchText of(const corpus::Document& doc);
};

bool match_term(const textprep::Tokens& tokens, std::string_view normalized, const Term& term);
bool match_category(const textprep::Tokens& tokens, std::string_view normalized, const KeywordCategory& category);

corpus::Label classify_boolean(const corpus::Document& doc, const BooleanQuery& query);

struct BooleanPoint {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    std::size_t tn = 0;
    /// NaN when undefined (no retrieved / no relevant documents).
    double precision = 0.0;
    double recall = 0.0;
    double fpr = 0.0;
    double tpr = 0.0;
    double f1 = 0.0;
    std::vector<std::string> notes;
};

BooleanPoint confusion_point(std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn);

/// Single operating point of the Boolean classifier over a labeled corpus.
BooleanPoint boolean_point(const corpus::Corpus& corpus, const BooleanQuery& query);

}  // namespace litscreen::boolquery

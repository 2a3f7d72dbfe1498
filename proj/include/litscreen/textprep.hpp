#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "litscreen/corpus.hpp"

namespace litscreen::textprep {

using Tokens = std::vector<std::string>;

/// Normalized tokens of one document; every token matches [a-z]+.
struct TokenSequence {
    std::string doc_id;
    Tokens tokens;

    bool operator==(const TokenSequence&) const = default;
};

/// Splits on whitespace, lowercases, strips every character that is not an
/// ASCII letter and drops pieces that end up empty.
Tokens tokenize(std::string_view text);

/// Inflected form -> lemma lookup. Forms absent from the table pass through.
class LemmaTable {
public:
    LemmaTable() = default;
    /// Throws ConfigError on empty or non-[a-z] forms/lemmas.
    explicit LemmaTable(std::unordered_map<std::string, std::string> entries);

    /// Tab-separated "form<TAB>lemma" lines; '#' starts a comment line.
    static LemmaTable parse(std::string_view text);
    static LemmaTable load(const std::filesystem::path& path);
    /// The bundled default table.
    static const LemmaTable& builtin();

    std::string_view lookup(std::string_view form) const;
    std::size_t size() const noexcept { return entries_.size(); }
    /// SHA-256 over the sorted entries; identifies the table in model provenance.
    const std::string& content_hash() const noexcept { return hash_; }

private:
    std::unordered_map<std::string, std::string> entries_;
    std::string hash_;
};

Tokens lemmatize(const Tokens& tokens, const LemmaTable& table);

/// Porter (1980) stem of a single lowercase word, following Martin Porter's
/// reference implementation.
std::string porter_stem(std::string_view word);

Tokens stem(const Tokens& tokens);

/// stem(lemmatize(tokenize(title + " " + abstract)))
TokenSequence preprocess(const corpus::Document& doc, const LemmaTable& table);

std::vector<TokenSequence> preprocess_all(const corpus::Corpus& corpus, const LemmaTable& table);

}  // namespace litscreen::textprep

#include "litscreen/textprep.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "litscreen/assets.hpp"
#include "litscreen/errors.hpp"
#include "litscreen/hash.hpp"

namespace litscreen::textprep {

namespace {

bool is_ascii_space(unsigned char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_lower_word(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= 'a' && c <= 'z'; });
}

}  // namespace

Tokens tokenize(std::string_view text) {
    Tokens out;
    std::string piece;
    auto flush = [&] {
        if (!piece.empty()) {
            out.push_back(std::move(piece));
            piece.clear();
        }
    };
    for (const char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        if (is_ascii_space(c)) {
            flush();
        } else if (c >= 'A' && c <= 'Z') {
            piece.push_back(static_cast<char>(c - 'A' + 'a'));
        } else if (c >= 'a' && c <= 'z') {
            piece.push_back(ch);
        }
        // everything else (digits, punctuation, UTF-8 bytes) is dropped
    }
    flush();
    return out;
}

LemmaTable::LemmaTable(std::unordered_map<std::string, std::string> entries) : entries_(std::move(entries)) {
    std::vector<std::pair<std::string_view, std::string_view>> sorted;
    sorted.reserve(entries_.size());
    for (const auto& [form, lemma] : entries_) {
        if (!is_lower_word(form)) throw ConfigError("lemma table: invalid form '" + form + "'");
        if (!is_lower_word(lemma))
            throw ConfigError("lemma table: form '" + form + "' maps to invalid lemma '" + lemma + "'");
        sorted.emplace_back(form, lemma);
    }
    std::sort(sorted.begin(), sorted.end());
    std::string canonical;
    for (const auto& [form, lemma] : sorted) {
        canonical.append(form);
        canonical.push_back('\t');
        canonical.append(lemma);
        canonical.push_back('\n');
    }
    hash_ = sha256_hex(canonical);
}

LemmaTable LemmaTable::parse(std::string_view text) {
    std::unordered_map<std::string, std::string> entries;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw ConfigError("lemma table line " + std::to_string(line_no) + ": expected form<TAB>lemma");
        auto form = line.substr(0, tab);
        auto lemma = line.substr(tab + 1);
        if (!is_lower_word(form) || !is_lower_word(lemma))
            throw ConfigError("lemma table line " + std::to_string(line_no) +
                              ": form and lemma must be non-empty lowercase words");
        entries.insert_or_assign(std::move(form), std::move(lemma));
    }
    return LemmaTable(std::move(entries));
}

LemmaTable LemmaTable::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open lemma table '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

const LemmaTable& LemmaTable::builtin() {
    static const LemmaTable table = parse(assets::lemma_table());
    return table;
}

std::string_view LemmaTable::lookup(std::string_view form) const {
    const auto it = entries_.find(std::string(form));
    return it == entries_.end() ? form : std::string_view(it->second);
}

Tokens lemmatize(const Tokens& tokens, const LemmaTable& table) {
    Tokens out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) out.emplace_back(table.lookup(t));
    return out;
}

Tokens stem(const Tokens& tokens) {
    Tokens out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) out.push_back(porter_stem(t));
    return out;
}

TokenSequence preprocess(const corpus::Document& doc, const LemmaTable& table) {
    std::string text;
    text.reserve(doc.title.size() + 1 + doc.abstract.size());
    text.append(doc.title).append(" ").append(doc.abstract);
    return {doc.id, stem(lemmatize(tokenize(text), table))};
}

std::vector<TokenSequence> preprocess_all(const corpus::Corpus& corpus, const LemmaTable& table) {
    std::vector<TokenSequence> out;
    out.reserve(corpus.size());
    for (const auto& d : corpus.documents()) out.push_back(preprocess(d, table));
    return out;
}

}  // namespace litscreen::textprep

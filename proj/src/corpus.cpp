#include "litscreen/corpus.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "litscreen/errors.hpp"
#include "litscreen/rng.hpp"

namespace litscreen::corpus {

namespace {

std::string lowercase(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

bool is_blank(std::string_view s) { return trim(s).empty(); }

std::string line_error(std::size_t line, std::string_view what) {
    return "line " + std::to_string(line) + ": " + std::string(what);
}

// One CSV record with the physical line it started on.
struct CsvRecord {
    std::size_t line = 0;
    std::vector<std::string> fields;
};

// RFC 4180: comma separated, '"' quoting with '""' escapes, quoted fields may
// span lines.
std::vector<CsvRecord> parse_csv(std::string_view text) {
    std::vector<CsvRecord> records;
    std::size_t line = 1;
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        CsvRecord rec;
        rec.line = line;
        std::string field;
        bool in_quotes = false;
        bool field_was_quoted = false;
        bool record_done = false;
        while (i < n && !record_done) {
            const char c = text[i];
            if (in_quotes) {
                if (c == '"') {
                    if (i + 1 < n && text[i + 1] == '"') {
                        field.push_back('"');
                        i += 2;
                        continue;
                    }
                    in_quotes = false;
                    ++i;
                    continue;
                }
                if (c == '\n') ++line;
                field.push_back(c);
                ++i;
                continue;
            }
            switch (c) {
                case '"':
                    if (!field.empty() || field_was_quoted)
                        throw IoError(line_error(line, "unexpected quote inside unquoted CSV field"));
                    in_quotes = true;
                    field_was_quoted = true;
                    ++i;
                    break;
                case ',':
                    rec.fields.push_back(std::move(field));
                    field.clear();
                    field_was_quoted = false;
                    ++i;
                    break;
                case '\r':
                    ++i;
                    break;
                case '\n':
                    ++line;
                    ++i;
                    record_done = true;
                    break;
                default:
                    if (field_was_quoted)
                        throw IoError(line_error(line, "text after closing quote in CSV field"));
                    field.push_back(c);
                    ++i;
            }
        }
        if (in_quotes) throw IoError(line_error(rec.line, "unterminated quoted CSV field"));
        rec.fields.push_back(std::move(field));
        const bool empty_line = rec.fields.size() == 1 && rec.fields[0].empty();
        if (!empty_line) records.push_back(std::move(rec));
    }
    return records;
}

std::string csv_quote(std::string_view s) {
    const bool needs = s.find_first_of(",\"\r\n") != std::string_view::npos;
    if (!needs) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

struct RowSink {
    std::vector<Document> docs;
    std::unordered_map<std::string, std::size_t> first_line;
    LoadReport report;

    void add(Document doc, std::size_t line) {
        ++report.rows_read;
        if (doc.id.empty()) throw IoError(line_error(line, "empty id"));
        auto [it, inserted] = first_line.emplace(doc.id, line);
        if (!inserted)
            throw DataError(line_error(line, "duplicate id '" + doc.id + "' (first seen on line " +
                                                 std::to_string(it->second) + ")"));
        if (is_blank(doc.title) && is_blank(doc.abstract)) {
            ++report.excluded;
            report.excluded_ids.push_back(doc.id);
            return;
        }
        docs.push_back(std::move(doc));
    }
};

std::optional<Label> label_at(std::string_view text, std::size_t line) {
    try {
        return parse_label(text);
    } catch (const DataError& e) {
        throw IoError(line_error(line, e.what()));
    }
}

LoadResult parse_jsonl(std::string_view content) {
    RowSink sink;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= content.size()) {
        const auto eol = content.find('\n', pos);
        const auto raw = content.substr(pos, eol == std::string_view::npos ? std::string_view::npos
                                                                            : eol - pos);
        pos = eol == std::string_view::npos ? content.size() + 1 : eol + 1;
        ++line_no;
        if (is_blank(raw)) continue;

        nlohmann::json row;
        try {
            row = nlohmann::json::parse(raw);
        } catch (const nlohmann::json::parse_error& e) {
            throw IoError(line_error(line_no, std::string("malformed JSON: ") + e.what()));
        }
        if (!row.is_object()) throw IoError(line_error(line_no, "expected a JSON object"));

        auto text_field = [&](const char* key, bool required) -> std::optional<std::string> {
            const auto it = row.find(key);
            if (it == row.end()) {
                if (required) throw IoError(line_error(line_no, std::string("missing field '") + key + "'"));
                return std::nullopt;
            }
            if (it->is_null()) return std::string{};
            if (it->is_string()) return it->get<std::string>();
            if (it->is_number_integer()) return std::to_string(it->get<long long>());
            throw IoError(line_error(line_no, std::string("field '") + key + "' must be a string"));
        };

        Document doc;
        doc.id = *text_field("id", true);
        doc.title = *text_field("title", true);
        doc.abstract = *text_field("abstract", true);
        doc.label = label_at(*text_field("label", true), line_no);
        if (auto src = text_field("source", false); src && !src->empty()) doc.source = std::move(*src);
        sink.add(std::move(doc), line_no);
    }
    return {Corpus(std::move(sink.docs)), std::move(sink.report)};
}

LoadResult parse_csv_corpus(std::string_view content) {
    auto records = parse_csv(content);
    if (records.empty()) throw IoError("line 1: missing CSV header");

    constexpr std::array<std::string_view, 5> columns{"id", "title", "abstract", "label", "source"};
    std::array<std::optional<std::size_t>, 5> at{};
    const auto& header = records.front();
    for (std::size_t c = 0; c < header.fields.size(); ++c) {
        const auto name = lowercase(trim(header.fields[c]));
        for (std::size_t k = 0; k < columns.size(); ++k)
            if (name == columns[k]) at[k] = c;
    }
    for (std::size_t k = 0; k < 4; ++k)
        if (!at[k])
            throw IoError(line_error(header.line,
                                     "CSV header lacks required column '" + std::string(columns[k]) + "'"));

    RowSink sink;
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        if (rec.fields.size() != header.fields.size())
            throw IoError(line_error(rec.line, "expected " + std::to_string(header.fields.size()) +
                                                   " fields, found " + std::to_string(rec.fields.size())));
        Document doc;
        doc.id = std::string(trim(rec.fields[*at[0]]));
        doc.title = rec.fields[*at[1]];
        doc.abstract = rec.fields[*at[2]];
        doc.label = label_at(rec.fields[*at[3]], rec.line);
        if (at[4] && !rec.fields[*at[4]].empty()) doc.source = rec.fields[*at[4]];
        sink.add(std::move(doc), rec.line);
    }
    return {Corpus(std::move(sink.docs)), std::move(sink.report)};
}

}  // namespace

std::optional<Label> parse_label(std::string_view text) {
    const auto v = lowercase(trim(text));
    if (v.empty()) return std::nullopt;
    if (v == "relevant") return Label::Relevant;
    if (v == "irrelevant") return Label::Irrelevant;
    throw DataError("unknown label '" + std::string(text) + "' (expected relevant, irrelevant or blank)");
}

std::string_view label_name(Label label) noexcept {
    return label == Label::Relevant ? "relevant" : "irrelevant";
}

Corpus::Corpus(std::vector<Document> documents) : documents_(std::move(documents)) {
    by_id_.reserve(documents_.size());
    for (std::size_t i = 0; i < documents_.size(); ++i) {
        const auto& d = documents_[i];
        if (!by_id_.emplace(d.id, i).second) throw DataError("duplicate document id '" + d.id + "'");
        if (!d.label)
            ++counts_.unlabeled;
        else if (*d.label == Label::Relevant)
            ++counts_.relevant;
        else
            ++counts_.irrelevant;
    }
    counts_.total = documents_.size();
}

std::optional<std::size_t> Corpus::index_of(std::string_view id) const {
    const auto it = by_id_.find(std::string(id));
    if (it == by_id_.end()) return std::nullopt;
    return it->second;
}

std::vector<Label> Corpus::labels(std::string_view purpose) const {
    std::vector<Label> out;
    out.reserve(documents_.size());
    for (const auto& d : documents_) {
        if (!d.label)
            throw DataError(std::string(purpose) + " requires labels, but document '" + d.id +
                            "' is unlabeled");
        out.push_back(*d.label);
    }
    return out;
}

Corpus Corpus::subset(std::span<const std::size_t> indices) const {
    std::vector<Document> docs;
    docs.reserve(indices.size());
    for (auto i : indices) docs.push_back(documents_.at(i));
    return Corpus(std::move(docs));
}

Format format_from_path(const std::filesystem::path& path) {
    const auto ext = lowercase(path.extension().string());
    if (ext == ".jsonl" || ext == ".json" || ext == ".ndjson") return Format::Jsonl;
    if (ext == ".csv") return Format::Csv;
    throw ConfigError("cannot infer corpus format from '" + path.string() + "' (use .jsonl or .csv)");
}

std::string LoadReport::summary() const {
    std::ostringstream os;
    os << "read " << rows_read << " rows, kept " << rows_read - excluded << ", " << excluded
       << " excluded (empty title and abstract)";
    return os.str();
}

LoadResult parse_corpus(std::string_view content, Format format) {
    return format == Format::Jsonl ? parse_jsonl(content) : parse_csv_corpus(content);
}

LoadResult load_corpus(const std::filesystem::path& path, Format format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open corpus file '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_corpus(buf.str(), format);
    } catch (const IoError& e) {
        throw IoError(path.string() + ": " + e.what());
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

LoadResult load_corpus(const std::filesystem::path& path) {
    return load_corpus(path, format_from_path(path));
}

std::string serialize_corpus(const Corpus& corpus, Format format) {
    std::string out;
    if (format == Format::Jsonl) {
        for (const auto& d : corpus.documents()) {
            nlohmann::ordered_json row;
            row["id"] = d.id;
            row["title"] = d.title;
            row["abstract"] = d.abstract;
            row["label"] = d.label ? std::string(label_name(*d.label)) : std::string{};
            if (d.source) row["source"] = *d.source;
            out += row.dump();
            out += '\n';
        }
        return out;
    }
    out = "id,title,abstract,label,source\n";
    for (const auto& d : corpus.documents()) {
        out += csv_quote(d.id) + ',' + csv_quote(d.title) + ',' + csv_quote(d.abstract) + ',' +
               (d.label ? std::string(label_name(*d.label)) : std::string{}) + ',' +
               csv_quote(d.source.value_or("")) + '\n';
    }
    return out;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path, Format format) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write corpus file '" + path.string() + "'");
    out << serialize_corpus(corpus, format);
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::vector<std::size_t> SplitPlan::validation_rows(std::size_t fold) const {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < fold_of.size(); ++i)
        if (fold_of[i] == fold) rows.push_back(i);
    return rows;
}

std::vector<std::size_t> SplitPlan::training_rows(std::size_t fold) const {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < fold_of.size(); ++i)
        if (fold_of[i] != fold) rows.push_back(i);
    return rows;
}

SplitPlan stratified_kfold(std::span<const Label> labels, std::size_t k, std::uint64_t seed) {
    if (k < 2) throw ConfigError("k-fold requires k >= 2, got " + std::to_string(k));
    std::array<std::vector<std::size_t>, 2> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i)
        by_class[static_cast<std::size_t>(labels[i])].push_back(i);
    for (std::size_t c = 0; c < 2; ++c) {
        if (by_class[c].empty())
            throw DataError("degenerate stratification: no '" + std::string(label_name(static_cast<Label>(c))) +
                            "' documents");
    }
    if (labels.size() < k)
        throw DataError("degenerate stratification: " + std::to_string(labels.size()) + " documents for k=" +
                        std::to_string(k) + " folds");

    SplitPlan plan;
    plan.k = k;
    plan.seed = seed;
    plan.fold_of.assign(labels.size(), 0);
    std::size_t next_fold = 0;
    // Relevant first, then irrelevant, each with its own stream.
    for (const std::size_t c : {std::size_t{1}, std::size_t{0}}) {
        auto& members = by_class[c];
        Rng rng(derive_seed(seed, c));
        rng.shuffle(std::span<std::size_t>(members));
        for (auto idx : members) {
            plan.fold_of[idx] = next_fold;
            next_fold = (next_fold + 1) % k;
        }
    }
    return plan;
}

SplitPlan stratified_kfold(const Corpus& corpus, std::size_t k, std::uint64_t seed) {
    const auto labels = corpus.labels("stratified k-fold");
    auto plan = stratified_kfold(std::span<const Label>(labels), k, seed);
    plan.fold_by_id.reserve(corpus.size());
    for (std::size_t i = 0; i < corpus.size(); ++i) plan.fold_by_id.emplace(corpus[i].id, plan.fold_of[i]);
    return plan;
}

std::pair<std::size_t, std::size_t> stratified_take(std::size_t relevant, std::size_t irrelevant,
                                                    double fraction) {
    const auto n = static_cast<double>(relevant + irrelevant);
    const auto total = static_cast<std::size_t>(std::llround(fraction * n));
    const double share_rel = fraction * static_cast<double>(relevant);
    const double share_irr = fraction * static_cast<double>(irrelevant);
    auto take_rel = static_cast<std::size_t>(std::floor(share_rel));
    auto take_irr = static_cast<std::size_t>(std::floor(share_irr));
    // Largest remainder; ties go to the minority (relevant) class.
    while (take_rel + take_irr < total) {
        const double rem_rel = take_rel < relevant ? share_rel - static_cast<double>(take_rel) : -1.0;
        const double rem_irr = take_irr < irrelevant ? share_irr - static_cast<double>(take_irr) : -1.0;
        if (rem_rel >= rem_irr)
            ++take_rel;
        else
            ++take_irr;
    }
    return {take_rel, take_irr};
}

Subsample subsample_training(const Corpus& corpus, double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction <= 1.0))
        throw ConfigError("training fraction must lie in (0, 1], got " + std::to_string(fraction));
    const auto labels = corpus.labels("training subsample");
    std::array<std::vector<std::size_t>, 2> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i)
        by_class[static_cast<std::size_t>(labels[i])].push_back(i);

    const auto [take_rel, take_irr] = stratified_take(by_class[1].size(), by_class[0].size(), fraction);
    std::vector<bool> in_train(corpus.size(), false);
    const std::array<std::size_t, 2> take{take_irr, take_rel};
    for (std::size_t c = 0; c < 2; ++c) {
        auto& members = by_class[c];
        Rng rng(derive_seed(seed, 100 + c));
        rng.shuffle(std::span<std::size_t>(members));
        for (std::size_t t = 0; t < take[c]; ++t) in_train[members[t]] = true;
    }
    std::vector<std::size_t> train_idx;
    std::vector<std::size_t> rest_idx;
    for (std::size_t i = 0; i < corpus.size(); ++i) (in_train[i] ? train_idx : rest_idx).push_back(i);
    return {corpus.subset(train_idx), corpus.subset(rest_idx)};
}

}  // namespace litscreen::corpus

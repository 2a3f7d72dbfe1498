#include "run_config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "litscreen/errors.hpp"

namespace litscreen::cli {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void bad(std::string_view key, const std::string& value, std::string_view want) {
    throw ConfigError("config key '" + std::string(key) + "': expected " + std::string(want) + ", got '" + value +
                      "'");
}

template <typename T>
T parse_number(std::string_view key, const std::string& value, std::string_view want) {
    T out{};
    const auto* end = value.data() + value.size();
    const auto res = std::from_chars(value.data(), end, out);
    if (value.empty() || res.ec != std::errc{} || res.ptr != end) bad(key, value, want);
    return out;
}

}  // namespace

const std::vector<KeySpec>& known_keys() {
    static const std::vector<KeySpec> keys = {
        {"corpus", "", "corpus file (.jsonl or .csv); output path for gen-synthetic"},
        {"format", "auto", "corpus format: auto, jsonl or csv"},
        {"lemmas", "", "lemma table (form<TAB>lemma); empty = bundled"},
        {"clusters", "", "cluster config; empty = bundled"},
        {"keywords", "", "keyword config; empty = bundled"},
        {"recipes", "model1,model2,model3", "comma-separated recipes: model1, model2, model3, model3:N"},
        {"n_top", "250", "N for a bare model3 recipe (comma list expands to several)"},
        {"k", "5", "cross-validation folds"},
        {"seed", "", "master seed (required for train, evaluate, sensitivity)"},
        {"out", "out", "output directory"},
        {"model", "", "model file to read (rank, audit)"},
        {"n_trees", "500", "trees per forest"},
        {"mtry", "0", "features tried per split; 0 = ceil(sqrt(p))"},
        {"max_depth", "", "maximum tree depth; empty = unlimited"},
        {"min_leaf", "1", "minimum rows per leaf"},
        {"balance", "downsample", "per-tree sampling: downsample or none"},
        {"threads", "1", "worker threads; 0 = all cores"},
        {"min_df", "1", "minimum document frequency for the vocabulary"},
        {"tscore", "welch", "token t-statistic: welch or raw"},
        {"scope", "nested", "feature fitting in cross-validation: nested or pooled"},
        {"include_cluster_tokens", "false", "allow cluster member tokens among the top-N"},
        {"pr_integrator", "trapezoid", "AUC-PR integrator: trapezoid or ap"},
        {"target_recall", "0.8", "recall target for the workload report"},
        {"cutoffs", "0.5", "comma-separated probability cutoffs for operating points"},
        {"fractions", "0.01,0.02,0.05,0.1,0.2,0.4,0.6,0.8", "training fractions for sensitivity"},
        {"replicates", "5", "replicates per sensitivity fraction"},
        {"audit_high", "0.9", "flag irrelevant-labeled documents with p_hat >= this"},
        {"audit_low", "0.1", "flag relevant-labeled documents with p_hat <= this"},
        {"svg", "false", "also write SVG curve overlays"},
        {"n_documents", "10000", "gen-synthetic: corpus size"},
        {"relevant_share", "0.0909090909090909", "gen-synthetic: share of relevant documents"},
        {"n_planted", "100", "gen-synthetic: planted discriminative tokens"},
        {"noise_vocabulary", "3000", "gen-synthetic: noise word count"},
    };
    return keys;
}

RunConfig::RunConfig() {
    for (const auto& k : known_keys()) values_.emplace(std::string(k.name), std::string(k.fallback));
}

void RunConfig::merge_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto body = trim(line);
        if (body.empty() || body.front() == '#') continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected key = value");
        const auto key = trim(std::string_view(body).substr(0, eq));
        if (!values_.contains(key))
            throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
        values_[key] = trim(std::string_view(body).substr(eq + 1));
    }
}

void RunConfig::set(std::string_view key, std::string value) {
    const auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("unknown config key '" + std::string(key) + "'");
    it->second = trim(value);
}

const std::string& RunConfig::text(std::string_view key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("unknown config key '" + std::string(key) + "'");
    return it->second;
}

std::size_t RunConfig::size(std::string_view key) const {
    return parse_number<std::size_t>(key, text(key), "a non-negative integer");
}

std::uint64_t RunConfig::u64(std::string_view key) const {
    return parse_number<std::uint64_t>(key, text(key), "a non-negative integer");
}

double RunConfig::real(std::string_view key) const { return parse_number<double>(key, text(key), "a number"); }

bool RunConfig::flag(std::string_view key) const {
    const auto& v = text(key);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off" || v.empty()) return false;
    bad(key, v, "true or false");
}

std::optional<std::size_t> RunConfig::optional_size(std::string_view key) const {
    if (empty(key)) return std::nullopt;
    return size(key);
}

std::vector<std::string> RunConfig::words(std::string_view key) const {
    std::vector<std::string> out;
    std::stringstream ss(text(key));
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::vector<double> RunConfig::reals(std::string_view key) const {
    std::vector<double> out;
    for (const auto& w : words(key)) out.push_back(parse_number<double>(key, w, "a comma-separated list of numbers"));
    return out;
}

void RunConfig::write(std::ostream& out) const {
    for (const auto& k : known_keys()) out << k.name << " = " << text(k.name) << '\n';
}

}  // namespace litscreen::cli

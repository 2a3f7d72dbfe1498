#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace litscreen::cli {

struct KeySpec {
    std::string_view name;
    std::string_view fallback;
    std::string_view help;
};

/// Every recognised config key, in echo order.
const std::vector<KeySpec>& known_keys();

/// Flat key = value settings. Values stay text until a typed getter parses
/// them, so the echo reproduces exactly what the run used.
class RunConfig {
public:
    RunConfig();

    /// Lines "key = value"; '#' starts a comment. Unknown keys are errors.
    void merge_file(const std::filesystem::path& path);
    void set(std::string_view key, std::string value);

    const std::string& text(std::string_view key) const;
    bool empty(std::string_view key) const { return text(key).empty(); }

    std::size_t size(std::string_view key) const;
    std::uint64_t u64(std::string_view key) const;
    double real(std::string_view key) const;
    bool flag(std::string_view key) const;
    std::optional<std::size_t> optional_size(std::string_view key) const;
    std::vector<double> reals(std::string_view key) const;
    std::vector<std::string> words(std::string_view key) const;

    void write(std::ostream& out) const;

private:
    std::map<std::string, std::string, std::less<>> values_;
};

}  // namespace litscreen::cli

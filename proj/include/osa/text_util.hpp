#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace osa {

/// Raised for malformed input files; carries the 1-based line number when known.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& source, int line, const std::string& msg);
    explicit ConfigError(const std::string& msg);

    int line() const { return line_; }

private:
    int line_ = 0;
};

std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

// Strips '#' comments and surrounding whitespace.
std::string strip_comment(std::string_view line);

double parse_double(std::string_view s);
long long parse_int(std::string_view s);
std::vector<int> parse_int_list(std::string_view s);
std::vector<double> parse_double_list(std::string_view s);

/// A line of `key=value` tokens, optionally led by a bare keyword
/// (e.g. `channel p_ii=0.9 p_bi=0.1`).
struct KeyValueLine {
    std::string keyword;
    std::map<std::string, std::string> values;
    std::vector<std::string> positional;

    bool has(const std::string& key) const { return values.count(key) != 0; }
    std::optional<std::string> get(const std::string& key) const;
    const std::string& require(const std::string& key) const;
};

KeyValueLine parse_key_values(std::string_view line);

std::string read_file(const std::string& path);

/// 64-bit FNV-1a; stable across platforms, used for config fingerprints.
std::uint64_t fnv1a64(std::string_view bytes);

std::string hex64(std::uint64_t v);

} // namespace osa

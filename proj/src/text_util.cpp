#include "osa/text_util.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace osa {

ConfigError::ConfigError(const std::string& source, int line, const std::string& msg)
    : std::runtime_error(source + ":" + std::to_string(line) + ": " + msg), line_(line) {}

ConfigError::ConfigError(const std::string& msg) : std::runtime_error(msg) {}

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) {
            break;
        }
        start = pos + 1;
    }
    return out;
}

std::string strip_comment(std::string_view line) {
    const auto hash = line.find('#');
    return trim(line.substr(0, hash));
}

double parse_double(std::string_view s) {
    const std::string t = trim(s);
    if (t.empty()) {
        throw std::invalid_argument("empty number");
    }
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(t, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument("not a number: '" + t + "'");
    }
    if (used != t.size()) {
        throw std::invalid_argument("not a number: '" + t + "'");
    }
    return v;
}

long long parse_int(std::string_view s) {
    const std::string t = trim(s);
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
        throw std::invalid_argument("not an integer: '" + t + "'");
    }
    return v;
}

std::vector<int> parse_int_list(std::string_view s) {
    std::vector<int> out;
    if (trim(s).empty()) {
        return out;
    }
    for (const auto& tok : split(s, ',')) {
        out.push_back(static_cast<int>(parse_int(tok)));
    }
    return out;
}

std::vector<double> parse_double_list(std::string_view s) {
    std::vector<double> out;
    if (trim(s).empty()) {
        return out;
    }
    for (const auto& tok : split(s, ',')) {
        out.push_back(parse_double(tok));
    }
    return out;
}

std::optional<std::string> KeyValueLine::get(const std::string& key) const {
    const auto it = values.find(key);
    if (it == values.end()) {
        return std::nullopt;
    }
    return it->second;
}

const std::string& KeyValueLine::require(const std::string& key) const {
    const auto it = values.find(key);
    if (it == values.end()) {
        throw std::invalid_argument("missing field '" + key + "'");
    }
    return it->second;
}

KeyValueLine parse_key_values(std::string_view line) {
    KeyValueLine out;
    std::istringstream in{std::string(line)};
    std::string tok;
    bool first = true;
    while (in >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) {
            if (first) {
                out.keyword = tok;
            } else {
                out.positional.push_back(tok);
            }
        } else {
            const std::string key = tok.substr(0, eq);
            if (key.empty()) {
                throw std::invalid_argument("empty key in '" + tok + "'");
            }
            if (out.values.count(key) != 0) {
                throw std::invalid_argument("duplicate field '" + key + "'");
            }
            out.values[key] = tok.substr(eq + 1);
        }
        first = false;
    }
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot open '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

} // namespace osa

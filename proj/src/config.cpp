#include "gazetag/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "gazetag/errors.hpp"

namespace gazetag {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

KeyValueConfig KeyValueConfig::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path.string());

    KeyValueConfig config;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        const std::size_t eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw ParseError(path.string(), line_no, "expected key = value");
        }
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (key.empty()) {
            throw ParseError(path.string(), line_no, "empty key");
        }
        config.values_[key] = value;
    }
    return config;
}

void KeyValueConfig::set(const std::string& key, std::string value) {
    values_[key] = std::move(value);
}

bool KeyValueConfig::has(const std::string& key) const {
    return values_.count(key) > 0;
}

std::string KeyValueConfig::get_string(const std::string& key,
                                       const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(it->second.data(),
                                     it->second.data() + it->second.size(), v);
    if (ec != std::errc() || ptr != it->second.data() + it->second.size()) {
        throw std::runtime_error("config key '" + key + "' is not a number: " +
                                 it->second);
    }
    return v;
}

int KeyValueConfig::get_int(const std::string& key, int fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    int v = 0;
    auto [ptr, ec] = std::from_chars(it->second.data(),
                                     it->second.data() + it->second.size(), v);
    if (ec != std::errc() || ptr != it->second.data() + it->second.size()) {
        throw std::runtime_error("config key '" + key + "' is not an integer: " +
                                 it->second);
    }
    return v;
}

std::uint64_t KeyValueConfig::get_uint64(const std::string& key,
                                         std::uint64_t fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(it->second.data(),
                                     it->second.data() + it->second.size(), v);
    if (ec != std::errc() || ptr != it->second.data() + it->second.size()) {
        throw std::runtime_error("config key '" + key + "' is not an integer: " +
                                 it->second);
    }
    return v;
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (it->second == "1" || it->second == "true" || it->second == "yes") return true;
    if (it->second == "0" || it->second == "false" || it->second == "no") return false;
    throw std::runtime_error("config key '" + key + "' is not a boolean: " + it->second);
}

std::vector<std::string> KeyValueConfig::get_list(const std::string& key) const {
    auto it = values_.find(key);
    std::vector<std::string> out;
    if (it == values_.end()) return out;
    std::stringstream ss(it->second);
    std::string item;
    while (std::getline(ss, item, ';')) {
        const std::string t = trim(item);
        if (!t.empty()) out.push_back(t);
    }
    return out;
}

std::string KeyValueConfig::canonical() const {
    std::ostringstream out;
    for (const auto& [key, value] : values_) {
        out << key << '=' << value << '\n';
    }
    return out.str();
}

std::string KeyValueConfig::hash() const {
    const std::string text = canonical();
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (char c : text) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::vector<std::string> output_header(const KeyValueConfig& config,
                                       std::uint64_t seed) {
    return {
        "gazetag_version=" + std::string(kVersion),
        "seed=" + std::to_string(seed),
        "config_hash=" + config.hash(),
    };
}

}  // namespace gazetag

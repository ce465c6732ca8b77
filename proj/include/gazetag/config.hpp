#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace gazetag {

inline constexpr std::string_view kVersion = "0.1.0";

/// Flat key = value configuration with dotted keys ("events.dispersion_px").
/// CLI flags override file entries; the canonical serialization (sorted
/// keys) feeds the config hash recorded in every output header.
class KeyValueConfig {
public:
    KeyValueConfig() = default;
    static KeyValueConfig from_file(const std::filesystem::path& path);

    void set(const std::string& key, std::string value);
    bool has(const std::string& key) const;

    std::string get_string(const std::string& key, const std::string& fallback = "") const;
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key, int fallback) const;
    std::uint64_t get_uint64(const std::string& key, std::uint64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<std::string> get_list(const std::string& key) const;  // ';' separated

    std::string canonical() const;
    std::string hash() const;  // FNV-1a of the canonical form, hex

    const std::map<std::string, std::string>& entries() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

/// Standard header lines (version, seed, config hash) embedded in every
/// output file so identical runs produce identical bytes.
std::vector<std::string> output_header(const KeyValueConfig& config,
                                       std::uint64_t seed);

}  // namespace gazetag

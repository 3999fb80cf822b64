#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace bruf::harness {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Flat `key = value` file with `[section]` headers. Keys inside a section
/// are addressed as "section.key". '#' and ';' start comments.
class Config {
public:
    static Config parse(std::istream& in, const std::string& source = "<config>");
    static Config parse_string(const std::string& text);
    static Config load(const std::filesystem::path& path);

    bool has(const std::string& key) const;
    void set(const std::string& key, std::string value);

    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    std::size_t get_size(const std::string& key) const;
    std::size_t get_size(const std::string& key, std::size_t fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<std::string> get_list(const std::string& key) const;
    std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback) const;
    std::vector<std::size_t> get_sizes(const std::string& key, const std::vector<std::size_t>& fallback) const;

    /// Keys that were never read; a typo in a config should not pass silently.
    std::vector<std::string> unread() const;
    void require_all_read() const;

    /// FNV-1a over the sorted key=value lines.
    std::uint64_t hash() const;
    std::string canonical() const;

    const std::map<std::string, std::string>& entries() const noexcept { return entries_; }

private:
    const std::string& raw(const std::string& key) const;
    std::map<std::string, std::string> entries_;
    mutable std::set<std::string> read_;
};

std::string to_hex(std::uint64_t v);

}  // namespace bruf::harness

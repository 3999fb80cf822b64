#include "bruf/harness/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace bruf::harness {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::string strip_comment(const std::string& line) {
    const auto pos = line.find_first_of("#;");
    return pos == std::string::npos ? line : line.substr(0, pos);
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
    T value{};
    const char* end = text.data() + text.size();
    const auto res = std::from_chars(text.data(), end, value);
    if (res.ec != std::errc{} || res.ptr != end)
        throw ConfigError("config: '" + key + "' expects a number, got '" + text + "'");
    return value;
}

}  // namespace

Config Config::parse(std::istream& in, const std::string& source) {
    Config cfg;
    std::string section;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string body = trim(strip_comment(line));
        if (body.empty()) continue;
        const std::string where = source + ":" + std::to_string(lineno);
        if (body.front() == '[') {
            if (body.back() != ']') throw ConfigError(where + ": unterminated section header");
            section = trim(body.substr(1, body.size() - 2));
            if (section.empty()) throw ConfigError(where + ": empty section name");
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
        const std::string key = trim(body.substr(0, eq));
        if (key.empty()) throw ConfigError(where + ": empty key");
        const std::string full = section.empty() ? key : section + "." + key;
        if (cfg.entries_.count(full)) throw ConfigError(where + ": duplicate key '" + full + "'");
        cfg.entries_[full] = trim(body.substr(eq + 1));
    }
    return cfg;
}

Config Config::parse_string(const std::string& text) {
    std::istringstream in(text);
    return parse(in);
}

Config Config::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path.string());
    return parse(in, path.string());
}

bool Config::has(const std::string& key) const { return entries_.count(key) != 0; }

void Config::set(const std::string& key, std::string value) { entries_[key] = std::move(value); }

const std::string& Config::raw(const std::string& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) throw ConfigError("config: missing key '" + key + "'");
    read_.insert(key);
    return it->second;
}

std::string Config::get_string(const std::string& key) const { return raw(key); }

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    return has(key) ? raw(key) : fallback;
}

double Config::get_double(const std::string& key) const { return parse_number<double>(key, raw(key)); }

double Config::get_double(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

std::size_t Config::get_size(const std::string& key) const { return parse_number<std::size_t>(key, raw(key)); }

std::size_t Config::get_size(const std::string& key, std::size_t fallback) const {
    return has(key) ? get_size(key) : fallback;
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t fallback) const {
    return has(key) ? parse_number<std::uint64_t>(key, raw(key)) : fallback;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string& v = raw(key);
    if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
    if (v == "false" || v == "no" || v == "off" || v == "0") return false;
    throw ConfigError("config: '" + key + "' expects a boolean, got '" + v + "'");
}

std::vector<std::string> Config::get_list(const std::string& key) const {
    std::vector<std::string> out;
    std::stringstream ss(raw(key));
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::vector<double> Config::get_doubles(const std::string& key, const std::vector<double>& fallback) const {
    if (!has(key)) return fallback;
    std::vector<double> out;
    for (const auto& s : get_list(key)) out.push_back(parse_number<double>(key, s));
    return out;
}

std::vector<std::size_t> Config::get_sizes(const std::string& key, const std::vector<std::size_t>& fallback) const {
    if (!has(key)) return fallback;
    std::vector<std::size_t> out;
    for (const auto& s : get_list(key)) out.push_back(parse_number<std::size_t>(key, s));
    return out;
}

std::vector<std::string> Config::unread() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : entries_)
        if (!read_.count(k)) out.push_back(k);
    return out;
}

void Config::require_all_read() const {
    const auto left = unread();
    if (left.empty()) return;
    std::string msg = "config: unknown key(s):";
    for (const auto& k : left) msg += " " + k;
    throw ConfigError(msg);
}

std::string Config::canonical() const {
    std::string out;
    for (const auto& [k, v] : entries_) out += k + "=" + v + "\n";
    return out;
}

std::uint64_t Config::hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string to_hex(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace bruf::harness

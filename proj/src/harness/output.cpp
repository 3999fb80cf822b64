#include "bruf/harness/output.hpp"

#include <json.hpp>

#include <fstream>
#include <stdexcept>

#ifndef BRUF_GIT_DESCRIBE
#define BRUF_GIT_DESCRIBE "unknown"
#endif

namespace bruf::harness {

std::string git_describe() { return BRUF_GIT_DESCRIBE; }

OutputDir::OutputDir(std::filesystem::path dir) : dir_(std::move(dir)) {
    if (dir_.empty()) return;
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw std::runtime_error("output: cannot create " + dir_.string() + ": " + ec.message());
}

void OutputDir::put(const std::string& name, const std::string& content) {
    if (dir_.empty()) return;
    const auto path = dir_ / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("output: cannot write " + path.string());
    out << content;
    if (!out) throw std::runtime_error("output: write failed for " + path.string());
}

void OutputDir::write(const std::string& name, const std::string& content) {
    put(name, content);
    files_.push_back(name);
}

void OutputDir::write_volatile(const std::string& name, const std::string& content) {
    put(name, content);
    volatile_files_.push_back(name);
}

void OutputDir::write_manifest(const std::string& scenario, const Config& config, std::uint64_t seed) const {
    nlohmann::ordered_json j;
    j["schema_version"] = kManifestSchemaVersion;
    j["scenario"] = scenario;
    j["config_hash"] = to_hex(config.hash());
    j["seed"] = seed;
    j["git_describe"] = git_describe();
    j["config"] = config.entries();
    j["files"] = files_;
    j["volatile_files"] = volatile_files_;
    if (dir_.empty()) return;
    std::ofstream out(dir_ / "manifest.json", std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("output: cannot write manifest in " + dir_.string());
    out << j.dump(2) << '\n';
}

}  // namespace bruf::harness

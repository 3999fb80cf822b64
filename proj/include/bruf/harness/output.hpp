#pragma once

#include "bruf/harness/config.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace bruf::harness {

/// Collects the artifacts of one subcommand and writes manifest.json last.
/// Files registered as volatile (wall-clock timings) are listed separately so
/// byte-for-byte comparisons can skip them.
class OutputDir {
public:
    /// An empty path disables writing; files are still listed.
    explicit OutputDir(std::filesystem::path dir);

    void write(const std::string& name, const std::string& content);
    void write_volatile(const std::string& name, const std::string& content);

    void write_manifest(const std::string& scenario, const Config& config, std::uint64_t seed) const;

    const std::vector<std::string>& files() const noexcept { return files_; }
    bool enabled() const noexcept { return !dir_.empty(); }
    const std::filesystem::path& path() const noexcept { return dir_; }

private:
    void put(const std::string& name, const std::string& content);

    std::filesystem::path dir_;
    std::vector<std::string> files_;
    std::vector<std::string> volatile_files_;
};

inline constexpr int kManifestSchemaVersion = 1;

std::string git_describe();

}  // namespace bruf::harness

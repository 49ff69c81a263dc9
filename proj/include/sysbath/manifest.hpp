// manifest.hpp: Run manifests: config snapshot, derived seeds, timestamps and a
// SHA-256 inventory of every emitted file.

#pragma once

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace sysbath {

inline constexpr const char* kArtifactVersion = "1.0.0";

// splitmix64 finalizer applied to seed + (index + 1)·φ64; recorded in manifests.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);
inline constexpr const char* kSeedMixDescription =
    "splitmix64(seed + (index + 1) * 0x9E3779B97F4A7C15)";

std::string sha256_file(const std::filesystem::path& path);
std::string sha256_bytes(const std::string& bytes);

std::string utc_timestamp();

struct Manifest {
    std::string command;
    nlohmann::json config;
    nlohmann::json points = nlohmann::json::array();
    std::string started_at;
    std::string finished_at;
    std::vector<std::filesystem::path> files;  // relative to the output directory
};

// Writes manifest.json into `dir`, checksumming every listed file.
void write_manifest(const std::filesystem::path& dir, const Manifest& manifest);

// Empty on success; otherwise one message per missing or mismatched file.
std::vector<std::string> verify_manifest(const std::filesystem::path& dir);

}  // namespace sysbath

// manifest.cpp: Checksums and manifest I/O.

#include "sysbath/manifest.hpp"

#include <openssl/evp.h>

#include <array>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace sysbath {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + (index + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

namespace {

class Sha256 {
public:
    Sha256() : ctx_(EVP_MD_CTX_new(), &EVP_MD_CTX_free) {
        if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1)
            throw std::runtime_error("sha256: init failed");
    }
    void update(const char* data, std::size_t n) {
        if (EVP_DigestUpdate(ctx_.get(), data, n) != 1) throw std::runtime_error("sha256: update failed");
    }
    std::string hex() {
        std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
        unsigned int len = 0;
        if (EVP_DigestFinal_ex(ctx_.get(), md.data(), &len) != 1) throw std::runtime_error("sha256: final failed");
        std::ostringstream os;
        for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
        return os.str();
    }

private:
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

}  // namespace

std::string sha256_bytes(const std::string& bytes) {
    Sha256 h;
    h.update(bytes.data(), bytes.size());
    return h.hex();
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    Sha256 h;
    std::array<char, 1 << 16> buf{};
    while (in) {
        in.read(buf.data(), buf.size());
        h.update(buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    return h.hex();
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

void write_manifest(const std::filesystem::path& dir, const Manifest& m) {
    nlohmann::json j;
    j["artifact_version"] = kArtifactVersion;
    j["command"] = m.command;
    j["config"] = m.config;
    j["seed_mix"] = kSeedMixDescription;
    j["points"] = m.points;
    j["started_at"] = m.started_at;
    j["finished_at"] = m.finished_at;
    j["files"] = nlohmann::json::array();
    for (const auto& rel : m.files) {
        const auto full = dir / rel;
        j["files"].push_back({{"path", rel.generic_string()},
                              {"bytes", std::filesystem::file_size(full)},
                              {"sha256", sha256_file(full)}});
    }
    std::ofstream out(dir / "manifest.json");
    if (!out) throw std::runtime_error("cannot write manifest in " + dir.string());
    out << j.dump(2) << "\n";
}

std::vector<std::string> verify_manifest(const std::filesystem::path& dir) {
    std::vector<std::string> problems;
    std::ifstream in(dir / "manifest.json");
    if (!in) return {"manifest.json missing"};
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        return {std::string("manifest.json unreadable: ") + e.what()};
    }
    for (const auto& f : j.at("files")) {
        const auto path = dir / f.at("path").get<std::string>();
        if (!std::filesystem::exists(path)) {
            problems.push_back("missing " + path.string());
            continue;
        }
        if (sha256_file(path) != f.at("sha256").get<std::string>()) problems.push_back("checksum mismatch " + path.string());
    }
    return problems;
}

}  // namespace sysbath

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace vli::manifest {

inline constexpr const char* kToolVersion = "0.1.0";

struct InputDigest {
    std::string path;
    std::string digest;  // fnv1a-64 of the file bytes, hex
    std::uint64_t bytes = 0;
};

// Provenance sidecar written next to every mutating command's output.
struct RunManifest {
    std::string tool_version = kToolVersion;
    std::string command_line;
    std::string config_hash;
    std::uint64_t seed = 0;
    std::vector<InputDigest> inputs;
    std::string started;
    std::string finished;
    std::uint64_t output_records = 0;

    std::string to_json() const;
};

std::uint64_t fnv1a64(const void* data, std::size_t len);
std::string fnv1a64_hex(const std::string& bytes);

// Digest of a file's bytes; throws ConfigError if unreadable.
InputDigest digest_file(const std::string& path);

std::string now_iso8601();

// Writes the manifest as "<output_path>.manifest.json".
void write_beside(const RunManifest& m, const std::string& output_path);

}  // namespace vli::manifest

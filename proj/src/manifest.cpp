#include "vli/manifest.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>

#include <json.hpp>

#include "vli/error.hpp"

namespace vli::manifest {

std::uint64_t fnv1a64(const void* data, std::size_t len) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < len; ++i) {
        hash ^= bytes[i];
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

std::string fnv1a64_hex(const std::string& bytes) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(bytes.data(), bytes.size())));
    return buf;
}

InputDigest digest_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open input for digest: " + path);
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    std::uint64_t total = 0;
    char buf[1 << 16];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        std::streamsize n = in.gcount();
        for (std::streamsize i = 0; i < n; ++i) {
            hash ^= static_cast<unsigned char>(buf[i]);
            hash *= 0x100000001b3ULL;
        }
        total += static_cast<std::uint64_t>(n);
    }
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(hash));
    return {path, hex, total};
}

std::string now_iso8601() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string RunManifest::to_json() const {
    nlohmann::json inputs_j = nlohmann::json::array();
    for (const auto& i : inputs) {
        inputs_j.push_back({{"path", i.path}, {"digest", i.digest}, {"bytes", i.bytes}});
    }
    nlohmann::json j{{"tool_version", tool_version},
                     {"command_line", command_line},
                     {"config_hash", config_hash},
                     {"seed", seed},
                     {"inputs", inputs_j},
                     {"started", started},
                     {"finished", finished},
                     {"output_records", output_records}};
    return j.dump(2);
}

void write_beside(const RunManifest& m, const std::string& output_path) {
    std::string path = output_path + ".manifest.json";
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write manifest: " + path);
    out << m.to_json() << '\n';
}

}  // namespace vli::manifest

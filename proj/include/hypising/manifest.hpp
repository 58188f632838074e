#pragma once

#include <chrono>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

// Run manifests: every CLI output references one; outputs are a pure
// function of (command, config, seed, input hashes).  The timestamp is
// informational and excluded from the determinism contract.

namespace hypising {

inline constexpr const char* kVersion = "0.1.0";

namespace detail {

inline std::uint64_t fnv1a(const std::string& bytes, std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace detail

struct RunManifest {
    std::string command;
    nlohmann::json config;
    std::uint64_t seed = 0;
    std::string version = kVersion;
    std::vector<std::pair<std::string, std::string>> input_hashes;  // path, fnv64
    std::string timestamp;
    std::string run_id;

    static std::string hash_file(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw std::runtime_error("cannot read input file: " + path);
        std::ostringstream ss;
        ss << in.rdbuf();
        return detail::hex64(detail::fnv1a(ss.str()));
    }

    static RunManifest make(const std::string& command, const nlohmann::json& config,
                            std::uint64_t seed, const std::vector<std::string>& inputs) {
        RunManifest m;
        m.command = command;
        m.config = config;
        m.seed = seed;
        for (const std::string& path : inputs) m.input_hashes.push_back({path, hash_file(path)});
        auto now = std::chrono::system_clock::now();
        std::time_t t = std::chrono::system_clock::to_time_t(now);
        char buf[32];
        std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
        m.timestamp = buf;
        std::string key = command + config.dump() + std::to_string(seed);
        for (auto& [p, h] : m.input_hashes) key += h;
        m.run_id = detail::hex64(detail::fnv1a(key));
        return m;
    }

    nlohmann::json to_json() const {
        nlohmann::json inputs = nlohmann::json::array();
        for (auto& [p, h] : input_hashes) inputs.push_back({{"path", p}, {"hash", h}});
        return nlohmann::json{{"command", command}, {"config", config},
                              {"seed", seed},       {"version", version},
                              {"inputs", inputs},   {"timestamp", timestamp},
                              {"run_id", run_id}};
    }

    void write(const std::string& path) const {
        std::ofstream out(path);
        out << to_json().dump(2) << '\n';
    }
};

}  // namespace hypising

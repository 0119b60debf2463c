#pragma once

// Run manifests: config snapshot, seed, and content hashes of every output,
// so a rerun can be checked for byte-identical results.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace qpwalk {

uint64_t fnv1a64(const std::string& data);
std::string fnv1a64_hex(const std::string& data);

// %.17g formatting used for all CSV floats
std::string format_double(double v);

class RunManifest {
public:
    RunManifest(std::string command, nlohmann::json config, uint64_t seed);

    // writes the file and records (path, hash)
    void write_output(const std::string& path, const std::string& content);
    void finish(double wall_seconds);

    nlohmann::json to_json() const;
    void save(const std::string& path) const;

private:
    std::string command_;
    nlohmann::json config_;
    uint64_t seed_;
    double wall_seconds_ = 0.0;
    std::vector<std::pair<std::string, std::string>> outputs_;
};

} // namespace qpwalk

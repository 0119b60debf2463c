#include "qpwalk/manifest.hpp"

#include <cstdio>
#include <fstream>

#include "qpwalk/circlemap.hpp"

namespace qpwalk {

uint64_t fnv1a64(const std::string& data) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string fnv1a64_hex(const std::string& data) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(data)));
    return buf;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

RunManifest::RunManifest(std::string command, nlohmann::json config, uint64_t seed)
    : command_(std::move(command)), config_(std::move(config)), seed_(seed) {}

void RunManifest::write_output(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write " + path);
    f << content;
    outputs_.emplace_back(path, fnv1a64_hex(content));
}

void RunManifest::finish(double wall_seconds) { wall_seconds_ = wall_seconds; }

nlohmann::json RunManifest::to_json() const {
    nlohmann::json outs = nlohmann::json::array();
    for (const auto& [path, hash] : outputs_)
        outs.push_back({{"path", path}, {"hash", hash}});
    return {{"command", command_}, {"config", config_}, {"seed", seed_},
            {"version", "qpwalk 0.1.0"}, {"wall_seconds", wall_seconds_},
            {"outputs", outs}};
}

void RunManifest::save(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write " + path);
    f << to_json().dump(2) << "\n";
}

} // namespace qpwalk

#include "ntklab/manifest.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace ntklab {

std::string config_hash(const std::string& canonical_text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical_text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

nlohmann::json manifest_base(const std::string& canonical_config,
                             std::uint64_t seed) {
    nlohmann::json m;
    m["config_hash"] = config_hash(canonical_config);
    m["config"] = canonical_config;
    m["seed"] = seed;
    m["build"] = std::string("ntklab ") + __DATE__ + " " + __TIME__;
    return m;
}

void write_text_atomic(const std::string& text, const std::string& path) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << text;
    }
    fs::rename(tmp, target);
}

void write_manifest(const nlohmann::json& manifest, const std::string& path) {
    write_text_atomic(manifest.dump(2) + "\n", path);
}

}  // namespace ntklab

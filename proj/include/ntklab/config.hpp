#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>

namespace ntklab {

// Flat `[section]` / `key = value` config file. Keys are addressed as
// "section.key". Every key present in the file must be consumed by the run
// that loads it; leftovers are reported as errors so config typos fail fast.
class Config {
public:
    static Config parse_file(const std::string& path);
    static Config parse_string(const std::string& text);

    bool has(const std::string& key) const;

    std::string get_string(const std::string& key);
    std::string get_string(const std::string& key, const std::string& fallback);
    double get_double(const std::string& key, double fallback);
    long get_long(const std::string& key, long fallback);
    std::uint64_t get_seed(const std::string& key, std::uint64_t fallback);
    bool get_bool(const std::string& key, bool fallback);

    // throws config_error naming every key that was never consumed
    void reject_unknown() const;

    // canonical "key = value" lines, sorted by key; hashing this replays runs
    std::string canonical() const;

private:
    std::map<std::string, std::string> values_;
    std::set<std::string> consumed_;

    const std::string* lookup(const std::string& key);
};

}  // namespace ntklab

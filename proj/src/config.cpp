#include "ntklab/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "ntklab/errors.hpp"

namespace ntklab {

namespace {

std::string trim(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

}  // namespace

Config Config::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_string(buf.str());
}

Config Config::parse_string(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw config_error("config line " + std::to_string(lineno) +
                                   ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error("config line " + std::to_string(lineno) +
                               ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw config_error("config line " + std::to_string(lineno) +
                               ": empty key");
        if (!section.empty()) key = section + "." + key;
        if (cfg.values_.count(key))
            throw config_error("config: duplicate key '" + key + "'");
        cfg.values_[key] = value;
    }
    return cfg;
}

const std::string* Config::lookup(const std::string& key) {
    auto it = values_.find(key);
    if (it == values_.end()) return nullptr;
    consumed_.insert(key);
    return &it->second;
}

bool Config::has(const std::string& key) const { return values_.count(key) > 0; }

std::string Config::get_string(const std::string& key) {
    const std::string* v = lookup(key);
    if (!v) throw config_error("config: missing required key '" + key + "'");
    return *v;
}

std::string Config::get_string(const std::string& key,
                               const std::string& fallback) {
    const std::string* v = lookup(key);
    return v ? *v : fallback;
}

double Config::get_double(const std::string& key, double fallback) {
    const std::string* v = lookup(key);
    if (!v) return fallback;
    try {
        size_t pos = 0;
        const double out = std::stod(*v, &pos);
        if (pos != v->size()) throw std::invalid_argument("trailing characters");
        return out;
    } catch (const std::exception&) {
        throw config_error("config: key '" + key + "' is not a number: " + *v);
    }
}

long Config::get_long(const std::string& key, long fallback) {
    const std::string* v = lookup(key);
    if (!v) return fallback;
    try {
        size_t pos = 0;
        const long out = std::stol(*v, &pos);
        if (pos != v->size()) throw std::invalid_argument("trailing characters");
        return out;
    } catch (const std::exception&) {
        throw config_error("config: key '" + key + "' is not an integer: " + *v);
    }
}

std::uint64_t Config::get_seed(const std::string& key, std::uint64_t fallback) {
    const std::string* v = lookup(key);
    if (!v) return fallback;
    try {
        size_t pos = 0;
        const unsigned long long out = std::stoull(*v, &pos);
        if (pos != v->size()) throw std::invalid_argument("trailing characters");
        return out;
    } catch (const std::exception&) {
        throw config_error("config: key '" + key + "' is not a seed: " + *v);
    }
}

bool Config::get_bool(const std::string& key, bool fallback) {
    const std::string* v = lookup(key);
    if (!v) return fallback;
    std::string low = *v;
    std::transform(low.begin(), low.end(), low.begin(), ::tolower);
    if (low == "true" || low == "1" || low == "yes") return true;
    if (low == "false" || low == "0" || low == "no") return false;
    throw config_error("config: key '" + key + "' is not a boolean: " + *v);
}

void Config::reject_unknown() const {
    std::string bad;
    for (const auto& [key, value] : values_) {
        if (!consumed_.count(key)) {
            if (!bad.empty()) bad += ", ";
            bad += key;
        }
    }
    if (!bad.empty()) throw config_error("config: unknown key(s): " + bad);
}

std::string Config::canonical() const {
    std::ostringstream out;
    for (const auto& [key, value] : values_) out << key << " = " << value << "\n";
    return out.str();
}

}  // namespace ntklab

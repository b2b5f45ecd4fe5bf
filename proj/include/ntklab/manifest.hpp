#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

namespace ntklab {

// FNV-1a 64-bit digest of the canonicalized config text, as lowercase hex.
std::string config_hash(const std::string& canonical_text);

// Manifest skeleton shared by all subcommands: config hash, canonical config
// text, seed, and a build identifier. Subcommands append their own fields
// and write it next to their outputs.
nlohmann::json manifest_base(const std::string& canonical_config,
                             std::uint64_t seed);

// Serializes with sorted keys and a trailing newline, atomically
// (temp file + rename).
void write_manifest(const nlohmann::json& manifest, const std::string& path);

// Writes arbitrary text atomically.
void write_text_atomic(const std::string& text, const std::string& path);

}  // namespace ntklab

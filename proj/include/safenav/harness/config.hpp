#pragma once

#include <map>
#include <string>

#include "safenav/agent/trainer.hpp"

namespace safenav::harness {

// INI-style key-value config: `[section]` headers, `key = value` lines,
// `#`/`;` comments. Keys are returned as "section.key" (or bare "key" for
// entries before any header).
using ConfigMap = std::map<std::string, std::string>;

ConfigMap parse_config_text(const std::string& text);
ConfigMap parse_config_file(const std::string& path);

double config_double(const ConfigMap& cfg, const std::string& key, double fallback);
long config_int(const ConfigMap& cfg, const std::string& key, long fallback);
bool config_bool(const ConfigMap& cfg, const std::string& key, bool fallback);
std::string config_string(const ConfigMap& cfg, const std::string& key, std::string fallback);

// Applies every recognized "train.*" / "risk.*" / "model.*" key over the
// defaults; unknown keys in those sections throw.
agent::TrainConfig train_config_from(const ConfigMap& cfg);

// FNV-1a hex digest of the canonical key=value listing.
std::string config_digest(const ConfigMap& cfg);

}  // namespace safenav::harness

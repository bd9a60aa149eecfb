#pragma once

// Flat `key = value` documents with optional [section] headers. `#` starts a
// comment. Keys outside any section belong to section "".

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "skilldisc/agent.hpp"
#include "skilldisc/env.hpp"

namespace skilldisc {

using KeyValueSection = std::map<std::string, std::string, std::less<>>;
using KeyValueDocument = std::map<std::string, KeyValueSection, std::less<>>;

/// Throws ConfigError with the offending line number.
KeyValueDocument parse_key_value(std::string_view text);

/// Reads a whole text file. Throws ConfigError naming the path when unreadable.
std::string read_text_file(const std::filesystem::path& path);

/// "a, b, c, d" in canonical resource order.
ResourceVector parse_resource_vector(std::string_view text);

double parse_real(std::string_view text, std::string_view key);
long long parse_integer(std::string_view text, std::string_view key);

struct RunConfig {
  EnvConfig env;
  TrainConfig train;
  ResourceVector eval_init_state = ResourceVector::filled(6.0);
};

/// Sections [env], [train] and [eval] (key init_state). Every key is
/// optional; an empty document yields the defaults. Unknown sections or keys
/// are rejected.
RunConfig parse_run_config(std::string_view text);
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace skilldisc

#pragma once

// Checkpoint file layout:
//
//   skilldisc-checkpoint\n
//   <one-line JSON header>\n
//   <payload: little-endian IEEE-754 binary64 values, in header array order>
//
// The header echoes both configs, lists every array with its name, shape and
// byte offset into the payload, and carries a SHA-256 digest of the payload.

#include <filesystem>
#include <string>
#include <string_view>

#include "skilldisc/agent.hpp"

namespace skilldisc {

inline constexpr int kCheckpointFormatVersion = 1;
inline constexpr std::string_view kCheckpointMagic = "skilldisc-checkpoint";

std::string serialize_checkpoint(const Checkpoint& checkpoint);

/// Throws FormatError on a bad magic line, malformed header, truncated
/// payload or digest mismatch.
Checkpoint deserialize_checkpoint(std::string_view bytes);

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint read_checkpoint(const std::filesystem::path& path);

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view bytes);

}  // namespace skilldisc

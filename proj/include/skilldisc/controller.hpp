#pragma once

// Greedy composition of discovered skills into slice allocations. Skills are
// additive bundles: a sequence allocates the sum of its skills' final
// allocations.

#include <optional>
#include <string>
#include <vector>

#include "skilldisc/analysis.hpp"

namespace skilldisc {

struct SliceRequest {
  std::string service_type;
  ResourceVector minimum;
  std::optional<ResourceVector> maximum;
  ResourceVector pool_capacity = ResourceVector::filled(100.0);

  /// Throws ConfigError unless 0 <= minimum <= maximum and minimum <= pool_capacity.
  void validate() const;

  /// Component-wise min(maximum, pool_capacity).
  ResourceVector upper_bound() const;
};

enum class CompositionStatus { satisfied, infeasible };

std::string_view to_string(CompositionStatus status);

struct CompositionResult {
  CompositionStatus status = CompositionStatus::infeasible;
  std::vector<SkillId> sequence;
  ResourceVector total;
};

inline constexpr int kDefaultMaxSequenceLength = 8;

/// Greedy deficit reduction with lowest-index tie-break; when the greedy path
/// dead-ends, falls back to an exhaustive search over pairs of skills.
CompositionResult compose(const std::vector<SkillProfile>& skill_table, const SliceRequest& request,
                          int max_sequence_length = kDefaultMaxSequenceLength);

/// Recomputes the total from the sequence and re-checks every bound.
bool verify(const CompositionResult& result, const std::vector<SkillProfile>& skill_table,
            const SliceRequest& request);

/// Parses a request document: `key = value` lines with service_type,
/// minimum, and optional maximum / pool_capacity (4 comma-separated values).
/// Throws ConfigError on malformed or invalid requests.
SliceRequest parse_request(const std::string& text);
SliceRequest load_request(const std::filesystem::path& path);

std::string format_result(const CompositionResult& result);

}  // namespace skilldisc

#pragma once

// Evaluation of a trained checkpoint: deterministic per-skill rollouts,
// pairwise distinctness of the reached allocations and per-resource coverage.

#include <array>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "skilldisc/agent.hpp"

namespace skilldisc {

struct SkillProfile {
  SkillId skill;
  ResourceVector final_allocation;
  int steps = 0;
  TerminalKind terminal_kind = TerminalKind::none;
  std::vector<ResourceVector> trajectory;  // empty when read back from CSV

  friend bool operator==(const SkillProfile&, const SkillProfile&) = default;
};

inline constexpr ResourceVector kDefaultEvalInit = ResourceVector::filled(6.0);

/// Rolls the mean-action policy for `skill` from `init` until termination.
SkillProfile rollout_skill(const Checkpoint& checkpoint, SkillId skill, const DomainState& init);

/// One profile per skill, in skill order, all from the same start state.
std::vector<SkillProfile> skill_table(const Checkpoint& checkpoint, const DomainState& init);

struct DistinctnessReport {
  std::vector<std::vector<double>> distances;  // symmetric L1 matrix
  double threshold = 1.0;
  std::size_t pair_count = 0;
  std::size_t distinct_pairs = 0;
  double fraction_distinct = 0.0;
};

/// L1 distance between final allocations for every pair. Throws
/// ContractError with fewer than two profiles.
DistinctnessReport pairwise_distinctness(const std::vector<SkillProfile>& profiles,
                                         double threshold = 1.0);

struct ResourceCoverage {
  std::vector<double> sorted_values;
  double min = 0.0;
  double max = 0.0;
  double span = 0.0;
  // Bin k counts values in (k, k + 1] (bin 0 also takes 0), over [0, cap].
  std::vector<int> histogram;
};

struct CoverageReport {
  std::array<ResourceCoverage, kResourceCount> resources;
};

/// Throws ContractError on an empty profile list.
CoverageReport coverage(const std::vector<SkillProfile>& profiles, double cap = 20.0);

/// Top-1 accuracy of the discriminator on next-states of stochastic on-policy
/// rollouts with uniformly sampled skills, over exactly `state_count` states.
double discriminator_accuracy(const Checkpoint& checkpoint, std::size_t state_count, Rng& rng);

// skills.csv: skill_id,power_pct,bandwidth_pct,memory_pct,compute_pct,steps,terminal_kind
void write_skills_csv(std::ostream& out, const std::vector<SkillProfile>& profiles);
void write_skills_csv(const std::filesystem::path& path, const std::vector<SkillProfile>& profiles);

/// Throws FormatError naming the missing column or the offending line.
std::vector<SkillProfile> read_skills_csv(std::istream& in);
std::vector<SkillProfile> read_skills_csv(const std::filesystem::path& path);

// coverage.csv: resource,skill_rank,value; ranked values first, then one
// min, max and span row per resource.
void write_coverage_csv(std::ostream& out, const CoverageReport& report);
void write_coverage_csv(const std::filesystem::path& path, const CoverageReport& report);

}  // namespace skilldisc

#pragma once

#include <array>
#include <cstddef>
#include <random>
#include <string_view>

namespace skilldisc {

using Rng = std::mt19937_64;

inline constexpr std::size_t kResourceCount = 4;

// Canonical resource order used everywhere: vectors, CSV columns, checkpoints.
inline constexpr std::array<std::string_view, kResourceCount> kResourceNames{
    "power", "bandwidth", "memory", "compute"};

/// Percentages of the four resource pools of an edge domain.
struct ResourceVector {
  std::array<double, kResourceCount> values{};

  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }

  double& power() { return values[0]; }
  double& bandwidth() { return values[1]; }
  double& memory() { return values[2]; }
  double& compute() { return values[3]; }

  static constexpr ResourceVector filled(double v) { return {{v, v, v, v}}; }

  friend bool operator==(const ResourceVector&, const ResourceVector&) = default;

  ResourceVector& operator+=(const ResourceVector& other) {
    for (std::size_t i = 0; i < kResourceCount; ++i) values[i] += other.values[i];
    return *this;
  }
  friend ResourceVector operator+(ResourceVector a, const ResourceVector& b) { return a += b; }
};

// True when every component is finite and non-negative.
bool is_valid(const ResourceVector& v);

struct EnvConfig {
  double init_low = 2.0;
  double init_high = 10.0;
  double action_low = 1.0;
  double action_high = 5.0;
  double cap = 20.0;
  double rel_tol = 1e-1;
  double abs_tol = 1e-2;
  double degenerate_eps = 1e-9;

  /// Throws ConfigError when the bounds or tolerances are inconsistent.
  void validate() const;

  /// Upper bound on steps per episode: the cap rule alone forces termination
  /// after ceil((cap - init_low) / action_low) steps.
  int max_episode_steps() const;

  friend bool operator==(const EnvConfig&, const EnvConfig&) = default;
};

enum class TerminalKind { none, cap, pattern };

std::string_view to_string(TerminalKind kind);
// Throws FormatError for unknown names.
TerminalKind terminal_kind_from_string(std::string_view name);

struct DomainState {
  ResourceVector allocation;
  int step_count = 0;
  TerminalKind terminal = TerminalKind::none;

  bool is_terminal() const { return terminal != TerminalKind::none; }
};

struct StepResult {
  DomainState state;
  TerminalKind terminal = TerminalKind::none;
};

/// Samples a fresh episode start, each component uniform in [init_low, init_high].
/// The initial state is never checked for termination.
DomainState reset(Rng& rng, const EnvConfig& config);

/// Applies one clamped assignment. Throws ContractError when `state` is
/// already terminal. The cap rule takes precedence over the pattern rule.
StepResult step(const DomainState& state, const ResourceVector& action, const EnvConfig& config);

/// All 16 binary 4-vectors in lexicographic order.
const std::array<ResourceVector, 16>& binary_patterns();

/// Min-max normalizes the allocation and compares it against every binary
/// pattern with |n_i - b_i| <= abs_tol + rel_tol * |b_i|. A (near) constant
/// allocation counts as the all-ones pattern.
bool is_pattern_terminal(const ResourceVector& allocation, const EnvConfig& config);

}  // namespace skilldisc

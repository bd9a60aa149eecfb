#include "skilldisc/env.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "skilldisc/errors.hpp"

namespace skilldisc {

bool is_valid(const ResourceVector& v) {
  return std::all_of(v.values.begin(), v.values.end(),
                     [](double x) { return std::isfinite(x) && x >= 0.0; });
}

void EnvConfig::validate() const {
  const auto fail = [](const std::string& what) { throw ConfigError("env config: " + what); };
  const std::array<double, 8> all{init_low, init_high, action_low, action_high,
                                  cap,      rel_tol,   abs_tol,    degenerate_eps};
  if (!std::all_of(all.begin(), all.end(), [](double x) { return std::isfinite(x); })) {
    fail("all values must be finite");
  }
  if (!(init_low > 0.0 && init_low <= init_high && init_high < cap)) {
    fail("require 0 < init_low <= init_high < cap");
  }
  if (!(action_low > 0.0 && action_low <= action_high)) {
    fail("require 0 < action_low <= action_high");
  }
  if (!(rel_tol > 0.0 && abs_tol > 0.0 && degenerate_eps > 0.0)) {
    fail("rel_tol, abs_tol and degenerate_eps must be positive");
  }
}

int EnvConfig::max_episode_steps() const {
  return static_cast<int>(std::ceil((cap - init_low) / action_low));
}

std::string_view to_string(TerminalKind kind) {
  switch (kind) {
    case TerminalKind::none: return "none";
    case TerminalKind::cap: return "cap";
    case TerminalKind::pattern: return "pattern";
  }
  return "none";
}

TerminalKind terminal_kind_from_string(std::string_view name) {
  if (name == "none") return TerminalKind::none;
  if (name == "cap") return TerminalKind::cap;
  if (name == "pattern") return TerminalKind::pattern;
  throw FormatError("unknown terminal kind '" + std::string(name) + "'");
}

DomainState reset(Rng& rng, const EnvConfig& config) {
  std::uniform_real_distribution<double> uniform(config.init_low, config.init_high);
  DomainState state;
  for (auto& x : state.allocation.values) {
    // uniform_real_distribution(a, a) is undefined, pin the degenerate case.
    x = config.init_low == config.init_high ? config.init_low : uniform(rng);
  }
  return state;
}

StepResult step(const DomainState& state, const ResourceVector& action, const EnvConfig& config) {
  if (state.is_terminal()) {
    throw ContractError("step called on a terminal state (terminal kind '" +
                        std::string(to_string(state.terminal)) + "')");
  }
  StepResult result;
  result.state.step_count = state.step_count + 1;
  bool hit_cap = false;
  for (std::size_t i = 0; i < kResourceCount; ++i) {
    const double a = std::clamp(action[i], config.action_low, config.action_high);
    const double next = state.allocation[i] + a;
    hit_cap = hit_cap || next >= config.cap;
    result.state.allocation[i] = std::min(next, config.cap);
  }
  if (hit_cap) {
    result.terminal = TerminalKind::cap;
  } else if (is_pattern_terminal(result.state.allocation, config)) {
    result.terminal = TerminalKind::pattern;
  }
  result.state.terminal = result.terminal;
  return result;
}

const std::array<ResourceVector, 16>& binary_patterns() {
  static const std::array<ResourceVector, 16> patterns = [] {
    std::array<ResourceVector, 16> out{};
    for (std::size_t code = 0; code < out.size(); ++code) {
      for (std::size_t bit = 0; bit < kResourceCount; ++bit) {
        // Most significant bit first gives lexicographic order.
        out[code][bit] = static_cast<double>((code >> (kResourceCount - 1 - bit)) & 1U);
      }
    }
    return out;
  }();
  return patterns;
}

bool is_pattern_terminal(const ResourceVector& allocation, const EnvConfig& config) {
  const auto [lo, hi] = std::minmax_element(allocation.values.begin(), allocation.values.end());
  const double range = *hi - *lo;
  if (range < config.degenerate_eps) return true;

  ResourceVector normalized;
  for (std::size_t i = 0; i < kResourceCount; ++i) {
    normalized[i] = (allocation[i] - *lo) / range;
  }
  // Each component must be near 0 or near 1 on its own, so checking per
  // component is equivalent to scanning all 16 patterns.
  for (std::size_t i = 0; i < kResourceCount; ++i) {
    const double n = normalized[i];
    const bool near_zero = std::abs(n) <= config.abs_tol;
    const bool near_one = std::abs(n - 1.0) <= config.abs_tol + config.rel_tol;
    if (!near_zero && !near_one) return false;
  }
  return true;
}

}  // namespace skilldisc

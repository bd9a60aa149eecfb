#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "skilldisc/env.hpp"
#include "skilldisc/errors.hpp"

using namespace skilldisc;

namespace {

DomainState at(ResourceVector v) { return DomainState{v, 0, TerminalKind::none}; }

}  // namespace

TEST_CASE("reset samples every component inside the init interval") {
  Rng rng(7);
  const EnvConfig cfg;
  for (int i = 0; i < 1000; ++i) {
    const auto s = reset(rng, cfg);
    CHECK(s.step_count == 0);
    CHECK_FALSE(s.is_terminal());
    for (double x : s.allocation.values) {
      CHECK(x >= 2.0);
      CHECK(x <= 10.0);
    }
  }
}

TEST_CASE("reset with a degenerate interval is constant") {
  EnvConfig cfg;
  cfg.init_low = cfg.init_high = 5.0;
  Rng rng(1);
  CHECK(reset(rng, cfg).allocation == ResourceVector::filled(5.0));
}

TEST_CASE("reset is deterministic per seed and differs across seeds") {
  Rng a(11), b(11), c(12);
  const EnvConfig cfg;
  const auto sa = reset(a, cfg);
  CHECK(sa.allocation == reset(b, cfg).allocation);
  CHECK_FALSE(sa.allocation == reset(c, cfg).allocation);
}

TEST_CASE("step clamps to the cap and reports cap termination") {
  const EnvConfig cfg;
  const auto r = step(at({{19.5, 5, 5, 5}}), ResourceVector::filled(1.0), cfg);
  CHECK(r.state.allocation == ResourceVector{{20, 6, 6, 6}});
  CHECK(r.terminal == TerminalKind::cap);
  CHECK(r.state.step_count == 1);
}

TEST_CASE("step into an all-equal allocation is a pattern terminal") {
  const EnvConfig cfg;
  const auto r = step(at(ResourceVector::filled(2.0)), ResourceVector::filled(1.0), cfg);
  CHECK(r.state.allocation == ResourceVector::filled(3.0));
  CHECK(oracle::pattern_match_brute_force(r.state.allocation, cfg));
  CHECK(r.terminal == TerminalKind::pattern);
}

TEST_CASE("step into an evenly spread allocation does not terminate") {
  const EnvConfig cfg;
  const auto r = step(at({{5, 6, 7, 8}}), ResourceVector::filled(1.0), cfg);
  CHECK(r.state.allocation == ResourceVector{{6, 7, 8, 9}});
  CHECK_FALSE(oracle::pattern_match_brute_force(r.state.allocation, cfg));
  CHECK(r.terminal == TerminalKind::none);
}

TEST_CASE("step clamps actions into the action interval") {
  const EnvConfig cfg;
  const auto r = step(at({{5, 6, 7, 8}}), ResourceVector{{-3, 0.5, 9, 2}}, cfg);
  CHECK(r.state.allocation == ResourceVector{{6, 7, 12, 10}});
}

TEST_CASE("cap takes precedence over a simultaneous pattern match") {
  const EnvConfig cfg;
  // [20, 20, 20, 20] is both capped and all-equal.
  const auto r = step(at(ResourceVector::filled(16.0)), ResourceVector::filled(5.0), cfg);
  CHECK(is_pattern_terminal(r.state.allocation, cfg));
  CHECK(r.terminal == TerminalKind::cap);
}

TEST_CASE("stepping a terminal state is a contract violation") {
  const EnvConfig cfg;
  auto r = step(at({{19.5, 5, 5, 5}}), ResourceVector::filled(1.0), cfg);
  CHECK_THROWS_AS(step(r.state, ResourceVector::filled(1.0), cfg), ContractError);
}

TEST_CASE("pattern examples agree with the brute-force oracle") {
  const EnvConfig cfg;
  const ResourceVector yes1{{2, 10, 10, 10}};
  const ResourceVector yes2{{4, 4, 4, 12}};
  const ResourceVector no{{5, 6, 7, 8}};
  CHECK(oracle::pattern_match_brute_force(yes1, cfg));
  CHECK(oracle::pattern_match_brute_force(yes2, cfg));
  CHECK_FALSE(oracle::pattern_match_brute_force(no, cfg));
  CHECK(is_pattern_terminal(yes1, cfg));
  CHECK(is_pattern_terminal(yes2, cfg));
  CHECK_FALSE(is_pattern_terminal(no, cfg));
}

TEST_CASE("pattern tolerance is asymmetric between 0 and 1") {
  const EnvConfig cfg;
  // normalized [0, 0.009, 1, 1]: within abs_tol of 0
  CHECK(is_pattern_terminal({{10, 10.09, 20, 20}}, cfg));
  // normalized [0, 0.02, 1, 1]: too far from 0
  CHECK_FALSE(is_pattern_terminal({{10, 10.2, 20, 20}}, cfg));
  // normalized [0, 0.9, 1, 1]: within abs_tol + rel_tol of 1
  CHECK(is_pattern_terminal({{10, 19, 20, 20}}, cfg));
  // normalized [0, 0.85, 1, 1]
  CHECK_FALSE(is_pattern_terminal({{10, 18.5, 20, 20}}, cfg));
}

TEST_CASE("binary patterns are the 16 vectors in lexicographic order") {
  const auto& p = binary_patterns();
  CHECK(p.size() == 16);
  CHECK(p.front() == ResourceVector::filled(0.0));
  CHECK(p.back() == ResourceVector::filled(1.0));
  CHECK(p[5] == ResourceVector{{0, 1, 0, 1}});
  for (std::size_t i = 1; i < p.size(); ++i) CHECK(p[i - 1].values < p[i].values);
}

TEST_CASE("pattern check agrees with brute force on random states") {
  const EnvConfig cfg;
  Rng rng(3);
  std::uniform_real_distribution<double> u(2.0, 20.0);
  std::uniform_int_distribution<int> grid(0, 36);
  for (int i = 0; i < 20000; ++i) {
    ResourceVector v;
    for (auto& x : v.values) x = (i % 2) ? u(rng) : 2.0 + 0.5 * grid(rng);
    CHECK(is_pattern_terminal(v, cfg) == oracle::pattern_match_brute_force(v, cfg));
  }
}

TEST_CASE("episodes are monotone, capped and bounded under random actions") {
  const EnvConfig cfg;
  CHECK(cfg.max_episode_steps() == 18);
  Rng rng(5);
  std::uniform_real_distribution<double> act(1.0, 5.0);
  for (int episode = 0; episode < 2000; ++episode) {
    DomainState s = reset(rng, cfg);
    while (!s.is_terminal()) {
      ResourceVector a;
      for (auto& x : a.values) x = act(rng);
      const auto r = step(s, a, cfg);
      for (std::size_t k = 0; k < kResourceCount; ++k) {
        CHECK(r.state.allocation[k] >= s.allocation[k]);
        CHECK(r.state.allocation[k] <= cfg.cap);
      }
      s = r.state;
      REQUIRE(s.step_count <= 18);
    }
  }
}

TEST_CASE("invalid env configs are rejected") {
  EnvConfig cfg;
  cfg.init_high = 25;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = EnvConfig{};
  cfg.action_low = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = EnvConfig{};
  cfg.rel_tol = -1;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  CHECK_NOTHROW(EnvConfig{}.validate());
}

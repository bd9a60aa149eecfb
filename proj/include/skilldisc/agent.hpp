#pragma once

// Skill-conditioned entropy-regularized actor-critic with a skill
// discriminator providing the intrinsic reward log q(z|s') - log p(z).

#include <cstdint>
#include <deque>
#include <functional>
#include <span>
#include <vector>

#include "skilldisc/env.hpp"
#include "skilldisc/nn.hpp"

namespace skilldisc {

inline constexpr int kHiddenWidth = 64;
inline constexpr double kLogStdMin = -5.0;
inline constexpr double kLogStdMax = 2.0;

struct TrainConfig {
  int n_skills = 64;
  long long episodes = 25000;
  double learning_rate = 1e-5;
  double gamma = 0.99;
  double alpha = 0.01;
  double tau = 0.001;
  int batch_size = 256;
  int buffer_capacity = 100000;
  int updates_per_step = 1;
  int warmup_transitions = 1000;
  std::uint64_t seed = 1;
  double log_q_floor = -20.0;

  /// Throws ConfigError on out-of-range values.
  void validate() const;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct SkillId {
  int index = 0;

  friend bool operator==(const SkillId&, const SkillId&) = default;
};

struct Transition {
  ResourceVector state;
  SkillId skill;
  ResourceVector action;
  ResourceVector next_state;
  bool done = false;
  TerminalKind terminal_kind = TerminalKind::none;
};

nn::NetworkSpec actor_spec(int n_skills);
nn::NetworkSpec critic_spec(int n_skills);
nn::NetworkSpec discriminator_spec(int n_skills);

struct Checkpoint {
  TrainConfig train;
  EnvConfig env;
  nn::ParameterSet actor;
  nn::ParameterSet critic1;
  nn::ParameterSet critic2;
  nn::ParameterSet target1;
  nn::ParameterSet target2;
  nn::ParameterSet discriminator;
  long long episodes_completed = 0;

  /// Throws ContractError when any parameter set disagrees with the network
  /// shapes implied by the configs.
  void validate() const;

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

/// Fresh networks drawn from `rng`; targets start as copies of the critics.
Checkpoint initial_checkpoint(const EnvConfig& env, const TrainConfig& train, Rng& rng);

/// Uniform prior over skills. Throws ContractError when n_skills < 2.
SkillId sample_skill(Rng& rng, int n_skills);

/// [state / cap, one_hot(skill)], length 4 + n_skills.
nn::Vector augment_observation(const ResourceVector& state, SkillId skill, double cap, int n_skills);

/// Cap-scaled state, the discriminator's only input.
nn::Vector discriminator_input(const ResourceVector& state, double cap);

/// max(log q(z|s'), log_q_floor) - log(1 / n_skills).
double intrinsic_reward(std::span<const double> discriminator_log_probs, SkillId skill,
                        int n_skills, double log_q_floor);

struct ActorSample {
  ResourceVector action;
  double log_prob = 0.0;
};

/// Samples (or, when deterministic, takes the mean of) the squashed Gaussian
/// policy and maps tanh output u to midpoint + half_range * u of the env's
/// action interval. log_prob is the density of the returned action.
ActorSample actor_act(const Checkpoint& checkpoint, const nn::Vector& observation, Rng& rng,
                      bool deterministic);

/// Q(observation, action) with the action rescaled to (-1, 1).
double critic_value(const nn::ParameterSet& params, const nn::Vector& observation,
                    const ResourceVector& action, const EnvConfig& env);

/// Fixed-capacity FIFO of transitions.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(const Transition& t);
  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Transition& operator[](std::size_t i) const { return items_[i]; }

  /// Uniform sampling with replacement.
  std::vector<Transition> sample(Rng& rng, std::size_t count) const;

 private:
  std::size_t capacity_;
  std::deque<Transition> items_;
};

struct OptimizerStates {
  nn::AdamState actor;
  nn::AdamState critic1;
  nn::AdamState critic2;
  nn::AdamState discriminator;
};

OptimizerStates make_optimizer_states(const Checkpoint& checkpoint);

struct ActorLoss {
  double value = 0.0;
  nn::ParameterSet gradient;  // d value / d actor parameters
};

/// Mean over rows of alpha * log pi(a~|s) - min(Q1, Q2)(s, a~), with
/// a~ reparameterized by the given standard-normal noise (rows x 4).
ActorLoss actor_loss(const Checkpoint& checkpoint, const nn::Matrix& observations,
                     const nn::Matrix& noise);

struct UpdateLosses {
  double discriminator = 0.0;
  double critic1 = 0.0;
  double critic2 = 0.0;
  double actor = 0.0;
  double mean_intrinsic_reward = 0.0;
};

/// One gradient update: discriminator, rewards from the updated
/// discriminator, twin critics, actor, then Polyak targets. Throws
/// ContractError when the batch size is wrong and NumericalError on
/// non-finite losses.
UpdateLosses update(Checkpoint& checkpoint, OptimizerStates& opt, std::span<const Transition> batch,
                    Rng& rng);

struct TrainProgress {
  long long episodes_completed = 0;
  double mean_episode_length = 0.0;
  double mean_intrinsic_reward = 0.0;
  double discriminator_accuracy = 0.0;
};

struct TrainOptions {
  long long progress_interval = 1000;
  std::function<void(const TrainProgress&)> on_progress;
};

/// Runs the full episode loop from a fresh initialization seeded by
/// `train.seed`. Deterministic for a given pair of configs.
Checkpoint train(const EnvConfig& env, const TrainConfig& train, const TrainOptions& options = {});

}  // namespace skilldisc

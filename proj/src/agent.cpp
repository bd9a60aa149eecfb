#include "skilldisc/agent.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "skilldisc/errors.hpp"

namespace skilldisc {
namespace {

using nn::Matrix;
using nn::Vector;

constexpr int kActionDims = static_cast<int>(kResourceCount);
// tanh rounds to exactly +-1 for large inputs; keep actions strictly inside the interval.
constexpr double kSquashLimit = 1.0 - 1e-12;
const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

// log(1 - tanh(x)^2) without cancellation.
double log_one_minus_tanh_sq(double x) {
  return 2.0 * (std::numbers::ln2 - x - softplus(-2.0 * x));
}

double action_midpoint(const EnvConfig& env) { return 0.5 * (env.action_low + env.action_high); }
double action_half_range(const EnvConfig& env) { return 0.5 * (env.action_high - env.action_low); }

// Squashed Gaussian draws for a batch of actor outputs (mean | raw log-std).
struct SquashedBatch {
  Matrix squashed;  // u in (-1, 1)
  Matrix pre_tanh;
  Matrix noise;
  Matrix std_dev;
  Matrix log_std_active;  // 1 where the log-std clamp is not binding
  Vector log_prob;
};

SquashedBatch squash(const Matrix& actor_out, const Matrix& noise, double half_range) {
  const Eigen::Index rows = actor_out.rows();
  SquashedBatch s;
  s.noise = noise;
  s.squashed.resize(rows, kActionDims);
  s.pre_tanh.resize(rows, kActionDims);
  s.std_dev.resize(rows, kActionDims);
  s.log_std_active.resize(rows, kActionDims);
  s.log_prob.resize(rows);
  const double log_half_range = std::log(half_range);
  for (Eigen::Index r = 0; r < rows; ++r) {
    double lp = 0.0;
    for (int i = 0; i < kActionDims; ++i) {
      const double raw_log_std = actor_out(r, kActionDims + i);
      const double log_std = std::clamp(raw_log_std, kLogStdMin, kLogStdMax);
      const double sd = std::exp(log_std);
      const double eps = noise(r, i);
      const double x = actor_out(r, i) + sd * eps;
      s.pre_tanh(r, i) = x;
      s.squashed(r, i) = std::clamp(std::tanh(x), -kSquashLimit, kSquashLimit);
      s.std_dev(r, i) = sd;
      s.log_std_active(r, i) = (raw_log_std > kLogStdMin && raw_log_std < kLogStdMax) ? 1.0 : 0.0;
      lp += -0.5 * eps * eps - log_std - kHalfLog2Pi - log_one_minus_tanh_sq(x) - log_half_range;
    }
    s.log_prob(r) = lp;
  }
  return s;
}

Matrix standard_normal(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = normal(rng);
  }
  return m;
}

Matrix concat_columns(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), a.cols() + b.cols());
  out << a, b;
  return out;
}

void require_finite(double value, const char* what, const UpdateLosses& losses) {
  if (std::isfinite(value)) return;
  std::ostringstream msg;
  msg << "non-finite " << what << " (discriminator=" << losses.discriminator
      << ", critic1=" << losses.critic1 << ", critic2=" << losses.critic2
      << ", actor=" << losses.actor << ", reward=" << losses.mean_intrinsic_reward << ")";
  throw NumericalError(msg.str());
}

int argmax(const Vector& v) {
  Eigen::Index idx = 0;
  v.maxCoeff(&idx);
  return static_cast<int>(idx);
}

}  // namespace

void TrainConfig::validate() const {
  const auto fail = [](const std::string& what) { throw ConfigError("train config: " + what); };
  if (n_skills < 2) fail("n_skills must be at least 2");
  if (episodes < 0) fail("episodes must be non-negative");
  if (!(std::isfinite(learning_rate) && learning_rate > 0.0)) fail("learning_rate must be positive");
  if (!(gamma > 0.0 && gamma < 1.0)) fail("gamma must lie in (0, 1)");
  if (!(std::isfinite(alpha) && alpha >= 0.0)) fail("alpha must be non-negative");
  if (!(tau > 0.0 && tau <= 1.0)) fail("tau must lie in (0, 1]");
  if (batch_size < 1) fail("batch_size must be positive");
  if (buffer_capacity < batch_size) fail("batch_size must not exceed buffer_capacity");
  if (updates_per_step < 0) fail("updates_per_step must be non-negative");
  if (warmup_transitions < 0) fail("warmup_transitions must be non-negative");
  if (!std::isfinite(log_q_floor)) fail("log_q_floor must be finite");
}

nn::NetworkSpec actor_spec(int n_skills) {
  return {{kActionDims + n_skills, kHiddenWidth, nn::Activation::relu},
          {kHiddenWidth, kHiddenWidth, nn::Activation::relu},
          {kHiddenWidth, 2 * kActionDims, nn::Activation::identity}};
}

nn::NetworkSpec critic_spec(int n_skills) {
  return {{2 * kActionDims + n_skills, kHiddenWidth, nn::Activation::relu},
          {kHiddenWidth, kHiddenWidth, nn::Activation::relu},
          {kHiddenWidth, 1, nn::Activation::identity}};
}

nn::NetworkSpec discriminator_spec(int n_skills) {
  return {{kActionDims, kHiddenWidth, nn::Activation::relu},
          {kHiddenWidth, kHiddenWidth, nn::Activation::relu},
          {kHiddenWidth, n_skills, nn::Activation::identity}};
}

void Checkpoint::validate() const {
  nn::check_layout(actor, actor_spec(train.n_skills));
  nn::check_layout(critic1, critic_spec(train.n_skills));
  nn::check_layout(critic2, critic_spec(train.n_skills));
  nn::check_layout(target1, critic_spec(train.n_skills));
  nn::check_layout(target2, critic_spec(train.n_skills));
  nn::check_layout(discriminator, discriminator_spec(train.n_skills));
}

Checkpoint initial_checkpoint(const EnvConfig& env, const TrainConfig& train, Rng& rng) {
  env.validate();
  train.validate();
  Checkpoint c;
  c.train = train;
  c.env = env;
  c.actor = nn::mlp_init(actor_spec(train.n_skills), rng);
  c.critic1 = nn::mlp_init(critic_spec(train.n_skills), rng);
  c.critic2 = nn::mlp_init(critic_spec(train.n_skills), rng);
  c.discriminator = nn::mlp_init(discriminator_spec(train.n_skills), rng);
  c.target1 = c.critic1;
  c.target2 = c.critic2;
  return c;
}

SkillId sample_skill(Rng& rng, int n_skills) {
  if (n_skills < 2) throw ContractError("sample_skill: n_skills must be at least 2");
  std::uniform_int_distribution<int> uniform(0, n_skills - 1);
  return SkillId{uniform(rng)};
}

nn::Vector augment_observation(const ResourceVector& state, SkillId skill, double cap,
                               int n_skills) {
  if (skill.index < 0 || skill.index >= n_skills) {
    throw ContractError("skill index " + std::to_string(skill.index) + " out of range");
  }
  nn::Vector obs = nn::Vector::Zero(kActionDims + n_skills);
  for (int i = 0; i < kActionDims; ++i) {
    if (!(state[i] > 0.0 && state[i] <= cap)) {
      throw ContractError("augment_observation: state component outside (0, cap]");
    }
    obs(i) = state[i] / cap;
  }
  obs(kActionDims + skill.index) = 1.0;
  return obs;
}

nn::Vector discriminator_input(const ResourceVector& state, double cap) {
  nn::Vector x(kActionDims);
  for (int i = 0; i < kActionDims; ++i) x(i) = state[i] / cap;
  return x;
}

double intrinsic_reward(std::span<const double> discriminator_log_probs, SkillId skill,
                        int n_skills, double log_q_floor) {
  if (static_cast<int>(discriminator_log_probs.size()) != n_skills || skill.index < 0 ||
      skill.index >= n_skills) {
    throw ContractError("intrinsic_reward: log-prob length or skill index mismatch");
  }
  const double log_q = std::max(discriminator_log_probs[skill.index], log_q_floor);
  return log_q + std::log(static_cast<double>(n_skills));
}

ActorSample actor_act(const Checkpoint& checkpoint, const nn::Vector& observation, Rng& rng,
                      bool deterministic) {
  const int n_skills = checkpoint.train.n_skills;
  if (observation.size() != kActionDims + n_skills) {
    throw ContractError("actor_act: observation length must be 4 + n_skills");
  }
  const Matrix out = nn::evaluate(checkpoint.actor, actor_spec(n_skills), Matrix(observation.transpose()));
  if (!out.allFinite()) throw NumericalError("actor_act: non-finite actor output");
  const Matrix noise = deterministic ? Matrix::Zero(1, kActionDims) : standard_normal(rng, 1, kActionDims);
  const double half = action_half_range(checkpoint.env);
  const double mid = action_midpoint(checkpoint.env);
  const SquashedBatch s = squash(out, noise, half);
  ActorSample sample;
  for (int i = 0; i < kActionDims; ++i) sample.action[i] = mid + half * s.squashed(0, i);
  sample.log_prob = s.log_prob(0);
  return sample;
}

double critic_value(const nn::ParameterSet& params, const nn::Vector& observation,
                    const ResourceVector& action, const EnvConfig& env) {
  const Eigen::Index n_skills = observation.size() - kActionDims;
  if (n_skills < 1) throw ContractError("critic_value: observation too short");
  nn::Vector input(observation.size() + kActionDims);
  input.head(observation.size()) = observation;
  for (int i = 0; i < kActionDims; ++i) {
    input(observation.size() + i) = (action[i] - action_midpoint(env)) / action_half_range(env);
  }
  return nn::evaluate(params, critic_spec(static_cast<int>(n_skills)), input)(0);
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ContractError("replay buffer capacity must be positive");
}

void ReplayBuffer::push(const Transition& t) {
  if (items_.size() == capacity_) items_.pop_front();
  items_.push_back(t);
}

std::vector<Transition> ReplayBuffer::sample(Rng& rng, std::size_t count) const {
  if (items_.empty()) throw ContractError("cannot sample from an empty replay buffer");
  std::uniform_int_distribution<std::size_t> index(0, items_.size() - 1);
  std::vector<Transition> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(items_[index(rng)]);
  return out;
}

OptimizerStates make_optimizer_states(const Checkpoint& checkpoint) {
  return {nn::make_adam_state(checkpoint.actor), nn::make_adam_state(checkpoint.critic1),
          nn::make_adam_state(checkpoint.critic2), nn::make_adam_state(checkpoint.discriminator)};
}

ActorLoss actor_loss(const Checkpoint& checkpoint, const nn::Matrix& obs, const nn::Matrix& noise) {
  const TrainConfig& cfg = checkpoint.train;
  const int n_skills = cfg.n_skills;
  const auto rows = obs.rows();
  if (noise.rows() != rows || noise.cols() != kActionDims) {
    throw ContractError("actor_loss: noise must have one row of 4 draws per observation");
  }
  const double inv_rows = 1.0 / static_cast<double>(rows);
  const auto actor_net = actor_spec(n_skills);
  const auto critic_net = critic_spec(n_skills);

  const auto fwd = nn::forward(checkpoint.actor, actor_net, obs);
  const SquashedBatch s = squash(fwd.output, noise, action_half_range(checkpoint.env));
  const Matrix critic_in = concat_columns(obs, s.squashed);
  const auto f1 = nn::forward(checkpoint.critic1, critic_net, critic_in);
  const auto f2 = nn::forward(checkpoint.critic2, critic_net, critic_in);
  Matrix pick1 = Matrix::Zero(rows, 1);
  Matrix pick2 = Matrix::Zero(rows, 1);
  double objective = 0.0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    const bool first = f1.output(r, 0) <= f2.output(r, 0);
    (first ? pick1 : pick2)(r, 0) = 1.0;
    objective += cfg.alpha * s.log_prob(r) - std::min(f1.output(r, 0), f2.output(r, 0));
  }
  const Matrix dq_din = nn::backward(checkpoint.critic1, critic_net, f1.tape, pick1).input +
                        nn::backward(checkpoint.critic2, critic_net, f2.tape, pick2).input;

  // Chain rule through a = tanh(mean + exp(log_std) * noise); the Gaussian
  // term of log pi depends on log_std only, the tanh correction on x.
  Matrix grad(rows, 2 * kActionDims);
  const Eigen::Index action_col = kActionDims + n_skills;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (int i = 0; i < kActionDims; ++i) {
      const double u = s.squashed(r, i);
      const double dq_du = dq_din(r, action_col + i);
      const double d_pre = cfg.alpha * 2.0 * std::tanh(s.pre_tanh(r, i)) - dq_du * (1.0 - u * u);
      grad(r, i) = d_pre * inv_rows;
      grad(r, kActionDims + i) =
          (d_pre * s.std_dev(r, i) * s.noise(r, i) - cfg.alpha) * s.log_std_active(r, i) * inv_rows;
    }
  }
  return {objective * inv_rows, nn::backward(checkpoint.actor, actor_net, fwd.tape, grad).params};
}

UpdateLosses update(Checkpoint& checkpoint, OptimizerStates& opt, std::span<const Transition> batch,
                    Rng& rng) {
  const TrainConfig& cfg = checkpoint.train;
  const EnvConfig& env = checkpoint.env;
  const int n_skills = cfg.n_skills;
  const auto rows = static_cast<Eigen::Index>(batch.size());
  if (rows != cfg.batch_size) {
    throw ContractError("update: batch has " + std::to_string(rows) + " transitions, config says " +
                        std::to_string(cfg.batch_size));
  }
  const double inv_rows = 1.0 / static_cast<double>(rows);
  const double mid = action_midpoint(env);
  const double half = action_half_range(env);
  const auto actor_net = actor_spec(n_skills);
  const auto critic_net = critic_spec(n_skills);
  const auto disc_net = discriminator_spec(n_skills);

  Matrix obs(rows, kActionDims + n_skills);
  Matrix next_obs(rows, kActionDims + n_skills);
  Matrix disc_in(rows, kActionDims);
  Matrix taken(rows, kActionDims);
  Vector not_done(rows);
  std::vector<int> skills(batch.size());
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Transition& t = batch[static_cast<std::size_t>(r)];
    skills[static_cast<std::size_t>(r)] = t.skill.index;
    obs.row(r) = augment_observation(t.state, t.skill, env.cap, n_skills).transpose();
    next_obs.row(r) = augment_observation(t.next_state, t.skill, env.cap, n_skills).transpose();
    disc_in.row(r) = discriminator_input(t.next_state, env.cap).transpose();
    for (int i = 0; i < kActionDims; ++i) taken(r, i) = (t.action[i] - mid) / half;
    not_done(r) = t.done ? 0.0 : 1.0;
  }

  UpdateLosses losses;

  // Discriminator: cross-entropy of the skill given the next state.
  {
    const auto fwd = nn::forward(checkpoint.discriminator, disc_net, disc_in);
    const Matrix log_probs = nn::log_softmax_rows(fwd.output);
    Matrix grad = log_probs.array().exp().matrix();
    double ce = 0.0;
    for (Eigen::Index r = 0; r < rows; ++r) {
      const int z = skills[static_cast<std::size_t>(r)];
      ce -= log_probs(r, z);
      grad(r, z) -= 1.0;
    }
    losses.discriminator = ce * inv_rows;
    require_finite(losses.discriminator, "discriminator loss", losses);
    grad *= inv_rows;
    const auto g = nn::backward(checkpoint.discriminator, disc_net, fwd.tape, grad);
    nn::adam_step(checkpoint.discriminator, g.params, opt.discriminator, cfg.learning_rate);
  }

  // Intrinsic rewards from the freshly updated discriminator.
  Vector rewards(rows);
  {
    const Matrix log_probs =
        nn::log_softmax_rows(nn::evaluate(checkpoint.discriminator, disc_net, disc_in));
    for (Eigen::Index r = 0; r < rows; ++r) {
      const auto row = log_probs.row(r);
      rewards(r) = intrinsic_reward(std::span<const double>(row.data(), row.size()),
                                    SkillId{skills[static_cast<std::size_t>(r)]}, n_skills,
                                    cfg.log_q_floor);
    }
    losses.mean_intrinsic_reward = rewards.mean();
    require_finite(losses.mean_intrinsic_reward, "intrinsic reward", losses);
  }

  // Twin critics regress onto the entropy-regularized soft target.
  {
    const Matrix next_out = nn::evaluate(checkpoint.actor, actor_net, next_obs);
    const SquashedBatch next = squash(next_out, standard_normal(rng, rows, kActionDims), half);
    const Matrix target_in = concat_columns(next_obs, next.squashed);
    const Matrix q1 = nn::evaluate(checkpoint.target1, critic_net, target_in);
    const Matrix q2 = nn::evaluate(checkpoint.target2, critic_net, target_in);
    Vector y(rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
      const double soft_value = std::min(q1(r, 0), q2(r, 0)) - cfg.alpha * next.log_prob(r);
      y(r) = rewards(r) + cfg.gamma * not_done(r) * soft_value;
    }

    const Matrix critic_in = concat_columns(obs, taken);
    const auto fit = [&](nn::ParameterSet& critic, nn::AdamState& state) {
      const auto fwd = nn::forward(critic, critic_net, critic_in);
      const Vector diff = fwd.output.col(0) - y;
      const Matrix grad = 2.0 * inv_rows * diff;
      const auto g = nn::backward(critic, critic_net, fwd.tape, grad);
      const double loss = diff.squaredNorm() * inv_rows;
      nn::adam_step(critic, g.params, state, cfg.learning_rate);
      return loss;
    };
    losses.critic1 = fit(checkpoint.critic1, opt.critic1);
    losses.critic2 = fit(checkpoint.critic2, opt.critic2);
    require_finite(losses.critic1 + losses.critic2, "critic loss", losses);
  }

  {
    const ActorLoss a = actor_loss(checkpoint, obs, standard_normal(rng, rows, kActionDims));
    losses.actor = a.value;
    require_finite(losses.actor, "actor loss", losses);
    nn::adam_step(checkpoint.actor, a.gradient, opt.actor, cfg.learning_rate);
  }

  nn::polyak_update(checkpoint.target1, checkpoint.critic1, cfg.tau);
  nn::polyak_update(checkpoint.target2, checkpoint.critic2, cfg.tau);
  return losses;
}

Checkpoint train(const EnvConfig& env, const TrainConfig& cfg, const TrainOptions& options) {
  Rng rng(cfg.seed);
  Checkpoint checkpoint = initial_checkpoint(env, cfg, rng);
  OptimizerStates opt = make_optimizer_states(checkpoint);
  ReplayBuffer buffer(static_cast<std::size_t>(cfg.buffer_capacity));
  const auto disc_net = discriminator_spec(cfg.n_skills);
  const int step_bound = env.max_episode_steps();
  const auto ready = static_cast<std::size_t>(std::max(cfg.warmup_transitions, cfg.batch_size));

  long long window_steps = 0;
  long long window_episodes = 0;
  long long window_hits = 0;
  double window_reward = 0.0;

  for (long long episode = 0; episode < cfg.episodes; ++episode) {
    const SkillId skill = sample_skill(rng, cfg.n_skills);
    DomainState state = reset(rng, env);
    while (true) {
      const Vector obs = augment_observation(state.allocation, skill, env.cap, cfg.n_skills);
      const ActorSample act = actor_act(checkpoint, obs, rng, false);
      const StepResult result = step(state, act.action, env);
      buffer.push({state.allocation, skill, act.action, result.state.allocation,
                   result.terminal != TerminalKind::none, result.terminal});

      const Vector log_probs = nn::log_softmax(
          nn::evaluate(checkpoint.discriminator, disc_net, discriminator_input(result.state.allocation, env.cap)));
      window_reward += intrinsic_reward(std::span<const double>(log_probs.data(), log_probs.size()),
                                        skill, cfg.n_skills, cfg.log_q_floor);
      window_hits += argmax(log_probs) == skill.index ? 1 : 0;
      ++window_steps;

      if (buffer.size() >= ready) {
        for (int k = 0; k < cfg.updates_per_step; ++k) {
          const auto batch = buffer.sample(rng, static_cast<std::size_t>(cfg.batch_size));
          update(checkpoint, opt, batch, rng);
        }
      }
      state = result.state;
      if (state.is_terminal()) break;
      if (state.step_count >= step_bound) {
        throw std::logic_error("episode exceeded the termination bound of " +
                               std::to_string(step_bound) + " steps");
      }
    }
    checkpoint.episodes_completed = episode + 1;
    ++window_episodes;

    const bool report = options.on_progress && options.progress_interval > 0 &&
                        (checkpoint.episodes_completed % options.progress_interval == 0 ||
                         checkpoint.episodes_completed == cfg.episodes);
    if (report) {
      const auto steps = static_cast<double>(window_steps);
      options.on_progress({checkpoint.episodes_completed,
                           steps / static_cast<double>(window_episodes), window_reward / steps,
                           static_cast<double>(window_hits) / steps});
      window_steps = window_episodes = window_hits = 0;
      window_reward = 0.0;
    }
  }
  return checkpoint;
}

}  // namespace skilldisc

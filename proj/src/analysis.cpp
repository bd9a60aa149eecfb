#include "skilldisc/analysis.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "skilldisc/errors.hpp"

namespace skilldisc {
namespace {

constexpr std::array<std::string_view, 7> kSkillsColumns{
    "skill_id", "power_pct", "bandwidth_pct", "memory_pct", "compute_pct", "steps", "terminal_kind"};

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

template <typename T>
T parse_number(const std::string& text, std::size_t line, std::string_view column) {
  T value{};
  const auto* begin = text.data();
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw FormatError("line " + std::to_string(line) + ": column '" + std::string(column) +
                      "' has invalid value '" + text + "'");
  }
  return value;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

}  // namespace

SkillProfile rollout_skill(const Checkpoint& checkpoint, SkillId skill, const DomainState& init) {
  const EnvConfig& env = checkpoint.env;
  const int bound = env.max_episode_steps();
  SkillProfile profile;
  profile.skill = skill;
  profile.trajectory.push_back(init.allocation);
  DomainState state = init;
  state.step_count = 0;
  state.terminal = TerminalKind::none;
  Rng unused(0);  // deterministic acting draws no noise
  while (!state.is_terminal()) {
    if (state.step_count >= bound) {
      throw std::logic_error("skill " + std::to_string(skill.index) +
                             " rollout exceeded the termination bound");
    }
    const auto obs = augment_observation(state.allocation, skill, env.cap, checkpoint.train.n_skills);
    const ActorSample act = actor_act(checkpoint, obs, unused, true);
    state = step(state, act.action, env).state;
    profile.trajectory.push_back(state.allocation);
  }
  profile.final_allocation = state.allocation;
  profile.steps = state.step_count;
  profile.terminal_kind = state.terminal;
  return profile;
}

std::vector<SkillProfile> skill_table(const Checkpoint& checkpoint, const DomainState& init) {
  std::vector<SkillProfile> table;
  table.reserve(static_cast<std::size_t>(checkpoint.train.n_skills));
  for (int z = 0; z < checkpoint.train.n_skills; ++z) {
    table.push_back(rollout_skill(checkpoint, SkillId{z}, init));
  }
  return table;
}

DistinctnessReport pairwise_distinctness(const std::vector<SkillProfile>& profiles,
                                         double threshold) {
  if (profiles.size() < 2) throw ContractError("pairwise_distinctness needs at least two profiles");
  const std::size_t n = profiles.size();
  DistinctnessReport report;
  report.threshold = threshold;
  report.distances.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double d = 0.0;
      for (std::size_t k = 0; k < kResourceCount; ++k) {
        d += std::abs(profiles[i].final_allocation[k] - profiles[j].final_allocation[k]);
      }
      report.distances[i][j] = report.distances[j][i] = d;
      ++report.pair_count;
      if (d >= threshold) ++report.distinct_pairs;
    }
  }
  report.fraction_distinct =
      static_cast<double>(report.distinct_pairs) / static_cast<double>(report.pair_count);
  return report;
}

CoverageReport coverage(const std::vector<SkillProfile>& profiles, double cap) {
  if (profiles.empty()) throw ContractError("coverage needs at least one profile");
  const auto bins = static_cast<std::size_t>(std::ceil(cap));
  CoverageReport report;
  for (std::size_t k = 0; k < kResourceCount; ++k) {
    auto& r = report.resources[k];
    for (const auto& p : profiles) r.sorted_values.push_back(p.final_allocation[k]);
    std::sort(r.sorted_values.begin(), r.sorted_values.end());
    r.min = r.sorted_values.front();
    r.max = r.sorted_values.back();
    r.span = r.max - r.min;
    r.histogram.assign(bins, 0);
    for (double v : r.sorted_values) {
      const double upper = std::ceil(v);
      const auto bin = upper <= 0.0 ? std::size_t{0} : static_cast<std::size_t>(upper) - 1;
      ++r.histogram[std::min(bin, bins - 1)];
    }
  }
  return report;
}

double discriminator_accuracy(const Checkpoint& checkpoint, std::size_t state_count, Rng& rng) {
  const EnvConfig& env = checkpoint.env;
  const int n_skills = checkpoint.train.n_skills;
  const auto disc_net = discriminator_spec(n_skills);
  std::size_t seen = 0;
  std::size_t hits = 0;
  while (seen < state_count) {
    const SkillId skill = sample_skill(rng, n_skills);
    DomainState state = reset(rng, env);
    while (!state.is_terminal() && seen < state_count) {
      const auto obs = augment_observation(state.allocation, skill, env.cap, n_skills);
      state = step(state, actor_act(checkpoint, obs, rng, false).action, env).state;
      const nn::Vector logits =
          nn::evaluate(checkpoint.discriminator, disc_net, discriminator_input(state.allocation, env.cap));
      Eigen::Index best = 0;
      logits.maxCoeff(&best);
      hits += static_cast<int>(best) == skill.index ? 1 : 0;
      ++seen;
    }
  }
  return state_count == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(state_count);
}

void write_skills_csv(std::ostream& out, const std::vector<SkillProfile>& profiles) {
  for (std::size_t c = 0; c < kSkillsColumns.size(); ++c) {
    out << (c ? "," : "") << kSkillsColumns[c];
  }
  out << '\n';
  for (const auto& p : profiles) {
    out << p.skill.index;
    for (double v : p.final_allocation.values) out << ',' << fixed6(v);
    out << ',' << p.steps << ',' << to_string(p.terminal_kind) << '\n';
  }
}

void write_skills_csv(const std::filesystem::path& path, const std::vector<SkillProfile>& profiles) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  write_skills_csv(out, profiles);
}

std::vector<SkillProfile> read_skills_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("skills CSV is empty (missing header)");
  const auto header = split_csv_line(strip_cr(line));
  std::array<std::size_t, kSkillsColumns.size()> index{};
  for (std::size_t c = 0; c < kSkillsColumns.size(); ++c) {
    const auto it = std::find(header.begin(), header.end(), kSkillsColumns[c]);
    if (it == header.end()) {
      throw FormatError("skills CSV header is missing column '" + std::string(kSkillsColumns[c]) + "'");
    }
    index[c] = static_cast<std::size_t>(it - header.begin());
  }

  std::vector<SkillProfile> profiles;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw FormatError("line " + std::to_string(line_no) + ": expected " +
                        std::to_string(header.size()) + " columns, found " +
                        std::to_string(fields.size()));
    }
    SkillProfile p;
    p.skill.index = parse_number<int>(fields[index[0]], line_no, kSkillsColumns[0]);
    for (std::size_t k = 0; k < kResourceCount; ++k) {
      const double v = parse_number<double>(fields[index[1 + k]], line_no, kSkillsColumns[1 + k]);
      if (!std::isfinite(v) || v < 0.0) {
        throw FormatError("line " + std::to_string(line_no) + ": column '" +
                          std::string(kSkillsColumns[1 + k]) + "' must be a finite non-negative value");
      }
      p.final_allocation[k] = v;
    }
    p.steps = parse_number<int>(fields[index[5]], line_no, kSkillsColumns[5]);
    try {
      p.terminal_kind = terminal_kind_from_string(fields[index[6]]);
    } catch (const FormatError& e) {
      throw FormatError("line " + std::to_string(line_no) + ": " + e.what());
    }
    profiles.push_back(std::move(p));
  }
  return profiles;
}

std::vector<SkillProfile> read_skills_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open skills CSV '" + path.string() + "'");
  return read_skills_csv(in);
}

void write_coverage_csv(std::ostream& out, const CoverageReport& report) {
  out << "resource,skill_rank,value\n";
  for (std::size_t k = 0; k < kResourceCount; ++k) {
    const auto& r = report.resources[k];
    for (std::size_t rank = 0; rank < r.sorted_values.size(); ++rank) {
      out << kResourceNames[k] << ',' << rank << ',' << fixed6(r.sorted_values[rank]) << '\n';
    }
  }
  for (std::size_t k = 0; k < kResourceCount; ++k) {
    const auto& r = report.resources[k];
    out << kResourceNames[k] << ",min," << fixed6(r.min) << '\n';
    out << kResourceNames[k] << ",max," << fixed6(r.max) << '\n';
    out << kResourceNames[k] << ",span," << fixed6(r.span) << '\n';
  }
}

void write_coverage_csv(const std::filesystem::path& path, const CoverageReport& report) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  write_coverage_csv(out, report);
}

}  // namespace skilldisc

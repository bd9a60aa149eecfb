#include "skilldisc/controller.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "skilldisc/config.hpp"
#include "skilldisc/errors.hpp"

namespace skilldisc {
namespace {

constexpr double kVerifyTolerance = 1e-9;

double deficit(const ResourceVector& total, const ResourceVector& minimum) {
  double d = 0.0;
  for (std::size_t k = 0; k < kResourceCount; ++k) d += std::max(0.0, minimum[k] - total[k]);
  return d;
}

bool within(const ResourceVector& v, const ResourceVector& upper) {
  for (std::size_t k = 0; k < kResourceCount; ++k) {
    if (v[k] > upper[k]) return false;
  }
  return true;
}

bool meets(const ResourceVector& v, const ResourceVector& minimum) {
  return deficit(v, minimum) == 0.0;
}

}  // namespace

void SliceRequest::validate() const {
  if (!is_valid(minimum)) throw ConfigError("request minimum must be finite and non-negative");
  if (!is_valid(pool_capacity)) throw ConfigError("request pool_capacity must be finite and non-negative");
  for (std::size_t k = 0; k < kResourceCount; ++k) {
    const std::string name(kResourceNames[k]);
    if (maximum) {
      if (!std::isfinite((*maximum)[k])) throw ConfigError("request maximum must be finite");
      if (minimum[k] > (*maximum)[k]) throw ConfigError("request minimum exceeds maximum for " + name);
    }
    if (minimum[k] > pool_capacity[k]) throw ConfigError("request minimum exceeds pool_capacity for " + name);
  }
}

ResourceVector SliceRequest::upper_bound() const {
  ResourceVector upper = pool_capacity;
  if (maximum) {
    for (std::size_t k = 0; k < kResourceCount; ++k) upper[k] = std::min(upper[k], (*maximum)[k]);
  }
  return upper;
}

std::string_view to_string(CompositionStatus status) {
  return status == CompositionStatus::satisfied ? "satisfied" : "infeasible";
}

CompositionResult compose(const std::vector<SkillProfile>& skill_table, const SliceRequest& request,
                          int max_sequence_length) {
  request.validate();
  if (skill_table.empty()) throw ContractError("compose needs a non-empty skill table");
  if (max_sequence_length < 1) throw ContractError("max_sequence_length must be at least 1");
  const ResourceVector upper = request.upper_bound();

  CompositionResult result;
  while (deficit(result.total, request.minimum) > 0.0 &&
         result.sequence.size() < static_cast<std::size_t>(max_sequence_length)) {
    const double current = deficit(result.total, request.minimum);
    const SkillProfile* best = nullptr;
    double best_reduction = 0.0;
    for (const auto& p : skill_table) {
      const ResourceVector next = result.total + p.final_allocation;
      if (!within(next, upper)) continue;
      const double reduction = current - deficit(next, request.minimum);
      if (best == nullptr || reduction > best_reduction ||
          (reduction == best_reduction && p.skill.index < best->skill.index)) {
        best = &p;
        best_reduction = reduction;
      }
    }
    if (best == nullptr || best_reduction <= 0.0) break;
    result.sequence.push_back(best->skill);
    result.total += best->final_allocation;
  }
  if (meets(result.total, request.minimum)) {
    result.status = CompositionStatus::satisfied;
    return result;
  }

  // Greedy dead end: a pair the greedy order skipped may still fit.
  const auto fits = [&](const ResourceVector& total) {
    return within(total, upper) && meets(total, request.minimum);
  };
  const SkillProfile* best_single = nullptr;
  for (const auto& p : skill_table) {
    if (fits(p.final_allocation) && (!best_single || p.skill.index < best_single->skill.index)) {
      best_single = &p;
    }
  }
  if (best_single) return {CompositionStatus::satisfied, {best_single->skill}, best_single->final_allocation};
  if (max_sequence_length >= 2) {
    const SkillProfile* first = nullptr;
    const SkillProfile* second = nullptr;
    for (const auto& a : skill_table) {
      for (const auto& b : skill_table) {
        if (b.skill.index < a.skill.index) continue;
        if (!fits(a.final_allocation + b.final_allocation)) continue;
        const bool better = !first || a.skill.index < first->skill.index ||
                            (a.skill.index == first->skill.index && b.skill.index < second->skill.index);
        if (better) {
          first = &a;
          second = &b;
        }
      }
    }
    if (first) {
      return {CompositionStatus::satisfied, {first->skill, second->skill},
              first->final_allocation + second->final_allocation};
    }
  }
  result.status = CompositionStatus::infeasible;
  return result;
}

bool verify(const CompositionResult& result, const std::vector<SkillProfile>& skill_table,
            const SliceRequest& request) {
  try {
    request.validate();
  } catch (const ConfigError&) {
    return false;
  }
  ResourceVector total;
  for (const SkillId id : result.sequence) {
    const auto it = std::find_if(skill_table.begin(), skill_table.end(),
                                 [&](const SkillProfile& p) { return p.skill == id; });
    if (it == skill_table.end()) return false;
    total += it->final_allocation;
  }
  for (std::size_t k = 0; k < kResourceCount; ++k) {
    if (std::abs(total[k] - result.total[k]) > kVerifyTolerance * std::max(1.0, std::abs(total[k]))) {
      return false;
    }
  }
  if (result.status == CompositionStatus::infeasible) return true;
  const ResourceVector upper = request.upper_bound();
  for (std::size_t k = 0; k < kResourceCount; ++k) {
    if (total[k] < request.minimum[k] || total[k] > upper[k]) return false;
  }
  return true;
}

SliceRequest parse_request(const std::string& text) {
  const KeyValueDocument doc = parse_key_value(text);
  SliceRequest request;
  bool has_minimum = false;
  for (const auto& [section, entries] : doc) {
    if (!section.empty() && !entries.empty()) {
      throw ConfigError("request documents have no sections (found '[" + section + "]')");
    }
    for (const auto& [key, value] : entries) {
      if (key == "service_type") {
        request.service_type = value;
      } else if (key == "minimum") {
        request.minimum = parse_resource_vector(value);
        has_minimum = true;
      } else if (key == "maximum") {
        request.maximum = parse_resource_vector(value);
      } else if (key == "pool_capacity") {
        request.pool_capacity = parse_resource_vector(value);
      } else {
        throw ConfigError("unknown request key '" + key + "'");
      }
    }
  }
  if (!has_minimum) throw ConfigError("request is missing 'minimum'");
  request.validate();
  return request;
}

SliceRequest load_request(const std::filesystem::path& path) {
  return parse_request(read_text_file(path));
}

std::string format_result(const CompositionResult& result) {
  std::ostringstream out;
  out << "status = " << to_string(result.status) << '\n';
  out << "sequence = ";
  for (std::size_t i = 0; i < result.sequence.size(); ++i) {
    out << (i ? "," : "") << result.sequence[i].index;
  }
  out << "\ntotal = ";
  for (std::size_t k = 0; k < kResourceCount; ++k) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", result.total[k]);
    out << (k ? "," : "") << buf;
  }
  out << '\n';
  return out.str();
}

}  // namespace skilldisc

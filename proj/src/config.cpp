#include "skilldisc/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

#include "skilldisc/errors.hpp"

namespace skilldisc {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_as(std::string_view text, std::string_view key, const char* kind) {
  const auto t = trim(text);
  T value{};
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw ConfigError("'" + std::string(key) + "' expects " + kind + ", got '" + std::string(t) + "'");
  }
  return value;
}

int parse_int(std::string_view text, std::string_view key) {
  const long long v = parse_integer(text, key);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    throw ConfigError("'" + std::string(key) + "' is out of range");
  }
  return static_cast<int>(v);
}

}  // namespace

KeyValueDocument parse_key_value(std::string_view text) {
  KeyValueDocument doc;
  doc[""];
  std::string section;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(line_no) + ": unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      doc[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key(trim(line.substr(0, eq)));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    auto& sec = doc[section];
    if (sec.contains(key)) {
      throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
    sec.emplace(key, std::string(trim(line.substr(eq + 1))));
  }
  return doc;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read file '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

double parse_real(std::string_view text, std::string_view key) {
  const double v = parse_as<double>(text, key, "a real number");
  if (!std::isfinite(v)) throw ConfigError("'" + std::string(key) + "' must be finite");
  return v;
}

long long parse_integer(std::string_view text, std::string_view key) {
  return parse_as<long long>(text, key, "an integer");
}

ResourceVector parse_resource_vector(std::string_view text) {
  ResourceVector v;
  std::size_t count = 0;
  std::size_t pos = 0;
  while (true) {
    const auto comma = text.find(',', pos);
    const auto item = text.substr(pos, comma == std::string_view::npos ? text.npos : comma - pos);
    if (count == kResourceCount) throw ConfigError("resource vector has more than 4 values");
    v[count] = parse_real(item, kResourceNames[count]);
    ++count;
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  if (count != kResourceCount) {
    throw ConfigError("resource vector needs 4 values (power, bandwidth, memory, compute), got " +
                      std::to_string(count));
  }
  return v;
}

RunConfig parse_run_config(std::string_view text) {
  const KeyValueDocument doc = parse_key_value(text);
  RunConfig cfg;
  for (const auto& [name, section] : doc) {
    for (const auto& [key, value] : section) {
      const std::string qualified = name + "." + key;
      if (name == "env") {
        auto& e = cfg.env;
        if (key == "init_low") e.init_low = parse_real(value, qualified);
        else if (key == "init_high") e.init_high = parse_real(value, qualified);
        else if (key == "action_low") e.action_low = parse_real(value, qualified);
        else if (key == "action_high") e.action_high = parse_real(value, qualified);
        else if (key == "cap") e.cap = parse_real(value, qualified);
        else if (key == "rel_tol") e.rel_tol = parse_real(value, qualified);
        else if (key == "abs_tol") e.abs_tol = parse_real(value, qualified);
        else if (key == "degenerate_eps") e.degenerate_eps = parse_real(value, qualified);
        else throw ConfigError("unknown key '" + qualified + "'");
      } else if (name == "train") {
        auto& t = cfg.train;
        if (key == "n_skills") t.n_skills = parse_int(value, qualified);
        else if (key == "episodes") t.episodes = parse_integer(value, qualified);
        else if (key == "learning_rate") t.learning_rate = parse_real(value, qualified);
        else if (key == "gamma") t.gamma = parse_real(value, qualified);
        else if (key == "alpha") t.alpha = parse_real(value, qualified);
        else if (key == "tau") t.tau = parse_real(value, qualified);
        else if (key == "batch_size") t.batch_size = parse_int(value, qualified);
        else if (key == "buffer_capacity") t.buffer_capacity = parse_int(value, qualified);
        else if (key == "updates_per_step") t.updates_per_step = parse_int(value, qualified);
        else if (key == "warmup_transitions") t.warmup_transitions = parse_int(value, qualified);
        else if (key == "seed") t.seed = parse_as<std::uint64_t>(value, qualified, "a non-negative integer");
        else if (key == "log_q_floor") t.log_q_floor = parse_real(value, qualified);
        else throw ConfigError("unknown key '" + qualified + "'");
      } else if (name == "eval") {
        if (key == "init_state") cfg.eval_init_state = parse_resource_vector(value);
        else throw ConfigError("unknown key '" + qualified + "'");
      } else {
        throw ConfigError(name.empty() ? "key '" + key + "' must be inside a section"
                                       : "unknown section '[" + name + "]'");
      }
    }
  }
  cfg.env.validate();
  cfg.train.validate();
  for (double v : cfg.eval_init_state.values) {
    if (!(v > 0.0 && v < cfg.env.cap)) {
      throw ConfigError("eval.init_state components must lie in (0, cap)");
    }
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  return parse_run_config(read_text_file(path));
}

}  // namespace skilldisc

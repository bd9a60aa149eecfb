#include "skilldisc/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "json.hpp"
#include <openssl/evp.h>

#include "skilldisc/errors.hpp"

namespace skilldisc {
namespace {

using nlohmann::json;

// Parameter sets in payload order, keyed by their header prefix.
struct NamedSet {
  const char* prefix;
  nn::ParameterSet Checkpoint::*member;
};

constexpr NamedSet kSets[] = {
    {"actor", &Checkpoint::actor},         {"critic1", &Checkpoint::critic1},
    {"critic2", &Checkpoint::critic2},     {"target1", &Checkpoint::target1},
    {"target2", &Checkpoint::target2},     {"discriminator", &Checkpoint::discriminator},
};

json env_to_json(const EnvConfig& e) {
  return {{"init_low", e.init_low},     {"init_high", e.init_high}, {"action_low", e.action_low},
          {"action_high", e.action_high}, {"cap", e.cap},           {"rel_tol", e.rel_tol},
          {"abs_tol", e.abs_tol},       {"degenerate_eps", e.degenerate_eps}};
}

json train_to_json(const TrainConfig& t) {
  return {{"n_skills", t.n_skills},
          {"episodes", t.episodes},
          {"learning_rate", t.learning_rate},
          {"gamma", t.gamma},
          {"alpha", t.alpha},
          {"tau", t.tau},
          {"batch_size", t.batch_size},
          {"buffer_capacity", t.buffer_capacity},
          {"updates_per_step", t.updates_per_step},
          {"warmup_transitions", t.warmup_transitions},
          {"seed", t.seed},
          {"log_q_floor", t.log_q_floor}};
}

EnvConfig env_from_json(const json& j) {
  EnvConfig e;
  j.at("init_low").get_to(e.init_low);
  j.at("init_high").get_to(e.init_high);
  j.at("action_low").get_to(e.action_low);
  j.at("action_high").get_to(e.action_high);
  j.at("cap").get_to(e.cap);
  j.at("rel_tol").get_to(e.rel_tol);
  j.at("abs_tol").get_to(e.abs_tol);
  j.at("degenerate_eps").get_to(e.degenerate_eps);
  return e;
}

TrainConfig train_from_json(const json& j) {
  TrainConfig t;
  j.at("n_skills").get_to(t.n_skills);
  j.at("episodes").get_to(t.episodes);
  j.at("learning_rate").get_to(t.learning_rate);
  j.at("gamma").get_to(t.gamma);
  j.at("alpha").get_to(t.alpha);
  j.at("tau").get_to(t.tau);
  j.at("batch_size").get_to(t.batch_size);
  j.at("buffer_capacity").get_to(t.buffer_capacity);
  j.at("updates_per_step").get_to(t.updates_per_step);
  j.at("warmup_transitions").get_to(t.warmup_transitions);
  j.at("seed").get_to(t.seed);
  j.at("log_q_floor").get_to(t.log_q_floor);
  return t;
}

void append_le(std::string& out, double value) {
  auto bits = std::bit_cast<std::uint64_t>(value);
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<char>(bits & 0xFFU));
    bits >>= 8;
  }
}

double read_le(const char* p) {
  std::uint64_t bits = 0;
  for (int i = 7; i >= 0; --i) {
    bits = (bits << 8) | static_cast<unsigned char>(p[i]);
  }
  return std::bit_cast<double>(bits);
}

}  // namespace

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  hex.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i) {
    hex.push_back(kHex[digest[i] >> 4]);
    hex.push_back(kHex[digest[i] & 0x0F]);
  }
  return hex;
}

std::string serialize_checkpoint(const Checkpoint& checkpoint) {
  std::string payload;
  json arrays = json::array();
  for (const auto& set : kSets) {
    for (const auto& a : (checkpoint.*set.member).arrays()) {
      arrays.push_back({{"name", std::string(set.prefix) + "/" + a.name},
                        {"shape", a.shape},
                        {"offset", payload.size()}});
      for (double v : a.values) append_le(payload, v);
    }
  }
  const json header = {{"format_version", kCheckpointFormatVersion},
                       {"env", env_to_json(checkpoint.env)},
                       {"train", train_to_json(checkpoint.train)},
                       {"episodes_completed", checkpoint.episodes_completed},
                       {"arrays", arrays},
                       {"payload_bytes", payload.size()},
                       {"payload_sha256", sha256_hex(payload)}};
  std::string out;
  out.append(kCheckpointMagic);
  out.push_back('\n');
  out.append(header.dump());
  out.push_back('\n');
  out.append(payload);
  return out;
}

Checkpoint deserialize_checkpoint(std::string_view bytes) {
  const auto magic_end = bytes.find('\n');
  if (magic_end == std::string_view::npos || bytes.substr(0, magic_end) != kCheckpointMagic) {
    throw FormatError("not a checkpoint file (bad magic line)");
  }
  const auto header_end = bytes.find('\n', magic_end + 1);
  if (header_end == std::string_view::npos) throw FormatError("checkpoint header is truncated");
  const std::string_view payload = bytes.substr(header_end + 1);

  Checkpoint c;
  std::string expected_digest;
  try {
    const json header = json::parse(bytes.substr(magic_end + 1, header_end - magic_end - 1));
    const int version = header.at("format_version").get<int>();
    if (version != kCheckpointFormatVersion) {
      throw FormatError("unsupported checkpoint format version " + std::to_string(version));
    }
    if (header.at("payload_bytes").get<std::size_t>() != payload.size()) {
      throw FormatError("checkpoint payload size does not match header (truncated file?)");
    }
    expected_digest = header.at("payload_sha256").get<std::string>();
    const std::string actual = sha256_hex(payload);
    if (actual != expected_digest) {
      throw FormatError("checkpoint digest mismatch: header says " + expected_digest +
                        ", payload hashes to " + actual);
    }
    c.env = env_from_json(header.at("env"));
    c.train = train_from_json(header.at("train"));
    c.episodes_completed = header.at("episodes_completed").get<long long>();

    for (const auto& entry : header.at("arrays")) {
      const auto full_name = entry.at("name").get<std::string>();
      const auto shape = entry.at("shape").get<std::vector<std::size_t>>();
      const auto offset = entry.at("offset").get<std::size_t>();
      const auto slash = full_name.find('/');
      const std::string prefix = full_name.substr(0, slash);
      nn::ParameterSet* target = nullptr;
      for (const auto& set : kSets) {
        if (prefix == set.prefix) target = &(c.*set.member);
      }
      if (target == nullptr || slash == std::string::npos) {
        throw FormatError("unknown checkpoint array '" + full_name + "'");
      }
      std::size_t count = 1;
      for (auto d : shape) count *= d;
      if (offset > payload.size() || count > (payload.size() - offset) / 8) {
        throw FormatError("checkpoint array '" + full_name + "' lies outside the payload");
      }
      nn::Values values(count);
      for (std::size_t i = 0; i < count; ++i) values[i] = read_le(payload.data() + offset + 8 * i);
      target->add(full_name.substr(slash + 1), shape, std::move(values));
    }
    c.env.validate();
    c.train.validate();
    c.validate();
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed checkpoint header: ") + e.what());
  } catch (const ConfigError& e) {
    throw FormatError(std::string("checkpoint carries an invalid config: ") + e.what());
  } catch (const ContractError& e) {
    throw FormatError(std::string("checkpoint arrays do not match the networks: ") + e.what());
  }
  return c;
}

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  const std::string bytes = serialize_checkpoint(checkpoint);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open checkpoint '" + path.string() + "'");
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_checkpoint(bytes);
}

}  // namespace skilldisc

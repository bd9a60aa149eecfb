#include "skilldisc/cli.hpp"

#include <cstdio>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "skilldisc/analysis.hpp"
#include "skilldisc/checkpoint.hpp"
#include "skilldisc/config.hpp"
#include "skilldisc/controller.hpp"
#include "skilldisc/errors.hpp"

namespace skilldisc::cli {
namespace {

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

// Maps the error taxonomy onto exit codes for every command.
template <typename Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const std::logic_error& e) {
    err << "internal error: " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }
}

}  // namespace

int cmd_train(const std::filesystem::path& config_path, std::optional<std::uint64_t> seed_override,
              std::optional<long long> episodes_override, const std::filesystem::path& out_path,
              std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    RunConfig cfg = load_run_config(config_path);
    if (seed_override) cfg.train.seed = *seed_override;
    if (episodes_override) cfg.train.episodes = *episodes_override;
    cfg.train.validate();

    TrainOptions options;
    options.progress_interval = 1000;
    options.on_progress = [&out](const TrainProgress& p) {
      out << "episode " << p.episodes_completed << "  mean_length " << fixed6(p.mean_episode_length)
          << "  mean_intrinsic_reward " << fixed6(p.mean_intrinsic_reward)
          << "  discriminator_accuracy " << fixed6(p.discriminator_accuracy) << std::endl;
    };
    const Checkpoint checkpoint = train(cfg.env, cfg.train, options);
    write_checkpoint(out_path, checkpoint);
    out << "wrote " << out_path.string() << " (" << checkpoint.episodes_completed << " episodes)\n";
    return static_cast<int>(kSuccess);
  });
}

int cmd_skills(const std::filesystem::path& checkpoint_path, const std::filesystem::path& out_csv,
               std::optional<ResourceVector> init_override, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Checkpoint checkpoint = read_checkpoint(checkpoint_path);
    DomainState init;
    init.allocation = init_override.value_or(kDefaultEvalInit);
    for (double v : init.allocation.values) {
      if (!(v > 0.0 && v < checkpoint.env.cap)) {
        throw ConfigError("--init components must lie in (0, cap)");
      }
    }
    const auto table = skill_table(checkpoint, init);
    write_skills_csv(out_csv, table);
    out << "wrote " << table.size() << " skills to " << out_csv.string() << '\n';
    return static_cast<int>(kSuccess);
  });
}

int cmd_coverage(const std::filesystem::path& skills_csv, const std::filesystem::path& out_csv,
                 std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto profiles = read_skills_csv(skills_csv);
    if (profiles.empty()) throw FormatError("skills CSV '" + skills_csv.string() + "' has no rows");
    const CoverageReport report = coverage(profiles);
    write_coverage_csv(out_csv, report);
    out << "resource,min,max,span\n";
    for (std::size_t k = 0; k < kResourceCount; ++k) {
      const auto& r = report.resources[k];
      out << kResourceNames[k] << ',' << fixed6(r.min) << ',' << fixed6(r.max) << ','
          << fixed6(r.span) << '\n';
    }
    return static_cast<int>(kSuccess);
  });
}

int cmd_compose(const std::filesystem::path& skills_csv, const std::filesystem::path& request_path,
                std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto profiles = read_skills_csv(skills_csv);
    if (profiles.empty()) throw FormatError("skills CSV '" + skills_csv.string() + "' has no rows");
    const SliceRequest request = load_request(request_path);
    const CompositionResult result = compose(profiles, request);
    out << "service_type = " << request.service_type << '\n' << format_result(result);
    return static_cast<int>(result.status == CompositionStatus::satisfied ? kSuccess : kInfeasible);
  });
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Unsupervised assignment-skill discovery for edge-domain resource pools"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::optional<std::uint64_t> seed;
  std::optional<long long> episodes;
  auto* train_cmd = app.add_subcommand("train", "Train the skill-discovery agent");
  train_cmd->add_option("--config", config_path, "Run configuration file")->required();
  train_cmd->add_option("--seed", seed, "Override train.seed");
  train_cmd->add_option("--episodes", episodes, "Override train.episodes");
  train_cmd->add_option("--out", out_path, "Checkpoint output path")->required();

  std::string ckpt_path;
  std::string init_text;
  auto* skills_cmd = app.add_subcommand("skills", "Roll out every skill deterministically");
  skills_cmd->add_option("--ckpt", ckpt_path, "Checkpoint file")->required();
  skills_cmd->add_option("--out", out_path, "skills.csv output path")->required();
  skills_cmd->add_option("--init", init_text, "Start allocation a,b,c,d (default 6,6,6,6)");

  std::string skills_path;
  auto* coverage_cmd = app.add_subcommand("coverage", "Per-resource coverage of the skill table");
  coverage_cmd->add_option("--skills", skills_path, "skills.csv input")->required();
  coverage_cmd->add_option("--out", out_path, "coverage.csv output path")->required();

  std::string request_path;
  auto* compose_cmd = app.add_subcommand("compose", "Compose skills for a slice request");
  compose_cmd->add_option("--skills", skills_path, "skills.csv input")->required();
  compose_cmd->add_option("--request", request_path, "Slice request file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream app_out;
    std::ostringstream app_err;
    const int code = app.exit(e, app_out, app_err);
    out << app_out.str();
    err << app_err.str();
    return code == 0 ? static_cast<int>(kSuccess) : static_cast<int>(kInputError);
  }

  if (train_cmd->parsed()) return cmd_train(config_path, seed, episodes, out_path, out, err);
  if (skills_cmd->parsed()) {
    std::optional<ResourceVector> init;
    if (!init_text.empty()) {
      try {
        init = parse_resource_vector(init_text);
      } catch (const ConfigError& e) {
        err << "error: --init: " << e.what() << '\n';
        return kInputError;
      }
    }
    return cmd_skills(ckpt_path, out_path, init, out, err);
  }
  if (coverage_cmd->parsed()) return cmd_coverage(skills_path, out_path, out, err);
  return cmd_compose(skills_path, request_path, out, err);
}

}  // namespace skilldisc::cli

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>

#include "skilldisc/env.hpp"

namespace skilldisc::cli {

enum ExitCode : int {
  kSuccess = 0,
  kInfeasible = 1,
  kInputError = 2,
  kNumericalFailure = 3,
};

int cmd_train(const std::filesystem::path& config_path, std::optional<std::uint64_t> seed_override,
              std::optional<long long> episodes_override, const std::filesystem::path& out_path,
              std::ostream& out, std::ostream& err);

int cmd_skills(const std::filesystem::path& checkpoint_path, const std::filesystem::path& out_csv,
               std::optional<ResourceVector> init_override, std::ostream& out, std::ostream& err);

int cmd_coverage(const std::filesystem::path& skills_csv, const std::filesystem::path& out_csv,
                 std::ostream& out, std::ostream& err);

int cmd_compose(const std::filesystem::path& skills_csv, const std::filesystem::path& request_path,
                std::ostream& out, std::ostream& err);

/// Parses argv and dispatches to a subcommand. Always returns one of ExitCode.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace skilldisc::cli

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace torusflow::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitInadmissible = 3;

struct RunOptions {
  std::string command;  // solve | verify | sweep | trotter | limits | pullback
  std::filesystem::path scenario;
  std::filesystem::path out_dir = "out";
  int workers = 1;
  std::optional<std::uint64_t> seed;
};

struct RunResult {
  int exit_code = kExitOk;
  std::string message;
};

/// Loads and validates the scenario, runs the command and writes manifest.json,
/// summary.json and the command's CSV/JSON files into out_dir. Validation and
/// admissibility failures are reported before any compute and write nothing.
RunResult run_scenario(const RunOptions& options);

/// Same as run_scenario for an already-parsed scenario text.
RunResult run_scenario_text(const RunOptions& options, const std::string& text);

}  // namespace torusflow::cli

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "rismimo/cli/scenario.hpp"

namespace rismimo::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitCompute = 3;

/// Environment variable naming the default output directory.
inline constexpr const char* kOutDirEnv = "RISMIMO_OUT_DIR";

std::vector<std::string> subcommands();

struct RunOptions {
  std::filesystem::path out_dir;
  bool strict = false;
};

/// Runs one subcommand on a resolved scenario, writing its artifacts and manifest.json into
/// `opts.out_dir`. Throws ConfigError / ComputeError.
void run_subcommand(const std::string& name, const Scenario& scenario, const RunOptions& opts);

/// Full command line: `rismimo <subcommand> [-s scenario.yaml] [-o dir] [--seed N] [--strict]
/// [--threads N] [--section.key=value ...]`. Returns the process exit status.
int main_entry(int argc, char** argv);

}  // namespace rismimo::cli

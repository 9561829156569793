#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "sfobench/config.hpp"

namespace sfo::cli {

// Exit codes contract.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitAssertionFailure = 3;
inline constexpr int kExitRuntimeFault = 4;

// Resolves the run directory: explicit pin wins, then config, then the
// SFOBENCH_OUT_DIR environment variable, then ./runs; a timestamped
// subdirectory is created unless pinned.
std::filesystem::path prepare_run_dir(const RunConfig& config,
                                      const std::string& pinned_dir);

int run_sweep(const RunConfig& config, const std::filesystem::path& dir);
int run_bounds(const RunConfig& config, const std::filesystem::path& dir);
int run_fit(const RunConfig& config, const std::filesystem::path& dir);
int run_validate(const RunConfig& config, const std::filesystem::path& dir);

}  // namespace sfo::cli

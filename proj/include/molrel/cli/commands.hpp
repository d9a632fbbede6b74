#pragma once

#include <cstddef>
#include <exception>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

#include "molrel/cli/config.hpp"

namespace molrel::cli {

// Exit codes of the molrel tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumeric = 4;

/// Progress lines go to stderr unless quiet.
void set_quiet(bool quiet);

/// Runs job(i) for i in [0, n) on up to `workers` threads (0: available
/// cores). Returns one exception_ptr per job, null when it succeeded.
std::vector<std::exception_ptr> run_pool(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& job);

// Output layout under config.out.
std::filesystem::path split_manifest_path(const RunConfig& config, std::uint64_t seed);
std::filesystem::path run_directory(const RunConfig& config, bayes::Mode mode, std::uint64_t seed);

/// One manifest per seed plus split/summary.json.
nlohmann::json cmd_split(const RunConfig& config);
/// Posterior artifacts, training logs and an index per (mode, seed).
nlohmann::json cmd_train(const RunConfig& config);
/// Test-set metrics per seed and mean ± std over seeds for each mode, in
/// eval/report.json, eval/report.csv and confusion histograms.
nlohmann::json cmd_eval(const RunConfig& config);
/// Ranked predictions, threshold summary and histogram per (mode, seed) under screen/.
nlohmann::json cmd_screen(const RunConfig& config);

/// Parses the command line, runs the command and maps errors to exit codes.
int run(int argc, const char* const* argv);

}  // namespace molrel::cli

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fracle/config.hpp"
#include "fracle/diagnostics.hpp"
#include "fracle/stability.hpp"

namespace fracle {

inline constexpr int kExitOk = 0;
inline constexpr int kExitIoError = 1;
inline constexpr int kExitNonFinite = 2;
inline constexpr int kExitUnstable = 3;
inline constexpr int kExitMarginal = 4;
inline constexpr int kExitVerifyFailed = 5;

/// 1 whenever I/O failed, otherwise 0 / 3 / 4 by verdict.
int analyze_exit_code(OverallVerdict verdict, bool io_ok);

nlohmann::json stability_report_json(const StabilityReport& r);

/// Writes `report.json` under out_dir.
int cmd_analyze(const Config& config, const std::filesystem::path& out_dir, std::ostream& log);

struct SimulationOutcome {
  int exit_code = kExitOk;
  std::optional<std::size_t> failed_step;
  ConvergenceMetrics metrics;  ///< from the first probe
  std::vector<std::string> files;
};

/// Runs the solver and writes snapshots, probe series, the Lyapunov series,
/// pattern metrics (2D) and `manifest.json` under out_dir.
SimulationOutcome simulate_to_dir(const Config& config, const std::filesystem::path& out_dir,
                                  std::optional<std::uint64_t> seed, std::ostream& log);

int cmd_simulate(const Config& config, const std::filesystem::path& out_dir,
                 std::optional<std::uint64_t> seed, std::ostream& log);

struct SweepRow {
  double delta = 1.0;
  double final_error = 0.0;
  double tail_amplitude = 0.0;
  int exit_code = kExitOk;
};

/// δ grid from..to with `steps` points (a single point when from == to).
std::vector<double> delta_grid(double from, double to, std::size_t steps);

/// One simulation per δ in `delta_<δ>/` sub-directories, summarized in `sweep.csv`.
/// Entries run on up to `threads` workers.
int cmd_sweep_delta(const Config& config, double from, double to, std::size_t steps,
                    const std::filesystem::path& out_dir, std::ostream& log,
                    std::size_t threads = 1, std::vector<SweepRow>* rows_out = nullptr);

/// Thread count from FRACLE_THREADS, defaulting to 1.
std::size_t threads_from_env();

}  // namespace fracle

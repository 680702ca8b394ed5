#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "fracle/diagnostics.hpp"
#include "fracle/solver.hpp"

namespace fracle {

/// Decimal, 12 significant digits, independent of the C++ locale.
std::string format_number(double x);

/// Writes files under one output directory and remembers each one with its role.
class OutputSink {
 public:
  struct Entry {
    std::string path;  ///< relative to the root
    std::string role;
  };

  /// Creates the directory if needed. Throws std::runtime_error on I/O failure.
  explicit OutputSink(std::filesystem::path root);

  void write(const std::string& relative, const std::string& role, const std::string& content);
  void write_binary(const std::string& relative, const std::string& role,
                    const std::vector<unsigned char>& bytes);

  const std::filesystem::path& root() const noexcept { return root_; }
  const std::vector<Entry>& entries() const noexcept { return entries_; }

 private:
  std::filesystem::path root_;
  std::vector<Entry> entries_;
};

/// Header `t,x,u,v`, one row per node.
std::string snapshot_csv_1d(const FieldState& s, const Grid& grid);

/// First row `y\x,x_0,x_1,...`; each further row `y_j,f(x_0,y_j),...`.
std::string field_csv_2d(std::span<const double> field, const Grid& grid);

/// Binary 8-bit PGM (P5), min–max normalized; rows run from y = 0 upward.
std::vector<unsigned char> field_pgm(std::span<const double> field, const Grid& grid);

/// Header `t,u,v`.
std::string probe_csv(const ProbeSeries& series);

/// Header `t,L`.
std::string lyapunov_csv(const LyapunovReport& report);

struct PatternRow {
  std::size_t step = 0;
  double t = 0.0;
  PatternMetrics metrics;
};

std::string pattern_metrics_csv(std::span<const PatternRow> rows);

}  // namespace fracle

#include "fracle/output.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace fracle {

std::string format_number(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 12);
  return std::string(buf, res.ptr);
}

OutputSink::OutputSink(std::filesystem::path root) : root_(std::move(root)) {
  std::error_code ec;
  std::filesystem::create_directories(root_, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + root_.string() + "': " + ec.message());
}

void OutputSink::write(const std::string& relative, const std::string& role,
                       const std::string& content) {
  std::ofstream out(root_ / relative, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + (root_ / relative).string() + "' for writing");
  out << content;
  if (!out) throw std::runtime_error("write failed for '" + (root_ / relative).string() + "'");
  entries_.push_back({relative, role});
}

void OutputSink::write_binary(const std::string& relative, const std::string& role,
                              const std::vector<unsigned char>& bytes) {
  write(relative, role, std::string(bytes.begin(), bytes.end()));
}

std::string snapshot_csv_1d(const FieldState& s, const Grid& grid) {
  std::string out = "t,x,u,v\n";
  for (std::size_t i = 0; i < s.u.size(); ++i) {
    out += format_number(s.t) + ',' + format_number(grid.dim() == 0 ? 0.0 : grid.x(i)) + ',' +
           format_number(s.u[i]) + ',' + format_number(s.v[i]) + '\n';
  }
  return out;
}

std::string field_csv_2d(std::span<const double> f, const Grid& grid) {
  std::string out = "y\\x";
  for (std::size_t i = 0; i < grid.nx(); ++i) out += ',' + format_number(grid.x(i));
  out += '\n';
  for (std::size_t j = 0; j < grid.ny(); ++j) {
    out += format_number(grid.y(j));
    for (std::size_t i = 0; i < grid.nx(); ++i) out += ',' + format_number(f[grid.index(i, j)]);
    out += '\n';
  }
  return out;
}

std::vector<unsigned char> field_pgm(std::span<const double> f, const Grid& grid) {
  const std::string header =
      "P5\n" + std::to_string(grid.nx()) + " " + std::to_string(grid.ny()) + "\n255\n";
  std::vector<unsigned char> bytes(header.begin(), header.end());
  const auto [lo, hi] = std::minmax_element(f.begin(), f.end());
  const double range = *hi - *lo;
  for (std::size_t j = 0; j < grid.ny(); ++j) {
    for (std::size_t i = 0; i < grid.nx(); ++i) {
      const double x = range > 0.0 ? (f[grid.index(i, j)] - *lo) / range : 0.0;
      bytes.push_back(static_cast<unsigned char>(std::lround(255.0 * x)));
    }
  }
  return bytes;
}

std::string probe_csv(const ProbeSeries& series) {
  std::string out = "t,u,v\n";
  for (const auto& s : series.samples) {
    out += format_number(s.t) + ',' + format_number(s.u) + ',' + format_number(s.v) + '\n';
  }
  return out;
}

std::string lyapunov_csv(const LyapunovReport& report) {
  std::string out = "t,L\n";
  for (const auto& s : report.samples) out += format_number(s.t) + ',' + format_number(s.L) + '\n';
  return out;
}

std::string pattern_metrics_csv(std::span<const PatternRow> rows) {
  std::string out =
      "step,t,u_variance,u_min,u_max,u_extrema,v_variance,v_min,v_max,v_extrema\n";
  auto stats = [](const FieldStats& s) {
    return format_number(s.variance) + ',' + format_number(s.min) + ',' + format_number(s.max) +
           ',' + std::to_string(s.extrema_count);
  };
  for (const auto& r : rows) {
    out += std::to_string(r.step) + ',' + format_number(r.t) + ',' + stats(r.metrics.u) + ',' +
           stats(r.metrics.v) + '\n';
  }
  return out;
}

}  // namespace fracle

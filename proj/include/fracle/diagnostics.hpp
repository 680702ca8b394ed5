#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "fracle/kinetics.hpp"
#include "fracle/solver.hpp"

namespace fracle {

/// Trapezoidal integral of σb/3·U³ + σb·u*·U² + 2V² with U = u - u*, V = v - v*.
double lyapunov_value(const FieldState& state, const SystemParams& p, const Grid& grid);

struct LyapunovSample {
  double t = 0.0;
  double L = 0.0;
  std::optional<double> dL_fractional;  ///< discrete Caputo derivative of the L series
};

struct LyapunovReport {
  std::vector<LyapunovSample> samples;
  bool bounded = true;   ///< L(t_n) <= L(0)·(1 + 1e-8) for every n
  bool decayed = false;  ///< L(t_end) < 0.01·L(0), or L(0) = 0
  bool consistent() const noexcept { return bounded && decayed; }
};

inline constexpr double kLyapunovRelativeSlack = 1e-8;
inline constexpr double kLyapunovDecayFraction = 0.01;

/// Evaluates L along a trajectory. The Caputo derivative of the series is filled
/// in when the sample times are uniformly spaced. Never throws on a failed check.
LyapunovReport lyapunov_monitor(std::span<const FieldState> trajectory, const SystemParams& p,
                                const Grid& grid);

/// Same check on precomputed (t, L) pairs.
LyapunovReport lyapunov_monitor(std::span<const double> times, std::span<const double> values,
                                FractionalOrder delta);

struct ConvergenceMetrics {
  double final_error = 0.0;     ///< |last - (u*, v*)| / |(u*, v*)|
  double tail_amplitude = 0.0;  ///< max - min of u over the last quarter
};

ConvergenceMetrics convergence_metrics(std::span<const ProbeSample> series, const Equilibrium& eq);

/// max over nodes of |(u, v) - (u*, v*)| / |(u*, v*)|.
double sup_relative_distance(const FieldState& state, const Equilibrium& eq);

struct FieldStats {
  double variance = 0.0;  ///< quadrature-weighted
  double min = 0.0;
  double max = 0.0;
  std::size_t extrema_count = 0;  ///< strict local maxima over in-domain 8-neighbours
};

struct PatternMetrics {
  FieldStats u;
  FieldStats v;
};

FieldStats field_stats(std::span<const double> field, const Grid& grid);

/// Throws std::invalid_argument for anything but a 2D grid.
PatternMetrics pattern_metrics(const FieldState& state, const Grid& grid);

}  // namespace fracle

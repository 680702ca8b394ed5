#include "fracle/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fracle {

double lyapunov_value(const FieldState& s, const SystemParams& p, const Grid& grid) {
  if (s.u.size() != grid.size() || s.v.size() != grid.size()) {
    throw std::invalid_argument("lyapunov_value: state does not match grid");
  }
  const Equilibrium eq = equilibrium(p);
  const double sb = p.sigma * p.b;
  const std::vector<double> w = grid.quadrature_weights();
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double U = s.u[i] - eq.u_star;
    const double V = s.v[i] - eq.v_star;
    acc += w[i] * (sb / 3.0 * U * U * U + sb * eq.u_star * U * U + 2.0 * V * V);
  }
  return acc;
}

LyapunovReport lyapunov_monitor(std::span<const double> times, std::span<const double> values,
                                FractionalOrder delta) {
  if (times.size() != values.size()) throw std::invalid_argument("lyapunov_monitor: size mismatch");
  LyapunovReport r;
  if (values.empty()) return r;
  for (std::size_t i = 0; i < values.size(); ++i) r.samples.push_back({times[i], values[i], {}});

  const double L0 = values.front();
  const double bound = L0 * (1.0 + kLyapunovRelativeSlack);
  r.bounded = std::all_of(values.begin(), values.end(), [&](double L) { return L <= bound; });
  r.decayed = L0 == 0.0 ? values.back() == 0.0 : values.back() < kLyapunovDecayFraction * L0;

  if (values.size() >= 2) {
    const double dt = times[1] - times[0];
    bool uniform = dt > 0.0;
    for (std::size_t i = 1; i < times.size() && uniform; ++i) {
      uniform = std::abs((times[i] - times[i - 1]) - dt) <= 1e-9 * std::max(1.0, std::abs(dt));
    }
    if (uniform) {
      ScalarHistory h{{values.begin(), values.end()}, dt};
      const auto d = caputo_l1_series(h, delta);
      for (std::size_t i = 1; i < d.size(); ++i) r.samples[i].dL_fractional = d[i];
    }
  }
  return r;
}

LyapunovReport lyapunov_monitor(std::span<const FieldState> trajectory, const SystemParams& p,
                                const Grid& grid) {
  std::vector<double> t, L;
  t.reserve(trajectory.size());
  L.reserve(trajectory.size());
  for (const auto& s : trajectory) {
    t.push_back(s.t);
    L.push_back(lyapunov_value(s, p, grid));
  }
  return lyapunov_monitor(t, L, p.delta);
}

ConvergenceMetrics convergence_metrics(std::span<const ProbeSample> series, const Equilibrium& eq) {
  if (series.empty()) throw std::invalid_argument("convergence_metrics: empty series");
  const double norm = std::hypot(eq.u_star, eq.v_star);
  const ProbeSample& last = series.back();
  ConvergenceMetrics m;
  m.final_error = std::hypot(last.u - eq.u_star, last.v - eq.v_star) / norm;
  const std::size_t start = series.size() - std::max<std::size_t>(1, series.size() / 4);
  double lo = series[start].u;
  double hi = lo;
  for (std::size_t i = start; i < series.size(); ++i) {
    lo = std::min(lo, series[i].u);
    hi = std::max(hi, series[i].u);
  }
  m.tail_amplitude = hi - lo;
  return m;
}

double sup_relative_distance(const FieldState& s, const Equilibrium& eq) {
  const double norm = std::hypot(eq.u_star, eq.v_star);
  double worst = 0.0;
  for (std::size_t i = 0; i < s.u.size(); ++i) {
    worst = std::max(worst, std::hypot(s.u[i] - eq.u_star, s.v[i] - eq.v_star));
  }
  return worst / norm;
}

FieldStats field_stats(std::span<const double> f, const Grid& grid) {
  if (f.size() != grid.size()) throw std::invalid_argument("field_stats: field does not match grid");
  const std::vector<double> w = grid.quadrature_weights();
  double total = 0.0, mean = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    total += w[i];
    mean += w[i] * f[i];
  }
  mean /= total;
  double var = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) var += w[i] * (f[i] - mean) * (f[i] - mean);

  FieldStats st;
  st.variance = var / total;
  const auto [lo, hi] = std::minmax_element(f.begin(), f.end());
  st.min = *lo;
  st.max = *hi;

  const auto nx = static_cast<long>(grid.nx());
  const auto ny = static_cast<long>(grid.ny());
  for (long j = 0; j < ny; ++j) {
    for (long i = 0; i < nx; ++i) {
      const double c = f[grid.index(static_cast<std::size_t>(i), static_cast<std::size_t>(j))];
      bool strict = true;
      for (long dj = -1; dj <= 1 && strict; ++dj) {
        for (long di = -1; di <= 1 && strict; ++di) {
          if (di == 0 && dj == 0) continue;
          const long ii = i + di, jj = j + dj;
          if (ii < 0 || jj < 0 || ii >= nx || jj >= ny) continue;
          strict = f[grid.index(static_cast<std::size_t>(ii), static_cast<std::size_t>(jj))] < c;
        }
      }
      if (strict) ++st.extrema_count;
    }
  }
  return st;
}

PatternMetrics pattern_metrics(const FieldState& s, const Grid& grid) {
  if (grid.dim() != 2) throw std::invalid_argument("pattern_metrics requires a 2D state");
  return {field_stats(s.u, grid), field_stats(s.v, grid)};
}

}  // namespace fracle

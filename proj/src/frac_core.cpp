#include "fracle/frac_core.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace fracle {

FractionalOrder::FractionalOrder(double delta) : delta_(delta) {
  if (!(delta > 0.0 && delta <= 1.0)) {
    throw std::invalid_argument("fractional order delta must lie in (0, 1], got " +
                                std::to_string(delta));
  }
}

double gamma(double x) {
  if (!(x > 0.0)) throw std::domain_error("gamma: argument must be positive");
  return std::tgamma(x);
}

L1Weights l1_weights(FractionalOrder delta, double dt, std::size_t n) {
  if (!(dt > 0.0)) throw std::invalid_argument("l1_weights: dt must be positive");
  if (n < 1) throw std::invalid_argument("l1_weights: need at least one weight");

  L1Weights w;
  w.delta = delta.value();
  w.dt = dt;
  w.b.assign(n, 0.0);
  w.b[0] = 1.0;
  if (!delta.is_integer()) {
    const double e = 1.0 - w.delta;
    double prev = 1.0;  // k^(1-δ) at k = 1
    for (std::size_t k = 1; k < n; ++k) {
      const double next = std::pow(static_cast<double>(k + 1), e);
      w.b[k] = next - prev;
      prev = next;
    }
  }
  w.scale = std::pow(dt, -w.delta) / gamma(2.0 - w.delta);
  return w;
}

void ScalarHistory::validate() const {
  if (samples.empty()) throw std::invalid_argument("history must hold at least one sample");
  if (!(dt > 0.0)) throw std::invalid_argument("history spacing dt must be positive");
}

namespace {

// scale · Σ_{k=0}^{n-1} b_k (f_{n-k} - f_{n-k-1}) without size checks.
double l1_sum(std::span<const double> f, std::size_t n, const L1Weights& w) {
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k) acc += w.b[k] * (f[n - k] - f[n - k - 1]);
  return w.scale * acc;
}

}  // namespace

double caputo_l1(const ScalarHistory& history, const L1Weights& w) {
  history.validate();
  const std::size_t n = history.last_index();
  if (n < 1) throw std::invalid_argument("caputo_l1: history needs at least two samples");
  if (w.size() != n) {
    throw std::invalid_argument("caputo_l1: history has " + std::to_string(n) +
                                " intervals but weights were built for " + std::to_string(w.size()));
  }
  if (w.dt != history.dt) throw std::invalid_argument("caputo_l1: weights built for a different dt");
  return l1_sum(history.samples, n, w);
}

std::vector<double> caputo_l1_series(const ScalarHistory& history, FractionalOrder delta) {
  history.validate();
  const std::size_t n = history.last_index();
  std::vector<double> out(n + 1, 0.0);
  if (n == 0) return out;
  const L1Weights w = l1_weights(delta, history.dt, n);
  for (std::size_t i = 1; i <= n; ++i) out[i] = l1_sum(history.samples, i, w);
  return out;
}

double caputo_power_rule(double p, FractionalOrder delta, double t) {
  if (p < 1.0) throw std::invalid_argument("caputo_power_rule: requires p >= 1");
  if (!(t > 0.0)) throw std::domain_error("caputo_power_rule: requires t > 0");
  const double d = delta.value();
  return gamma(p + 1.0) / gamma(p + 1.0 - d) * std::pow(t, p - d);
}

std::vector<double> check_lemma2(const ScalarHistory& history, FractionalOrder delta) {
  history.validate();
  if (history.samples.size() < 2) throw std::invalid_argument("check_lemma2: need two samples");

  ScalarHistory squared{history.samples, history.dt};
  for (double& s : squared.samples) s *= s;

  const auto df = caputo_l1_series(history, delta);
  const auto df2 = caputo_l1_series(squared, delta);
  std::vector<double> margins;
  margins.reserve(history.last_index());
  for (std::size_t i = 1; i <= history.last_index(); ++i) {
    margins.push_back(2.0 * history.samples[i] * df[i] - df2[i]);
  }
  return margins;
}

}  // namespace fracle

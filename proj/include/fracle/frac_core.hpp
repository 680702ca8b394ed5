#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fracle {

/// Order of the Caputo time derivative, restricted to (0, 1].
class FractionalOrder {
 public:
  /// Throws std::invalid_argument outside (0, 1].
  explicit FractionalOrder(double delta);

  double value() const noexcept { return delta_; }
  bool is_integer() const noexcept { return delta_ == 1.0; }

  friend bool operator==(FractionalOrder, FractionalOrder) = default;

 private:
  double delta_;
};

/// Gamma function for x > 0; throws std::domain_error otherwise.
double gamma(double x);

/// L1 discretization weights for the Caputo derivative on a uniform grid.
///
///   D^δ f(t_n) ≈ scale · Σ_{k=0}^{n-1} b_k (f_{n-k} - f_{n-k-1})
///
/// with b_k = (k+1)^(1-δ) - k^(1-δ) and scale = dt^(-δ) / Γ(2-δ).
/// For δ = 1 the weights collapse to b = (1, 0, 0, ...).
struct L1Weights {
  double delta = 1.0;
  double dt = 1.0;
  std::vector<double> b;
  double scale = 1.0;

  std::size_t size() const noexcept { return b.size(); }
};

L1Weights l1_weights(FractionalOrder delta, double dt, std::size_t n);

/// Uniformly sampled scalar function f_0..f_n with spacing dt.
struct ScalarHistory {
  std::vector<double> samples;
  double dt = 1.0;

  /// Throws std::invalid_argument if empty or dt <= 0.
  void validate() const;
  std::size_t last_index() const noexcept { return samples.size() - 1; }
};

/// Samples f on [0, t_end] with spacing dt (t_end rounded to a whole number of steps).
template <class F>
ScalarHistory sample_history(F&& f, double t_end, double dt) {
  const auto n = static_cast<std::size_t>(t_end / dt + 0.5);
  ScalarHistory h;
  h.dt = dt;
  h.samples.reserve(n + 1);
  for (std::size_t i = 0; i <= n; ++i) h.samples.push_back(f(static_cast<double>(i) * dt));
  return h;
}

/// Discrete Caputo derivative at the last sample. The weights must have been built
/// with the same dt and exactly n = samples - 1 entries; throws std::invalid_argument otherwise.
double caputo_l1(const ScalarHistory& history, const L1Weights& w);

/// Discrete Caputo derivative at every node t_1..t_n (entry 0 is t_0, defined as 0).
std::vector<double> caputo_l1_series(const ScalarHistory& history, FractionalOrder delta);

/// Analytic Caputo derivative of t^p for p >= 1: Γ(p+1)/Γ(p+1-δ) · t^(p-δ).
double caputo_power_rule(double p, FractionalOrder delta, double t);

/// Margins m_n = 2 f_n D^δ f(t_n) - D^δ(f²)(t_n) for n = 1..N, evaluated with the L1 scheme.
/// The continuous inequality says these are non-negative.
std::vector<double> check_lemma2(const ScalarHistory& history, FractionalOrder delta);

}  // namespace fracle

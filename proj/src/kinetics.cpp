#include "fracle/kinetics.hpp"

#include <cmath>

namespace fracle {

void SystemParams::validate() const {
  auto positive = [](double x, const char* name) {
    if (!(x > 0.0) || !std::isfinite(x)) {
      throw std::invalid_argument(std::string("parameter '") + name +
                                  "' must be a strictly positive constant");
    }
  };
  positive(a, "a");
  positive(b, "b");
  positive(sigma, "sigma");
  positive(d1, "d1");
  positive(d2, "d2");
}

ReactionRates reaction_rates(double u, double v, const SystemParams& p) {
  const double q = u * v / (1.0 + u * u);
  return {p.a - u - 4.0 * q, p.sigma * p.b * (u - q)};
}

ReactionSplit reaction_split(double u, double v, const SystemParams& p) {
  const double inv = 1.0 / (1.0 + u * u);
  const double sb = p.sigma * p.b;
  return {p.a, 1.0 + 4.0 * v * inv, sb * u, sb * u * inv};
}

Equilibrium equilibrium(const SystemParams& p) {
  const double alpha = p.a / 5.0;
  return {alpha, alpha, 1.0 + alpha * alpha};
}

InvariantRectangle invariant_rectangle(const SystemParams& p, std::size_t samples_per_face) {
  const InvariantRectangle r{p.a, 1.0 + p.a * p.a};
  const auto n = static_cast<double>(samples_per_face + 1);
  for (std::size_t i = 1; i <= samples_per_face; ++i) {
    const double s = static_cast<double>(i) / n;
    const double v = s * r.v_max;
    const double u = s * r.u_max;
    if (reaction_rates(0.0, v, p).f < 0.0)
      throw InternalConsistencyError("F(0, v) < 0 on the face u = 0");
    if (reaction_rates(r.u_max, v, p).f > 0.0)
      throw InternalConsistencyError("F(a, v) > 0 on the face u = a");
    if (reaction_rates(u, 0.0, p).g < 0.0)
      throw InternalConsistencyError("G(u, 0) < 0 on the face v = 0");
    if (reaction_rates(u, r.v_max, p).g > 0.0)
      throw InternalConsistencyError("G(u, 1+a^2) > 0 on the face v = 1+a^2");
  }
  return r;
}

JacobianSummary jacobian_summary(const SystemParams& p) {
  const double alpha = p.a / 5.0;
  const double a2 = alpha * alpha;
  const double den = 1.0 + a2;
  JacobianSummary j;
  j.F0 = (3.0 * a2 - 5.0) / den;
  j.F1 = -4.0 * alpha / den;
  j.G0 = 2.0 * p.b * a2 / den;
  j.G1 = -p.b * alpha / den;
  j.trace = j.F0 + p.sigma * j.G1;
  j.det = 5.0 * p.sigma * p.b * alpha / den;
  j.upsilon = j.trace * j.trace - 4.0 * j.det;
  return j;
}

PhiAndFa f_a_and_phi(double u, const SystemParams& p) {
  if (!(u > 0.0)) throw std::domain_error("f_a is only defined for u > 0");
  const double phi = u / (1.0 + u * u);
  return {phi, (p.a - u) / phi};
}

double f_a_derivative(double u, const SystemParams& p) {
  if (!(u > 0.0)) throw std::domain_error("f_a is only defined for u > 0");
  return -p.a / (u * u) + p.a - 2.0 * u;
}

bool f_a_decreasing(const SystemParams& p, std::size_t samples) {
  if (samples < 2) throw std::invalid_argument("f_a_decreasing: need at least two samples");
  const double h = p.a / static_cast<double>(samples + 1);
  double prev = f_a_and_phi(h, p).fa;
  for (std::size_t i = 2; i <= samples; ++i) {
    const double u = h * static_cast<double>(i);
    const double cur = f_a_and_phi(u, p).fa;
    if (!(cur - prev < 0.0)) return false;
    if (!(f_a_derivative(u - 0.5 * h, p) < 0.0)) return false;
    prev = cur;
  }
  return true;
}

}  // namespace fracle

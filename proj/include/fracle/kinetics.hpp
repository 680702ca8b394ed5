#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

#include "fracle/frac_core.hpp"

namespace fracle {

/// Constants of the Lengyel–Epstein system plus the time-derivative order.
///   D^δ u - d1 Δu = a - u - 4uv/(1+u²)
///   D^δ v - d2 Δv = σ b (u - uv/(1+u²))
struct SystemParams {
  double a = 15.0;
  double b = 1.0;
  double sigma = 7.0;
  double d1 = 1.0;
  double d2 = 10.0;
  FractionalOrder delta{1.0};

  /// Throws std::invalid_argument naming the first non-positive constant.
  void validate() const;

  /// Copy with a different order.
  SystemParams with_delta(double d) const {
    SystemParams p = *this;
    p.delta = FractionalOrder(d);
    return p;
  }

  friend bool operator==(const SystemParams&, const SystemParams&) = default;
};

/// Raised when a sampled property that must hold by construction does not.
class InternalConsistencyError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct ReactionRates {
  double f = 0.0;
  double g = 0.0;
};

ReactionRates reaction_rates(double u, double v, const SystemParams& p);

/// Production/loss form of the kinetics:
///   F = f_source - f_loss_rate · u,  G = g_source - g_loss_rate · v
/// Both loss rates are non-negative for u >= 0, v >= 0.
struct ReactionSplit {
  double f_source = 0.0;
  double f_loss_rate = 0.0;
  double g_source = 0.0;
  double g_loss_rate = 0.0;
};

ReactionSplit reaction_split(double u, double v, const SystemParams& p);

struct Equilibrium {
  double alpha = 0.0;
  double u_star = 0.0;
  double v_star = 0.0;
};

Equilibrium equilibrium(const SystemParams& p);

/// Rectangle (0, u_max) × (0, v_max) that trajectories cannot leave.
struct InvariantRectangle {
  double u_max = 0.0;
  double v_max = 0.0;

  /// Closed-rectangle membership with the given slack on every face.
  bool contains(double u, double v, double slack = 0.0) const noexcept {
    return u >= -slack && u <= u_max + slack && v >= -slack && v <= v_max + slack;
  }
};

/// Returns (0, a) × (0, 1 + a²) after checking that the vector field points inward
/// on all four faces at `samples_per_face` points each. A violated sign raises
/// InternalConsistencyError.
InvariantRectangle invariant_rectangle(const SystemParams& p, std::size_t samples_per_face = 1000);

/// Jacobian of the kinetics at the equilibrium. G0 and G1 exclude the factor σ:
///   J = [[F0, F1], [σ G0, σ G1]]
struct JacobianSummary {
  double F0 = 0.0;
  double F1 = 0.0;
  double G0 = 0.0;
  double G1 = 0.0;
  double trace = 0.0;
  double det = 0.0;
  double upsilon = 0.0;  ///< trace² - 4 det
};

JacobianSummary jacobian_summary(const SystemParams& p);

/// φ(u) = u/(1+u²) and f_a(u) = (a-u)/φ(u), the auxiliary functions of the
/// Lyapunov argument. Throws std::domain_error for u <= 0.
struct PhiAndFa {
  double phi = 0.0;
  double fa = 0.0;
};

PhiAndFa f_a_and_phi(double u, const SystemParams& p);

/// d f_a / du = -a/u² + a - 2u.
double f_a_derivative(double u, const SystemParams& p);

/// True iff f_a is strictly decreasing on a uniform sample of (0, a): every
/// consecutive difference and every midpoint derivative is negative.
bool f_a_decreasing(const SystemParams& p, std::size_t samples);

}  // namespace fracle

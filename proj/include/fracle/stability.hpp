#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fracle/kinetics.hpp"

namespace fracle {

/// Margins within this distance of zero are treated as ties.
inline constexpr double kMarginalTolerance = 1e-9;

struct ComplexEigenpair {
  std::complex<double> lambda1;
  std::complex<double> lambda2;
};

/// Roots of x² - trace·x + det = 0. Real roots are ordered ascending.
ComplexEigenpair characteristic_roots(double trace, double det);

/// |arg λ| - δπ/2. Positive means λ satisfies the fractional stability condition.
/// Throws std::domain_error for λ = 0.
double matignon_margin(std::complex<double> lambda, FractionalOrder delta);

enum class OdeVerdict { Stable, Unstable, MarginalAtGivenDelta };

/// Which branch of the kinetic (diffusion-free) classification applied.
enum class OdeCase {
  RealStable,          ///< Υ >= 0, trace < 0
  RealUnstable,        ///< Υ >= 0, trace > 0
  ComplexStable,       ///< Υ < 0, trace < 0
  ComplexZeroTrace,    ///< Υ < 0, trace = 0: stable iff δ < 1
  ComplexOrderLimited  ///< Υ < 0, trace > 0: stable iff δ < critical order
};

struct OdeClassification {
  OdeVerdict verdict = OdeVerdict::Stable;
  ComplexEigenpair eigs;
  /// nullopt: stable for every δ in (0, 1]. 0: unstable for every δ.
  std::optional<double> critical_order;
  OdeCase case_tag = OdeCase::RealStable;
  double margin = 0.0;  ///< min Matignon margin at the configured δ
};

OdeClassification ode_classify(const SystemParams& p);

/// Critical fractional order; see OdeClassification::critical_order.
std::optional<double> critical_order(const SystemParams& p);

/// Neumann spectrum of -Δ on an interval or rectangle.
struct Geometry {
  int dim = 1;  ///< 0 (well-mixed), 1 or 2
  double lx = 1.0;
  double ly = 1.0;

  static Geometry point() { return {0, 0.0, 0.0}; }
  static Geometry interval(double length) { return {1, length, 0.0}; }
  static Geometry rectangle(double lx, double ly) { return {2, lx, ly}; }
};

struct NeumannSpectrum {
  Geometry geometry;
  std::vector<double> lambdas;  ///< ascending, lambdas[0] = 0
};

/// First m+1 eigenvalues. A well-mixed geometry has only λ_0 = 0.
NeumannSpectrum neumann_eigenvalues(const Geometry& geometry, std::size_t m);

struct ModeAnalysis {
  double lambda_i = 0.0;
  double trace_i = 0.0;
  double det_i = 0.0;
  double upsilon_i = 0.0;
  ComplexEigenpair xi;
  double matignon_margin = 0.0;
  bool stable = false;
};

ModeAnalysis mode_analysis(const SystemParams& p, double lambda_i);

/// Determinant of the mode matrix as a quadratic in λ:
///   det J(λ) = (λ d1 - F0) λ d2 + σbα/(1+α²) (λ d1 + 5)
double mode_determinant(const SystemParams& p, double lambda);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double x) const noexcept { return x > lo && x < hi; }
};

/// {λ > 0 : det J(λ) < 0}, or nullopt when empty.
std::optional<Interval> turing_band(const SystemParams& p);

/// Ascending roots of Υ(λ) = (d1-d2)²λ² + 2(d1-d2)(-F0+σG1)λ + Υ; nullopt when d1 = d2.
std::optional<std::pair<double, double>> upsilon_roots(const SystemParams& p);

/// Reduced discriminant of Υ(λ): ((d1-d2)(-F0+σG1))² - (d1-d2)²Υ.
/// Equals 32 (d1-d2)² σ b α³ / (1+α²)².
double upsilon_reduced_discriminant(const SystemParams& p);

/// Diffusivity threshold d_i for mode λ_i; nullopt when the mode is excluded
/// (λ_i <= 0 or λ_i d1 >= F0).
std::optional<double> d_threshold(const SystemParams& p, double lambda_i);

enum class OverallVerdict {
  Stable,
  TuringUnstable,        ///< uniform mode stable, some diffusive mode unstable
  OscillatoryUnstable,   ///< uniform mode unstable through a complex pair
  HomogeneousUnstable,   ///< uniform mode unstable through a real positive eigenvalue
  Indeterminate          ///< some mode sits on the stability boundary
};

std::string to_string(OdeVerdict v);
std::string to_string(OdeCase c);
std::string to_string(OverallVerdict v);

/// Outcome of the sufficient conditions for the diffusive system.
enum class DecisionTree {
  EqualDiffusion,   ///< d1 = d2: same as the kinetic verdict
  StableSmallerD1,  ///< d1 < d2 branch satisfied
  StableLargerD1,   ///< d1 > d2 branch satisfied
  NotSatisfied,     ///< hypotheses hold but the stability conditions fail
  NotApplicable,    ///< hypotheses (trace < 0, Υ > 0) fail
  BypassedF0        ///< F0 <= 0, tree not stated for this regime
};

std::string to_string(DecisionTree d);

struct StabilityReport {
  SystemParams params;
  Geometry geometry;
  Equilibrium eq;
  JacobianSummary jacobian;
  OdeClassification ode;
  std::vector<ModeAnalysis> modes;
  std::optional<Interval> turing_band;
  std::optional<double> d_tilde;
  std::optional<std::pair<double, double>> upsilon_roots;
  DecisionTree decision = DecisionTree::NotApplicable;
  bool global_condition = false;
  OverallVerdict overall = OverallVerdict::Stable;
  std::vector<std::string> notes;
};

/// Mode count used when the caller does not choose one.
inline constexpr std::size_t kDefaultModeCount = 128;

/// Analyzes up to m+1 Neumann modes, stopping early once λ·min(d1, d2) exceeds
/// 10|F0| + 10σ|G1| (every further mode has two strongly negative eigenvalues).
StabilityReport pde_classify(const SystemParams& p, const Geometry& geometry,
                             std::size_t m = kDefaultModeCount);

/// 0 < a² <= 27.
bool global_stability_condition(const SystemParams& p);

}  // namespace fracle

#include "fracle/stability.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fracle {

ComplexEigenpair characteristic_roots(double trace, double det) {
  const double disc = trace * trace - 4.0 * det;
  if (disc >= 0.0) {
    const double s = std::sqrt(disc);
    const double big = 0.5 * (trace + std::copysign(s, trace));
    if (big == 0.0) return {{0.0, 0.0}, {0.0, 0.0}};
    double r1 = det / big;
    double r2 = big;
    if (r1 > r2) std::swap(r1, r2);
    return {{r1, 0.0}, {r2, 0.0}};
  }
  const double re = 0.5 * trace;
  const double im = 0.5 * std::sqrt(-disc);
  return {{re, im}, {re, -im}};
}

double matignon_margin(std::complex<double> lambda, FractionalOrder delta) {
  if (lambda == std::complex<double>{0.0, 0.0}) {
    throw std::domain_error("matignon_margin: zero eigenvalue has no argument");
  }
  return std::abs(std::arg(lambda)) - delta.value() * std::numbers::pi / 2.0;
}

namespace {

double pair_margin(const ComplexEigenpair& e, FractionalOrder delta) {
  if (e.lambda1 == std::complex<double>{} || e.lambda2 == std::complex<double>{}) return 0.0;
  return std::min(matignon_margin(e.lambda1, delta), matignon_margin(e.lambda2, delta));
}

bool is_zero_trace(const JacobianSummary& j, const SystemParams& p) {
  return std::abs(j.trace) <= 1e-14 * (std::abs(j.F0) + p.sigma * std::abs(j.G1));
}

}  // namespace

OdeClassification ode_classify(const SystemParams& p) {
  const JacobianSummary j = jacobian_summary(p);
  OdeClassification out;
  out.eigs = characteristic_roots(j.trace, j.det);
  out.margin = pair_margin(out.eigs, p.delta);

  if (j.upsilon >= 0.0) {
    // det > 0 rules out trace = 0 here.
    if (j.trace < 0.0) {
      out.case_tag = OdeCase::RealStable;
      out.critical_order = std::nullopt;
    } else {
      out.case_tag = OdeCase::RealUnstable;
      out.critical_order = 0.0;
    }
  } else if (is_zero_trace(j, p)) {
    out.case_tag = OdeCase::ComplexZeroTrace;
    out.critical_order = 1.0;
    out.margin = (1.0 - p.delta.value()) * std::numbers::pi / 2.0;
  } else if (j.trace < 0.0) {
    out.case_tag = OdeCase::ComplexStable;
    out.critical_order = std::nullopt;
  } else {
    out.case_tag = OdeCase::ComplexOrderLimited;
    out.critical_order = 2.0 / std::numbers::pi * std::abs(std::arg(out.eigs.lambda1));
  }

  if (std::abs(out.margin) <= kMarginalTolerance) {
    out.verdict = OdeVerdict::MarginalAtGivenDelta;
  } else {
    out.verdict = out.margin > 0.0 ? OdeVerdict::Stable : OdeVerdict::Unstable;
  }
  return out;
}

std::optional<double> critical_order(const SystemParams& p) { return ode_classify(p).critical_order; }

NeumannSpectrum neumann_eigenvalues(const Geometry& g, std::size_t m) {
  if (m < 1) throw std::invalid_argument("neumann_eigenvalues: need m >= 1");
  NeumannSpectrum s{g, {}};
  if (g.dim == 0) {
    s.lambdas = {0.0};
    return s;
  }
  if (!(g.lx > 0.0) || (g.dim == 2 && !(g.ly > 0.0))) {
    throw std::invalid_argument("neumann_eigenvalues: domain lengths must be positive");
  }
  const double kx = std::numbers::pi / g.lx;
  if (g.dim == 1) {
    s.lambdas.reserve(m + 1);
    for (std::size_t k = 0; k <= m; ++k) {
      const double w = kx * static_cast<double>(k);
      s.lambdas.push_back(w * w);
    }
    return s;
  }
  if (g.dim != 2) throw std::invalid_argument("neumann_eigenvalues: dim must be 0, 1 or 2");
  const double ky = std::numbers::pi / g.ly;
  s.lambdas.reserve((m + 1) * (m + 1));
  for (std::size_t j = 0; j <= m; ++j) {
    for (std::size_t k = 0; k <= m; ++k) {
      const double wx = kx * static_cast<double>(j);
      const double wy = ky * static_cast<double>(k);
      s.lambdas.push_back(wx * wx + wy * wy);
    }
  }
  std::sort(s.lambdas.begin(), s.lambdas.end());
  s.lambdas.resize(m + 1);
  return s;
}

double mode_determinant(const SystemParams& p, double lambda) {
  const JacobianSummary j = jacobian_summary(p);
  const double c = -p.sigma * j.G1;  // σbα/(1+α²)
  return (lambda * p.d1 - j.F0) * lambda * p.d2 + c * (lambda * p.d1 + 5.0);
}

ModeAnalysis mode_analysis(const SystemParams& p, double lambda_i) {
  if (lambda_i < 0.0) throw std::invalid_argument("mode_analysis: eigenvalue must be >= 0");
  const JacobianSummary j = jacobian_summary(p);
  ModeAnalysis m;
  m.lambda_i = lambda_i;
  m.trace_i = j.trace - (p.d1 + p.d2) * lambda_i;
  m.det_i = mode_determinant(p, lambda_i);
  m.upsilon_i = m.trace_i * m.trace_i - 4.0 * m.det_i;
  m.xi = characteristic_roots(m.trace_i, m.det_i);
  m.matignon_margin = pair_margin(m.xi, p.delta);
  m.stable = m.matignon_margin > 0.0;
  return m;
}

std::optional<Interval> turing_band(const SystemParams& p) {
  const JacobianSummary j = jacobian_summary(p);
  const double c = -p.sigma * j.G1;
  const double qa = p.d1 * p.d2;
  const double qb = -j.F0 * p.d2 + c * p.d1;
  const double qc = 5.0 * c;
  const double disc = qb * qb - 4.0 * qa * qc;
  // qa, qc > 0: both roots share the sign of -qb.
  if (!(disc > 0.0) || !(qb < 0.0)) return std::nullopt;
  const double q = 0.5 * (-qb + std::sqrt(disc));
  return Interval{qc / q, q / qa};
}

std::optional<std::pair<double, double>> upsilon_roots(const SystemParams& p) {
  if (p.d1 == p.d2) return std::nullopt;
  const JacobianSummary j = jacobian_summary(p);
  const double dd = p.d1 - p.d2;
  const double qa = dd * dd;
  const double qb = 2.0 * dd * (-j.F0 + p.sigma * j.G1);
  const double qc = j.upsilon;
  const double s = std::sqrt(qb * qb - 4.0 * qa * qc);
  const double q = -0.5 * (qb + std::copysign(s, qb));
  double r1 = q / qa;
  double r2 = qc / q;
  if (r1 > r2) std::swap(r1, r2);
  return std::pair{r1, r2};
}

double upsilon_reduced_discriminant(const SystemParams& p) {
  const JacobianSummary j = jacobian_summary(p);
  const double dd = p.d1 - p.d2;
  const double half_b = dd * (-j.F0 + p.sigma * j.G1);
  return half_b * half_b - dd * dd * j.upsilon;
}

std::optional<double> d_threshold(const SystemParams& p, double lambda_i) {
  if (!(lambda_i > 0.0)) return std::nullopt;
  const JacobianSummary j = jacobian_summary(p);
  if (lambda_i * p.d1 >= j.F0) return std::nullopt;
  const double c = -p.sigma * j.G1;
  return c * (lambda_i * p.d1 + 5.0) / ((j.F0 - lambda_i * p.d1) * lambda_i);
}

bool global_stability_condition(const SystemParams& p) {
  const double a2 = p.a * p.a;
  return a2 > 0.0 && a2 <= 27.0;
}

std::string to_string(OdeVerdict v) {
  switch (v) {
    case OdeVerdict::Stable: return "Stable";
    case OdeVerdict::Unstable: return "Unstable";
    case OdeVerdict::MarginalAtGivenDelta: return "MarginalAtGivenDelta";
  }
  return "?";
}

std::string to_string(OdeCase c) {
  switch (c) {
    case OdeCase::RealStable: return "upsilon>=0,trace<0";
    case OdeCase::RealUnstable: return "upsilon>=0,trace>0";
    case OdeCase::ComplexStable: return "upsilon<0,trace<0";
    case OdeCase::ComplexZeroTrace: return "upsilon<0,trace=0";
    case OdeCase::ComplexOrderLimited: return "upsilon<0,trace>0";
  }
  return "?";
}

std::string to_string(OverallVerdict v) {
  switch (v) {
    case OverallVerdict::Stable: return "Stable";
    case OverallVerdict::TuringUnstable: return "TuringUnstable";
    case OverallVerdict::OscillatoryUnstable: return "OscillatoryUnstable";
    case OverallVerdict::HomogeneousUnstable: return "HomogeneousUnstable";
    case OverallVerdict::Indeterminate: return "Indeterminate";
  }
  return "?";
}

std::string to_string(DecisionTree d) {
  switch (d) {
    case DecisionTree::EqualDiffusion: return "equal-diffusion";
    case DecisionTree::StableSmallerD1: return "stable:d1<d2";
    case DecisionTree::StableLargerD1: return "stable:d1>d2";
    case DecisionTree::NotSatisfied: return "not-satisfied";
    case DecisionTree::NotApplicable: return "not-applicable";
    case DecisionTree::BypassedF0: return "bypassed:F0<=0";
  }
  return "?";
}

namespace {

DecisionTree run_decision_tree(StabilityReport& r) {
  const SystemParams& p = r.params;
  const JacobianSummary& j = r.jacobian;
  if (j.F0 <= 0.0) {
    r.notes.push_back("F0 <= 0: sufficient-condition tree not stated for this regime; "
                      "verdict rests on per-mode Matignon margins");
    return DecisionTree::BypassedF0;
  }
  if (r.geometry.dim == 0) {
    r.notes.push_back("well-mixed geometry: only the uniform mode exists");
    return DecisionTree::NotApplicable;
  }
  if (p.d1 == p.d2) return DecisionTree::EqualDiffusion;
  if (!(j.trace < 0.0 && j.upsilon > 0.0)) {
    r.notes.push_back("sufficient-condition tree requires trace < 0 and upsilon > 0");
    return DecisionTree::NotApplicable;
  }
  if (r.modes.size() < 2) return DecisionTree::NotApplicable;
  const double lambda1 = r.modes[1].lambda_i;

  if (p.d1 < p.d2) {
    if (lambda1 * p.d1 >= j.F0) return DecisionTree::StableSmallerD1;
    if (r.d_tilde && p.d2 < *r.d_tilde) return DecisionTree::StableSmallerD1;
    return DecisionTree::NotSatisfied;
  }

  if (lambda1 * p.d1 < j.F0) return DecisionTree::NotSatisfied;
  if (r.upsilon_roots) {
    const auto [lo, hi] = *r.upsilon_roots;
    for (const auto& m : r.modes) {
      if (m.lambda_i > lo && m.lambda_i < hi && !(m.matignon_margin > 0.0)) {
        return DecisionTree::NotSatisfied;
      }
    }
  }
  return DecisionTree::StableLargerD1;
}

}  // namespace

StabilityReport pde_classify(const SystemParams& p, const Geometry& geometry, std::size_t m) {
  p.validate();
  StabilityReport r;
  r.params = p;
  r.geometry = geometry;
  r.eq = equilibrium(p);
  r.jacobian = jacobian_summary(p);
  r.ode = ode_classify(p);
  r.global_condition = global_stability_condition(p);

  const NeumannSpectrum spectrum = neumann_eigenvalues(geometry, m);
  const double cutoff = 10.0 * std::abs(r.jacobian.F0) + 10.0 * p.sigma * std::abs(r.jacobian.G1);
  const double dmin = std::min(p.d1, p.d2);
  for (std::size_t i = 0; i < spectrum.lambdas.size(); ++i) {
    const double lambda = spectrum.lambdas[i];
    if (i > 0 && lambda * dmin > cutoff) {
      r.notes.push_back("mode scan stopped at index " + std::to_string(i) +
                        ": remaining modes are dominated by diffusion");
      break;
    }
    r.modes.push_back(mode_analysis(p, lambda));
    if (auto d = d_threshold(p, lambda)) {
      r.d_tilde = r.d_tilde ? std::min(*r.d_tilde, *d) : *d;
    }
  }
  r.turing_band = turing_band(p);
  r.upsilon_roots = upsilon_roots(p);
  r.decision = run_decision_tree(r);

  const ModeAnalysis& uniform = r.modes.front();
  bool any_unstable = false;
  bool any_marginal = false;
  for (const auto& mode : r.modes) {
    if (mode.matignon_margin < -kMarginalTolerance) any_unstable = true;
    else if (mode.matignon_margin <= kMarginalTolerance) any_marginal = true;
  }
  if (r.ode.case_tag == OdeCase::ComplexZeroTrace &&
      r.ode.verdict == OdeVerdict::MarginalAtGivenDelta) {
    any_marginal = true;
  }

  if (any_unstable) {
    if (uniform.matignon_margin < -kMarginalTolerance) {
      r.overall = uniform.xi.lambda1.imag() != 0.0 ? OverallVerdict::OscillatoryUnstable
                                                   : OverallVerdict::HomogeneousUnstable;
    } else {
      r.overall = OverallVerdict::TuringUnstable;
    }
  } else if (any_marginal) {
    r.overall = OverallVerdict::Indeterminate;
  } else {
    r.overall = OverallVerdict::Stable;
  }

  const bool tree_says_stable =
      r.decision == DecisionTree::StableSmallerD1 || r.decision == DecisionTree::StableLargerD1 ||
      (r.decision == DecisionTree::EqualDiffusion && r.ode.verdict == OdeVerdict::Stable);
  if (tree_says_stable && r.overall != OverallVerdict::Stable) {
    r.notes.push_back("sufficient-condition tree reports stability but a mode fails the "
                      "Matignon test");
  }
  return r;
}

}  // namespace fracle

#include "fracle/verify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fracle/frac_core.hpp"
#include "fracle/solver.hpp"
#include "fracle/stability.hpp"

namespace fracle {

namespace {

std::string fmt(double x) {
  std::ostringstream s;
  s.precision(6);
  s << x;
  return s.str();
}

VerifyItem check_power_rule(double dt) {
  const FractionalOrder half(0.5);
  const double exact = caputo_power_rule(2.0, half, 1.0);
  auto error_at = [&](double h) {
    const ScalarHistory f = sample_history([](double t) { return t * t; }, 1.0, h);
    const L1Weights w = l1_weights(half, h, f.last_index());
    return std::abs(caputo_l1(f, w) - exact) / exact;
  };
  const double fine = error_at(dt);
  const double coarse = error_at(2.0 * dt);
  const double ratio = coarse / fine;
  const bool ok = fine < 1e-2 && ratio >= std::pow(2.0, 1.4);
  return {"power-rule", ok,
          "rel. error " + fmt(fine) + " at dt=" + fmt(dt) + ", halving ratio " + fmt(ratio)};
}

VerifyItem check_lemma2() {
  using Fn = double (*)(double);
  const std::vector<std::pair<const char*, Fn>> suite = {
      {"const", [](double) { return 2.5; }},
      {"t", [](double t) { return t; }},
      {"t^2", [](double t) { return t * t; }},
      {"exp(-t)", [](double t) { return std::exp(-t); }},
      {"sin(t)", [](double t) { return std::sin(t); }},
  };
  double worst = 0.0;
  std::string where = "-";
  for (double d : {0.3, 0.5, 0.7, 0.9}) {
    for (const auto& [name, fn] : suite) {
      const auto margins = check_lemma2(sample_history(fn, 2.0, 2e-3), FractionalOrder(d));
      const double m = *std::min_element(margins.begin(), margins.end());
      if (m < worst) {
        worst = m;
        where = std::string(name) + " at delta=" + fmt(d);
      }
    }
  }
  return {"lemma2-margins", worst >= -1e-8, "min margin " + fmt(worst) + " (" + where + ")"};
}

VerifyItem check_equilibrium() {
  const SystemParams paper{15.0, 1.0, 7.0, 1.0, 10.0, FractionalOrder(1.0)};
  const Equilibrium e = equilibrium(paper);
  bool ok = e.u_star == 3.0 && e.v_star == 10.0;
  double worst = 0.0;
  for (double a : {0.5, 1.0, 4.0, 5.0, 15.0, 40.0}) {
    SystemParams p = paper;
    p.a = a;
    const Equilibrium q = equilibrium(p);
    const ReactionRates r = reaction_rates(q.u_star, q.v_star, p);
    worst = std::max({worst, std::abs(r.f), std::abs(r.g)});
  }
  ok = ok && worst <= 1e-14 * 40.0;
  return {"equilibrium", ok, "(3,10) exact; max residual " + fmt(worst)};
}

VerifyItem check_jacobian(const VerifyOptions& opt) {
  double worst = 0.0;
  const double h = 1e-6;
  for (const SystemParams& p : {SystemParams{15, 1, 7, 1, 10, FractionalOrder(1)},
                                SystemParams{15, 1.2, 8, 1, 24, FractionalOrder(1)},
                                SystemParams{4, 1, 2, 1, 1, FractionalOrder(1)},
                                SystemParams{5, 1, 1, 1, 1, FractionalOrder(1)}}) {
    const Equilibrium e = equilibrium(p);
    auto rates = [&](double du, double dv) { return reaction_rates(e.u_star + du, e.v_star + dv, p); };
    const double fu = (rates(h, 0).f - rates(-h, 0).f) / (2 * h);
    const double fv = (rates(0, h).f - rates(0, -h).f) / (2 * h);
    const double gu = (rates(h, 0).g - rates(-h, 0).g) / (2 * h);
    const double gv = (rates(0, h).g - rates(0, -h).g) / (2 * h);
    const JacobianSummary j = opt.jacobian(p);
    const double entries_det = j.F0 * p.sigma * j.G1 - j.F1 * p.sigma * j.G0;
    const double diffs[] = {j.F0 - fu,
                            j.F1 - fv,
                            p.sigma * j.G0 - gu,
                            p.sigma * j.G1 - gv,
                            j.trace - (fu + gv),
                            j.det - (fu * gv - fv * gu),
                            entries_det - (fu * gv - fv * gu)};
    for (double d : diffs) worst = std::max(worst, std::abs(d));
  }
  return {"jacobian-fd", worst <= 1e-6, "max deviation " + fmt(worst)};
}

VerifyItem check_turing_band() {
  const SystemParams p{15, 1.2, 8, 1, 24, FractionalOrder(1)};
  const JacobianSummary j = jacobian_summary(p);
  auto det = [&](double lam) {
    return (j.F0 - p.d1 * lam) * (p.sigma * j.G1 - p.d2 * lam) - j.F1 * p.sigma * j.G0;
  };
  auto bisect = [&](double lo, double hi) {
    const bool rising = det(hi) > det(lo);
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      if ((det(mid) > 0.0) == rising) hi = mid;
      else lo = mid;
    }
    return 0.5 * (lo + hi);
  };
  const double vertex = (j.F0 * p.d2 - p.sigma * j.G1 * p.d1) / (2.0 * p.d1 * p.d2);
  const double lo = bisect(0.0, vertex);
  const double hi = bisect(vertex, 100.0);
  const auto band = turing_band(p);
  const bool ok = band && std::abs(band->lo - lo) <= 1e-9 && std::abs(band->hi - hi) <= 1e-9;
  return {"turing-band", ok,
          band ? "band (" + fmt(band->lo) + ", " + fmt(band->hi) + ") vs bisection (" + fmt(lo) +
                     ", " + fmt(hi) + ")"
               : std::string("analyzer returned an empty band")};
}

// Dense Gaussian elimination with partial pivoting; a = row-major n×n.
std::vector<double> dense_solve(std::vector<double> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(a[r * n + c]) > std::abs(a[piv * n + c])) piv = r;
    }
    if (piv != c) {
      for (std::size_t k = 0; k < n; ++k) std::swap(a[c * n + k], a[piv * n + k]);
      std::swap(b[c], b[piv]);
    }
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r * n + c] / a[c * n + c];
      for (std::size_t k = c; k < n; ++k) a[r * n + k] -= f * a[c * n + k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t r = n; r-- > 0;) {
    double s = b[r];
    for (std::size_t k = r + 1; k < n; ++k) s -= a[r * n + k] * x[k];
    x[r] = s / a[r * n + r];
  }
  return x;
}

VerifyItem check_integer_order() {
  const SystemParams p{15, 1, 7, 1, 10, FractionalOrder(1)};
  const Grid grid = Grid::line(20.0, 41);
  const double dt = 1e-3;
  const std::size_t steps = 1000;
  const FieldState ic = make_ic(IcSpec{}, grid, p);
  FractionalStepper stepper(p, grid, dt, ic);

  const std::size_t n = grid.size();
  const double r = 1.0 / (grid.spacing(0) * grid.spacing(0));
  std::vector<double> u = ic.u, v = ic.v;
  auto implicit_step = [&](const std::vector<double>& w, const std::vector<double>& loss,
                           const std::vector<double>& source, double d) {
    std::vector<double> a(n * n, 0.0), rhs(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i * n + i] = 1.0 + dt * loss[i] + 2.0 * dt * d * r;
      const std::size_t left = i == 0 ? 1 : i - 1;
      const std::size_t right = i + 1 == n ? n - 2 : i + 1;
      a[i * n + left] -= dt * d * r;
      a[i * n + right] -= dt * d * r;
      rhs[i] = w[i] + dt * source[i];
    }
    return dense_solve(std::move(a), std::move(rhs));
  };

  double worst = 0.0;
  for (std::size_t k = 0; k < steps; ++k) {
    std::vector<double> lu(n), su(n), lv(n), sv(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double q = 1.0 / (1.0 + u[i] * u[i]);
      lu[i] = 1.0 + 4.0 * v[i] * q;
      su[i] = p.a;
      lv[i] = p.sigma * p.b * u[i] * q;
      sv[i] = p.sigma * p.b * u[i];
    }
    u = implicit_step(u, lu, su, p.d1);
    v = implicit_step(v, lv, sv, p.d2);
    const FieldState& s = stepper.step();
    for (std::size_t i = 0; i < n; ++i) {
      worst = std::max(worst, std::abs(s.u[i] - u[i]) / std::max(1.0, std::abs(u[i])));
      worst = std::max(worst, std::abs(s.v[i] - v[i]) / std::max(1.0, std::abs(v[i])));
    }
  }
  return {"delta1-degeneration", worst <= 1e-9, "max relative deviation " + fmt(worst)};
}

}  // namespace

std::vector<VerifyItem> run_verify(const VerifyOptions& options) {
  return {check_power_rule(options.power_rule_dt), check_lemma2(), check_equilibrium(),
          check_jacobian(options), check_turing_band(), check_integer_order()};
}

int cmd_verify(std::ostream& out, const VerifyOptions& options) {
  bool all = true;
  for (const auto& item : run_verify(options)) {
    out << (item.passed ? "[PASS] " : "[FAIL] ") << item.name << ": " << item.detail << "\n";
    all = all && item.passed;
  }
  return all ? 0 : 5;
}

}  // namespace fracle

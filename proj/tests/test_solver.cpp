#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <limits>
#include <numeric>

#include "fracle/solver.hpp"

using namespace fracle;
using std::numbers::pi;

namespace {

SystemParams paper_1d(double delta) { return SystemParams{15, 1, 7, 1, 10, FractionalOrder(delta)}; }

FieldState uniform_state(const Grid& g, double u, double v) {
  FieldState s;
  s.u.assign(g.size(), u);
  s.v.assign(g.size(), v);
  return s;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("grid construction") {
  const Grid g = Grid::line(20, 41);
  CHECK(g.dim() == 1);
  CHECK(g.size() == 41);
  CHECK(g.spacing(0) == 0.5);
  CHECK(g.x(20) == 10.0);
  CHECK(g.nearest_node(10.0) == 20);
  CHECK(g.measure() == doctest::Approx(20.0));
  const auto w = g.quadrature_weights();
  CHECK(std::accumulate(w.begin(), w.end(), 0.0) == doctest::Approx(20.0));

  const Grid r = Grid::rect(50, 30, 64, 31);
  CHECK(r.size() == 64 * 31);
  CHECK(r.index(3, 2) == 2 * 64 + 3);
  const auto wr = r.quadrature_weights();
  CHECK(std::accumulate(wr.begin(), wr.end(), 0.0) == doctest::Approx(1500.0));

  CHECK(Grid::point().size() == 1);
  CHECK_THROWS(Grid::line(20, 2));
  CHECK_THROWS(Grid::line(-1, 10));
  CHECK_THROWS(Grid::rect(1, 1, 3, 2));
}

TEST_CASE("laplacian") {
  const Grid g = Grid::line(4, 41);
  const std::vector<double> c(g.size(), 2.5);
  for (double x : laplacian(c, g)) CHECK(x == 0.0);

  std::vector<double> q(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) q[i] = g.x(i) * g.x(i);
  const auto lq = laplacian(q, g);
  for (std::size_t i = 1; i + 1 < g.size(); ++i) CHECK(lq[i] == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(lq[0] == doctest::Approx(2 * q[1] / (g.spacing(0) * g.spacing(0))));

  const Grid h = Grid::line(20, 41);
  for (int k : {1, 3, 7}) {
    std::vector<double> f(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) f[i] = std::cos(k * pi * h.x(i) / 20.0);
    const double dx = h.spacing(0);
    const double lam = 2 * (1 - std::cos(k * pi * dx / 20.0)) / (dx * dx);
    const auto lf = laplacian(f, h);
    for (std::size_t i = 0; i < h.size(); ++i) CHECK(std::abs(lf[i] + lam * f[i]) < 1e-12);
  }

  const Grid r = Grid::rect(10, 6, 21, 13);
  std::vector<double> f(r.size());
  for (std::size_t j = 0; j < r.ny(); ++j)
    for (std::size_t i = 0; i < r.nx(); ++i)
      f[r.index(i, j)] = std::cos(pi * r.x(i) / 10.0) * std::cos(2 * pi * r.y(j) / 6.0);
  const double lx = 2 * (1 - std::cos(pi * r.spacing(0) / 10.0)) / std::pow(r.spacing(0), 2);
  const double ly = 2 * (1 - std::cos(2 * pi * r.spacing(1) / 6.0)) / std::pow(r.spacing(1), 2);
  const auto lf = laplacian(f, r);
  for (std::size_t n = 0; n < r.size(); ++n) CHECK(std::abs(lf[n] + (lx + ly) * f[n]) < 1e-12);
}

TEST_CASE("tridiagonal solve") {
  const std::vector<double> lo{0, -1, -1, -1}, di{4, 4, 4, 4}, up{-1, -1, -1, 0};
  const std::vector<double> x{1, -2, 3, 0.5};
  std::vector<double> rhs(4);
  for (int i = 0; i < 4; ++i) {
    rhs[i] = di[i] * x[i] + (i > 0 ? lo[i] * x[i - 1] : 0) + (i < 3 ? up[i] * x[i + 1] : 0);
  }
  solve_tridiagonal(lo, di, up, rhs);
  for (int i = 0; i < 4; ++i) CHECK(rhs[i] == doctest::Approx(x[i]).epsilon(1e-14));
}

TEST_CASE("initial conditions") {
  const Grid g = Grid::line(20, 41);
  const SystemParams p = paper_1d(1);
  const FieldState s = make_ic(IcSpec{}, g, p);
  CHECK(s.u[0] == 1.0);
  CHECK(s.v[0] == 2.0);
  CHECK(s.t == 0.0);

  const Grid pi_grid = Grid::line(2 * pi, 3);
  const FieldState sp = make_ic(IcSpec{}, pi_grid, p);
  CHECK(sp.u[1] == doctest::Approx(1.3));
  CHECK(sp.v[1] == doctest::Approx(2.6));

  const Grid r = Grid::rect(50, 50, 64, 64);
  for (std::uint64_t seed : {0u, 1u, 7u, 123456u}) {
    IcSpec ic;
    ic.kind = IcKind::RandomPerturbation;
    ic.seed = seed;
    const FieldState rs = make_ic(ic, r, p);
    const double mean = std::accumulate(rs.u.begin(), rs.u.end(), 0.0) / rs.u.size();
    CHECK(std::abs(mean - 3.5) < 0.1);
    const double vmean = std::accumulate(rs.v.begin(), rs.v.end(), 0.0) / rs.v.size();
    CHECK(std::abs(vmean - 10.5) < 0.3);
    CHECK(make_ic(ic, r, p).u == rs.u);
  }
  IcSpec a, b;
  a.kind = b.kind = IcKind::RandomPerturbation;
  a.seed = 1;
  b.seed = 2;
  CHECK(make_ic(a, r, p).u != make_ic(b, r, p).u);

  IcSpec uni;
  uni.kind = IcKind::Uniform;
  const FieldState us = make_ic(uni, g, p);
  CHECK(us.is_uniform(0.0));
  CHECK(us.u[0] == 3.0);
  CHECK(us.v[0] == 10.0);

  IcSpec region;
  region.kind = IcKind::RandomInRegion;
  region.seed = 3;
  const FieldState rr = make_ic(region, g, p);
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(rr.u[i] > 0.05 * 15);
    CHECK(rr.u[i] < 0.95 * 15);
    CHECK(rr.v[i] > 0.05 * 226);
    CHECK(rr.v[i] < 0.95 * 226);
  }

  IcSpec ex;
  ex.kind = IcKind::Explicit;
  ex.u.assign(41, 1.0);
  ex.v.assign(41, 2.0);
  CHECK(make_ic(ex, g, p).v[40] == 2.0);
  ex.v.pop_back();
  CHECK_THROWS(make_ic(ex, g, p));
}

TEST_CASE("counter-based rng") {
  CHECK(counter_normal(1, 0, 5) == counter_normal(1, 0, 5));
  CHECK(counter_normal(1, 0, 5) != counter_normal(1, 1, 5));
  CHECK(counter_normal(1, 0, 5) != counter_normal(2, 0, 5));
  double sum = 0, sq = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double z = counter_normal(42, 0, i);
    sum += z;
    sq += z * z;
    const double u = counter_uniform(42, 2, i);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  CHECK(std::abs(sum / n) < 0.03);
  CHECK(std::abs(sq / n - 1.0) < 0.04);
}

TEST_CASE("equilibrium is a fixed point over 10^4 steps") {
  for (double d : {0.7, 0.85, 1.0}) {
    const Grid g = Grid::line(20, 41);
    const SystemParams p = paper_1d(d);
    FractionalStepper s(p, g, 1e-3, uniform_state(g, 3.0, 10.0));
    double worst = 0;
    for (int k = 0; k < 10000; ++k) {
      const FieldState& st = s.step();
      worst = std::max({worst, max_abs_diff(st.u, std::vector<double>(g.size(), 3.0)),
                        max_abs_diff(st.v, std::vector<double>(g.size(), 10.0))});
    }
    CAPTURE(d);
    CHECK(worst <= 1e-10);
    CHECK(s.history().levels() == 10001);
  }
}

TEST_CASE("one step from equilibrium is exact to 1e-12 in 2D") {
  const Grid g = Grid::rect(10, 10, 12, 12);
  const SystemParams p{15, 1.2, 8, 1, 24, FractionalOrder(0.6)};
  FractionalStepper s(p, g, 0.01, uniform_state(g, 3.0, 10.0));
  const FieldState& st = s.step();
  CHECK(max_abs_diff(st.u, std::vector<double>(g.size(), 3.0)) <= 1e-12);
  CHECK(max_abs_diff(st.v, std::vector<double>(g.size(), 10.0)) <= 1e-12);
}

TEST_CASE("uniform states stay uniform and follow the 0D trajectory") {
  const SystemParams p = paper_1d(0.9);
  const Grid zero = Grid::point();
  for (const Grid& g : {Grid::line(20, 41), Grid::rect(8, 6, 9, 7)}) {
    FractionalStepper field(p, g, 0.01, uniform_state(g, 1.0, 2.0));
    FractionalStepper ode(p, zero, 0.01, uniform_state(zero, 1.0, 2.0));
    double spread = 0, drift = 0;
    for (int k = 0; k < 500; ++k) {
      const FieldState& f = field.step();
      const FieldState& o = ode.step();
      const auto [ulo, uhi] = std::minmax_element(f.u.begin(), f.u.end());
      const auto [vlo, vhi] = std::minmax_element(f.v.begin(), f.v.end());
      spread = std::max({spread, *uhi - *ulo, *vhi - *vlo});
      for (std::size_t i = 0; i < f.u.size(); ++i) {
        drift = std::max({drift, std::abs(f.u[i] - o.u[0]), std::abs(f.v[i] - o.v[0])});
      }
    }
    CHECK(spread <= 1e-11);
    CHECK(drift <= 1e-8);
  }
}

TEST_CASE("memory window truncates the history sum") {
  const Grid g = Grid::point();
  const SystemParams p = paper_1d(0.8);
  FractionalStepper full(p, g, 0.01, uniform_state(g, 1.0, 2.0));
  FractionalStepper::Options opt;
  opt.memory_window = 50;
  FractionalStepper cut(p, g, 0.01, uniform_state(g, 1.0, 2.0), opt);
  for (int k = 0; k < 50; ++k) {
    full.step();
    cut.step();
  }
  CHECK(full.state().u[0] == cut.state().u[0]);
  for (int k = 0; k < 50; ++k) {
    full.step();
    cut.step();
  }
  CHECK(full.state().u[0] != cut.state().u[0]);
  CHECK(cut.history().levels() == 101);
}

TEST_CASE("stepper mu") {
  const Grid g = Grid::point();
  FractionalStepper s(paper_1d(0.5), g, 0.04, uniform_state(g, 1, 2));
  CHECK(s.mu() == doctest::Approx(fracle::gamma(1.5) * 0.2).epsilon(1e-14));
  FractionalStepper s1(paper_1d(1.0), g, 0.04, uniform_state(g, 1, 2));
  CHECK(s1.mu() == doctest::Approx(0.04).epsilon(1e-14));
}

TEST_CASE("sim config validation") {
  SimConfig c;
  CHECK_NOTHROW(c.validate());
  CHECK(c.step_count() == 10000);
  c.dt = 0;
  CHECK_THROWS(c.validate());
  c.dt = 1e-3;
  c.t_end = 1e-4;
  CHECK_THROWS(c.validate());
  c.t_end = 1;
  c.snapshot_every = 0;
  CHECK_THROWS(c.validate());
}

TEST_CASE("run emits snapshots and probes") {
  SimConfig c;
  c.params = paper_1d(1);
  c.t_end = 0.5;
  c.dt = 0.01;
  c.snapshot_every = 20;
  c.probes = {{10.0, 0.0}};
  const RunResult r = run(c);
  CHECK(r.steps == 50);
  CHECK(r.snapshot_steps == std::vector<std::size_t>{0, 20, 40, 50});
  REQUIRE(r.probes.size() == 1);
  CHECK(r.probes[0].node == 20);
  CHECK(r.probes[0].samples.size() == 51);
  CHECK(r.probes[0].samples.back().t == doctest::Approx(0.5));
  CHECK(r.region_exits == 0);
}

TEST_CASE("uniform equilibrium run keeps every snapshot equal to the ic") {
  SimConfig c;
  c.params = paper_1d(0.8);
  c.t_end = 1;
  c.dt = 0.01;
  c.snapshot_every = 10;
  c.ic.kind = IcKind::Uniform;
  const RunResult r = run(c);
  for (const auto& s : r.snapshots) {
    CHECK(max_abs_diff(s.u, r.snapshots[0].u) <= 1e-10);
    CHECK(max_abs_diff(s.v, r.snapshots[0].v) <= 1e-10);
  }
}

TEST_CASE("runs are deterministic") {
  SimConfig c;
  c.params = SystemParams{15, 1.2, 8, 1, 24, FractionalOrder(0.9)};
  c.grid = Grid::rect(20, 20, 16, 16);
  c.t_end = 0.5;
  c.dt = 0.01;
  c.snapshot_every = 10;
  c.ic.kind = IcKind::RandomPerturbation;
  c.ic.seed = 9;
  const RunResult a = run(c), b = run(c);
  REQUIRE(a.snapshots.size() == b.snapshots.size());
  for (std::size_t i = 0; i < a.snapshots.size(); ++i) {
    CHECK(a.snapshots[i].u == b.snapshots[i].u);
    CHECK(a.snapshots[i].v == b.snapshots[i].v);
  }
}

TEST_CASE("non-finite values abort with the step index") {
  SimConfig c;
  c.params = paper_1d(1);
  c.grid = Grid::point();
  c.t_end = 1;
  c.dt = 0.1;
  c.ic.kind = IcKind::Explicit;
  c.ic.u = {std::numeric_limits<double>::infinity()};
  c.ic.v = {1.0};
  CHECK_THROWS(run(c));
  c.ic.u = {1e308};  // finite, but the kinetics overflow on the first step
  c.ic.v = {-1e308};
  try {
    run(c);
    FAIL("expected an abort");
  } catch (const NonFiniteError& e) {
    CHECK(e.step() <= 1);
  }
}

TEST_CASE("trajectories stay in the invariant rectangle") {
  for (double a : {4.0, 15.0}) {
    for (double d : {0.7, 1.0}) {
      SimConfig c;
      c.params = a == 4.0 ? SystemParams{4, 1, 2, 1, 1, FractionalOrder(d)} : paper_1d(d);
      c.t_end = 5;
      c.dt = 0.02;
      c.ic.kind = IcKind::RandomInRegion;
      c.ic.seed = 4;
      const RunResult r = run(c);
      CHECK(r.region_exits == 0);
    }
  }
}

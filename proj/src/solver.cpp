#include "fracle/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace fracle {

// --- Grid -------------------------------------------------------------------

Grid Grid::point() { return Grid{}; }

Grid Grid::line(double length, std::size_t nodes) {
  if (!(length > 0.0)) throw std::invalid_argument("grid length must be positive");
  if (nodes < 3) throw std::invalid_argument("grid needs at least 3 nodes per axis");
  Grid g;
  g.dim_ = 1;
  g.lengths_ = {length, 0.0};
  g.counts_ = {nodes, 1};
  g.spacing_ = {length / static_cast<double>(nodes - 1), 0.0};
  return g;
}

Grid Grid::rect(double lx, double ly, std::size_t nx, std::size_t ny) {
  if (!(lx > 0.0) || !(ly > 0.0)) throw std::invalid_argument("grid lengths must be positive");
  if (nx < 3 || ny < 3) throw std::invalid_argument("grid needs at least 3 nodes per axis");
  Grid g;
  g.dim_ = 2;
  g.lengths_ = {lx, ly};
  g.counts_ = {nx, ny};
  g.spacing_ = {lx / static_cast<double>(nx - 1), ly / static_cast<double>(ny - 1)};
  return g;
}

namespace {

// Per-axis trapezoidal factor: 1/2 on the two end nodes, 1 elsewhere.
double end_factor(std::size_t i, std::size_t n) { return (i == 0 || i + 1 == n) ? 0.5 : 1.0; }

// Node weights without the cell measure; these symmetrize the Neumann Laplacian.
std::vector<double> unit_weights(const Grid& g) {
  std::vector<double> w(g.size(), 1.0);
  if (g.dim() == 0) return w;
  for (std::size_t j = 0; j < g.ny(); ++j) {
    for (std::size_t i = 0; i < g.nx(); ++i) {
      double f = end_factor(i, g.nx());
      if (g.dim() == 2) f *= end_factor(j, g.ny());
      w[g.index(i, j)] = f;
    }
  }
  return w;
}

}  // namespace

std::vector<double> Grid::quadrature_weights() const {
  std::vector<double> w = unit_weights(*this);
  double cell = 1.0;
  if (dim_ >= 1) cell *= spacing_[0];
  if (dim_ == 2) cell *= spacing_[1];
  for (double& x : w) x *= cell;
  return w;
}

double Grid::measure() const noexcept {
  if (dim_ == 0) return 1.0;
  return dim_ == 1 ? lengths_[0] : lengths_[0] * lengths_[1];
}

std::size_t Grid::nearest_node(double px, double py) const {
  if (dim_ == 0) return 0;
  auto snap = [](double p, double h, std::size_t n) {
    const double k = std::round(p / h);
    return static_cast<std::size_t>(std::clamp(k, 0.0, static_cast<double>(n - 1)));
  };
  const std::size_t i = snap(px, spacing_[0], counts_[0]);
  const std::size_t j = dim_ == 2 ? snap(py, spacing_[1], counts_[1]) : 0;
  return index(i, j);
}

Geometry Grid::geometry() const {
  switch (dim_) {
    case 0: return Geometry::point();
    case 1: return Geometry::interval(lengths_[0]);
    default: return Geometry::rectangle(lengths_[0], lengths_[1]);
  }
}

bool FieldState::all_finite() const noexcept {
  auto ok = [](const std::vector<double>& f) {
    return std::all_of(f.begin(), f.end(), [](double x) { return std::isfinite(x); });
  };
  return ok(u) && ok(v);
}

bool FieldState::is_uniform(double tol) const noexcept {
  auto flat = [tol](const std::vector<double>& f) {
    if (f.empty()) return true;
    const auto [lo, hi] = std::minmax_element(f.begin(), f.end());
    return *hi - *lo <= tol;
  };
  return flat(u) && flat(v);
}

// --- Laplacian --------------------------------------------------------------

std::vector<double> laplacian(std::span<const double> f, const Grid& g) {
  if (f.size() != g.size()) throw std::invalid_argument("laplacian: field does not match grid");
  std::vector<double> out(f.size(), 0.0);
  if (g.dim() == 0) return out;

  const std::size_t nx = g.nx();
  const std::size_t ny = g.ny();
  const double ix2 = 1.0 / (g.spacing(0) * g.spacing(0));
  const double iy2 = g.dim() == 2 ? 1.0 / (g.spacing(1) * g.spacing(1)) : 0.0;
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      const std::size_t c = g.index(i, j);
      const double left = f[g.index(i == 0 ? 1 : i - 1, j)];
      const double right = f[g.index(i + 1 == nx ? nx - 2 : i + 1, j)];
      double lap = (left - 2.0 * f[c] + right) * ix2;
      if (g.dim() == 2) {
        const double down = f[g.index(i, j == 0 ? 1 : j - 1)];
        const double up = f[g.index(i, j + 1 == ny ? ny - 2 : j + 1)];
        lap += (down - 2.0 * f[c] + up) * iy2;
      }
      out[c] = lap;
    }
  }
  return out;
}

// --- Initial conditions -----------------------------------------------------

std::string to_string(IcKind k) {
  switch (k) {
    case IcKind::Sinusoidal: return "sinusoidal";
    case IcKind::RandomPerturbation: return "random-perturbation";
    case IcKind::Uniform: return "uniform";
    case IcKind::RandomInRegion: return "random-in-region";
    case IcKind::Explicit: return "explicit";
  }
  return "?";
}

IcKind ic_kind_from_string(const std::string& s) {
  for (IcKind k : {IcKind::Sinusoidal, IcKind::RandomPerturbation, IcKind::Uniform,
                   IcKind::RandomInRegion, IcKind::Explicit}) {
    if (to_string(k) == s) return k;
  }
  throw std::invalid_argument("unknown initial condition kind '" + s + "'");
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t counter_bits(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  return splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ index);
}

}  // namespace

double counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  return static_cast<double>(counter_bits(seed, stream, index) >> 11) * 0x1.0p-53;
}

double counter_normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  // Box–Muller on two counter draws; u1 in (0, 1] keeps the log finite.
  const double u1 = static_cast<double>((counter_bits(seed, stream, 2 * index) >> 11) + 1) * 0x1.0p-53;
  const double u2 = counter_uniform(seed, stream, 2 * index + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

FieldState make_ic(const IcSpec& ic, const Grid& grid, const SystemParams& p) {
  const std::size_t n = grid.size();
  FieldState s;
  s.u.assign(n, 0.0);
  s.v.assign(n, 0.0);
  switch (ic.kind) {
    case IcKind::Sinusoidal:
      for (std::size_t j = 0; j < grid.ny(); ++j) {
        for (std::size_t i = 0; i < grid.nx(); ++i) {
          const double sx = std::sin(grid.x(i) / 2.0);
          s.u[grid.index(i, j)] = 1.0 + 0.3 * sx;
          s.v[grid.index(i, j)] = 2.0 + 0.6 * sx;
        }
      }
      break;
    case IcKind::RandomPerturbation:
      for (std::size_t k = 0; k < n; ++k) {
        s.u[k] = 3.5 * (1.0 + 0.2 * counter_normal(ic.seed, 0, k));
        s.v[k] = 10.5 * (1.0 + 0.2 * counter_normal(ic.seed, 1, k));
      }
      break;
    case IcKind::Uniform: {
      const Equilibrium eq = equilibrium(p);
      std::fill(s.u.begin(), s.u.end(), ic.u0.value_or(eq.u_star));
      std::fill(s.v.begin(), s.v.end(), ic.v0.value_or(eq.v_star));
      break;
    }
    case IcKind::RandomInRegion: {
      const double m = ic.region_margin;
      if (!(m >= 0.0 && m < 0.5)) throw std::invalid_argument("region margin must lie in [0, 0.5)");
      const InvariantRectangle r{p.a, 1.0 + p.a * p.a};
      for (std::size_t k = 0; k < n; ++k) {
        s.u[k] = r.u_max * (m + (1.0 - 2.0 * m) * counter_uniform(ic.seed, 2, k));
        s.v[k] = r.v_max * (m + (1.0 - 2.0 * m) * counter_uniform(ic.seed, 3, k));
      }
      break;
    }
    case IcKind::Explicit:
      if (ic.u.size() != n || ic.v.size() != n) {
        throw std::invalid_argument("explicit initial arrays must have " + std::to_string(n) +
                                    " entries");
      }
      s.u = ic.u;
      s.v = ic.v;
      break;
  }
  return s;
}

// --- Linear solves ----------------------------------------------------------

void solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                       std::span<const double> upper, std::span<double> rhs) {
  const std::size_t n = diag.size();
  if (lower.size() != n || upper.size() != n || rhs.size() != n) {
    throw std::invalid_argument("solve_tridiagonal: size mismatch");
  }
  std::vector<double> c(n);
  double denom = diag[0];
  c[0] = upper[0] / denom;
  rhs[0] /= denom;
  for (std::size_t i = 1; i < n; ++i) {
    denom = diag[i] - lower[i] * c[i - 1];
    c[i] = upper[i] / denom;
    rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / denom;
  }
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= c[i] * rhs[i + 1];
}

// --- Stepper ----------------------------------------------------------------

FractionalStepper::FractionalStepper(const SystemParams& p, const Grid& grid, double dt,
                                     FieldState initial)
    : FractionalStepper(p, grid, dt, std::move(initial), Options{}) {}

FractionalStepper::FractionalStepper(const SystemParams& p, const Grid& grid, double dt,
                                     FieldState initial, Options options)
    : p_(p), grid_(grid), dt_(dt), options_(options), state_(std::move(initial)) {
  p_.validate();
  if (!(dt_ > 0.0)) throw std::invalid_argument("time step must be positive");
  if (state_.u.size() != grid_.size() || state_.v.size() != grid_.size()) {
    throw std::invalid_argument("initial state does not match the grid");
  }
  if (!state_.all_finite()) throw std::invalid_argument("initial state has non-finite values");
  if (options_.memory_window && *options_.memory_window < 1) {
    throw std::invalid_argument("memory window must be at least 1");
  }
  const double delta = p_.delta.value();
  mu_ = gamma(2.0 - delta) * std::pow(dt_, delta);
  quad_weights_ = unit_weights(grid_);
  history_.u.push_back(state_.u);
  history_.v.push_back(state_.v);
  history_.weights = {1.0};
}

void FractionalStepper::memory_term(const std::vector<std::vector<double>>& levels,
                                    std::vector<double>& out) const {
  // H = w_n - Σ_{k=1}^{K} b_k (w_{n-k+1} - w_{n-k})
  //   = (1 - b_1) w_n + Σ_{j=1}^{K-1} (b_j - b_{j+1}) w_{n-j} + b_K w_{n-K}
  const std::size_t n = levels.size() - 1;
  out = levels[n];
  if (p_.delta.is_integer() || n == 0) return;
  const std::size_t K = options_.memory_window ? std::min(n, *options_.memory_window) : n;
  const auto& b = history_.weights;
  const std::size_t m = out.size();

  for (std::size_t i = 0; i < m; ++i) out[i] *= 1.0 - b[1];
  for (std::size_t j = 1; j < K; ++j) {
    const double c = b[j] - b[j + 1];
    const double* w = levels[n - j].data();
    for (std::size_t i = 0; i < m; ++i) out[i] += c * w[i];
  }
  const double* w = levels[n - K].data();
  for (std::size_t i = 0; i < m; ++i) out[i] += b[K] * w[i];
}

void FractionalStepper::solve(std::vector<double>& x, std::span<const double> extra,
                              std::span<const double> rhs, double d) {
  const std::size_t n = x.size();
  if (grid_.dim() == 0) {
    x[0] = rhs[0] / (1.0 + extra[0]);
    last_iterations_ = 0;
    return;
  }

  if (grid_.dim() == 1) {
    const double r = mu_ * d / (grid_.spacing(0) * grid_.spacing(0));
    std::vector<double> lower(n, -r), diag(n), upper(n, -r);
    for (std::size_t i = 0; i < n; ++i) diag[i] = 1.0 + extra[i] + 2.0 * r;
    lower[0] = 0.0;
    upper[0] = -2.0 * r;
    lower[n - 1] = -2.0 * r;
    upper[n - 1] = 0.0;
    std::copy(rhs.begin(), rhs.end(), x.begin());
    solve_tridiagonal(lower, diag, upper, x);
    last_iterations_ = 0;
    return;
  }

  // 2D: preconditioned CG on W·A, which is symmetric positive definite for the
  // node weights W. Jacobi preconditioning, warm start from the current level.
  const std::vector<double>& W = quad_weights_;
  const double md = mu_ * d;
  const double centre = 2.0 * md / (grid_.spacing(0) * grid_.spacing(0)) +
                        2.0 * md / (grid_.spacing(1) * grid_.spacing(1));
  auto apply = [&](const std::vector<double>& in, std::vector<double>& out) {
    const std::vector<double> lap = laplacian(in, grid_);
    for (std::size_t i = 0; i < n; ++i) out[i] = W[i] * ((1.0 + extra[i]) * in[i] - md * lap[i]);
  };

  double rhs_scale = 1.0;
  for (double b : rhs) rhs_scale = std::max(rhs_scale, std::abs(b));
  const double tol = options_.cg_tolerance * rhs_scale;

  std::vector<double> r(n), z(n), p(n), ap(n);
  apply(x, ap);
  for (std::size_t i = 0; i < n; ++i) r[i] = W[i] * rhs[i] - ap[i];
  auto residual = [&] {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::abs(r[i] / W[i]));
    return m;
  };
  double res = residual();
  std::size_t it = 0;
  if (res > tol) {
    for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / (W[i] * (1.0 + extra[i] + centre));
    p = z;
    double rz = 0.0;
    for (std::size_t i = 0; i < n; ++i) rz += r[i] * z[i];
    while (res > tol) {
      if (++it > options_.cg_max_iterations) {
        throw SolverError("conjugate gradient did not converge in " +
                          std::to_string(options_.cg_max_iterations) +
                          " iterations (residual " + std::to_string(res) + ", tolerance " +
                          std::to_string(tol) + ") at step " + std::to_string(steps_ + 1));
      }
      apply(p, ap);
      double pap = 0.0;
      for (std::size_t i = 0; i < n; ++i) pap += p[i] * ap[i];
      const double alpha = rz / pap;
      for (std::size_t i = 0; i < n; ++i) {
        x[i] += alpha * p[i];
        r[i] -= alpha * ap[i];
      }
      res = residual();
      double rz_next = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        z[i] = r[i] / (W[i] * (1.0 + extra[i] + centre));
        rz_next += r[i] * z[i];
      }
      const double beta = rz_next / rz;
      rz = rz_next;
      for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
  }
  last_iterations_ = it;
}

const FieldState& FractionalStepper::step() {
  const std::size_t n = grid_.size();
  const std::size_t next_level = history_.levels();
  auto& b = history_.weights;
  if (!p_.delta.is_integer()) {
    const double e = 1.0 - p_.delta.value();
    while (b.size() <= next_level) {
      const auto k = static_cast<double>(b.size());
      b.push_back(std::pow(k + 1.0, e) - std::pow(k, e));
    }
  }

  std::vector<double> hu, hv;
  memory_term(history_.u, hu);
  memory_term(history_.v, hv);

  std::vector<double> extra_u(n), extra_v(n), rhs_u(n), rhs_v(n);
  for (std::size_t i = 0; i < n; ++i) {
    const ReactionSplit s = reaction_split(state_.u[i], state_.v[i], p_);
    extra_u[i] = mu_ * s.f_loss_rate;
    extra_v[i] = mu_ * s.g_loss_rate;
    rhs_u[i] = hu[i] + mu_ * s.f_source;
    rhs_v[i] = hv[i] + mu_ * s.g_source;
  }

  FieldState next;
  next.u = state_.u;
  next.v = state_.v;
  solve(next.u, extra_u, rhs_u, p_.d1);
  const std::size_t iters_u = last_iterations_;
  solve(next.v, extra_v, rhs_v, p_.d2);
  last_iterations_ = std::max(iters_u, last_iterations_);

  ++steps_;
  next.t = static_cast<double>(steps_) * dt_;
  if (!next.all_finite()) {
    throw NonFiniteError(steps_, "non-finite value produced at step " + std::to_string(steps_));
  }
  history_.u.push_back(next.u);
  history_.v.push_back(next.v);
  state_ = std::move(next);
  return state_;
}

// --- Driver -----------------------------------------------------------------

void SimConfig::validate() const {
  params.validate();
  if (!(dt > 0.0)) throw std::invalid_argument("time.dt must be positive");
  if (!(t_end >= dt)) throw std::invalid_argument("time.t_end must be at least dt");
  if (snapshot_every < 1) throw std::invalid_argument("output.snapshot_every must be >= 1");
  if (memory_window && *memory_window < 1) {
    throw std::invalid_argument("time.memory_window must be >= 1");
  }
  for (const auto& pr : probes) {
    const bool in_x = grid.dim() == 0 || (pr[0] >= 0.0 && pr[0] <= grid.length(0));
    const bool in_y = grid.dim() < 2 || (pr[1] >= 0.0 && pr[1] <= grid.length(1));
    if (!in_x || !in_y) throw std::invalid_argument("output.probes: probe lies outside the domain");
  }
}

std::size_t SimConfig::step_count() const {
  return static_cast<std::size_t>(std::llround(t_end / dt));
}

RunResult run(const SimConfig& cfg, const RunHooks& hooks) {
  cfg.validate();
  FieldState initial = make_ic(cfg.ic, cfg.grid, cfg.params);
  FractionalStepper::Options opts;
  opts.memory_window = cfg.memory_window;
  FractionalStepper stepper(cfg.params, cfg.grid, cfg.dt, initial, opts);

  RunResult result;
  for (const auto& loc : cfg.probes) {
    ProbeSeries ps;
    ps.location = loc;
    ps.node = cfg.grid.nearest_node(loc[0], loc[1]);
    result.probes.push_back(std::move(ps));
  }
  auto record_probes = [&](const FieldState& s) {
    for (auto& ps : result.probes) ps.samples.push_back({s.t, s.u[ps.node], s.v[ps.node]});
  };
  auto snapshot = [&](const FieldState& s, std::size_t step) {
    if (hooks.on_snapshot) hooks.on_snapshot(s, step);
    if (hooks.keep_snapshots) {
      result.snapshots.push_back(s);
      result.snapshot_steps.push_back(step);
    }
  };

  const InvariantRectangle region{cfg.params.a, 1.0 + cfg.params.a * cfg.params.a};
  const std::size_t total = cfg.step_count();
  record_probes(stepper.state());
  snapshot(stepper.state(), 0);
  for (std::size_t k = 1; k <= total; ++k) {
    const FieldState& s = stepper.step();
    record_probes(s);
    bool inside = true;
    for (std::size_t i = 0; i < s.u.size() && inside; ++i) inside = region.contains(s.u[i], s.v[i]);
    if (!inside) {
      ++result.region_exits;
      if (!result.first_region_exit) result.first_region_exit = k;
    }
    if (hooks.on_step) hooks.on_step(s, k);
    if (k % cfg.snapshot_every == 0 || k == total) snapshot(s, k);
  }
  result.steps = total;
  return result;
}

}  // namespace fracle

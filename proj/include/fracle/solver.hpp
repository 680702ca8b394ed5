#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fracle/frac_core.hpp"
#include "fracle/kinetics.hpp"
#include "fracle/stability.hpp"

namespace fracle {

/// Node-centred grid on [0, Lx] (× [0, Ly]) including the boundary nodes.
/// dim 0 is a single well-mixed node with no diffusion.
class Grid {
 public:
  static Grid point();
  static Grid line(double length, std::size_t nodes);
  static Grid rect(double lx, double ly, std::size_t nx, std::size_t ny);

  int dim() const noexcept { return dim_; }
  std::size_t nx() const noexcept { return counts_[0]; }
  std::size_t ny() const noexcept { return counts_[1]; }
  std::size_t size() const noexcept { return counts_[0] * counts_[1]; }
  double length(int axis) const { return lengths_.at(axis); }
  double spacing(int axis) const { return spacing_.at(axis); }
  std::size_t index(std::size_t i, std::size_t j = 0) const noexcept { return j * counts_[0] + i; }
  double x(std::size_t i) const noexcept { return spacing_[0] * static_cast<double>(i); }
  double y(std::size_t j) const noexcept { return spacing_[1] * static_cast<double>(j); }

  /// Trapezoidal quadrature weight of each node (cell measure, halved on faces).
  std::vector<double> quadrature_weights() const;
  /// Domain measure; 1 for the well-mixed node.
  double measure() const noexcept;
  /// Index of the node closest to (px, py).
  std::size_t nearest_node(double px, double py = 0.0) const;

  Geometry geometry() const;

 private:
  int dim_ = 0;
  std::array<double, 2> lengths_{0.0, 0.0};
  std::array<std::size_t, 2> counts_{1, 1};
  std::array<double, 2> spacing_{0.0, 0.0};
};

struct FieldState {
  double t = 0.0;
  std::vector<double> u;
  std::vector<double> v;

  bool all_finite() const noexcept;
  bool is_uniform(double tol) const noexcept;
};

/// Second-order central Laplacian with zero-flux boundaries: the ghost node
/// mirrors the first interior node, so a boundary row reads 2(f_1 - f_0)/h².
std::vector<double> laplacian(std::span<const double> field, const Grid& grid);

enum class IcKind {
  Sinusoidal,          ///< u = 1 + 0.3 sin(x/2), v = 2 + 0.6 sin(x/2)
  RandomPerturbation,  ///< u = 3.5(1 + 0.2 w_u), v = 10.5(1 + 0.2 w_v), w ~ N(0,1)
  Uniform,             ///< constant (u0, v0); defaults to the equilibrium
  RandomInRegion,      ///< per-node uniform draw strictly inside the invariant rectangle
  Explicit             ///< caller-supplied arrays
};

std::string to_string(IcKind k);
IcKind ic_kind_from_string(const std::string& s);

struct IcSpec {
  IcKind kind = IcKind::Sinusoidal;
  std::uint64_t seed = 0;
  std::optional<double> u0;  ///< Uniform only
  std::optional<double> v0;  ///< Uniform only
  double region_margin = 0.05;  ///< RandomInRegion: fraction of each side kept clear
  std::vector<double> u;  ///< Explicit only
  std::vector<double> v;  ///< Explicit only

  friend bool operator==(const IcSpec&, const IcSpec&) = default;
};

/// Standard normal variate that depends only on (seed, stream, index).
double counter_normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);
/// Uniform variate in [0, 1) that depends only on (seed, stream, index).
double counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

FieldState make_ic(const IcSpec& ic, const Grid& grid, const SystemParams& p);

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonFiniteError : public SolverError {
 public:
  NonFiniteError(std::size_t step, const std::string& what)
      : SolverError(what), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

/// Past levels of u and v, oldest first, used by the L1 memory term.
struct L1FieldHistory {
  std::vector<std::vector<double>> u;
  std::vector<std::vector<double>> v;
  std::vector<double> weights;  ///< b_k, grown on demand

  std::size_t levels() const noexcept { return u.size(); }
};

/// L1-Caputo time stepper: implicit diffusion, semi-implicit kinetics.
///
/// With μ = Γ(2-δ) dt^δ and memory term H = w_n - Σ_{k=1}^{K} b_k (w_{n-k+1} - w_{n-k})
/// each field solves
///
///   (I + μ·loss(w_n) - μ d Δ_h) w_{n+1} = H + μ·source(w_n)
///
/// where F = source - loss·u and G = source - loss·v are the production/loss
/// form of the kinetics. K is the full history unless a memory window is set.
class FractionalStepper {
 public:
  struct Options {
    std::optional<std::size_t> memory_window;
    double cg_tolerance = 1e-10;
    std::size_t cg_max_iterations = 2000;
  };

  FractionalStepper(const SystemParams& p, const Grid& grid, double dt, FieldState initial);
  FractionalStepper(const SystemParams& p, const Grid& grid, double dt, FieldState initial,
                    Options options);

  /// Advances one level. Throws SolverError when the 2D solve does not converge.
  const FieldState& step();

  const FieldState& state() const noexcept { return state_; }
  std::size_t steps() const noexcept { return steps_; }
  const L1FieldHistory& history() const noexcept { return history_; }
  double mu() const noexcept { return mu_; }
  std::size_t last_iterations() const noexcept { return last_iterations_; }

 private:
  void memory_term(const std::vector<std::vector<double>>& levels, std::vector<double>& out) const;
  void solve(std::vector<double>& x, std::span<const double> diag_extra,
             std::span<const double> rhs, double diffusivity);

  SystemParams p_;
  Grid grid_;
  double dt_;
  double mu_;
  Options options_;
  FieldState state_;
  L1FieldHistory history_;
  std::size_t steps_ = 0;
  std::size_t last_iterations_ = 0;
  std::vector<double> quad_weights_;
};

/// Tridiagonal solve with sub-, main and super-diagonals (Thomas algorithm).
void solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                       std::span<const double> upper, std::span<double> rhs);

struct SimConfig {
  SystemParams params;
  Grid grid = Grid::line(20.0, 41);
  double t_end = 10.0;
  double dt = 1e-3;
  IcSpec ic;
  std::size_t snapshot_every = 1000;
  std::optional<std::size_t> memory_window;
  std::vector<std::array<double, 2>> probes;

  /// Throws std::invalid_argument on the first violated constraint.
  void validate() const;
  std::size_t step_count() const;
};

struct ProbeSample {
  double t = 0.0;
  double u = 0.0;
  double v = 0.0;
};

struct ProbeSeries {
  std::array<double, 2> location{0.0, 0.0};
  std::size_t node = 0;
  std::vector<ProbeSample> samples;
};

struct RunHooks {
  /// Called for every snapshot (including t = 0) with its step index.
  std::function<void(const FieldState&, std::size_t)> on_snapshot;
  /// Called after every completed step.
  std::function<void(const FieldState&, std::size_t)> on_step;
  bool keep_snapshots = true;
};

struct RunResult {
  std::vector<FieldState> snapshots;
  std::vector<std::size_t> snapshot_steps;
  std::vector<ProbeSeries> probes;
  std::size_t steps = 0;
  std::size_t region_exits = 0;  ///< steps that left the invariant rectangle
  std::optional<std::size_t> first_region_exit;
};

/// Steps from t = 0 to t_end. Probe series are recorded every step. Throws
/// NonFiniteError carrying the offending step index.
RunResult run(const SimConfig& cfg, const RunHooks& hooks = {});

}  // namespace fracle

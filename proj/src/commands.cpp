#include "fracle/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include "fracle/output.hpp"

namespace fracle {

using nlohmann::json;

int analyze_exit_code(OverallVerdict verdict, bool io_ok) {
  if (!io_ok) return kExitIoError;
  switch (verdict) {
    case OverallVerdict::Stable: return kExitOk;
    case OverallVerdict::Indeterminate: return kExitMarginal;
    case OverallVerdict::TuringUnstable:
    case OverallVerdict::OscillatoryUnstable:
    case OverallVerdict::HomogeneousUnstable: return kExitUnstable;
  }
  return kExitIoError;
}

namespace {

json complex_json(std::complex<double> z) { return json::array({z.real(), z.imag()}); }

json pair_json(const ComplexEigenpair& e) {
  return json::array({complex_json(e.lambda1), complex_json(e.lambda2)});
}

template <class T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json("none");
}

}  // namespace

json stability_report_json(const StabilityReport& r) {
  json j;
  j["params"] = {{"a", r.params.a},   {"b", r.params.b},   {"sigma", r.params.sigma},
                 {"d1", r.params.d1}, {"d2", r.params.d2}, {"delta", r.params.delta.value()}};
  j["geometry"] = {{"dim", r.geometry.dim}, {"lx", r.geometry.lx}, {"ly", r.geometry.ly}};
  j["equilibrium"] = {{"alpha", r.eq.alpha}, {"u_star", r.eq.u_star}, {"v_star", r.eq.v_star}};
  j["jacobian"] = {{"F0", r.jacobian.F0},       {"F1", r.jacobian.F1},   {"G0", r.jacobian.G0},
                   {"G1", r.jacobian.G1},       {"trace", r.jacobian.trace},
                   {"det", r.jacobian.det},     {"upsilon", r.jacobian.upsilon}};
  j["ode"] = {{"verdict", to_string(r.ode.verdict)},
              {"case", to_string(r.ode.case_tag)},
              {"eigenvalues", pair_json(r.ode.eigs)},
              {"margin", r.ode.margin},
              {"critical_order", optional_json(r.ode.critical_order)}};
  j["critical_order"] = optional_json(r.ode.critical_order);
  j["turing_band"] = r.turing_band ? json::array({r.turing_band->lo, r.turing_band->hi}) : json(nullptr);
  j["d_tilde"] = optional_json(r.d_tilde);
  j["upsilon_roots"] = r.upsilon_roots
                           ? json::array({r.upsilon_roots->first, r.upsilon_roots->second})
                           : json(nullptr);
  j["decision_tree"] = to_string(r.decision);
  j["global_condition"] = r.global_condition;
  json modes = json::array();
  for (const auto& m : r.modes) {
    modes.push_back({{"lambda", m.lambda_i},
                     {"trace", m.trace_i},
                     {"det", m.det_i},
                     {"upsilon", m.upsilon_i},
                     {"xi", pair_json(m.xi)},
                     {"margin", m.matignon_margin},
                     {"stable", m.stable}});
  }
  j["modes"] = modes;
  j["overall_verdict"] = to_string(r.overall);
  j["notes"] = r.notes;
  return j;
}

int cmd_analyze(const Config& config, const std::filesystem::path& out_dir, std::ostream& log) {
  const StabilityQuery q = to_stability_query(config);
  const StabilityReport report = pde_classify(q.params, q.geometry, q.modes);
  log << "overall verdict: " << to_string(report.overall) << "\n";
  log << "kinetic verdict: " << to_string(report.ode.verdict) << " ("
      << to_string(report.ode.case_tag) << ")\n";
  if (report.ode.critical_order) log << "critical order: " << *report.ode.critical_order << "\n";
  if (report.turing_band) {
    log << "turing band: (" << report.turing_band->lo << ", " << report.turing_band->hi << ")\n";
  }
  try {
    OutputSink sink(out_dir);
    sink.write("report.json", "report", stability_report_json(report).dump(2) + "\n");
  } catch (const std::runtime_error& e) {
    log << "error: " << e.what() << "\n";
    return analyze_exit_code(report.overall, false);
  }
  return analyze_exit_code(report.overall, true);
}

SimulationOutcome simulate_to_dir(const Config& config, const std::filesystem::path& out_dir,
                                  std::optional<std::uint64_t> seed, std::ostream& log) {
  Config cfg = config;
  if (seed) cfg.ic.seed = *seed;
  const SimConfig sim = to_sim_config(cfg);
  const Grid& grid = sim.grid;

  SimulationOutcome outcome;
  std::optional<OutputSink> sink;
  try {
    sink.emplace(out_dir);
  } catch (const std::runtime_error& e) {
    log << "error: " << e.what() << "\n";
    outcome.exit_code = kExitIoError;
    return outcome;
  }

  std::vector<double> l_times, l_values;
  std::vector<PatternRow> pattern_rows;
  RunHooks hooks;
  hooks.keep_snapshots = false;
  hooks.on_snapshot = [&](const FieldState& s, std::size_t step) {
    const std::string tag = std::to_string(step);
    if (grid.dim() == 2) {
      sink->write("u_t" + tag + ".csv", "snapshot", field_csv_2d(s.u, grid));
      sink->write("v_t" + tag + ".csv", "snapshot", field_csv_2d(s.v, grid));
      sink->write_binary("u_t" + tag + ".pgm", "render", field_pgm(s.u, grid));
      sink->write_binary("v_t" + tag + ".pgm", "render", field_pgm(s.v, grid));
      pattern_rows.push_back({step, s.t, pattern_metrics(s, grid)});
    } else {
      sink->write("snapshot_" + tag + ".csv", "snapshot", snapshot_csv_1d(s, grid));
    }
    l_times.push_back(s.t);
    l_values.push_back(lyapunov_value(s, sim.params, grid));
  };

  std::optional<RunResult> result;
  std::string status = "ok";
  try {
    result = run(sim, hooks);
  } catch (const NonFiniteError& e) {
    log << "error: " << e.what() << "\n";
    outcome.exit_code = kExitNonFinite;
    outcome.failed_step = e.step();
    status = "aborted";
  } catch (const SolverError& e) {
    log << "error: " << e.what() << "\n";
    outcome.exit_code = kExitNonFinite;
    status = "aborted";
  } catch (const std::runtime_error& e) {
    log << "error: " << e.what() << "\n";
    outcome.exit_code = kExitIoError;
    return outcome;
  }

  try {
    json manifest;
    manifest["version"] = FRACLE_VERSION;
    manifest["status"] = status;
    manifest["seed"] = cfg.ic.seed;
    manifest["config"] = to_json(cfg);
    if (outcome.failed_step) manifest["failed_step"] = *outcome.failed_step;

    const LyapunovReport lyap = lyapunov_monitor(l_times, l_values, sim.params.delta);
    if (!l_values.empty()) sink->write("lyapunov.csv", "lyapunov", lyapunov_csv(lyap));
    manifest["lyapunov"] = {{"bounded", lyap.bounded},
                            {"decayed", lyap.decayed},
                            {"verdict", lyap.consistent() ? "consistent" : "inconsistent"}};
    if (grid.dim() == 2 && !pattern_rows.empty()) {
      sink->write("pattern_metrics.csv", "metrics", pattern_metrics_csv(pattern_rows));
    }
    if (result) {
      for (std::size_t i = 0; i < result->probes.size(); ++i) {
        sink->write("probe_" + std::to_string(i) + ".csv", "probe", probe_csv(result->probes[i]));
      }
      const Equilibrium eq = equilibrium(sim.params);
      outcome.metrics = convergence_metrics(result->probes.front().samples, eq);
      manifest["metrics"] = {{"final_error", outcome.metrics.final_error},
                             {"tail_amplitude", outcome.metrics.tail_amplitude}};
      manifest["region_exits"] = result->region_exits;
      if (result->region_exits > 0) {
        log << "warning: trajectory left the invariant rectangle on " << result->region_exits
            << " step(s), first at step " << *result->first_region_exit << "\n";
      }
    }
    json files = json::array();
    for (const auto& e : sink->entries()) {
      files.push_back({{"path", e.path}, {"role", e.role}});
      outcome.files.push_back(e.path);
    }
    manifest["files"] = files;
    std::ofstream out(sink->root() / "manifest.json");
    out << manifest.dump(2) << "\n";
    if (!out) throw std::runtime_error("cannot write manifest.json");
  } catch (const std::runtime_error& e) {
    log << "error: " << e.what() << "\n";
    outcome.exit_code = kExitIoError;
  }
  return outcome;
}

int cmd_simulate(const Config& config, const std::filesystem::path& out_dir,
                 std::optional<std::uint64_t> seed, std::ostream& log) {
  const SimulationOutcome o = simulate_to_dir(config, out_dir, seed, log);
  if (o.exit_code == kExitOk) {
    log << "final_error " << o.metrics.final_error << ", tail_amplitude "
        << o.metrics.tail_amplitude << ", " << o.files.size() << " files written\n";
  }
  return o.exit_code;
}

std::vector<double> delta_grid(double from, double to, std::size_t steps) {
  if (!(from > 0.0 && from <= to && to <= 1.0)) {
    throw std::invalid_argument("sweep range must satisfy 0 < from <= to <= 1");
  }
  if (from == to) return {from};
  if (steps < 2) throw std::invalid_argument("sweep needs at least 2 steps");
  std::vector<double> out;
  for (std::size_t i = 0; i < steps; ++i) {
    out.push_back(from + (to - from) * static_cast<double>(i) / static_cast<double>(steps - 1));
  }
  out.back() = to;
  return out;
}

namespace {

std::string delta_dir(double delta) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "delta_%.6f", delta);
  return buf;
}

}  // namespace

int cmd_sweep_delta(const Config& config, double from, double to, std::size_t steps,
                    const std::filesystem::path& out_dir, std::ostream& log, std::size_t threads,
                    std::vector<SweepRow>* rows_out) {
  const std::vector<double> deltas = delta_grid(from, to, steps);
  std::vector<SweepRow> rows(deltas.size());
  std::vector<std::string> logs(deltas.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < deltas.size(); i = next++) {
      Config c = config;
      c.params = c.params.with_delta(deltas[i]);
      std::ostringstream entry_log;
      const SimulationOutcome o = simulate_to_dir(c, out_dir / delta_dir(deltas[i]), std::nullopt, entry_log);
      rows[i] = {deltas[i], o.metrics.final_error, o.metrics.tail_amplitude, o.exit_code};
      logs[i] = entry_log.str();
    }
  };
  const std::size_t n_workers = std::clamp<std::size_t>(threads, 1, deltas.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n_workers; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  int exit_code = kExitOk;
  std::string csv = "delta,final_error,tail_amplitude\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    log << logs[i];
    if (rows[i].exit_code != kExitOk && exit_code == kExitOk) exit_code = rows[i].exit_code;
    csv += format_number(rows[i].delta) + ',' + format_number(rows[i].final_error) + ',' +
           format_number(rows[i].tail_amplitude) + '\n';
  }
  try {
    OutputSink sink(out_dir);
    sink.write("sweep.csv", "sweep", csv);
    json manifest;
    manifest["version"] = FRACLE_VERSION;
    manifest["config"] = to_json(config);
    json files = json::array({{{"path", "sweep.csv"}, {"role", "sweep"}}});
    for (double d : deltas) files.push_back({{"path", delta_dir(d) + "/manifest.json"}, {"role", "manifest"}});
    manifest["files"] = files;
    std::ofstream out(out_dir / "manifest.json");
    out << manifest.dump(2) << "\n";
    if (!out) throw std::runtime_error("cannot write manifest.json");
  } catch (const std::runtime_error& e) {
    log << "error: " << e.what() << "\n";
    return kExitIoError;
  }
  if (rows_out) *rows_out = rows;
  return exit_code;
}

std::size_t threads_from_env() {
  const char* env = std::getenv("FRACLE_THREADS");
  if (!env) return 1;
  char* end = nullptr;
  const long n = std::strtol(env, &end, 10);
  return (end != env && n > 0) ? static_cast<std::size_t>(n) : 1;
}

}  // namespace fracle

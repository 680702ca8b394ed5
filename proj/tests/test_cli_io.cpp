#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "fracle/commands.hpp"
#include "fracle/config.hpp"
#include "fracle/output.hpp"
#include "fracle/verify.hpp"

using namespace fracle;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("fracle_test_" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

json paper_1d_json() {
  return json::parse(R"({
    "params": {"a": 15, "b": 1, "sigma": 7, "d1": 1, "d2": 10, "delta": 1},
    "geometry": {"dim": 1, "lengths": [20], "counts": [41]},
    "time": {"t_end": 10, "dt": 0.001},
    "ic": {"kind": "sinusoidal"},
    "output": {"snapshot_every": 1000, "probes": [[10]]}
  })");
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::set<std::string> files_under(const fs::path& root) {
  std::set<std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out.insert(fs::relative(e.path(), root).generic_string());
  }
  return out;
}

int run_cli(const std::string& args) {
  const int status = std::system((std::string(FRACLE_CLI) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string config_error_field(const json& j) {
  try {
    parse_config(j);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "";
}

}  // namespace

TEST_CASE("paper 1D config parses") {
  const Config c = parse_config(paper_1d_json());
  CHECK(c.params.a == 15);
  CHECK(c.params.d2 == 10);
  CHECK(c.params.delta.is_integer());
  CHECK(c.geometry.make_grid().spacing(0) == 0.5);
  REQUIRE(c.time);
  CHECK(c.time->dt == 1e-3);
  CHECK(to_sim_config(c).step_count() == 10000);
}

TEST_CASE("invalid fields are rejected with their name") {
  json j = paper_1d_json();
  j["params"]["d1"] = 0;
  CHECK(config_error_field(j) == "params.d1");

  j = paper_1d_json();
  j["params"]["delta"] = 1.2;
  CHECK(config_error_field(j) == "params.delta");

  j = paper_1d_json();
  j["params"]["sgima"] = 7;
  CHECK(config_error_field(j) == "params.sgima");

  j = paper_1d_json();
  j["extra"] = 1;
  CHECK(config_error_field(j) == "config.extra");

  j = paper_1d_json();
  j["params"].erase("b");
  CHECK(config_error_field(j) == "params.b");

  j = paper_1d_json();
  j["geometry"]["counts"] = {2};
  CHECK(config_error_field(j) == "geometry.counts[0]");

  j = paper_1d_json();
  j["time"]["dt"] = -1;
  CHECK(config_error_field(j) == "time.dt");

  j = paper_1d_json();
  j["ic"]["kind"] = "gaussian";
  CHECK(config_error_field(j) == "ic.kind");

  j = paper_1d_json();
  j["output"]["probes"] = {{30}};
  CHECK(config_error_field(j) == "output.probes[0]");

  j = paper_1d_json();
  j["output"]["snapshot_every"] = 0;
  CHECK(config_error_field(j) == "output.snapshot_every");

  j = paper_1d_json();
  j["ic"]["seed"] = -4;
  CHECK(config_error_field(j) == "ic.seed");

  j = paper_1d_json();
  j["geometry"] = {{"dim", 0}, {"lengths", {1}}};
  CHECK(config_error_field(j) == "geometry");
}

TEST_CASE("config round trip") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> pos(0.01, 50.0), del(0.01, 1.0);
  const IcKind kinds[] = {IcKind::Sinusoidal, IcKind::RandomPerturbation, IcKind::Uniform,
                          IcKind::RandomInRegion, IcKind::Explicit};
  for (int i = 0; i < 200; ++i) {
    Config c;
    c.params = SystemParams{pos(rng), pos(rng), pos(rng), pos(rng), pos(rng), FractionalOrder(del(rng))};
    c.geometry.dim = static_cast<int>(rng() % 3);
    c.geometry.lengths.clear();
    c.geometry.counts.clear();
    for (int a = 0; a < c.geometry.dim; ++a) {
      c.geometry.lengths.push_back(pos(rng));
      c.geometry.counts.push_back(3 + rng() % 20);
    }
    if (rng() % 2) {
      TimeSpec t;
      t.dt = 0.001 * pos(rng);
      t.t_end = t.dt * (1 + rng() % 1000);
      if (rng() % 2) t.memory_window = 1 + rng() % 100;
      c.time = t;
    }
    c.ic.kind = kinds[rng() % 5];
    c.ic.seed = rng();
    c.ic.region_margin = 0.3 * del(rng);
    if (c.ic.kind == IcKind::Uniform && rng() % 2) {
      c.ic.u0 = pos(rng);
      c.ic.v0 = pos(rng);
    }
    if (c.ic.kind == IcKind::Explicit) {
      const std::size_t n = c.geometry.make_grid().size();
      for (std::size_t k = 0; k < n; ++k) {
        c.ic.u.push_back(pos(rng));
        c.ic.v.push_back(pos(rng));
      }
    }
    c.output.dir = "out" + std::to_string(i);
    c.output.snapshot_every = 1 + rng() % 50;
    if (c.geometry.dim > 0) {
      std::vector<double> probe;
      for (int a = 0; a < c.geometry.dim; ++a) probe.push_back(0.5 * c.geometry.lengths[a]);
      c.output.probes.push_back(probe);
    }
    c.modes = 1 + rng() % 300;
    const json j = to_json(c);
    CHECK(parse_config(j) == c);
    CHECK(parse_config(json::parse(j.dump())) == c);
  }
}

TEST_CASE("exit codes are total over verdicts and io status") {
  const OverallVerdict all[] = {OverallVerdict::Stable, OverallVerdict::TuringUnstable,
                                OverallVerdict::OscillatoryUnstable,
                                OverallVerdict::HomogeneousUnstable, OverallVerdict::Indeterminate};
  for (OverallVerdict v : all) {
    CHECK(analyze_exit_code(v, false) == kExitIoError);
    const int code = analyze_exit_code(v, true);
    switch (v) {
      case OverallVerdict::Stable: CHECK(code == 0); break;
      case OverallVerdict::Indeterminate: CHECK(code == 4); break;
      default: CHECK(code == 3);
    }
  }
}

TEST_CASE("number formatting") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(1.0 / 3.0) == "0.333333333333");
  CHECK(format_number(10.0) == "10");
  CHECK(format_number(-2.5e-7) == "-2.5e-07");
}

TEST_CASE("analyze writes a report") {
  TempDir tmp;
  std::ostringstream log;
  Config c = parse_config(paper_1d_json());
  CHECK(cmd_analyze(c, tmp.path, log) == kExitUnstable);
  json r = json::parse(slurp(tmp.path / "report.json"));
  CHECK(r["overall_verdict"] == "OscillatoryUnstable");
  CHECK(r["critical_order"].get<double>() == doctest::Approx(0.990177).epsilon(1e-5));
  CHECK(r["turing_band"].is_null());
  CHECK(r["modes"].size() >= 2);
  for (const char* key : {"equilibrium", "jacobian", "ode", "d_tilde", "modes"}) CHECK(r.contains(key));

  c.params = SystemParams{15, 1.2, 8, 1, 24, FractionalOrder(1)};
  c.geometry.lengths = {50};
  CHECK(cmd_analyze(c, tmp.path, log) == kExitUnstable);
  r = json::parse(slurp(tmp.path / "report.json"));
  CHECK(r["overall_verdict"] == "TuringUnstable");
  CHECK(r["turing_band"][0].get<double>() == doctest::Approx(0.346).epsilon(1e-3));
  CHECK(r["turing_band"][1].get<double>() == doctest::Approx(1.734).epsilon(1e-3));

  c.params = SystemParams{5, 1, 1, 1, 1, FractionalOrder(0.5)};
  c.geometry.lengths = {20};
  CHECK(cmd_analyze(c, tmp.path, log) == kExitOk);
  r = json::parse(slurp(tmp.path / "report.json"));
  CHECK(r["overall_verdict"] == "Stable");
  CHECK(r["global_condition"] == true);

  // zero-trace kinetics at δ = 1 is marginal
  c.params = SystemParams{15, 1, 2.2 / 0.3, 1, 1, FractionalOrder(1)};
  CHECK(cmd_analyze(c, tmp.path, log) == kExitMarginal);

  // unwritable destination
  std::ofstream(tmp.path / "blocker") << "x";
  CHECK(cmd_analyze(c, tmp.path / "blocker" / "sub", log) == kExitIoError);
}

TEST_CASE("simulate manifest lists exactly the written files") {
  for (int dim : {0, 1, 2}) {
    TempDir tmp;
    json j = paper_1d_json();
    j["time"] = {{"t_end", 0.2}, {"dt", 0.01}};
    j["output"] = {{"snapshot_every", 7}};
    if (dim == 0) j["geometry"] = {{"dim", 0}};
    if (dim == 2) {
      j["geometry"] = {{"dim", 2}, {"lengths", {10, 8}}, {"counts", {11, 9}}};
      j["ic"] = {{"kind", "random-perturbation"}, {"seed", 3}};
    }
    std::ostringstream log;
    CHECK(cmd_simulate(parse_config(j), tmp.path, std::nullopt, log) == kExitOk);
    const json m = json::parse(slurp(tmp.path / "manifest.json"));
    std::set<std::string> listed;
    for (const auto& f : m["files"]) listed.insert(f["path"].get<std::string>());
    std::set<std::string> on_disk = files_under(tmp.path);
    on_disk.erase("manifest.json");
    CHECK(listed == on_disk);
    CHECK(m["status"] == "ok");
    CHECK(m["version"] == FRACLE_VERSION);
    CHECK(parse_config(m["config"]) == parse_config(j));
    CHECK(listed.count("lyapunov.csv") == 1);
    CHECK(listed.count("probe_0.csv") == 1);
    if (dim == 2) {
      CHECK(listed.count("u_t0.csv") == 1);
      CHECK(listed.count("v_t20.pgm") == 1);
      CHECK(listed.count("pattern_metrics.csv") == 1);
      CHECK(slurp(tmp.path / "u_t0.csv").rfind("y\\x,0,1,2", 0) == 0);
      CHECK(slurp(tmp.path / "u_t7.pgm").rfind("P5\n11 9\n255\n", 0) == 0);
      CHECK(slurp(tmp.path / "u_t7.pgm").size() == std::string("P5\n11 9\n255\n").size() + 99);
    } else {
      CHECK(listed.count("snapshot_14.csv") == 1);
      CHECK(listed.count("snapshot_20.csv") == 1);
      CHECK(slurp(tmp.path / "snapshot_0.csv").rfind("t,x,u,v\n", 0) == 0);
    }
    CHECK(slurp(tmp.path / "probe_0.csv").rfind("t,u,v\n", 0) == 0);
    CHECK(slurp(tmp.path / "lyapunov.csv").rfind("t,L\n", 0) == 0);
  }
}

TEST_CASE("simulate output is deterministic per seed") {
  TempDir a, b, c;
  json j = paper_1d_json();
  j["geometry"] = {{"dim", 2}, {"lengths", {10, 10}}, {"counts", {12, 12}}};
  j["params"]["delta"] = 0.8;
  j["time"] = {{"t_end", 0.3}, {"dt", 0.01}};
  j["ic"] = {{"kind", "random-perturbation"}, {"seed", 1}};
  j["output"] = {{"snapshot_every", 10}};
  std::ostringstream log;
  const Config cfg = parse_config(j);
  REQUIRE(cmd_simulate(cfg, a.path, std::nullopt, log) == 0);
  REQUIRE(cmd_simulate(cfg, b.path, std::nullopt, log) == 0);
  REQUIRE(cmd_simulate(cfg, c.path, 2, log) == 0);
  for (const auto& f : files_under(a.path)) CHECK(slurp(a.path / f) == slurp(b.path / f));
  CHECK(slurp(a.path / "u_t0.csv") != slurp(c.path / "u_t0.csv"));
  CHECK(json::parse(slurp(c.path / "manifest.json"))["seed"] == 2);
}

TEST_CASE("uniform equilibrium simulation keeps every snapshot identical") {
  TempDir tmp;
  json j = paper_1d_json();
  j["params"]["delta"] = 0.7;
  j["time"] = {{"t_end", 1}, {"dt", 0.01}};
  j["ic"] = {{"kind", "uniform"}};
  j["output"] = {{"snapshot_every", 25}};
  std::ostringstream log;
  REQUIRE(cmd_simulate(parse_config(j), tmp.path, std::nullopt, log) == 0);
  auto body = [](std::string s) {
    // drop the time column, which legitimately differs
    std::string out;
    std::istringstream in(s);
    for (std::string line; std::getline(in, line);) out += line.substr(line.find(',')) + "\n";
    return out;
  };
  const std::string first = body(slurp(tmp.path / "snapshot_0.csv"));
  for (int step : {25, 50, 75, 100}) {
    CHECK(body(slurp(tmp.path / ("snapshot_" + std::to_string(step) + ".csv"))) == first);
  }
}

TEST_CASE("non-finite abort reports the step") {
  TempDir tmp;
  json j = paper_1d_json();
  j["geometry"] = {{"dim", 0}};
  j["time"] = {{"t_end", 1}, {"dt", 0.1}};
  j["ic"] = {{"kind", "explicit"}, {"u", {1e308}}, {"v", {-1e308}}};
  j["output"] = json::object();
  std::ostringstream log;
  const SimulationOutcome o = simulate_to_dir(parse_config(j), tmp.path, std::nullopt, log);
  CHECK(o.exit_code == kExitNonFinite);
  REQUIRE(o.failed_step);
  const json m = json::parse(slurp(tmp.path / "manifest.json"));
  CHECK(m["status"] == "aborted");
  CHECK(m["failed_step"] == *o.failed_step);
}

TEST_CASE("delta sweep") {
  CHECK(delta_grid(0.9, 0.9, 5) == std::vector<double>{0.9});
  CHECK(delta_grid(0.9, 1.0, 3) == std::vector<double>{0.9, 0.95, 1.0});
  CHECK_THROWS(delta_grid(0.0, 1.0, 3));
  CHECK_THROWS(delta_grid(0.9, 0.8, 3));
  CHECK_THROWS(delta_grid(0.5, 1.0, 1));

  TempDir tmp;
  json j = paper_1d_json();
  j["geometry"] = {{"dim", 0}};
  j["time"] = {{"t_end", 200}, {"dt", 0.01}};
  j["ic"] = {{"kind", "uniform"}, {"u0", 1}, {"v0", 2}};
  j["output"] = {{"snapshot_every", 5000}};
  std::ostringstream log;
  std::vector<SweepRow> rows;
  CHECK(cmd_sweep_delta(parse_config(j), 0.90, 1.00, 6, tmp.path, log, 3, &rows) == 0);
  REQUIRE(rows.size() == 6);
  for (const auto& r : rows) {
    if (r.delta <= 0.96 + 1e-12) CHECK(r.final_error < 0.01);
  }
  CHECK(rows.back().tail_amplitude > 0.5);
  const std::string csv = slurp(tmp.path / "sweep.csv");
  CHECK(csv.rfind("delta,final_error,tail_amplitude\n0.9,", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);
  CHECK(fs::exists(tmp.path / "delta_0.900000" / "manifest.json"));

  TempDir single;
  CHECK(cmd_sweep_delta(parse_config(j), 0.95, 0.95, 2, single.path, log, 1, &rows) == 0);
  CHECK(rows.size() == 1);

  // stable for every order without diffusion
  TempDir stable;
  j["params"] = {{"a", 15}, {"b", 1.2}, {"sigma", 8}, {"d1", 1}, {"d2", 24}, {"delta", 1}};
  j["time"] = {{"t_end", 100}, {"dt", 0.01}};
  CHECK(cmd_sweep_delta(parse_config(j), 0.5, 1.0, 3, stable.path, log, 3, &rows) == 0);
  for (const auto& r : rows) CHECK(r.final_error < 0.01);
}

TEST_CASE("verify passes and catches a mutated jacobian") {
  std::ostringstream out;
  CHECK(cmd_verify(out) == 0);
  CHECK(out.str().find("[FAIL]") == std::string::npos);

  VerifyOptions broken;
  broken.jacobian = [](const SystemParams& p) {
    JacobianSummary j = jacobian_summary(p);
    j.F1 = -j.F1;
    return j;
  };
  std::ostringstream bad;
  CHECK(cmd_verify(bad, broken) == kExitVerifyFailed);
  bool jacobian_failed = false;
  for (const auto& item : run_verify(broken)) {
    if (item.name == "jacobian-fd") jacobian_failed = !item.passed;
    else CHECK(item.passed);
  }
  CHECK(jacobian_failed);

  VerifyOptions halved;
  halved.power_rule_dt = 5e-4;
  for (const auto& item : run_verify(halved)) {
    if (item.name == "power-rule") CHECK(item.passed);
  }
}

TEST_CASE("command line") {
  TempDir tmp;
  CHECK(run_cli("verify") == 0);
  CHECK(run_cli("") == 1);
  CHECK(run_cli("frobnicate") == 1);
  CHECK(run_cli("analyze --config " + (tmp.path / "missing.json").string() + " --out " +
                tmp.path.string()) == 1);

  json j = paper_1d_json();
  std::ofstream(tmp.path / "paper.json") << j.dump();
  CHECK(run_cli("analyze --config " + (tmp.path / "paper.json").string() + " --out " +
                (tmp.path / "an").string()) == 3);
  CHECK(fs::exists(tmp.path / "an" / "report.json"));

  j["params"]["d1"] = 0;
  std::ofstream(tmp.path / "bad.json") << j.dump();
  CHECK(run_cli("analyze --config " + (tmp.path / "bad.json").string() + " --out " +
                tmp.path.string()) == 1);

  j = paper_1d_json();
  j["time"] = {{"t_end", 0.05}, {"dt", 0.01}};
  std::ofstream(tmp.path / "short.json") << j.dump();
  CHECK(run_cli("simulate --config " + (tmp.path / "short.json").string() + " --out " +
                (tmp.path / "sim").string() + " --seed 4") == 0);
  CHECK(json::parse(slurp(tmp.path / "sim" / "manifest.json"))["seed"] == 4);
  CHECK(run_cli("sweep-delta --config " + (tmp.path / "short.json").string() +
                " --from 0.8 --to 1 --steps 3 --out " + (tmp.path / "sw").string()) == 0);
  CHECK(fs::exists(tmp.path / "sw" / "sweep.csv"));
}

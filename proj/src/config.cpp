#include "fracle/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>

namespace fracle {

using nlohmann::json;

bool operator==(const Config& x, const Config& y) {
  return x.params == y.params && x.geometry == y.geometry && x.time == y.time && x.ic == y.ic &&
         x.output == y.output && x.modes == y.modes;
}

Grid GeometrySpec::make_grid() const {
  switch (dim) {
    case 0: return Grid::point();
    case 1: return Grid::line(lengths.at(0), counts.at(0));
    case 2: return Grid::rect(lengths.at(0), lengths.at(1), counts.at(0), counts.at(1));
    default: throw ConfigError("geometry.dim", "must be 0, 1 or 2");
  }
}

namespace {

void reject_unknown(const json& obj, const std::string& where,
                    std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(where, "must be an object");
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) throw ConfigError(where + "." + key, "unknown key");
  }
}

const json& require(const json& obj, const std::string& where, const char* key) {
  if (!obj.contains(key)) throw ConfigError(where + "." + key, "missing required field");
  return obj.at(key);
}

double number(const json& v, const std::string& field) {
  if (!v.is_number()) throw ConfigError(field, "must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(field, "must be finite");
  return x;
}

double positive(const json& v, const std::string& field) {
  const double x = number(v, field);
  if (!(x > 0.0)) throw ConfigError(field, "must be strictly positive");
  return x;
}

std::size_t count(const json& v, const std::string& field, std::size_t minimum) {
  if (!v.is_number_integer()) throw ConfigError(field, "must be an integer");
  const auto x = v.get<long long>();
  if (x < static_cast<long long>(minimum)) {
    throw ConfigError(field, "must be at least " + std::to_string(minimum));
  }
  return static_cast<std::size_t>(x);
}

std::vector<double> number_array(const json& v, const std::string& field) {
  if (!v.is_array()) throw ConfigError(field, "must be an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(number(v[i], field + "[" + std::to_string(i) + "]"));
  }
  return out;
}

SystemParams parse_params(const json& j) {
  const std::string w = "params";
  reject_unknown(j, w, {"a", "b", "sigma", "d1", "d2", "delta"});
  SystemParams p;
  p.a = positive(require(j, w, "a"), "params.a");
  p.b = positive(require(j, w, "b"), "params.b");
  p.sigma = positive(require(j, w, "sigma"), "params.sigma");
  p.d1 = positive(require(j, w, "d1"), "params.d1");
  p.d2 = positive(require(j, w, "d2"), "params.d2");
  const double delta = number(require(j, w, "delta"), "params.delta");
  if (!(delta > 0.0 && delta <= 1.0)) throw ConfigError("params.delta", "must lie in (0, 1]");
  p.delta = FractionalOrder(delta);
  return p;
}

GeometrySpec parse_geometry(const json& j) {
  const std::string w = "geometry";
  reject_unknown(j, w, {"dim", "lengths", "counts"});
  GeometrySpec g;
  const json& dim = require(j, w, "dim");
  if (!dim.is_number_integer() || dim.get<int>() < 0 || dim.get<int>() > 2) {
    throw ConfigError("geometry.dim", "must be 0, 1 or 2");
  }
  g.dim = dim.get<int>();
  g.lengths.clear();
  g.counts.clear();
  if (g.dim == 0) {
    if ((j.contains("lengths") && !j["lengths"].empty()) ||
        (j.contains("counts") && !j["counts"].empty())) {
      throw ConfigError("geometry", "a well-mixed geometry (dim 0) takes no lengths or counts");
    }
    return g;
  }
  const json& lengths = require(j, w, "lengths");
  const json& counts = require(j, w, "counts");
  if (!lengths.is_array() || lengths.size() != static_cast<std::size_t>(g.dim)) {
    throw ConfigError("geometry.lengths", "must hold one length per dimension");
  }
  if (!counts.is_array() || counts.size() != static_cast<std::size_t>(g.dim)) {
    throw ConfigError("geometry.counts", "must hold one node count per dimension");
  }
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    g.lengths.push_back(positive(lengths[i], "geometry.lengths[" + std::to_string(i) + "]"));
    g.counts.push_back(count(counts[i], "geometry.counts[" + std::to_string(i) + "]", 3));
  }
  return g;
}

TimeSpec parse_time(const json& j) {
  const std::string w = "time";
  reject_unknown(j, w, {"t_end", "dt", "memory_window"});
  TimeSpec t;
  t.dt = positive(require(j, w, "dt"), "time.dt");
  t.t_end = positive(require(j, w, "t_end"), "time.t_end");
  if (t.t_end < t.dt) throw ConfigError("time.t_end", "must be at least dt");
  if (j.contains("memory_window") && !j["memory_window"].is_null()) {
    if (j["memory_window"].is_string() && j["memory_window"].get<std::string>() == "full") {
      t.memory_window.reset();
    } else {
      t.memory_window = count(j["memory_window"], "time.memory_window", 1);
    }
  }
  return t;
}

IcSpec parse_ic(const json& j) {
  const std::string w = "ic";
  reject_unknown(j, w, {"kind", "seed", "u0", "v0", "margin", "u", "v"});
  IcSpec ic;
  const json& kind = require(j, w, "kind");
  if (!kind.is_string()) throw ConfigError("ic.kind", "must be a string");
  try {
    ic.kind = ic_kind_from_string(kind.get<std::string>());
  } catch (const std::invalid_argument& e) {
    throw ConfigError("ic.kind", e.what());
  }
  if (j.contains("seed")) {
    const json& seed = j["seed"];
    if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<std::int64_t>() >= 0)) {
      throw ConfigError("ic.seed", "must be a non-negative integer");
    }
    ic.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("u0")) ic.u0 = number(j["u0"], "ic.u0");
  if (j.contains("v0")) ic.v0 = number(j["v0"], "ic.v0");
  if (j.contains("margin")) {
    ic.region_margin = number(j["margin"], "ic.margin");
    if (!(ic.region_margin >= 0.0 && ic.region_margin < 0.5)) {
      throw ConfigError("ic.margin", "must lie in [0, 0.5)");
    }
  }
  if (j.contains("u")) ic.u = number_array(j["u"], "ic.u");
  if (j.contains("v")) ic.v = number_array(j["v"], "ic.v");
  const bool uniform_keys = ic.u0 || ic.v0;
  if (uniform_keys && ic.kind != IcKind::Uniform) {
    throw ConfigError("ic.u0", "only valid for kind 'uniform'");
  }
  if ((!ic.u.empty() || !ic.v.empty()) && ic.kind != IcKind::Explicit) {
    throw ConfigError("ic.u", "only valid for kind 'explicit'");
  }
  return ic;
}

OutputSpec parse_output(const json& j, int dim) {
  const std::string w = "output";
  reject_unknown(j, w, {"dir", "snapshot_every", "probes"});
  OutputSpec o;
  if (j.contains("dir")) {
    if (!j["dir"].is_string()) throw ConfigError("output.dir", "must be a string");
    o.dir = j["dir"].get<std::string>();
  }
  if (j.contains("snapshot_every")) o.snapshot_every = count(j["snapshot_every"], "output.snapshot_every", 1);
  if (j.contains("probes")) {
    const json& probes = j["probes"];
    if (!probes.is_array()) throw ConfigError("output.probes", "must be an array of coordinates");
    for (std::size_t i = 0; i < probes.size(); ++i) {
      const std::string f = "output.probes[" + std::to_string(i) + "]";
      auto coords = number_array(probes[i], f);
      if (coords.size() != static_cast<std::size_t>(dim)) {
        throw ConfigError(f, "needs " + std::to_string(dim) + " coordinate(s)");
      }
      o.probes.push_back(std::move(coords));
    }
  }
  return o;
}

}  // namespace

Config parse_config(const json& j) {
  reject_unknown(j, "config", {"params", "geometry", "time", "ic", "output", "analysis"});
  Config c;
  c.params = parse_params(require(j, "config", "params"));
  c.geometry = parse_geometry(require(j, "config", "geometry"));
  if (j.contains("time")) c.time = parse_time(j["time"]);
  if (j.contains("ic")) c.ic = parse_ic(j["ic"]);
  if (j.contains("output")) c.output = parse_output(j["output"], c.geometry.dim);
  if (j.contains("analysis")) {
    reject_unknown(j["analysis"], "analysis", {"modes"});
    if (j["analysis"].contains("modes")) c.modes = count(j["analysis"]["modes"], "analysis.modes", 1);
  }

  const Grid grid = c.geometry.make_grid();
  if (c.ic.kind == IcKind::Explicit && (c.ic.u.size() != grid.size() || c.ic.v.size() != grid.size())) {
    throw ConfigError("ic.u", "explicit arrays must have " + std::to_string(grid.size()) + " entries");
  }
  for (std::size_t i = 0; i < c.output.probes.size(); ++i) {
    const auto& pr = c.output.probes[i];
    for (std::size_t axis = 0; axis < pr.size(); ++axis) {
      if (pr[axis] < 0.0 || pr[axis] > grid.length(static_cast<int>(axis))) {
        throw ConfigError("output.probes[" + std::to_string(i) + "]", "lies outside the domain");
      }
    }
  }
  return c;
}

Config parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open '" + path.string() + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("config", std::string("malformed JSON: ") + e.what());
  }
  return parse_config(j);
}

json to_json(const Config& c) {
  json j;
  j["params"] = {{"a", c.params.a},   {"b", c.params.b},   {"sigma", c.params.sigma},
                 {"d1", c.params.d1}, {"d2", c.params.d2}, {"delta", c.params.delta.value()}};
  j["geometry"] = {{"dim", c.geometry.dim}, {"lengths", c.geometry.lengths}, {"counts", c.geometry.counts}};
  if (c.time) {
    j["time"] = {{"t_end", c.time->t_end}, {"dt", c.time->dt}};
    if (c.time->memory_window) j["time"]["memory_window"] = *c.time->memory_window;
  }
  json ic = {{"kind", to_string(c.ic.kind)}, {"seed", c.ic.seed}, {"margin", c.ic.region_margin}};
  if (c.ic.u0) ic["u0"] = *c.ic.u0;
  if (c.ic.v0) ic["v0"] = *c.ic.v0;
  if (!c.ic.u.empty()) ic["u"] = c.ic.u;
  if (!c.ic.v.empty()) ic["v"] = c.ic.v;
  j["ic"] = ic;
  j["output"] = {{"dir", c.output.dir}, {"snapshot_every", c.output.snapshot_every},
                 {"probes", c.output.probes}};
  j["analysis"] = {{"modes", c.modes}};
  return j;
}

SimConfig to_sim_config(const Config& c) {
  if (!c.time) throw ConfigError("time", "missing required section for a simulation");
  SimConfig s;
  s.params = c.params;
  s.grid = c.geometry.make_grid();
  s.t_end = c.time->t_end;
  s.dt = c.time->dt;
  s.memory_window = c.time->memory_window;
  s.ic = c.ic;
  s.snapshot_every = c.output.snapshot_every;
  for (const auto& pr : c.output.probes) {
    s.probes.push_back({pr.size() > 0 ? pr[0] : 0.0, pr.size() > 1 ? pr[1] : 0.0});
  }
  if (s.probes.empty()) {
    const double cx = s.grid.dim() >= 1 ? 0.5 * s.grid.length(0) : 0.0;
    const double cy = s.grid.dim() == 2 ? 0.5 * s.grid.length(1) : 0.0;
    s.probes.push_back({cx, cy});
  }
  return s;
}

StabilityQuery to_stability_query(const Config& c) {
  const Geometry g = c.geometry.dim == 0   ? Geometry::point()
                     : c.geometry.dim == 1 ? Geometry::interval(c.geometry.lengths.at(0))
                                           : Geometry::rectangle(c.geometry.lengths.at(0),
                                                                 c.geometry.lengths.at(1));
  return {c.params, g, c.modes};
}

}  // namespace fracle

// SPDX-License-Identifier: Apache-2.0
#include "zomd/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <fmt/core.h>

#include "zomd/kernels.hpp"
#include "zomd/mirror.hpp"
#include "zomd/problems.hpp"

namespace zomd::config {

namespace {

void check_keys(const Json& obj, const std::string& path, const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError(fmt::format("'{}' must be an object", path));
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) {
      std::string known;
      for (const auto& k : allowed) known += (known.empty() ? "" : ", ") + k;
      throw ConfigError(fmt::format("unknown config key '{}{}{}' (expected one of: {})", path, path.empty() ? "" : ".",
                                    key, known));
    }
  }
}

template <typename T>
T get(const Json& obj, const std::string& key, const std::string& path) {
  if (!obj.contains(key)) throw ConfigError(fmt::format("missing config key '{}.{}'", path, key));
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(fmt::format("config key '{}.{}' has the wrong type ({})", path, key, obj.at(key).dump()));
  }
}

template <typename T>
void require_type(const Json& obj, const std::string& key, const std::string& path) {
  (void)get<T>(obj, key, path);
}

void set_default(Json& obj, const std::string& key, Json value) {
  if (!obj.contains(key)) obj[key] = std::move(value);
}

Json resolve_noise(Json n, const std::string& path) {
  if (n.is_string()) n = Json{{"kind", n}};
  check_keys(n, path, {"kind", "c", "mean", "stddev", "d1", "d2"});
  set_default(n, "kind", "none");
  const auto kind = get<std::string>(n, "kind", path);
  if (kind == "none") {
    check_keys(n, path, {"kind"});
  } else if (kind == "constant") {
    check_keys(n, path, {"kind", "c"});
    require_type<double>(n, "c", path);
  } else if (kind == "gaussian") {
    check_keys(n, path, {"kind", "mean", "stddev"});
    set_default(n, "mean", 0.0);
    set_default(n, "stddev", 1.0);
    require_type<double>(n, "mean", path);
    require_type<double>(n, "stddev", path);
  } else if (kind == "f") {
    check_keys(n, path, {"kind", "d1", "d2"});
    set_default(n, "d1", 3.0);
    set_default(n, "d2", 5.0);
    require_type<double>(n, "d1", path);
    require_type<double>(n, "d2", path);
  } else {
    throw ConfigError(fmt::format("'{}.kind': unknown noise '{}' (known: none, constant, gaussian, f)", path, kind));
  }
  return n;
}

problems::NoiseModel build_noise(const Json& n) {
  const auto kind = n.at("kind").get<std::string>();
  try {
    if (kind == "constant") return problems::NoiseModel::constant_bias(n.at("c").get<double>());
    if (kind == "gaussian") {
      return problems::NoiseModel::gaussian(n.at("mean").get<double>(), n.at("stddev").get<double>());
    }
    if (kind == "f") return problems::NoiseModel::f_distribution(n.at("d1").get<double>(), n.at("d2").get<double>());
  } catch (const ParameterError& e) {
    throw ConfigError(e.what());
  }
  return problems::NoiseModel::none();
}

Json resolve_constraint(Json c, const std::string& path, std::size_t m) {
  check_keys(c, path, {"kind", "lower", "upper", "center", "radius", "dimension"});
  set_default(c, "kind", "box");
  const auto kind = get<std::string>(c, "kind", path);
  if (kind == "box") {
    check_keys(c, path, {"kind", "lower", "upper"});
    set_default(c, "lower", std::vector<double>(m, -5.0));
    set_default(c, "upper", std::vector<double>(m, 5.0));
    require_type<std::vector<double>>(c, "lower", path);
    require_type<std::vector<double>>(c, "upper", path);
  } else if (kind == "ball") {
    check_keys(c, path, {"kind", "center", "radius"});
    set_default(c, "center", std::vector<double>(m, 0.0));
    require_type<std::vector<double>>(c, "center", path);
    require_type<double>(c, "radius", path);
  } else if (kind == "simplex") {
    check_keys(c, path, {"kind", "dimension"});
    set_default(c, "dimension", m);
    require_type<std::size_t>(c, "dimension", path);
  } else {
    throw ConfigError(fmt::format("'{}.kind': unknown constraint '{}' (known: box, ball, simplex)", path, kind));
  }
  return c;
}

problems::ConstraintSet build_constraint(const Json& c) {
  const auto kind = c.at("kind").get<std::string>();
  try {
    if (kind == "box") {
      return problems::ConstraintSet::box(c.at("lower").get<Vector>(), c.at("upper").get<Vector>());
    }
    if (kind == "ball") return problems::ConstraintSet::ball(c.at("center").get<Vector>(), c.at("radius").get<double>());
    return problems::ConstraintSet::simplex(c.at("dimension").get<std::size_t>());
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("problem.constraint: ") + e.what());
  }
}

Json resolve_problem(Json p) {
  const std::string path = "problem";
  check_keys(p, path, {"kind", "gains", "z0", "radius", "noise", "noise_seed", "target", "constraint"});
  set_default(p, "kind", "sensor-network");
  const auto kind = get<std::string>(p, "kind", path);
  if (kind == "sensor-network") {
    check_keys(p, path, {"kind", "gains", "z0", "radius", "noise", "noise_seed"});
    set_default(p, "gains", problems::SensorNetworkOptions{}.gains);
    set_default(p, "z0", 0.0);
    set_default(p, "radius", 5.0);
    set_default(p, "noise", Json{{"kind", "f"}, {"d1", 3.0}, {"d2", 5.0}});
    require_type<double>(p, "z0", path);
    require_type<double>(p, "radius", path);
  } else if (kind == "least-squares") {
    check_keys(p, path, {"kind", "gains", "target", "constraint", "noise", "noise_seed"});
    const auto target = get<Vector>(p, "target", path);
    if (target.empty()) throw ConfigError("'problem.target' must be non-empty");
    set_default(p, "constraint", Json::object());
    p["constraint"] = resolve_constraint(p["constraint"], "problem.constraint", target.size());
    set_default(p, "noise", Json{{"kind", "none"}});
  } else {
    throw ConfigError(fmt::format("'problem.kind': unknown problem '{}' (known: sensor-network, least-squares)", kind));
  }
  const auto gains = get<Vector>(p, "gains", path);
  if (gains.empty()) throw ConfigError("'problem.gains' must be non-empty");
  p["noise"] = resolve_noise(p["noise"], "problem.noise");
  if (p.contains("noise_seed") && !p["noise_seed"].is_null()) require_type<std::uint64_t>(p, "noise_seed", path);
  set_default(p, "noise_seed", nullptr);
  return p;
}

Json resolve_graph(Json g, std::size_t agents) {
  const std::string path = "graph";
  if (g.contains("preset")) {
    check_keys(g, path, {"preset", "n"});
    const auto name = get<std::string>(g, "preset", path);
    if (name == "fig1") {
      set_default(g, "n", 6);
    } else {
      set_default(g, "n", agents);
    }
    require_type<std::size_t>(g, "n", path);
    return g;
  }
  check_keys(g, path, {"n", "mode", "U", "l", "matrices"});
  set_default(g, "mode", "cyclic");
  set_default(g, "U", 1);
  require_type<std::size_t>(g, "n", path);
  require_type<std::size_t>(g, "U", path);
  const auto mode = get<std::string>(g, "mode", path);
  if (mode != "cyclic" && mode != "explicit") {
    throw ConfigError(fmt::format("'graph.mode' must be cyclic or explicit, got '{}'", mode));
  }
  const auto mats = get<std::vector<std::vector<std::vector<double>>>>(g, "matrices", path);
  if (mats.empty()) throw ConfigError("'graph.matrices' must be non-empty");
  if (!g.contains("l")) {
    double l = 1.0;
    for (const auto& a : mats) {
      for (const auto& row : a) {
        for (double v : row) {
          if (v > 0.0) l = std::min(l, v);
        }
      }
    }
    g["l"] = l;
  }
  require_type<double>(g, "l", path);
  return g;
}

Json resolve_kernel(Json k) {
  const std::string path = "kernel";
  check_keys(k, path, {"name", "order", "coefficients"});
  if (k.contains("coefficients")) {
    set_default(k, "name", "polynomial");
    require_type<std::vector<double>>(k, "coefficients", path);
    if (k.contains("order")) require_type<std::size_t>(k, "order", path);
    return k;
  }
  set_default(k, "name", "example");
  const auto name = get<std::string>(k, "name", path);
  if (name == "example") {
    check_keys(k, path, {"name"});
  } else if (name == "legendre") {
    set_default(k, "order", 3);
    require_type<std::size_t>(k, "order", path);
  } else {
    throw ConfigError(fmt::format("'kernel.name': unknown kernel '{}' (known: example, legendre, or coefficients)", name));
  }
  return k;
}

Json resolve_power_law(Json s, const std::string& path, Json defaults, bool with_g) {
  if (with_g) {
    check_keys(s, path, {"scale", "power", "G"});
  } else {
    check_keys(s, path, {"scale", "power"});
  }
  for (const auto& [key, value] : defaults.items()) set_default(s, key, value);
  for (const auto& [key, _] : s.items()) require_type<double>(s, key, path);
  return s;
}

Json resolve_schedules(Json s) {
  check_keys(s, "schedules", {"alpha", "beta", "gamma"});
  set_default(s, "alpha", Json::object());
  set_default(s, "beta", Json::object());
  set_default(s, "gamma", Json::object());
  s["alpha"] = resolve_power_law(s["alpha"], "schedules.alpha", {{"scale", 0.2}, {"power", 0.3}, {"G", 1.0}}, true);
  s["beta"] = resolve_power_law(s["beta"], "schedules.beta", {{"scale", 15.0}, {"power", -0.6}}, false);
  s["gamma"] = resolve_power_law(s["gamma"], "schedules.gamma", {{"scale", 0.2}, {"power", -0.25}}, false);
  return s;
}

Json resolve_run(Json r) {
  const std::string path = "run";
  check_keys(r, path,
             {"T", "seed", "allow_violations", "oracle_noise", "per_coordinate_r", "initial", "gradient_bound", "threads"});
  set_default(r, "T", 5000);
  set_default(r, "seed", 1);
  set_default(r, "allow_violations", false);
  set_default(r, "oracle_noise", Json{{"kind", "none"}});
  set_default(r, "per_coordinate_r", false);
  set_default(r, "initial", "spread");
  set_default(r, "gradient_bound", nullptr);
  set_default(r, "threads", 1);
  require_type<std::size_t>(r, "T", path);
  require_type<std::uint64_t>(r, "seed", path);
  require_type<bool>(r, "allow_violations", path);
  require_type<bool>(r, "per_coordinate_r", path);
  require_type<unsigned>(r, "threads", path);
  if (get<std::size_t>(r, "T", path) == 0) throw ConfigError("'run.T' must be positive");
  r["oracle_noise"] = resolve_noise(r["oracle_noise"], "run.oracle_noise");
  if (r["initial"].is_string()) {
    if (r["initial"] != "spread") throw ConfigError("'run.initial' must be \"spread\" or a list of states");
  } else {
    require_type<std::vector<Vector>>(r, "initial", path);
  }
  if (!r["gradient_bound"].is_null()) require_type<double>(r, "gradient_bound", path);
  return r;
}

}  // namespace

Json preset(const std::string& name) {
  if (name == "reproduce-paper") {
    return Json{
        {"problem", {{"kind", "sensor-network"}}},
        {"graph", {{"preset", "fig1"}}},
        {"kernel", {{"name", "example"}}},
        {"mirror", {{"name", "euclidean"}}},
        {"schedules",
         {{"alpha", {{"scale", 0.2}, {"power", 0.3}, {"G", 1.0}}},
          {"beta", {{"scale", 15.0}, {"power", -0.6}}},
          {"gamma", {{"scale", 0.2}, {"power", -0.25}}}}},
        // the literal clipping schedule sits below 2G for the frozen noise
        {"run", {{"T", 5000}, {"seed", 1}, {"allow_violations", true}}},
    };
  }
  throw ConfigError(fmt::format("unknown preset '{}' (known: reproduce-paper)", name));
}

void apply_overrides(Json& doc, const std::vector<std::string>& overrides) {
  for (const auto& ov : overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError(fmt::format("override '{}' is not key=value", ov));
    const auto key = ov.substr(0, eq);
    const auto text = ov.substr(eq + 1);
    Json value = Json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;
    Json* node = &doc;
    std::stringstream ss(key);
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(ss, part, '.')) parts.push_back(part);
    for (std::size_t k = 0; k + 1 < parts.size(); ++k) {
      if (!node->is_object()) throw ConfigError(fmt::format("override '{}' descends into a non-object", key));
      node = &(*node)[parts[k]];
      if (node->is_null()) *node = Json::object();
    }
    if (!node->is_object()) throw ConfigError(fmt::format("override '{}' descends into a non-object", key));
    (*node)[parts.back()] = std::move(value);
  }
}

Json resolve(const Json& doc_in) {
  if (!doc_in.is_object()) throw ConfigError("config document must be a JSON object");
  check_keys(doc_in, "", {"preset", "problem", "graph", "kernel", "mirror", "schedules", "run"});
  Json doc = Json::object();
  if (doc_in.contains("preset")) doc = preset(get<std::string>(doc_in, "preset", "config"));
  for (const auto& [key, value] : doc_in.items()) {
    if (key == "preset") continue;
    if (doc.contains(key) && doc[key].is_object() && value.is_object()) {
      for (const auto& [k2, v2] : value.items()) doc[key][k2] = v2;
    } else {
      doc[key] = value;
    }
  }
  Json out;
  out["problem"] = resolve_problem(doc.value("problem", Json::object()));
  const auto agents = out["problem"]["gains"].size();
  out["graph"] = resolve_graph(doc.value("graph", Json{{"preset", "fig1"}}), agents);
  out["kernel"] = resolve_kernel(doc.value("kernel", Json::object()));
  Json mirror = doc.value("mirror", Json::object());
  check_keys(mirror, "mirror", {"name"});
  set_default(mirror, "name", "euclidean");
  (void)mirror::MirrorMap::from_name(get<std::string>(mirror, "name", "mirror"));
  out["mirror"] = mirror;
  out["schedules"] = resolve_schedules(doc.value("schedules", Json::object()));
  out["run"] = resolve_run(doc.value("run", Json::object()));
  return out;
}

graph::GraphSchedule build_graph(const Json& g) {
  try {
    if (g.contains("preset")) {
      return graph::preset(g.at("preset").get<std::string>(), g.value("n", std::size_t{0}));
    }
    const auto n = g.at("n").get<std::size_t>();
    const double l = g.value("l", 0.0);
    std::vector<graph::WeightMatrix> mats;
    for (const auto& rows : g.at("matrices").get<std::vector<std::vector<Vector>>>()) {
      if (rows.size() != n) throw ConfigError(fmt::format("graph matrix has {} rows, expected n = {}", rows.size(), n));
      mats.push_back(graph::WeightMatrix::from_rows(rows, l));
    }
    const auto mode = g.value("mode", std::string("cyclic")) == "explicit" ? graph::ScheduleMode::kExplicit
                                                                            : graph::ScheduleMode::kCyclic;
    return graph::GraphSchedule(std::move(mats), mode, g.value("U", std::size_t{1}));
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("graph: ") + e.what());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("graph: ") + e.what());
  }
}

namespace {

kernels::Kernel build_kernel(const Json& k) {
  try {
    if (k.contains("coefficients")) {
      auto c = k.at("coefficients").get<Vector>();
      while (c.size() > 1 && c.back() == 0.0) c.pop_back();
      const std::size_t order = k.contains("order") ? k.at("order").get<std::size_t>() : std::max<std::size_t>(c.size() - 1, 1);
      return kernels::Kernel::polynomial(k.value("name", std::string("polynomial")), order, std::move(c));
    }
    const auto name = k.at("name").get<std::string>();
    if (name == "legendre") return kernels::legendre_kernel(k.at("order").get<std::size_t>());
    return kernels::example_kernel();
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("kernel: ") + e.what());
  }
}

engine::PowerLaw power_law(const Json& s) {
  engine::PowerLaw p;
  p.scale = s.at("scale").get<double>();
  p.power = s.at("power").get<double>();
  if (s.contains("G")) p.offset = 2.0 * s.at("G").get<double>();
  return p;
}

}  // namespace

engine::RunConfig build(const Json& resolved) {
  const auto& p = resolved.at("problem");
  const auto& r = resolved.at("run");
  const std::optional<std::uint64_t> noise_seed =
      p.at("noise_seed").is_null() ? std::nullopt : std::optional<std::uint64_t>(p.at("noise_seed").get<std::uint64_t>());

  engine::ProblemFactory factory;
  const auto gains = p.at("gains").get<Vector>();
  const auto noise = build_noise(p.at("noise"));
  if (p.at("kind") == "sensor-network") {
    problems::SensorNetworkOptions opts;
    opts.gains = gains;
    opts.z0 = p.at("z0").get<double>();
    opts.radius = p.at("radius").get<double>();
    opts.noise = noise;
    if (!(opts.radius > 0.0)) throw ConfigError("'problem.radius' must be positive");
    factory = [opts, noise_seed](std::uint64_t seed, std::size_t T) -> problems::ProblemPtr {
      return problems::sensor_network_problem(noise_seed.value_or(seed), T, opts);
    };
  } else {
    const auto target = p.at("target").get<Vector>();
    const auto constraint = build_constraint(p.at("constraint"));
    if (constraint.dimension() != target.size()) {
      throw ConfigError("'problem.constraint' dimension does not match 'problem.target'");
    }
    factory = [=](std::uint64_t seed, std::size_t T) -> problems::ProblemPtr {
      return problems::static_least_squares_problem(noise_seed.value_or(seed), T, gains, target, constraint, noise);
    };
  }

  engine::RunConfig cfg{
      .problem = std::move(factory),
      .graph = build_graph(resolved.at("graph")),
      .kernel = build_kernel(resolved.at("kernel")),
      .mirror = mirror::MirrorMap::from_name(resolved.at("mirror").at("name").get<std::string>()),
      .schedules = {power_law(resolved.at("schedules").at("alpha")), power_law(resolved.at("schedules").at("beta")),
                    power_law(resolved.at("schedules").at("gamma"))},
      .horizon = r.at("T").get<std::size_t>(),
      .seed = r.at("seed").get<std::uint64_t>(),
      .oracle_noise = build_noise(r.at("oracle_noise")),
      .per_coordinate_r = r.at("per_coordinate_r").get<bool>(),
      .allow_violations = r.at("allow_violations").get<bool>(),
      .gradient_bound = std::nullopt,
      .initial_states = std::nullopt,
  };
  if (!r.at("gradient_bound").is_null()) cfg.gradient_bound = r.at("gradient_bound").get<double>();
  if (r.at("initial").is_array()) cfg.initial_states = r.at("initial").get<std::vector<Vector>>();
  return cfg;
}

Loaded load(const std::string& text, const std::vector<std::string>& overrides) {
  Json doc = Json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw ConfigError("config is not valid JSON");
  apply_overrides(doc, overrides);
  auto resolved = resolve(doc);
  auto run = build(resolved);
  const auto threads = resolved.at("run").at("threads").get<unsigned>();
  return Loaded{std::move(resolved), std::move(run), threads};
}

Loaded load_file(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream is(path);
  if (!is) throw ConfigError(fmt::format("cannot read config '{}'", path));
  std::stringstream ss;
  ss << is.rdbuf();
  return load(ss.str(), overrides);
}

}  // namespace zomd::config

#pragma once

// Scenario configurations (JSON), the check runner that turns a configuration
// into a report, builtin scenarios and table export.

#include "proxlab/differentiability.hpp"
#include "proxlab/geometry.hpp"
#include "proxlab/projection.hpp"
#include "proxlab/sets.hpp"

#include "json.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace proxlab::scenario {

using Json = nlohmann::ordered_json;

inline constexpr int kConfigVersion = 1;
inline constexpr const char* kArtifactVersion = "1.0.0";

/// Invalid configuration; `field` is a dotted path to the offending entry.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

using Point = std::vector<double>;

struct NormSpec {
  std::string kind = "lp";  // lp, sup, weighted_lp, polyhedral
  double p = 2.0;
  Point weights;
  std::vector<Point> functionals;
  bool operator==(const NormSpec&) const = default;
};

struct FunctionSpec {
  std::string kind;  // quadratic: 0.5 v'Qv + b'v ; lp_power: sum w_i |v_i - c_i|^p
  std::vector<Point> matrix;
  Point linear;
  double p = 2.0;
  Point center;
  Point weights;
  bool operator==(const FunctionSpec&) const = default;
};

struct SetSpec {
  std::string type;  // finite, polytope, segment, ball, circle, ellipse, sublevel, union, truncated_l1_hull
  std::vector<Point> points;
  Point center;
  double radius = 1.0;
  Point axes;
  std::optional<NormSpec> norm;
  std::optional<FunctionSpec> function;
  double level = 0.0;
  Point box_lo, box_hi;
  std::vector<SetSpec> parts;
  int n = 0;
  bool operator==(const SetSpec&) const = default;
};

struct SamplerSpec {
  int count = 0;
  std::uint64_t seed = 0;
  Point lo, hi;
  bool operator==(const SamplerSpec&) const = default;
};

struct ProbeSpec {
  std::vector<Point> points;
  std::optional<SamplerSpec> sampler;
  bool operator==(const ProbeSpec&) const = default;
};

struct Params {
  std::optional<Point> focus;  // point for frechet, exposure, lemma1, theorem2, compactness
  int sequence_length = 64;
  std::optional<Point> continuity_center;
  double continuity_radius = 0.1;
  int continuity_count = 64;
  double continuity_threshold = 10.0;
  int lipschitz_pairs = 1000;
  int convexity_dim = 2;
  Point convexity_epsilons{0.5, 1.0, 1.5};
  int convexity_budget = 64;
  int exposure_budget = 16;
  int direction_budget = 0;  // 0: 200 in dim <= 3, else 1000
  std::vector<int> family_sizes;
  double grid_step = 1e-3;
  int max_probe_reports = 10;
  bool operator==(const Params&) const = default;
};

struct Tolerances {
  double solver = 1e-10;
  double argmin_eps = 1e-9;
  double lipschitz_slack = 1e-6;
  double crossval = 1e-6;
  double lemma1 = 1e-5;
  bool operator==(const Tolerances&) const = default;
};

struct ScenarioConfig {
  int version = kConfigVersion;
  std::string name;
  std::string description;
  std::uint64_t seed = 0;
  NormSpec norm;
  SetSpec set;
  ProbeSpec probes;
  std::vector<std::string> checks;
  Params params;
  Tolerances tolerances;
  std::vector<std::string> expected_witnesses;
  std::string output;
  bool operator==(const ScenarioConfig&) const = default;
};

/// Checks in execution order.
inline const std::vector<std::string>& check_order() {
  static const std::vector<std::string> order{"distance", "best_approximations", "chebyshev", "convexity",
                                              "frechet",  "exposure",            "lemma1",    "theorem2",
                                              "lipschitz", "continuity",         "compactness", "crossval",
                                              "family"};
  return order;
}

inline std::vector<std::string> prerequisites(const std::string& check) {
  if (check == "best_approximations") return {"distance"};
  if (check == "chebyshev") return {"best_approximations"};
  if (check == "lemma1") return {"best_approximations"};
  if (check == "exposure") return {"frechet"};
  if (check == "theorem2") return {"frechet", "exposure"};
  return {};
}

// ---------------------------------------------------------------------------
// JSON reading with field paths in diagnostics.

namespace json_detail {

class Reader {
 public:
  Reader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }
  const Json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  double num(const std::string& key, double def) { return has(key) ? to_num(raw(key), at(key)) : def; }
  double num_req(const std::string& key) {
    if (!has(key)) throw ConfigError(at(key), "missing");
    return to_num(raw(key), at(key));
  }
  int integer(const std::string& key, int def) {
    if (!has(key)) return def;
    const Json& v = raw(key);
    if (!v.is_number_integer()) throw ConfigError(at(key), "expected an integer");
    return v.get<int>();
  }
  std::uint64_t u64(const std::string& key, std::uint64_t def) {
    if (!has(key)) return def;
    const Json& v = raw(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
      throw ConfigError(at(key), "expected a nonnegative integer");
    return v.get<std::uint64_t>();
  }
  bool boolean(const std::string& key, bool def) {
    if (!has(key)) return def;
    const Json& v = raw(key);
    if (!v.is_boolean()) throw ConfigError(at(key), "expected true or false");
    return v.get<bool>();
  }
  std::string str(const std::string& key, const std::string& def) {
    if (!has(key)) return def;
    const Json& v = raw(key);
    if (!v.is_string()) throw ConfigError(at(key), "expected a string");
    return v.get<std::string>();
  }
  Point point(const std::string& key) { return has(key) ? to_point(raw(key), at(key)) : Point{}; }
  std::vector<Point> points(const std::string& key) {
    std::vector<Point> out;
    if (!has(key)) return out;
    const Json& v = raw(key);
    if (!v.is_array()) throw ConfigError(at(key), "expected an array of points");
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(to_point(v[i], at(key) + "[" + std::to_string(i) + "]"));
    return out;
  }
  std::vector<std::string> strings(const std::string& key) {
    std::vector<std::string> out;
    if (!has(key)) return out;
    const Json& v = raw(key);
    if (!v.is_array()) throw ConfigError(at(key), "expected an array of strings");
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_string()) throw ConfigError(at(key) + "[" + std::to_string(i) + "]", "expected a string");
      out.push_back(v[i].get<std::string>());
    }
    return out;
  }
  std::vector<int> ints(const std::string& key) {
    std::vector<int> out;
    if (!has(key)) return out;
    const Json& v = raw(key);
    if (!v.is_array()) throw ConfigError(at(key), "expected an array of integers");
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number_integer()) throw ConfigError(at(key) + "[" + std::to_string(i) + "]", "expected an integer");
      out.push_back(v[i].get<int>());
    }
    return out;
  }

  /// Rejects keys that were never asked for.
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(at(it.key()), "unknown field");
  }

  static double to_num(const Json& v, const std::string& path) {
    if (!v.is_number()) throw ConfigError(path, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(path, "expected a finite number");
    return d;
  }
  static Point to_point(const Json& v, const std::string& path) {
    if (!v.is_array()) throw ConfigError(path, "expected an array of numbers");
    Point p;
    for (std::size_t i = 0; i < v.size(); ++i) p.push_back(to_num(v[i], path + "[" + std::to_string(i) + "]"));
    return p;
  }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

}  // namespace json_detail

// ---------------------------------------------------------------------------
// Parsing

inline NormSpec parse_norm(const Json& j, const std::string& path) {
  json_detail::Reader r(j, path);
  NormSpec n;
  n.kind = r.str("kind", "");
  if (n.kind == "lp") {
    n.p = r.num_req("p");
    if (n.p < 1.0) throw ConfigError(r.at("p"), "p must be at least 1");
  } else if (n.kind == "weighted_lp") {
    n.p = r.num_req("p");
    n.weights = r.point("weights");
    if (n.weights.empty()) throw ConfigError(r.at("weights"), "missing");
  } else if (n.kind == "polyhedral") {
    n.functionals = r.points("functionals");
    if (n.functionals.empty()) throw ConfigError(r.at("functionals"), "missing");
  } else if (n.kind != "sup") {
    throw ConfigError(r.at("kind"), "unknown norm kind '" + n.kind + "'");
  }
  r.finish();
  return n;
}

inline FunctionSpec parse_function(const Json& j, const std::string& path) {
  json_detail::Reader r(j, path);
  FunctionSpec f;
  f.kind = r.str("kind", "");
  if (f.kind == "quadratic") {
    f.matrix = r.points("matrix");
    f.linear = r.point("linear");
    if (f.matrix.empty()) throw ConfigError(r.at("matrix"), "missing");
  } else if (f.kind == "lp_power") {
    f.p = r.num_req("p");
    if (f.p < 1.0) throw ConfigError(r.at("p"), "p must be at least 1");
    f.center = r.point("center");
    f.weights = r.point("weights");
  } else {
    throw ConfigError(r.at("kind"), "unknown function kind '" + f.kind + "'");
  }
  r.finish();
  return f;
}

inline SetSpec parse_set(const Json& j, const std::string& path) {
  json_detail::Reader r(j, path);
  SetSpec s;
  s.type = r.str("type", "");
  s.points = r.points("points");
  s.center = r.point("center");
  s.radius = r.num("radius", 1.0);
  s.axes = r.point("axes");
  if (r.has("norm")) s.norm = parse_norm(r.raw("norm"), r.at("norm"));
  if (r.has("function")) s.function = parse_function(r.raw("function"), r.at("function"));
  s.level = r.num("level", 0.0);
  s.box_lo = r.point("box_lo");
  s.box_hi = r.point("box_hi");
  if (r.has("parts")) {
    const Json& parts = r.raw("parts");
    if (!parts.is_array()) throw ConfigError(r.at("parts"), "expected an array of sets");
    for (std::size_t i = 0; i < parts.size(); ++i)
      s.parts.push_back(parse_set(parts[i], r.at("parts") + "[" + std::to_string(i) + "]"));
  }
  s.n = r.integer("n", 0);
  r.finish();

  static const std::set<std::string> types{"finite", "polytope", "segment", "ball", "circle", "ellipse",
                                           "sublevel", "union", "truncated_l1_hull"};
  if (!types.count(s.type)) throw ConfigError(r.at("type"), "unknown set type '" + s.type + "'");
  if ((s.type == "finite" || s.type == "polytope") && s.points.empty()) throw ConfigError(r.at("points"), "missing");
  if (s.type == "segment" && s.points.size() != 2) throw ConfigError(r.at("points"), "a segment needs two points");
  if ((s.type == "ball" || s.type == "circle" || s.type == "ellipse") && s.center.empty())
    throw ConfigError(r.at("center"), "missing");
  if (s.type == "ellipse" && s.axes.size() != 2) throw ConfigError(r.at("axes"), "an ellipse needs two semi-axes");
  if (s.type == "sublevel") {
    if (!s.function) throw ConfigError(r.at("function"), "missing");
    if (s.box_lo.empty() || s.box_hi.empty()) throw ConfigError(r.at("box_lo"), "a sublevel set needs a bounding box");
  }
  if (s.type == "union" && s.parts.empty()) throw ConfigError(r.at("parts"), "missing");
  if (s.type == "truncated_l1_hull" && s.n < 1) throw ConfigError(r.at("n"), "must be a positive integer");
  return s;
}

inline ScenarioConfig parse_config(const Json& j) {
  json_detail::Reader r(j, "");
  ScenarioConfig c;
  if (!r.has("version")) throw ConfigError("version", "missing");
  c.version = r.integer("version", 0);
  if (c.version != kConfigVersion) throw ConfigError("version", "unsupported version " + std::to_string(c.version));
  c.name = r.str("name", "");
  if (c.name.empty()) throw ConfigError("name", "missing");
  c.description = r.str("description", "");
  c.seed = r.u64("seed", 0);
  if (!r.has("norm")) throw ConfigError("norm", "missing");
  c.norm = parse_norm(r.raw("norm"), "norm");
  if (!r.has("set")) throw ConfigError("set", "missing");
  c.set = parse_set(r.raw("set"), "set");
  if (r.has("probes")) {
    json_detail::Reader pr(r.raw("probes"), "probes");
    c.probes.points = pr.points("points");
    if (pr.has("sampler")) {
      json_detail::Reader sr(pr.raw("sampler"), "probes.sampler");
      SamplerSpec s;
      s.count = sr.integer("count", 0);
      s.seed = sr.u64("seed", 0);
      s.lo = sr.point("lo");
      s.hi = sr.point("hi");
      sr.finish();
      if (s.count < 1) throw ConfigError("probes.sampler.count", "must be positive");
      if (s.lo.empty() || s.lo.size() != s.hi.size()) throw ConfigError("probes.sampler.lo", "box corners must have equal dimension");
      c.probes.sampler = s;
    }
    pr.finish();
  }
  c.checks = r.strings("checks");
  for (std::size_t i = 0; i < c.checks.size(); ++i) {
    const auto& order = check_order();
    if (std::find(order.begin(), order.end(), c.checks[i]) == order.end())
      throw ConfigError("checks[" + std::to_string(i) + "]", "unknown check '" + c.checks[i] + "'");
  }
  if (r.has("params")) {
    json_detail::Reader pr(r.raw("params"), "params");
    Params& p = c.params;
    if (pr.has("focus")) p.focus = pr.point("focus");
    p.sequence_length = pr.integer("sequence_length", p.sequence_length);
    if (pr.has("continuity_center")) p.continuity_center = pr.point("continuity_center");
    p.continuity_radius = pr.num("continuity_radius", p.continuity_radius);
    p.continuity_count = pr.integer("continuity_count", p.continuity_count);
    p.continuity_threshold = pr.num("continuity_threshold", p.continuity_threshold);
    p.lipschitz_pairs = pr.integer("lipschitz_pairs", p.lipschitz_pairs);
    p.convexity_dim = pr.integer("convexity_dim", p.convexity_dim);
    if (pr.has("convexity_epsilons")) p.convexity_epsilons = pr.point("convexity_epsilons");
    p.convexity_budget = pr.integer("convexity_budget", p.convexity_budget);
    p.exposure_budget = pr.integer("exposure_budget", p.exposure_budget);
    p.direction_budget = pr.integer("direction_budget", p.direction_budget);
    p.family_sizes = pr.ints("family_sizes");
    p.grid_step = pr.num("grid_step", p.grid_step);
    p.max_probe_reports = pr.integer("max_probe_reports", p.max_probe_reports);
    pr.finish();
    if (p.sequence_length < 2) throw ConfigError("params.sequence_length", "must be at least 2");
    if (!(p.continuity_radius > 0)) throw ConfigError("params.continuity_radius", "must be positive");
    if (p.continuity_count < 2) throw ConfigError("params.continuity_count", "must be at least 2");
    if (p.lipschitz_pairs < 1) throw ConfigError("params.lipschitz_pairs", "must be positive");
    if (!(p.grid_step > 0)) throw ConfigError("params.grid_step", "must be positive");
    for (int s : p.family_sizes)
      if (s < 1) throw ConfigError("params.family_sizes", "sizes must be positive");
  }
  if (r.has("tolerances")) {
    json_detail::Reader tr(r.raw("tolerances"), "tolerances");
    Tolerances& t = c.tolerances;
    t.solver = tr.num("solver", t.solver);
    t.argmin_eps = tr.num("argmin_eps", t.argmin_eps);
    t.lipschitz_slack = tr.num("lipschitz_slack", t.lipschitz_slack);
    t.crossval = tr.num("crossval", t.crossval);
    t.lemma1 = tr.num("lemma1", t.lemma1);
    tr.finish();
    if (!(t.solver > 0)) throw ConfigError("tolerances.solver", "must be positive");
    if (!(t.argmin_eps > t.solver)) throw ConfigError("tolerances.argmin_eps", "must exceed the solver tolerance");
  }
  c.expected_witnesses = r.strings("expected_witnesses");
  c.output = r.str("output", "");
  r.finish();
  return c;
}

inline ScenarioConfig parse_config_text(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("<root>", std::string("malformed JSON: ") + e.what());
  }
  return parse_config(j);
}

// ---------------------------------------------------------------------------
// Serialization (inverse of parsing; default-valued fields are omitted)

inline Json to_json(const NormSpec& n) {
  Json j;
  j["kind"] = n.kind;
  if (n.kind == "lp" || n.kind == "weighted_lp") j["p"] = n.p;
  if (!n.weights.empty()) j["weights"] = n.weights;
  if (!n.functionals.empty()) j["functionals"] = n.functionals;
  return j;
}

inline Json to_json(const FunctionSpec& f) {
  Json j;
  j["kind"] = f.kind;
  if (!f.matrix.empty()) j["matrix"] = f.matrix;
  if (!f.linear.empty()) j["linear"] = f.linear;
  if (f.kind == "lp_power") j["p"] = f.p;
  if (!f.center.empty()) j["center"] = f.center;
  if (!f.weights.empty()) j["weights"] = f.weights;
  return j;
}

inline Json to_json(const SetSpec& s) {
  Json j;
  j["type"] = s.type;
  if (!s.points.empty()) j["points"] = s.points;
  if (!s.center.empty()) j["center"] = s.center;
  if (s.radius != 1.0) j["radius"] = s.radius;
  if (!s.axes.empty()) j["axes"] = s.axes;
  if (s.norm) j["norm"] = to_json(*s.norm);
  if (s.function) j["function"] = to_json(*s.function);
  if (s.level != 0.0) j["level"] = s.level;
  if (!s.box_lo.empty()) j["box_lo"] = s.box_lo;
  if (!s.box_hi.empty()) j["box_hi"] = s.box_hi;
  if (!s.parts.empty()) {
    Json parts = Json::array();
    for (const auto& p : s.parts) parts.push_back(to_json(p));
    j["parts"] = parts;
  }
  if (s.n != 0) j["n"] = s.n;
  return j;
}

inline Json to_json(const ScenarioConfig& c) {
  Json j;
  j["version"] = c.version;
  j["name"] = c.name;
  if (!c.description.empty()) j["description"] = c.description;
  if (c.seed != 0) j["seed"] = c.seed;
  j["norm"] = to_json(c.norm);
  j["set"] = to_json(c.set);
  if (!c.probes.points.empty() || c.probes.sampler) {
    Json p;
    if (!c.probes.points.empty()) p["points"] = c.probes.points;
    if (c.probes.sampler) {
      const auto& s = *c.probes.sampler;
      p["sampler"] = Json{{"count", s.count}, {"seed", s.seed}, {"lo", s.lo}, {"hi", s.hi}};
    }
    j["probes"] = p;
  }
  if (!c.checks.empty()) j["checks"] = c.checks;
  const Params d{};
  const Params& p = c.params;
  Json pj = Json::object();
  if (p.focus) pj["focus"] = *p.focus;
  if (p.sequence_length != d.sequence_length) pj["sequence_length"] = p.sequence_length;
  if (p.continuity_center) pj["continuity_center"] = *p.continuity_center;
  if (p.continuity_radius != d.continuity_radius) pj["continuity_radius"] = p.continuity_radius;
  if (p.continuity_count != d.continuity_count) pj["continuity_count"] = p.continuity_count;
  if (p.continuity_threshold != d.continuity_threshold) pj["continuity_threshold"] = p.continuity_threshold;
  if (p.lipschitz_pairs != d.lipschitz_pairs) pj["lipschitz_pairs"] = p.lipschitz_pairs;
  if (p.convexity_dim != d.convexity_dim) pj["convexity_dim"] = p.convexity_dim;
  if (p.convexity_epsilons != d.convexity_epsilons) pj["convexity_epsilons"] = p.convexity_epsilons;
  if (p.convexity_budget != d.convexity_budget) pj["convexity_budget"] = p.convexity_budget;
  if (p.exposure_budget != d.exposure_budget) pj["exposure_budget"] = p.exposure_budget;
  if (p.direction_budget != d.direction_budget) pj["direction_budget"] = p.direction_budget;
  if (!p.family_sizes.empty()) pj["family_sizes"] = p.family_sizes;
  if (p.grid_step != d.grid_step) pj["grid_step"] = p.grid_step;
  if (p.max_probe_reports != d.max_probe_reports) pj["max_probe_reports"] = p.max_probe_reports;
  if (!pj.empty()) j["params"] = pj;
  const Tolerances td{};
  const Tolerances& t = c.tolerances;
  Json tj = Json::object();
  if (t.solver != td.solver) tj["solver"] = t.solver;
  if (t.argmin_eps != td.argmin_eps) tj["argmin_eps"] = t.argmin_eps;
  if (t.lipschitz_slack != td.lipschitz_slack) tj["lipschitz_slack"] = t.lipschitz_slack;
  if (t.crossval != td.crossval) tj["crossval"] = t.crossval;
  if (t.lemma1 != td.lemma1) tj["lemma1"] = t.lemma1;
  if (!tj.empty()) j["tolerances"] = tj;
  if (!c.expected_witnesses.empty()) j["expected_witnesses"] = c.expected_witnesses;
  if (!c.output.empty()) j["output"] = c.output;
  return j;
}

// ---------------------------------------------------------------------------
// Building library objects from specs

inline Vector vec(const Point& p) { return to_vector(p); }

inline Json vjson(const Vector& v) { return to_std(v); }

inline Norm build_norm(const NormSpec& n, const std::string& path = "norm") {
  try {
    if (n.kind == "lp") return Norm::lp(n.p);
    if (n.kind == "sup") return Norm::sup();
    if (n.kind == "weighted_lp") return Norm::weighted_lp(n.p, vec(n.weights));
    if (n.kind == "polyhedral") {
      Matrix g(static_cast<Index>(n.functionals.size()), static_cast<Index>(n.functionals.front().size()));
      for (std::size_t i = 0; i < n.functionals.size(); ++i) {
        if (n.functionals[i].size() != n.functionals.front().size())
          throw ConfigError(path + ".functionals[" + std::to_string(i) + "]", "inconsistent dimension");
        g.row(static_cast<Index>(i)) = vec(n.functionals[i]).transpose();
      }
      return Norm::polyhedral(std::move(g));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(path, e.what());
  }
  throw ConfigError(path + ".kind", "unknown norm kind '" + n.kind + "'");
}

inline std::function<double(const Vector&)> build_function(const FunctionSpec& f, Index dim, const std::string& path) {
  if (f.kind == "quadratic") {
    if (static_cast<Index>(f.matrix.size()) != dim) throw ConfigError(path + ".matrix", "must be square in the box dimension");
    Matrix q(dim, dim);
    for (Index i = 0; i < dim; ++i) {
      if (static_cast<Index>(f.matrix[static_cast<std::size_t>(i)].size()) != dim)
        throw ConfigError(path + ".matrix", "must be square in the box dimension");
      q.row(i) = vec(f.matrix[static_cast<std::size_t>(i)]).transpose();
    }
    const Vector b = f.linear.empty() ? Vector::Zero(dim) : vec(f.linear);
    if (b.size() != dim) throw ConfigError(path + ".linear", "dimension mismatch");
    return [q, b](const Vector& v) { return 0.5 * v.dot(q * v) + b.dot(v); };
  }
  const Vector c = f.center.empty() ? Vector::Zero(dim) : vec(f.center);
  const Vector w = f.weights.empty() ? Vector::Ones(dim) : vec(f.weights);
  if (c.size() != dim) throw ConfigError(path + ".center", "dimension mismatch");
  if (w.size() != dim || w.minCoeff() <= 0) throw ConfigError(path + ".weights", "need one positive weight per coordinate");
  const double p = f.p;
  return [c, w, p](const Vector& v) { return (w.array() * (v - c).array().abs().pow(p)).sum(); };
}

inline ClosedSet build_set(const SetSpec& s, std::uint64_t seed = 0, const std::string& path = "set") {
  auto pts = [&]() {
    std::vector<Vector> out;
    for (const auto& p : s.points) out.push_back(vec(p));
    return out;
  };
  try {
    if (s.type == "finite") return ClosedSet::finite(pts());
    if (s.type == "polytope") return ClosedSet::polytope(pts());
    if (s.type == "segment") return ClosedSet::segment(vec(s.points[0]), vec(s.points[1]));
    if (s.type == "ball") return ClosedSet::ball(vec(s.center), s.radius, s.norm ? build_norm(*s.norm, path + ".norm") : Norm::l2());
    if (s.type == "circle") return ClosedSet::circle(vec(s.center), s.radius);
    if (s.type == "ellipse") {
      const Vector c = vec(s.center);
      if (c.size() != 2) throw ConfigError(path + ".center", "an ellipse lives in the plane");
      const double a = s.axes[0], b = s.axes[1];
      if (!(a > 0 && b > 0)) throw ConfigError(path + ".axes", "semi-axes must be positive");
      return ClosedSet::curve(
          [c, a, b](double t) {
            Vector p(2);
            p << c(0) + a * std::cos(t), c(1) + b * std::sin(t);
            return p;
          },
          0.0, 6.283185307179586, true);
    }
    if (s.type == "sublevel") {
      const Index dim = static_cast<Index>(s.box_lo.size());
      if (static_cast<Index>(s.box_hi.size()) != dim) throw ConfigError(path + ".box_hi", "dimension mismatch");
      return ClosedSet::sublevel(build_function(*s.function, dim, path + ".function"), s.level, vec(s.box_lo),
                                 vec(s.box_hi), seed);
    }
    if (s.type == "union") {
      std::vector<ClosedSet> parts;
      for (std::size_t i = 0; i < s.parts.size(); ++i)
        parts.push_back(build_set(s.parts[i], derive_seed(seed, i), path + ".parts[" + std::to_string(i) + "]"));
      return ClosedSet::union_of(std::move(parts));
    }
    if (s.type == "truncated_l1_hull") return ClosedSet::truncated_l1_hull(s.n);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(path, e.what());
  }
  throw ConfigError(path + ".type", "unknown set type '" + s.type + "'");
}

inline std::vector<Vector> build_probes(const ProbeSpec& p, Index dim) {
  std::vector<Vector> out;
  for (std::size_t i = 0; i < p.points.size(); ++i) {
    if (static_cast<Index>(p.points[i].size()) != dim)
      throw ConfigError("probes.points[" + std::to_string(i) + "]", "dimension does not match the set");
    out.push_back(vec(p.points[i]));
  }
  if (p.sampler) {
    const auto& s = *p.sampler;
    if (static_cast<Index>(s.lo.size()) != dim) throw ConfigError("probes.sampler.lo", "dimension does not match the set");
    Rng rng(derive_seed(s.seed, "probes"));
    for (int i = 0; i < s.count; ++i) out.push_back(rng.in_box(vec(s.lo), vec(s.hi)));
  }
  return out;
}

/// Adds missing prerequisites and sorts into execution order. Returns the
/// inserted names through `inserted`.
inline std::vector<std::string> resolve_checks(const std::vector<std::string>& requested,
                                               std::vector<std::string>* inserted = nullptr) {
  std::set<std::string> want(requested.begin(), requested.end());
  bool grew = true;
  while (grew) {
    grew = false;
    for (const auto& c : std::vector<std::string>(want.begin(), want.end()))
      for (const auto& p : prerequisites(c))
        if (want.insert(p).second) {
          grew = true;
          if (inserted) inserted->push_back(p);
        }
  }
  std::vector<std::string> out;
  for (const auto& c : check_order())
    if (want.count(c)) out.push_back(c);
  if (inserted) std::sort(inserted->begin(), inserted->end());
  return out;
}

// ---------------------------------------------------------------------------
// Tables

struct Table {
  std::vector<std::pair<std::string, std::string>> columns;  // name, description
  std::vector<Json> rows;                                     // each an array

  Json to_json() const {
    Json cols = Json::array(), doc = Json::object(), rs = Json::array();
    for (const auto& [n, d] : columns) {
      cols.push_back(n);
      doc[n] = d;
    }
    for (const auto& r : rows) rs.push_back(r);
    return Json{{"columns", cols}, {"doc", doc}, {"rows", rs}};
  }
};

// ---------------------------------------------------------------------------
// Running

struct RunOptions {
  std::optional<std::uint64_t> seed;
  double budget_scale = 1.0;
  std::optional<double> tolerance;
};

struct CheckOutcome {
  std::string status = "pass";  // pass, witness, fail, skipped, error
  Json result = Json::object();
  std::vector<std::pair<std::string, Table>> tables;
};

namespace run_detail {

inline int scaled(int budget, double scale) { return std::max(1, static_cast<int>(std::lround(budget * scale))); }

struct Context {
  const ScenarioConfig& cfg;
  Norm norm;
  ClosedSet set;
  std::vector<Vector> probes;
  std::optional<Vector> focus;
  SolverConfig solver;
  double budget_scale = 1.0;
  std::uint64_t seed = 0;
  std::optional<DualVector> gradient;  // from the frechet check
  std::optional<ApproxResult> focus_projection;
};

inline std::vector<Vector> outside_probes(Context& c, std::size_t cap) {
  std::vector<Vector> out;
  for (const auto& p : c.probes) {
    if (out.size() >= cap) break;
    if (!contains(c.set, p, 1e-9, c.norm)) out.push_back(p);
  }
  return out;
}

inline Json approx_json(const ApproxResult& r) {
  Json mins = Json::array();
  for (std::size_t i = 0; i < r.minimizers.size() && i < 8; ++i) mins.push_back(vjson(r.minimizers[i]));
  return Json{{"distance", r.distance},
              {"minimizers", mins},
              {"cluster_count", r.cluster_count},
              {"cluster_diameter", r.cluster_diameter},
              {"singleton", r.singleton()},
              {"attained", r.attained},
              {"converged", r.converged},
              {"iterations", r.iterations},
              {"residual", r.residual},
              {"method", r.method}};
}

inline CheckOutcome check_distance(Context& c) {
  CheckOutcome o;
  Table t;
  t.columns = {{"probe", "probe index"},
               {"distance", "d_K(x) in the scenario norm"},
               {"attained", "1 when a member of K attains the value"},
               {"method", "solver used"}};
  Json per = Json::array();
  for (std::size_t i = 0; i < c.probes.size(); ++i) {
    const auto r = distance(c.probes[i], c.set, c.norm, c.solver);
    per.push_back(Json{{"probe", vjson(c.probes[i])}, {"distance", r.distance}, {"attained", r.attained},
                       {"converged", r.converged}, {"method", r.method}});
    t.rows.push_back(Json::array({i, r.distance, r.attained ? 1 : 0, r.method}));
    if (!r.attained) o.status = "fail";
  }
  o.result["probes"] = per;
  o.tables.emplace_back("distance", std::move(t));
  return o;
}

inline CheckOutcome check_best_approximations(Context& c) {
  CheckOutcome o;
  Table t;
  t.columns = {{"probe", "probe index among reported probes"},
               {"distance", "d_K(x)"},
               {"cluster_count", "connected clusters of eps-minimizers"},
               {"cluster_diameter", "max pairwise distance among eps-minimizers"},
               {"singleton", "1 when the diameter is within the uniqueness tolerance"}};
  Json per = Json::array();
  const auto pts = outside_probes(c, static_cast<std::size_t>(c.cfg.params.max_probe_reports));
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto r = best_approximations(pts[i], c.set, c.norm, c.cfg.tolerances.argmin_eps, c.solver);
    Json j = approx_json(r);
    j["probe"] = vjson(pts[i]);
    per.push_back(j);
    t.rows.push_back(Json::array({i, r.distance, r.cluster_count, r.cluster_diameter, r.singleton() ? 1 : 0}));
  }
  o.result["probes"] = per;
  o.tables.emplace_back("best_approximations", std::move(t));
  return o;
}

inline CheckOutcome check_chebyshev(Context& c) {
  CheckOutcome o;
  const auto rep = chebyshev_verdict(c.set, c.norm, c.probes, c.solver, c.cfg.tolerances.argmin_eps);
  o.result["verdict"] = to_string(rep.verdict);
  o.result["probes_used"] = rep.probes.size();
  o.result["probes_filtered"] = rep.filtered;
  if (rep.witness) {
    o.status = "witness";
    o.result["witness"] = vjson(*rep.witness);
    for (const auto& p : rep.probes)
      if (p.point == *rep.witness) {
        o.result["witness_distance"] = p.distance;
        o.result["witness_cluster_diameter"] = p.cluster_diameter;
        o.result["witness_cluster_count"] = p.cluster_count;
        break;
      }
  }
  int singletons = 0;
  double worst = 0.0;
  for (const auto& p : rep.probes) {
    singletons += p.singleton ? 1 : 0;
    worst = std::max(worst, p.cluster_diameter);
  }
  o.result["singleton_probes"] = singletons;
  o.result["max_cluster_diameter"] = worst;
  Table t;
  t.columns = {{"probe", "probe index after filtering"},
               {"distance", "d_K(x)"},
               {"cluster_count", "connected clusters of eps-minimizers"},
               {"cluster_diameter", "max pairwise distance among eps-minimizers"},
               {"singleton", "1 when the projection is numerically a single point"}};
  for (std::size_t i = 0; i < rep.probes.size(); ++i) {
    const auto& p = rep.probes[i];
    t.rows.push_back(Json::array({i, p.distance, p.cluster_count, p.cluster_diameter, p.singleton ? 1 : 0}));
  }
  o.tables.emplace_back("chebyshev", std::move(t));
  return o;
}

inline CheckOutcome check_convexity(Context& c) {
  CheckOutcome o;
  const auto& p = c.cfg.params;
  const Index dim = c.norm.dimension().value_or(static_cast<Index>(p.convexity_dim));
  const int budget = scaled(p.convexity_budget, c.budget_scale);
  const auto v = strict_convexity_probe(c.norm, dim, derive_seed(c.seed, "strict"), budget);
  o.result["dim"] = dim;
  o.result["budget"] = budget;
  o.result["strict_convexity_witness"] = v.witness_found;
  if (v.witness_found) {
    o.status = "witness";
    o.result["witness_x"] = vjson(v.x);
    o.result["witness_y"] = vjson(v.y);
    o.result["witness_midpoint_norm"] = v.midpoint_norm;
    o.result["witness_separation"] = v.separation;
  }
  Table t;
  t.columns = {{"epsilon", "separation of the unit pair"},
               {"delta_estimate", "1 - max midpoint norm over sampled pairs (upper bound on the modulus)"},
               {"samples", "pairs examined"}};
  Json mods = Json::array();
  for (double eps : p.convexity_epsilons) {
    const auto r = modulus_of_convexity(c.norm, dim, eps, budget, derive_seed(c.seed, "modulus"));
    mods.push_back(Json{{"epsilon", eps}, {"delta_estimate", r.delta_estimate}, {"samples", r.sample_count}});
    t.rows.push_back(Json::array({eps, r.delta_estimate, r.sample_count}));
  }
  o.result["modulus"] = mods;
  o.tables.emplace_back("convexity", std::move(t));
  return o;
}

inline CheckOutcome check_frechet(Context& c) {
  CheckOutcome o;
  if (!c.focus) {
    o.status = "skipped";
    o.result["reason"] = "no point outside the set";
    return o;
  }
  int budget = c.cfg.params.direction_budget > 0 ? c.cfg.params.direction_budget
                                                 : default_direction_budget(c.focus->size());
  budget = scaled(budget, c.budget_scale);
  o.result["point"] = vjson(*c.focus);
  o.result["direction_budget"] = budget;
  try {
    const auto v = frechet_check_dK(*c.focus, c.set, c.norm, {1e-1, 1e-2, 1e-3}, budget, derive_seed(c.seed, "directions"),
                                    c.solver);
    c.gradient = v.gradient;
    o.result["gradient"] = vjson(v.gradient.coords);
    o.result["uniform"] = v.uniform;
    o.result["stability_span"] = v.stability_span;
    o.result["worst_direction"] = vjson(v.worst_direction);
    Table t;
    t.columns = {{"epsilon", "tolerance in the Frechet inequality"},
                 {"delta", "largest sampled radius below which every direction satisfies it"},
                 {"worst_residual", "max |d(x+y)-d(x)-<g,y>|/|y| at radii up to delta"}};
    for (std::size_t i = 0; i < v.epsilon_grid.size(); ++i)
      t.rows.push_back(Json::array({v.epsilon_grid[i], v.delta[i], v.worst_residual[i]}));
    o.tables.emplace_back("frechet", std::move(t));
    if (!v.uniform) o.status = "witness";
  } catch (const NonDifferentiablePoint& e) {
    o.status = "witness";
    o.result["uniform"] = false;
    o.result["nondifferentiable"] = e.what();
    o.result["worst_direction"] = vjson(e.direction());
  }
  return o;
}

inline const ApproxResult& focus_projection(Context& c) {
  if (!c.focus_projection)
    c.focus_projection = best_approximations(*c.focus, c.set, c.norm, c.cfg.tolerances.argmin_eps, c.solver);
  return *c.focus_projection;
}

inline CheckOutcome check_exposure(Context& c) {
  CheckOutcome o;
  if (!c.focus || !c.gradient) {
    o.status = "skipped";
    o.result["reason"] = "no derivative of the distance function at the focus point";
    return o;
  }
  const auto& pr = focus_projection(c);
  const Vector y = pr.minimizers.front();
  const Vector u = (*c.focus - y) / c.norm(*c.focus - y);
  const int budget = scaled(c.cfg.params.exposure_budget, c.budget_scale);
  const auto v = strongly_exposes_check(c.norm, *c.gradient, u, default_eta_schedule(), budget, derive_seed(c.seed, "exposure"));
  o.result["functional"] = vjson(c.gradient->coords);
  o.result["point"] = vjson(u);
  o.result["budget"] = budget;
  o.result["exposes"] = v.exposes;
  o.result["lower_bound"] = v.lower_bound;
  if (!v.exposes) {
    o.status = "witness";
    Json seq = Json::array();
    for (const auto& z : v.maximizers) seq.push_back(vjson(z));
    o.result["witness_sequence"] = seq;
  }
  Table t;
  t.columns = {{"eta", "slack in <f,z> >= <f,x> - eta"}, {"max_deviation", "largest |z - x| found on the unit ball"}};
  for (std::size_t i = 0; i < v.etas.size(); ++i) t.rows.push_back(Json::array({v.etas[i], v.max_deviation[i]}));
  o.tables.emplace_back("exposure", std::move(t));
  return o;
}

inline CheckOutcome check_lemma1(Context& c) {
  CheckOutcome o;
  std::vector<Vector> pts;
  if (c.focus) pts.push_back(*c.focus);
  for (auto& p : outside_probes(c, static_cast<std::size_t>(c.cfg.params.max_probe_reports)))
    if (!c.focus || p != *c.focus) pts.push_back(p);
  Table t;
  t.columns = {{"probe", "point index (0 is the focus point when given)"},
               {"minimizer", "minimizer index"},
               {"residual", "|<d'_K(x), (x-y)/|x-y|> - 1|"},
               {"threshold", "pass threshold 1e-5 + 10 * stability span"}};
  Json per = Json::array();
  double worst = 0.0;
  int nondiff = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto r = lemma1_check(pts[i], c.set, c.norm, c.solver);
    Json j{{"point", vjson(pts[i])}, {"differentiable", r.differentiable}};
    if (!r.differentiable) {
      ++nondiff;
      j["note"] = r.note;
    } else {
      j["gradient"] = vjson(r.gradient.coords);
      j["residuals"] = r.residuals;
      j["pass"] = r.pass;
      for (std::size_t m = 0; m < r.residuals.size(); ++m) {
        t.rows.push_back(Json::array({i, m, r.residuals[m], r.threshold}));
        worst = std::max(worst, r.residuals[m]);
      }
      if (!r.pass) o.status = "fail";
    }
    per.push_back(j);
  }
  o.result["points"] = per;
  o.result["max_residual"] = worst;
  o.result["nondifferentiable_points"] = nondiff;
  o.tables.emplace_back("lemma1", std::move(t));
  return o;
}

inline CheckOutcome check_theorem2(Context& c) {
  CheckOutcome o;
  if (!c.focus) {
    o.status = "skipped";
    o.result["reason"] = "no point outside the set";
    return o;
  }
  SolverConfig s = c.solver;
  s.seed = derive_seed(c.seed, "theorem2");
  const auto rep = theorem2_convergence_experiment(
      *c.focus, c.set, c.norm,
      {SequenceStrategy::SolverIterates, SequenceStrategy::VertexSweep, SequenceStrategy::RandomizedDescent}, s,
      c.cfg.params.sequence_length, scaled(c.cfg.params.exposure_budget, c.budget_scale));
  o.result["point"] = vjson(*c.focus);
  o.result["distance"] = rep.distance;
  o.result["frechet_uniform"] = rep.frechet_uniform;
  if (!rep.frechet_note.empty()) o.result["frechet_note"] = rep.frechet_note;
  o.result["exposure_ran"] = rep.exposure_ran;
  o.result["exposes"] = rep.exposes;
  o.result["hypotheses_met"] = rep.hypotheses_met;
  if (!rep.failing_check.empty()) o.result["failing_check"] = rep.failing_check;
  o.result["limit_spread"] = rep.limit_spread;
  o.result["converged"] = rep.converged;
  Table t;
  t.columns = {{"strategy", "minimizing sequence generator"},
               {"final_value", "|x - y_n| at the last point"},
               {"tail_diameter", "diameter of the last quarter of the sequence"},
               {"target", "d_K(x)"}};
  Json strategies = Json::array();
  for (const auto& so : rep.strategies) {
    strategies.push_back(Json{{"strategy", so.strategy}, {"limit", vjson(so.limit)}, {"final_value", so.final_value},
                              {"tail_diameter", so.tail_diameter}, {"values", so.sequence.values}});
    t.rows.push_back(Json::array({so.strategy, so.final_value, so.tail_diameter, rep.distance}));
  }
  o.result["strategies"] = strategies;
  o.tables.emplace_back("theorem2", std::move(t));
  if (rep.hypotheses_met && !rep.converged) o.status = "fail";
  return o;
}

inline CheckOutcome check_lipschitz(Context& c) {
  CheckOutcome o;
  const int pairs = scaled(c.cfg.params.lipschitz_pairs, c.budget_scale);
  ClosedSet k = c.set;
  const auto rep = lipschitz_check(k, c.norm, pairs, derive_seed(c.seed, "pairs"), c.solver);
  const double limit = 1.0 + c.cfg.tolerances.lipschitz_slack;
  o.result["pairs"] = rep.pairs;
  o.result["skipped"] = rep.skipped;
  o.result["max_ratio"] = rep.max_ratio;
  o.result["bound"] = rep.bound;
  o.result["limit"] = limit;
  o.result["min_pair_distance"] = rep.min_pair_distance;
  if (rep.max_ratio > limit) o.status = "fail";
  return o;
}

inline CheckOutcome check_continuity(Context& c) {
  CheckOutcome o;
  const auto& p = c.cfg.params;
  std::optional<Vector> center = p.continuity_center ? std::optional<Vector>(vec(*p.continuity_center)) : c.focus;
  if (!center) {
    o.status = "skipped";
    o.result["reason"] = "no center outside the set";
    return o;
  }
  const int count = scaled(p.continuity_count, c.budget_scale);
  const auto rep = projection_continuity_probe(c.set, c.norm, *center, p.continuity_radius, count,
                                               derive_seed(c.seed, "continuity"), c.solver, p.continuity_threshold);
  o.result["center"] = vjson(*center);
  o.result["radius"] = rep.radius;
  o.result["count"] = count;
  o.result["center_singleton"] = rep.center_singleton;
  o.result["center_cluster_diameter"] = rep.center_cluster_diameter;
  o.result["modulus_estimate"] = rep.modulus_estimate;
  if (rep.discontinuity_witness) {
    const auto& w = *rep.discontinuity_witness;
    o.status = "witness";
    o.result["witness"] = Json{{"a", vjson(w.a)}, {"b", vjson(w.b)}, {"projection_a", vjson(w.projection_a)},
                               {"projection_b", vjson(w.projection_b)}, {"input_gap", w.input_gap}, {"jump", w.jump}};
  } else if (c.set.convex() && c.norm.is_euclidean() && rep.modulus_estimate > 1.0 + 1e-6) {
    o.status = "fail";
  }
  Table t;
  t.columns = {{"radius", "probe ball radius"}, {"modulus_estimate", "max |P(x') - P(x)| / |x' - x| over the probes"}};
  for (double r = p.continuity_radius, k = 0; k < 4; r *= 0.1, ++k) {
    const auto s = projection_continuity_probe(c.set, c.norm, *center, r, count, derive_seed(c.seed, "continuity"),
                                               c.solver, p.continuity_threshold);
    t.rows.push_back(Json::array({r, s.modulus_estimate}));
  }
  o.tables.emplace_back("continuity", std::move(t));
  return o;
}

inline CheckOutcome check_compactness(Context& c) {
  CheckOutcome o;
  std::vector<MinimizingSequence> seqs;
  std::optional<ClosedSet> k;
  Vector x;
  if (!c.cfg.params.family_sizes.empty() && c.cfg.set.type == "truncated_l1_hull") {
    std::vector<Index> sizes(c.cfg.params.family_sizes.begin(), c.cfg.params.family_sizes.end());
    seqs.push_back(truncated_hull_sweep(sizes));
    k = ClosedSet::truncated_l1_hull(*std::max_element(sizes.begin(), sizes.end()));
    x = Vector::Zero(k->dim());
    o.result["sequence"] = "truncated hull minimizers across the family";
  } else {
    if (!c.focus) {
      o.status = "skipped";
      o.result["reason"] = "no point outside the set";
      return o;
    }
    k = c.set;
    x = *c.focus;
    std::uint64_t i = 0;
    for (auto s : {SequenceStrategy::SolverIterates, SequenceStrategy::VertexSweep, SequenceStrategy::RandomizedDescent})
      seqs.push_back(minimizing_sequence(x, c.set, c.norm, s, c.cfg.params.sequence_length,
                                         derive_seed(c.seed, i++), c.solver));
  }
  const auto rep = approximative_compactness_probe(*k, c.norm, x, seqs);
  Json per = Json::array();
  for (std::size_t i = 0; i < rep.sequences.size(); ++i) {
    const auto& s = rep.sequences[i];
    Json j{{"strategy", seqs[i].strategy}, {"converges", s.converges}, {"cluster_size", s.cluster_size},
           {"min_tail_gap", s.min_tail_gap}, {"tail_diameter", seqs[i].cauchy_tail_diameter}};
    if (s.limit) {
      j["limit"] = vjson(*s.limit);
      j["limit_is_best_approximation"] = s.limit_is_best_approximation;
    }
    per.push_back(j);
  }
  o.result["sequences"] = per;
  o.result["all_converge"] = rep.all_converge;
  if (rep.failure_index) {
    o.status = "witness";
    o.result["failure_sequence"] = *rep.failure_index;
    o.result["failure_gap"] = rep.failure_gap;
  }
  return o;
}

inline CheckOutcome check_crossval(Context& c) {
  CheckOutcome o;
  std::vector<Vector> pts;
  if (c.focus) pts.push_back(*c.focus);
  for (auto& p : outside_probes(c, 5))
    if (!c.focus || p != *c.focus) pts.push_back(p);
  Table t;
  t.columns = {{"probe", "point index"}, {"method", "solver or grid oracle"}, {"distance", "d_K(x) reported"}};
  Json per = Json::array();
  double worst_spread = 0.0, worst_grid = 0.0;
  const double step = c.cfg.params.grid_step;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    Json j{{"point", vjson(pts[i])}};
    const double ref = distance(pts[i], c.set, c.norm, c.solver).distance;
    if (c.set.convex() && (c.set.as<Polytope>() || c.set.as<NormBall>())) {
      const auto cv = cross_validate(pts[i], c.set, c.norm, c.solver);
      Json methods = Json::object();
      for (const auto& [name, d] : cv.distances) {
        methods[name] = d;
        t.rows.push_back(Json::array({i, name, d}));
      }
      j["solvers"] = methods;
      j["spread"] = cv.spread;
      worst_spread = std::max(worst_spread, cv.spread);
    } else {
      t.rows.push_back(Json::array({i, "default", ref}));
    }
    if (c.set.dim() == 2) {
      const auto g = grid_brute_force_distance(pts[i], c.set, c.norm, step);
      j["grid"] = g.distance;
      t.rows.push_back(Json::array({i, "grid", g.distance}));
      worst_grid = std::max(worst_grid, std::abs(g.distance - ref));
    }
    per.push_back(j);
  }
  o.result["points"] = per;
  o.result["max_solver_spread"] = worst_spread;
  o.result["max_grid_gap"] = worst_grid;
  o.result["grid_step"] = step;
  if (worst_spread > c.cfg.tolerances.crossval || worst_grid > 2.0 * step) o.status = "fail";
  o.tables.emplace_back("crossval", std::move(t));
  return o;
}

inline CheckOutcome check_family(Context& c) {
  CheckOutcome o;
  const auto& sizes_in = c.cfg.params.family_sizes;
  if (c.cfg.set.type != "truncated_l1_hull" || sizes_in.size() < 3) {
    o.status = "skipped";
    o.result["reason"] = "needs a truncated_l1_hull set and three or more family sizes";
    return o;
  }
  FamilyTrend trend;
  std::vector<Vector> mins;
  Table t;
  t.columns = {{"N", "truncation dimension"},
               {"distance", "d(0, hull of e_1..e_N) in l1, by linear programming"},
               {"min_gap_to_earlier", "min over earlier M of |e_N - e_M|_1 between minimizers"},
               {"exact", "(N+1)/N"},
               {"abs_error", "|distance - exact|"}};
  bool attained = true;
  for (int n : sizes_in) {
    const auto k = ClosedSet::truncated_l1_hull(n);
    SolverConfig s = c.solver;
    s.method = SolverMethod::LinearProgram;
    const auto r = distance(Vector::Zero(n), k, Norm::l1(), s);
    attained = attained && r.attained;
    trend.sizes.push_back(n);
    trend.distances.push_back(r.distance);
    mins.push_back(r.minimizers.front());
  }
  const auto rep = proximinality_trend(Vector::Zero(1), trend, mins, Norm::l1(), c.cfg.tolerances.argmin_eps);
  for (std::size_t i = 0; i < trend.sizes.size(); ++i) {
    const double exact = static_cast<double>(trend.sizes[i] + 1) / static_cast<double>(trend.sizes[i]);
    t.rows.push_back(Json::array({trend.sizes[i], trend.distances[i],
                                  i == 0 ? Json(nullptr) : Json(trend.min_gap_to_earlier[i]), exact,
                                  std::abs(trend.distances[i] - exact)}));
  }
  o.result["verdict"] = to_string(rep.verdict);
  o.result["sizes"] = trend.sizes;
  o.result["distances"] = trend.distances;
  o.result["strictly_decreasing"] = trend.strictly_decreasing;
  o.result["limit_estimate"] = trend.limit_estimate;
  o.result["limit_attained"] = trend.limit_attained;
  o.result["min_pairwise_gap"] = trend.min_pairwise_gap;
  o.result["each_truncation_attained"] = attained;
  if (rep.verdict == ChebyshevVerdict::NotProximinalEvidence) o.status = "witness";
  o.tables.emplace_back("family", std::move(t));
  return o;
}

inline CheckOutcome run_check(const std::string& name, Context& c) {
  if (name == "distance") return check_distance(c);
  if (name == "best_approximations") return check_best_approximations(c);
  if (name == "chebyshev") return check_chebyshev(c);
  if (name == "convexity") return check_convexity(c);
  if (name == "frechet") return check_frechet(c);
  if (name == "exposure") return check_exposure(c);
  if (name == "lemma1") return check_lemma1(c);
  if (name == "theorem2") return check_theorem2(c);
  if (name == "lipschitz") return check_lipschitz(c);
  if (name == "continuity") return check_continuity(c);
  if (name == "compactness") return check_compactness(c);
  if (name == "crossval") return check_crossval(c);
  if (name == "family") return check_family(c);
  throw ConfigError("checks", "unknown check '" + name + "'");
}

}  // namespace run_detail

/// Runs every check in dependency order. Check failures are recorded in the
/// report; only configuration problems throw.
namespace run_detail {

// JSON has no NaN or infinity; the writer emits null, so store null up front
// and keep an in-memory report identical to its serialized form.
inline void null_non_finite(Json& j) {
  if (j.is_number_float()) {
    if (!std::isfinite(j.get<double>())) j = nullptr;
  } else if (j.is_structured()) {
    for (auto& v : j) null_non_finite(v);
  }
}

}  // namespace run_detail

inline Json run_scenario(const ScenarioConfig& config, const RunOptions& opt = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::uint64_t seed = opt.seed.value_or(config.seed);
  ScenarioConfig cfg = config;
  cfg.seed = seed;
  if (opt.tolerance) {
    if (!(*opt.tolerance > 0)) throw ConfigError("tolerances.solver", "must be positive");
    cfg.tolerances.solver = *opt.tolerance;
  }
  if (!(opt.budget_scale > 0)) throw ConfigError("budget_scale", "must be positive");

  Norm norm = build_norm(cfg.norm);
  ClosedSet set = build_set(cfg.set, derive_seed(seed, "set"));
  if (auto d = norm.dimension(); d && *d != set.dim())
    throw ConfigError("norm", "norm dimension does not match the set");
  std::vector<Vector> probes = build_probes(cfg.probes, set.dim());
  std::optional<Vector> focus;
  if (cfg.params.focus) {
    if (static_cast<Index>(cfg.params.focus->size()) != set.dim())
      throw ConfigError("params.focus", "dimension does not match the set");
    focus = vec(*cfg.params.focus);
  } else {
    for (const auto& p : probes)
      if (!contains(set, p, 1e-9, norm)) {
        focus = p;
        break;
      }
  }
  if (cfg.params.continuity_center && static_cast<Index>(cfg.params.continuity_center->size()) != set.dim())
    throw ConfigError("params.continuity_center", "dimension does not match the set");

  SolverConfig solver;
  solver.tolerance = cfg.tolerances.solver;
  solver.seed = derive_seed(seed, "solver");
  run_detail::Context ctx{cfg, norm, set, probes, focus, solver, opt.budget_scale, seed, std::nullopt, std::nullopt};

  std::vector<std::string> inserted;
  const auto checks = resolve_checks(cfg.checks, &inserted);

  Json report;
  report["artifact"] = "proxlab";
  report["artifact_version"] = kArtifactVersion;
  report["scenario"] = cfg.name;
  report["seed"] = seed;
  report["budget_scale"] = opt.budget_scale;
  report["config"] = to_json(cfg);
  report["auto_inserted_checks"] = inserted;

  Json check_results = Json::array();
  Json tables = Json::object();
  Table summary;
  summary.columns = {{"check", "check name"}, {"status", "pass, witness, fail, skipped or error"}, {"seed", "derived seed"}};
  std::vector<std::string> unexpected, failed;
  for (const auto& name : checks) {
    ctx.seed = derive_seed(seed, name);
    CheckOutcome out;
    try {
      out = run_detail::run_check(name, ctx);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      out.status = "error";
      out.result = Json{{"error", e.what()}};
    }
    check_results.push_back(Json{{"check", name}, {"status", out.status}, {"seed", ctx.seed}, {"result", out.result}});
    for (auto& [tname, t] : out.tables) tables[tname] = t.to_json();
    summary.rows.push_back(Json::array({name, out.status, ctx.seed}));
    const bool expected = std::find(cfg.expected_witnesses.begin(), cfg.expected_witnesses.end(), name) !=
                          cfg.expected_witnesses.end();
    if (out.status == "witness" && !expected) unexpected.push_back(name);
    if (out.status == "fail" || out.status == "error") failed.push_back(name);
  }
  tables["checks"] = summary.to_json();
  report["checks"] = check_results;
  report["tables"] = tables;
  report["summary"] = Json{{"unexpected_witnesses", unexpected}, {"failed_checks", failed}};
  report["wall_clock_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  run_detail::null_non_finite(report);
  return report;
}

/// Report with wall-clock fields removed, for reproducibility comparisons.
inline Json strip_wall_clock(Json report) {
  report.erase("wall_clock_seconds");
  return report;
}

// ---------------------------------------------------------------------------
// Builtins

struct Builtin {
  const char* name;
  const char* description;
  const char* config;
};

inline const std::vector<Builtin>& builtins() {
  static const std::vector<Builtin> all{
      {"circle_center", "unit circle in l2: every circle point is nearest to the center",
       R"json({
  "version": 1,
  "name": "circle_center",
  "description": "unit circle in l2: every circle point is nearest to the center",
  "seed": 11,
  "norm": {"kind": "lp", "p": 2},
  "set": {"type": "circle", "center": [0, 0]},
  "probes": {"points": [[0, 0], [2, 0]]},
  "checks": ["best_approximations", "chebyshev", "lemma1", "lipschitz", "crossval"],
  "params": {"focus": [2, 0]},
  "expected_witnesses": ["chebyshev"]
})json"},
      {"l1_hull_family", "truncations of the l1 hull of e_n with n-th entry (n+1)/n",
       R"json({
  "version": 1,
  "name": "l1_hull_family",
  "description": "truncations of the l1 hull of e_n with n-th entry (n+1)/n",
  "seed": 3,
  "norm": {"kind": "lp", "p": 1},
  "set": {"type": "truncated_l1_hull", "n": 8},
  "probes": {"points": [[0, 0, 0, 0, 0, 0, 0, 0]]},
  "checks": ["family", "distance", "lipschitz", "compactness", "crossval"],
  "params": {"family_sizes": [2, 4, 8, 16, 32, 64, 128, 256, 512, 1024, 2048, 4096]},
  "expected_witnesses": ["family", "compactness"]
})json"},
      {"l1_segment", "segment from (1,0) to (0,1) under the l1 norm, probed from the origin",
       R"json({
  "version": 1,
  "name": "l1_segment",
  "description": "segment from (1,0) to (0,1) under the l1 norm, probed from the origin",
  "seed": 5,
  "norm": {"kind": "lp", "p": 1},
  "set": {"type": "segment", "points": [[1, 0], [0, 1]]},
  "probes": {"points": [[0, 0]]},
  "checks": ["best_approximations", "chebyshev", "convexity", "lipschitz", "crossval"],
  "expected_witnesses": ["chebyshev", "convexity"]
})json"},
      {"l2_ball", "Euclidean unit ball: radial projection, smooth distance function",
       R"json({
  "version": 1,
  "name": "l2_ball",
  "description": "Euclidean unit ball: radial projection, smooth distance function",
  "seed": 13,
  "norm": {"kind": "lp", "p": 2},
  "set": {"type": "ball", "center": [0, 0], "norm": {"kind": "lp", "p": 2}},
  "probes": {"points": [[2, 0], [0, -3], [1.5, 1.5]]},
  "checks": ["distance", "chebyshev", "convexity", "lemma1", "theorem2", "lipschitz", "continuity", "crossval"]
})json"},
      {"quadratic_sublevel", "filled ellipse given as a sublevel set of a quadratic",
       R"json({
  "version": 1,
  "name": "quadratic_sublevel",
  "description": "filled ellipse given as a sublevel set of a quadratic",
  "seed": 17,
  "norm": {"kind": "lp", "p": 2},
  "set": {"type": "sublevel", "function": {"kind": "quadratic", "matrix": [[2, 0], [0, 8]]}, "level": 1,
          "box_lo": [-2, -2], "box_hi": [2, 2]},
  "probes": {"points": [[2, 1], [-1.5, 0.5], [0, -1.5]]},
  "checks": ["distance", "chebyshev", "lipschitz", "crossval"],
  "params": {"grid_step": 0.005}
})json"},
      {"supnorm_flat_face", "segment on the first axis under the sup norm, probed from (0,1)",
       R"json({
  "version": 1,
  "name": "supnorm_flat_face",
  "description": "segment on the first axis under the sup norm, probed from (0,1)",
  "seed": 7,
  "norm": {"kind": "sup"},
  "set": {"type": "segment", "points": [[-2, 0], [2, 0]]},
  "probes": {"points": [[0, 1]]},
  "checks": ["best_approximations", "chebyshev", "convexity", "frechet", "exposure", "theorem2", "lipschitz",
             "compactness", "crossval"],
  "params": {"focus": [0, 1]},
  "expected_witnesses": ["chebyshev", "convexity", "exposure"]
})json"},
      {"theorem2_l2_polytope", "convex polygon in l2: smooth distance, exposed projections, unique nearest points",
       R"json({
  "version": 1,
  "name": "theorem2_l2_polytope",
  "description": "convex polygon in l2: smooth distance, exposed projections, unique nearest points",
  "seed": 2,
  "norm": {"kind": "lp", "p": 2},
  "set": {"type": "polytope", "points": [[0, 0], [2, -0.5], [3, 1], [1.5, 2.5], [-0.5, 1.5]]},
  "probes": {"sampler": {"count": 100, "seed": 19, "lo": [-4, -4], "hi": [6, 6]}},
  "checks": ["distance", "best_approximations", "chebyshev", "frechet", "exposure", "lemma1", "theorem2", "lipschitz",
             "continuity", "compactness", "crossval"],
  "params": {"focus": [3.5, 2.5]}
})json"},
      {"two_points", "two-point set {(-1,0),(1,0)}: the projection jumps across the bisector",
       R"json({
  "version": 1,
  "name": "two_points",
  "description": "two-point set {(-1,0),(1,0)}: the projection jumps across the bisector",
  "seed": 23,
  "norm": {"kind": "lp", "p": 2},
  "set": {"type": "finite", "points": [[-1, 0], [1, 0]]},
  "probes": {"points": [[0, 1], [0.5, 0.5]]},
  "checks": ["chebyshev", "continuity", "lipschitz", "crossval"],
  "params": {"continuity_center": [0, 1], "continuity_radius": 0.1},
  "expected_witnesses": ["chebyshev", "continuity"]
})json"},
  };
  return all;
}

inline std::optional<ScenarioConfig> find_builtin(const std::string& name) {
  for (const auto& b : builtins())
    if (name == b.name) return parse_config_text(b.config);
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Table export

inline std::string csv_cell(const Json& v) {
  if (v.is_null()) return "";
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
  }
  if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
  return v.dump();
}

/// Renders one table of a report. `format` is "csv" or "json"; json returns
/// the whole report. An empty table name picks the first data table, falling
/// back to the check summary.
inline std::string emit_table(const Json& report, const std::string& format, const std::string& table = "") {
  if (format == "json") return report.dump(2) + "\n";
  if (format != "csv") throw InvalidArgument("unknown format '" + format + "' (use csv or json)");
  if (!report.contains("tables")) throw InvalidArgument("report has no tables");
  const Json& tables = report.at("tables");
  std::string name = table;
  if (name.empty()) {
    for (auto it = tables.begin(); it != tables.end(); ++it)
      if (it.key() != "checks") {
        name = it.key();
        break;
      }
    if (name.empty()) name = "checks";
  }
  if (!tables.contains(name)) throw InvalidArgument("report has no table '" + name + "'");
  const Json& t = tables.at(name);
  std::ostringstream os;
  os << "# scenario: " << report.value("scenario", std::string()) << "\n";
  os << "# table: " << name << "\n";
  for (const auto& col : t.at("columns")) {
    const std::string c = col.get<std::string>();
    os << "# " << c << ": " << t.at("doc").value(c, std::string()) << "\n";
  }
  bool first = true;
  for (const auto& col : t.at("columns")) {
    os << (first ? "" : ",") << col.get<std::string>();
    first = false;
  }
  os << "\n";
  for (const auto& row : t.at("rows")) {
    first = true;
    for (const auto& cell : row) {
      os << (first ? "" : ",") << csv_cell(cell);
      first = false;
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace proxlab::scenario

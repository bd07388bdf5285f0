#pragma once

#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "nlspec/domain.hpp"
#include "nlspec/kernel.hpp"
#include "nlspec/operator.hpp"

namespace nlspec {

/// Unreadable, malformed or schema-invalid configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace config {

using json = nlohmann::json;

inline void fail(const std::string& path, const std::string& what) { throw ConfigError(path + ": " + what); }

inline const json& object(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  return j;
}

/// Rejects keys outside `allowed` and requires every key in `required`.
inline void keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed,
                 std::initializer_list<const char*> required = {}) {
  object(j, path);
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!ok.count(it.key())) fail(path, "unknown field '" + it.key() + "'");
  for (const char* r : required)
    if (!j.contains(r)) fail(path, "missing field '" + std::string(r) + "'");
}

inline double number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

inline double positive(const json& j, const std::string& path) {
  const double v = number(j, path);
  if (!(v > 0.0)) fail(path, "expected a positive number");
  return v;
}

inline long integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<long>();
}

inline std::string string(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

inline bool boolean(const json& j, const std::string& path) {
  if (!j.is_boolean()) fail(path, "expected true or false");
  return j.get<bool>();
}

inline std::vector<double> numbers(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a nonempty array of numbers");
  std::vector<double> v;
  for (std::size_t i = 0; i < j.size(); ++i) v.push_back(number(j[i], path + "[" + std::to_string(i) + "]"));
  return v;
}

inline std::vector<std::string> strings(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of strings");
  std::vector<std::string> v;
  for (std::size_t i = 0; i < j.size(); ++i) v.push_back(string(j[i], path + "[" + std::to_string(i) + "]"));
  return v;
}

/// Point of 1 or 2 coordinates; the returned dim is its length.
inline std::pair<Point, int> point(const json& j, const std::string& path) {
  const auto v = numbers(j, path);
  if (v.size() > 2) fail(path, "points have one or two coordinates");
  return {{v[0], v.size() > 1 ? v[1] : 0.0}, static_cast<int>(v.size())};
}

inline KernelSpec kernel(const json& j, const std::string& path) {
  keys(j, path, {"family", "width", "dim"}, {"family", "width", "dim"});
  const std::string fam = string(j["family"], path + ".family");
  KernelFamily f;
  try {
    f = kernel_family_from_string(fam);
  } catch (const Error&) {
    fail(path + ".family", "unknown kernel family '" + fam + "'");
  }
  const long dim = integer(j["dim"], path + ".dim");
  if (dim != 1 && dim != 2) fail(path + ".dim", "dim must be 1 or 2");
  return make_kernel(f, positive(j["width"], path + ".width"), static_cast<int>(dim));
}

inline VectorField field(const json& j, const std::string& path) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "dilation") return VectorField::dilation();
    if (s == "rotation") return VectorField::rotation();
    if (s == "translation") return VectorField::constant({1.0, 0.0});
    fail(path, "unknown field '" + s + "'");
  }
  keys(j, path, {"kind", "direction", "center", "radius"}, {"kind"});
  const std::string kind = string(j["kind"], path + ".kind");
  if (kind == "dilation" || kind == "rotation") {
    keys(j, path, {"kind"});
    return kind == "dilation" ? VectorField::dilation() : VectorField::rotation();
  }
  if (kind == "translation") {
    keys(j, path, {"kind", "direction"}, {"direction"});
    return VectorField::constant(point(j["direction"], path + ".direction").first);
  }
  if (kind == "radial_bump") {
    keys(j, path, {"kind", "center", "radius"}, {"center", "radius"});
    return VectorField::radial_bump(point(j["center"], path + ".center").first, positive(j["radius"], path + ".radius"));
  }
  fail(path + ".kind", "unknown field kind '" + kind + "'");
  return {};
}

inline MapSpec map(const json& j, const std::string& path, int dim) {
  keys(j, path, {"kind", "scales", "factor", "field", "t"}, {"kind"});
  const std::string kind = string(j["kind"], path + ".kind");
  if (kind == "affine_diagonal") {
    keys(j, path, {"kind", "scales"}, {"scales"});
    const auto [s, n] = point(j["scales"], path + ".scales");
    if (n != dim) fail(path + ".scales", "one scale per axis");
    return MapSpec::affine_diagonal({s[0], dim == 1 ? 1.0 : s[1]}, dim);
  }
  if (kind == "dilation") {
    keys(j, path, {"kind", "factor"}, {"factor"});
    return MapSpec::dilation(positive(j["factor"], path + ".factor"), dim);
  }
  if (kind == "perturbation_field") {
    keys(j, path, {"kind", "field", "t"}, {"field", "t"});
    return MapSpec::perturbation(field(j["field"], path + ".field"), number(j["t"], path + ".t"), dim);
  }
  fail(path + ".kind", "unknown map kind '" + kind + "'");
  return {};
}

/// [[lo0, hi0], [lo1, hi1]] (one pair per axis).
inline std::pair<Box, int> axis_box(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty() || j.size() > 2) fail(path, "expected one [lo, hi] pair per axis");
  Box b{{0.0, 0.0}, {0.0, 0.0}};
  for (std::size_t a = 0; a < j.size(); ++a) {
    const auto v = numbers(j[a], path + "[" + std::to_string(a) + "]");
    if (v.size() != 2) fail(path + "[" + std::to_string(a) + "]", "expected [lo, hi]");
    b.lo[a] = v[0];
    b.hi[a] = v[1];
  }
  return {b, static_cast<int>(j.size())};
}

inline DomainSpec domain(const json& j, const std::string& path) {
  object(j, path);
  if (!j.contains("variant")) fail(path, "missing field 'variant'");
  const std::string v = string(j["variant"], path + ".variant");
  auto checked = [&](auto make) -> DomainSpec {
    try {
      return make();
    } catch (const Error& e) {
      fail(path, e.what());
    }
    return DomainSpec::unit_square();
  };
  if (v == "box") {
    keys(j, path, {"variant", "lo", "hi"}, {"lo", "hi"});
    const auto [lo, n1] = point(j["lo"], path + ".lo");
    const auto [hi, n2] = point(j["hi"], path + ".hi");
    if (n1 != n2) fail(path, "lo and hi have different dimensions");
    return checked([&] { return DomainSpec::box(lo, hi, n1); });
  }
  if (v == "interval") {
    keys(j, path, {"variant", "a", "b"}, {"a", "b"});
    return checked([&] { return DomainSpec::interval(number(j["a"], path + ".a"), number(j["b"], path + ".b")); });
  }
  if (v == "unit_square") {
    keys(j, path, {"variant"});
    return DomainSpec::unit_square();
  }
  if (v == "ball") {
    keys(j, path, {"variant", "center", "radius"}, {"center", "radius"});
    const auto [c, n] = point(j["center"], path + ".center");
    return checked([&] { return DomainSpec::ball(c, positive(j["radius"], path + ".radius"), n); });
  }
  if (v == "union_of_balls") {
    keys(j, path, {"variant", "balls"}, {"balls"});
    if (!j["balls"].is_array()) fail(path + ".balls", "expected an array");
    std::vector<BallShape> balls;
    int dim = 2;
    for (std::size_t i = 0; i < j["balls"].size(); ++i) {
      const std::string p = path + ".balls[" + std::to_string(i) + "]";
      keys(j["balls"][i], p, {"center", "radius"}, {"center", "radius"});
      const auto [c, n] = point(j["balls"][i]["center"], p + ".center");
      if (i > 0 && n != dim) fail(p, "balls of different dimension");
      dim = n;
      balls.push_back({c, positive(j["balls"][i]["radius"], p + ".radius")});
    }
    return checked([&] { return DomainSpec::union_of_balls(std::move(balls), dim); });
  }
  if (v == "rough") {
    keys(j, path, {"variant", "n"}, {"n"});
    const long n = integer(j["n"], path + ".n");
    if (n < 1) fail(path + ".n", "n must be a positive integer");
    return DomainSpec::rough(static_cast<int>(n));
  }
  if (v == "perforated") {
    keys(j, path, {"variant", "eps", "hole_fraction", "hole", "base"}, {"eps", "hole_fraction", "base"});
    PerforatedShape p;
    p.eps = positive(j["eps"], path + ".eps");
    p.hole_fraction = number(j["hole_fraction"], path + ".hole_fraction");
    if (j.contains("hole")) {
      const std::string h = string(j["hole"], path + ".hole");
      if (h == "box") p.hole = HoleShape::box;
      else if (h == "ball") p.hole = HoleShape::ball;
      else fail(path + ".hole", "hole must be 'box' or 'ball'");
    }
    const auto [b, dim] = axis_box(j["base"], path + ".base");
    p.base = b;
    return checked([&] { return DomainSpec::perforated(p, dim); });
  }
  if (v == "mapped") {
    keys(j, path, {"variant", "base", "map"}, {"base", "map"});
    const DomainSpec base = domain(j["base"], path + ".base");
    return checked([&] { return DomainSpec::mapped(base, map(j["map"], path + ".map", base.dim())); });
  }
  if (v == "polygon") {
    keys(j, path, {"variant", "vertices"}, {"vertices"});
    if (!j["vertices"].is_array() || j["vertices"].size() < 3) fail(path + ".vertices", "need at least 3 vertices");
    std::vector<Point> pts;
    for (std::size_t i = 0; i < j["vertices"].size(); ++i) {
      const auto [p, n] = point(j["vertices"][i], path + ".vertices[" + std::to_string(i) + "]");
      if (n != 2) fail(path + ".vertices[" + std::to_string(i) + "]", "polygon vertices are planar");
      pts.push_back(p);
    }
    return checked([&] { return DomainSpec::polygon(std::move(pts)); });
  }
  fail(path + ".variant", "unknown domain variant '" + v + "'");
  return DomainSpec::unit_square();
}

inline std::vector<DomainSpec> domains(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a nonempty array of domains");
  std::vector<DomainSpec> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(domain(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

/// {"h": spacing} or {"n_cells": cells per unit length}, optional "margin".
inline GridSpec grid(const json& j, const std::string& path) {
  keys(j, path, {"h", "n_cells", "margin"});
  if (j.contains("h") == j.contains("n_cells")) fail(path, "give exactly one of 'h' and 'n_cells'");
  GridSpec g;
  if (j.contains("h")) {
    g.h = positive(j["h"], path + ".h");
  } else {
    const long n = integer(j["n_cells"], path + ".n_cells");
    if (n < 1) fail(path + ".n_cells", "n_cells must be positive");
    g.h = 1.0 / static_cast<double>(n);
  }
  if (j.contains("margin")) {
    const long m = integer(j["margin"], path + ".margin");
    if (m < 1) fail(path + ".margin", "margin must be at least one cell");
    g.margin = static_cast<int>(m);
  }
  return g;
}

}  // namespace config

/// Output section shared by every command.
struct OutputSpec {
  std::string csv;  // file name inside the output directory
  std::string svg;  // empty: no plot
  std::string matrix;  // empty: no binary dump of K
  std::uint64_t seed = 20240101;
};

/// A parsed, validated experiment configuration. The command-specific
/// section stays as JSON and is decoded by the command itself, which
/// rejects unknown fields there as well.
struct ExperimentConfig {
  std::string command;
  std::string name;  // config file stem
  OutputSpec output;
  nlohmann::json body;
};

inline const std::vector<std::string>& known_commands() {
  static const std::vector<std::string> c{"kernels",    "spectrum",  "converge", "perturb",    "shape-derivative",
                                          "faber-krahn", "stretch",  "two-balls", "perforated", "pullback"};
  return c;
}

inline ExperimentConfig parse_config(const nlohmann::json& j, const std::string& name) {
  using namespace config;
  object(j, "config");
  if (!j.contains("command")) fail("config", "missing field 'command'");
  ExperimentConfig c;
  c.command = string(j["command"], "config.command");
  bool known = false;
  for (const auto& k : known_commands()) known = known || k == c.command;
  if (!known) fail("config.command", "unknown command '" + c.command + "'");
  c.name = name;
  c.output.csv = name + ".csv";
  if (j.contains("output")) {
    const json& o = j["output"];
    keys(o, "config.output", {"csv", "svg", "matrix", "seed"});
    if (o.contains("csv")) c.output.csv = string(o["csv"], "config.output.csv");
    if (o.contains("svg")) c.output.svg = string(o["svg"], "config.output.svg");
    if (o.contains("matrix")) c.output.matrix = string(o["matrix"], "config.output.matrix");
    if (o.contains("seed")) {
      const long s = integer(o["seed"], "config.output.seed");
      if (s < 0) fail("config.output.seed", "seed must be nonnegative");
      c.output.seed = static_cast<std::uint64_t>(s);
    }
  }
  for (const std::string* f : {&c.output.csv, &c.output.svg, &c.output.matrix})
    if (f->find('/') != std::string::npos) fail("config.output", "output names are plain file names");
  c.body = j;
  c.body.erase("command");
  c.body.erase("output");
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path + ": malformed JSON: " + e.what());
  }
  std::string stem = path;
  if (const auto slash = stem.find_last_of('/'); slash != std::string::npos) stem = stem.substr(slash + 1);
  if (const auto dot = stem.find_last_of('.'); dot != std::string::npos && dot > 0) stem = stem.substr(0, dot);
  return parse_config(j, stem);
}

}  // namespace nlspec

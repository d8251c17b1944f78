#include "charlab/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace charlab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kTwoPi = 6.283185307179586;

[[noreturn]] void bad(const std::string& field, const std::string& what) {
  throw UsageError("config field '" + field + "': " + what);
}

const json* member(const json& j, const std::string& key) {
  auto it = j.find(key);
  return it == j.end() || it->is_null() ? nullptr : &*it;
}

double number(const json& j, const std::string& field) {
  if (!j.is_number()) bad(field, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) bad(field, "not finite");
  return v;
}

int integer(const json& j, const std::string& field) {
  if (!j.is_number_integer()) bad(field, "expected an integer");
  return j.get<int>();
}

double positive(const json& j, const std::string& field) {
  const double v = number(j, field);
  if (!(v > 0)) bad(field, "must be positive");
  return v;
}

std::vector<double> numbers(const json& j, const std::string& field) {
  if (!j.is_array()) bad(field, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(number(j[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

void only_keys(const json& j, const std::string& where, const std::set<std::string>& keys) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!keys.count(it.key()))
      bad(where.empty() ? it.key() : where + "." + it.key(), "unknown field");
}

json read_json(const fs::path& file) {
  std::ifstream f(file);
  if (!f) throw UsageError("cannot open " + file.string());
  try {
    return json::parse(f);
  } catch (const json::parse_error& e) {
    throw UsageError(file.string() + ": " + e.what());
  }
}

}  // namespace

void check_K(double K, double T, const std::string& field) {
  const double x = K * T;
  const double k = std::round(x / kTwoPi);
  if (std::abs(x - k * kTwoPi) < 1e-6) {
    std::ostringstream os;
    os << "K T = " << x << " lies within 1e-6 of 2 pi * " << k;
    bad(field, os.str());
  }
}

SurfaceConfig parse_surface(const json& j) {
  if (!j.is_object()) bad("surface", "expected an object");
  only_keys(j, "surface", {"kind", "radii", "perturbation"});
  SurfaceConfig s;
  if (auto k = member(j, "kind")) {
    if (!k->is_string()) bad("surface.kind", "expected a string");
    s.kind = k->get<std::string>();
  }
  if (s.kind != "ellipsoid" && s.kind != "perturbed_ellipsoid")
    bad("surface.kind", "'" + s.kind + "' is not one of ellipsoid, perturbed_ellipsoid");
  auto r = member(j, "radii");
  if (!r) bad("surface.radii", "missing");
  s.radii = numbers(*r, "surface.radii");
  if (s.radii.empty()) bad("surface.radii", "empty");
  for (std::size_t i = 0; i < s.radii.size(); ++i)
    if (!(s.radii[i] > 0)) bad("surface.radii[" + std::to_string(i) + "]", "must be positive");
  auto p = member(j, "perturbation");
  if (s.kind == "perturbed_ellipsoid") {
    if (!p || !p->is_object()) bad("surface.perturbation", "expected {coeffs, magnitude}");
    only_keys(*p, "surface.perturbation", {"coeffs", "magnitude"});
    QuarticPerturbation q;
    auto c = member(*p, "coeffs");
    if (!c) bad("surface.perturbation.coeffs", "missing");
    q.coeffs = numbers(*c, "surface.perturbation.coeffs");
    if (q.coeffs.size() != s.radii.size())
      bad("surface.perturbation.coeffs", "needs one coefficient per radius");
    auto m = member(*p, "magnitude");
    if (!m) bad("surface.perturbation.magnitude", "missing");
    q.magnitude = number(*m, "surface.perturbation.magnitude");
    s.perturbation = q;
  } else if (p) {
    bad("surface.perturbation", "only for kind perturbed_ellipsoid");
  }
  return s;
}

json to_json(const SurfaceConfig& s) {
  json j = {{"kind", s.kind}, {"radii", s.radii}};
  if (s.perturbation)
    j["perturbation"] = {{"coeffs", s.perturbation->coeffs},
                         {"magnitude", s.perturbation->magnitude}};
  return j;
}

Hypersurface build_surface(const SurfaceConfig& s) {
  if (s.kind == "perturbed_ellipsoid") return make_perturbed_ellipsoid(s.radii, *s.perturbation);
  return make_ellipsoid(s.radii);
}

std::vector<UserTypeEntry> parse_type_rows(const json& j) {
  const json* rows = &j;
  if (j.is_object()) {
    rows = member(j, "rows");
    if (!rows) bad("types.rows", "missing");
  }
  if (!rows->is_array()) bad("types", "expected an array of {orbit_id, m, k}");
  std::vector<UserTypeEntry> out;
  for (std::size_t i = 0; i < rows->size(); ++i) {
    const std::string f = "types[" + std::to_string(i) + "]";
    const json& r = (*rows)[i];
    if (!r.is_object()) bad(f, "expected an object");
    only_keys(r, f, {"orbit_id", "m", "k", "note"});
    UserTypeEntry e;
    auto id = member(r, "orbit_id");
    if (!id || !id->is_string()) bad(f + ".orbit_id", "expected a string");
    e.orbit_id = id->get<std::string>();
    auto m = member(r, "m");
    if (!m) bad(f + ".m", "missing");
    e.m = integer(*m, f + ".m");
    if (e.m < 1) bad(f + ".m", "must be >= 1");
    auto k = member(r, "k");
    if (!k || !k->is_array()) bad(f + ".k", "expected an array of integers");
    for (std::size_t l = 0; l < k->size(); ++l)
      e.k.push_back(integer((*k)[l], f + ".k[" + std::to_string(l) + "]"));
    out.push_back(e);
  }
  return out;
}

RunConfig parse_config(const json& j, const fs::path& base) {
  if (!j.is_object()) throw UsageError("config: expected a JSON object");
  only_keys(j, "", {"surface", "stages", "tolerances", "flow", "galerkin", "resonance", "types",
                    "out_dir", "seed"});
  RunConfig c;
  auto s = member(j, "surface");
  if (!s) bad("surface", "missing");
  if (s->is_string()) {
    const fs::path p = base / s->get<std::string>();
    if (!fs::exists(p)) bad("surface", "file " + p.string() + " does not exist");
    c.surface = parse_surface(read_json(p));
  } else {
    c.surface = parse_surface(*s);
  }

  if (auto st = member(j, "stages")) {
    if (!st->is_array()) bad("stages", "expected an array of stage names");
    c.stages.clear();
    for (std::size_t i = 0; i < st->size(); ++i) {
      if (!(*st)[i].is_string()) bad("stages[" + std::to_string(i) + "]", "expected a string");
      c.stages.push_back((*st)[i].get<std::string>());
    }
  }
  static const std::vector<std::string> known = {"orbits", "index", "galerkin", "resonance"};
  for (const auto& name : c.stages)
    if (std::find(known.begin(), known.end(), name) == known.end())
      bad("stages", "unknown stage '" + name + "'");

  if (auto t = member(j, "tolerances")) {
    only_keys(*t, "tolerances", {"integrator", "closure", "angle_tol", "q_max", "identity"});
    if (auto v = member(*t, "integrator")) c.integrator_tol = positive(*v, "tolerances.integrator");
    if (auto v = member(*t, "closure")) c.closure_tol = positive(*v, "tolerances.closure");
    if (auto v = member(*t, "angle_tol")) c.angle_tol = positive(*v, "tolerances.angle_tol");
    if (auto v = member(*t, "q_max")) c.q_max = integer(*v, "tolerances.q_max");
    if (auto v = member(*t, "identity")) c.identity_tol = positive(*v, "tolerances.identity");
    if (c.q_max < 1) bad("tolerances.q_max", "must be >= 1");
  }
  if (auto f = member(j, "flow")) {
    only_keys(*f, "flow", {"samples", "iterates", "alpha"});
    if (auto v = member(*f, "samples")) c.samples = integer(*v, "flow.samples");
    if (auto v = member(*f, "iterates")) c.iterates = integer(*v, "flow.iterates");
    if (auto v = member(*f, "alpha")) c.alpha = number(*v, "flow.alpha");
    if (c.samples < 16) bad("flow.samples", "must be >= 16");
    if (c.iterates < 1) bad("flow.iterates", "must be >= 1");
    if (!(c.alpha > 1 && c.alpha < 2)) bad("flow.alpha", "must lie in (1, 2)");
  }
  if (auto g = member(j, "galerkin")) {
    only_keys(*g, "galerkin", {"K", "K_grid", "mode_cut", "T", "a", "ratio", "theta"});
    if (auto v = member(*g, "T")) c.T = positive(*v, "galerkin.T");
    if (auto v = member(*g, "K")) c.K = number(*v, "galerkin.K");
    if (auto v = member(*g, "K_grid")) c.K_grid = numbers(*v, "galerkin.K_grid");
    if (auto v = member(*g, "mode_cut")) c.mode_cut = integer(*v, "galerkin.mode_cut");
    if (auto v = member(*g, "a")) c.a = positive(*v, "galerkin.a");
    if (auto v = member(*g, "ratio")) c.ratio = number(*v, "galerkin.ratio");
    if (auto v = member(*g, "theta")) c.theta = number(*v, "galerkin.theta");
    if (c.mode_cut < 0) bad("galerkin.mode_cut", "must be >= 0 (0: automatic)");
    if (!(c.ratio > 0 && c.ratio < 1)) bad("galerkin.ratio", "must lie in (0, 1)");
    if (!(c.theta > 0 && c.theta < 1)) bad("galerkin.theta", "must lie in (0, 1)");
  }
  check_K(c.K, c.T, "galerkin.K");
  for (std::size_t i = 0; i < c.K_grid.size(); ++i)
    check_K(c.K_grid[i], c.T, "galerkin.K_grid[" + std::to_string(i) + "]");

  if (auto r = member(j, "resonance")) {
    only_keys(*r, "resonance", {"ladder"});
    if (auto v = member(*r, "ladder")) {
      if (!v->is_array() || v->empty()) bad("resonance.ladder", "expected a non-empty array");
      c.ladder.clear();
      for (std::size_t i = 0; i < v->size(); ++i)
        c.ladder.push_back(integer((*v)[i], "resonance.ladder[" + std::to_string(i) + "]"));
    }
  }
  if (auto t = member(j, "types")) {
    if (t->is_string()) {
      const fs::path p = base / t->get<std::string>();
      if (!fs::exists(p)) bad("types", "file " + p.string() + " does not exist");
      c.type_rows = parse_type_rows(read_json(p));
    } else {
      c.type_rows = parse_type_rows(*t);
    }
  }
  if (auto o = member(j, "out_dir")) {
    if (!o->is_string()) bad("out_dir", "expected a string");
    c.out_dir = base / o->get<std::string>();
  } else {
    c.out_dir = base / c.out_dir;
  }
  if (auto sd = member(j, "seed")) {
    if (!sd->is_number_unsigned()) bad("seed", "expected a non-negative integer");
    c.seed = sd->get<std::uint64_t>();
  }
  return c;
}

RunConfig load_config(const fs::path& file) {
  const json j = read_json(file);
  return parse_config(j, file.has_parent_path() ? file.parent_path() : fs::path("."));
}

std::vector<double> effective_K_grid(const RunConfig& c) {
  if (!c.K_grid.empty()) return c.K_grid;
  std::vector<double> g;
  for (int i = 0; i < 5; ++i) g.push_back(c.K + 0.8 * i * kTwoPi / c.T);
  return g;
}

}  // namespace charlab

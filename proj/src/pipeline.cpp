#include "charlab/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "charlab/flow.hpp"

namespace charlab {

namespace fs = std::filesystem;
using nlohmann::json;

std::string describe_error(const std::exception& e) {
  const char* kind = "error";
  if (dynamic_cast<const NumericFailure*>(&e)) kind = "numeric-failure";
  else if (dynamic_cast<const DomainError*>(&e)) kind = "domain-error";
  else if (dynamic_cast<const ConstructionFailure*>(&e)) kind = "construction-failure";
  else if (dynamic_cast<const SearchFailure*>(&e)) kind = "search-failure";
  else if (dynamic_cast<const AmbiguityFailure*>(&e)) kind = "ambiguity";
  else if (dynamic_cast<const ConsistencyFailure*>(&e)) kind = "consistency-failure";
  else if (dynamic_cast<const IncompleteInput*>(&e)) kind = "incomplete-input";
  else if (dynamic_cast<const InvalidArgument*>(&e)) kind = "invalid-argument";
  return std::string(kind) + ": " + e.what();
}

namespace {

ClosedCharacteristic rebuild(const Hypersurface& s, const std::string& id, const Vec& start,
                             double prime_period, int samples, double tol) {
  FlowOptions fo;
  fo.samples = samples;
  fo.tol = tol;
  ClosedCharacteristic o;
  o.id = id;
  o.prime_period = prime_period;
  o.trajectory = integrate_flow(homogeneous_hamiltonian(s, 2.0), start, prime_period, fo);
  return o;
}

// SymplecticPath of the H = j^alpha flow along one prime period.
SymplecticPath index_path(const Hypersurface& s, const ClosedCharacteristic& o, double alpha,
                          int samples, double tol) {
  FlowOptions fo;
  fo.samples = samples;
  fo.tol = tol;
  const Hamiltonian h = homogeneous_hamiltonian(s, alpha);
  const Trajectory tr = integrate_flow(h, o.start(), 2.0 * o.prime_period / alpha, fo);
  return integrate_linearized(tr, h, fo);
}

}  // namespace

// ---------------------------------------------------------------------------
// orbits

OrbitsStage run_orbits_stage(const RunConfig& c, const Hypersurface& s) {
  OrbitsStage st;
  st.dim_n = s.dim_n();
  auto cat = ellipsoid_catalog(c.surface.radii, c.samples);
  st.warnings = cat.warnings;
  OrbitRegistry reg;
  for (std::size_t k = 0; k < cat.orbits.size(); ++k) {
    ClosedCharacteristic o = cat.orbits[k];
    if (c.surface.kind == "perturbed_ellipsoid") {
      ShootingOptions so;
      so.tol = c.closure_tol;
      so.samples = c.samples;
      o = shoot_for_orbit(s, cat.orbits[k].start(), cat.orbits[k].prime_period, so);
      o.id = "orbit-" + std::to_string(k + 1);
    }
    const auto added = reg.add(o);
    if (added.kind != OrbitRegistry::AddResult::added)
      st.warnings.push_back("seed " + std::to_string(k + 1) + " merged into " + added.id);
  }
  st.orbits = reg.orbits();
  st.complete = c.surface.kind == "ellipsoid" && cat.warnings.empty() &&
                st.orbits.size() == cat.orbits.size();
  for (const auto& o : st.orbits) st.closure_recheck.push_back(recheck_closure(s, o));
  return st;
}

json to_json(const OrbitsStage& st) {
  json orbits = json::array();
  for (std::size_t k = 0; k < st.orbits.size(); ++k) {
    const auto& o = st.orbits[k];
    json j = {{"id", o.id},
              {"prime_period", o.prime_period},
              {"normalized_period", o.normalized_period()},
              {"start", std::vector<double>(o.start().data(), o.start().data() + o.start().size())},
              {"provenance", to_string(o.provenance)},
              {"multiplicity_of_record", o.multiplicity_of_record},
              {"closure_residual", o.trajectory.closure_residual},
              {"closure_recheck", st.closure_recheck[k]},
              {"search_iterations", o.search_iterations}};
    orbits.push_back(j);
  }
  return {{"dim_n", st.dim_n},
          {"orbit_set_complete", st.complete},
          {"orbits", orbits},
          {"warnings", st.warnings}};
}

OrbitsStage orbits_from_json(const json& j, const Hypersurface& s, const RunConfig& c) {
  OrbitsStage st;
  try {
    st.dim_n = j.at("dim_n").get<int>();
    if (st.dim_n != s.dim_n()) throw UsageError("orbit file dimension does not match the surface");
    for (const auto& o : j.at("orbits")) {
      const auto v = o.at("start").get<std::vector<double>>();
      Vec x0 = Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
      auto orbit = rebuild(s, o.at("id").get<std::string>(), x0, o.at("prime_period").get<double>(),
                           c.samples, c.integrator_tol);
      const std::string prov = o.value("provenance", "analytic");
      orbit.provenance = prov == "shooting"   ? Provenance::shooting
                         : prov == "galerkin" ? Provenance::galerkin
                                              : Provenance::analytic;
      orbit.multiplicity_of_record = o.value("multiplicity_of_record", 1);
      st.orbits.push_back(orbit);
      st.closure_recheck.push_back(o.value("closure_recheck", 0.0));
    }
    st.warnings = j.value("warnings", std::vector<std::string>{});
    st.complete = j.value("orbit_set_complete", false);
  } catch (const json::exception& e) {
    throw UsageError(std::string("orbit registry: ") + e.what());
  }
  return st;
}

std::vector<Gate> orbit_gates(const OrbitsStage& st) {
  std::vector<Gate> g;
  double worst = 0.0;
  for (double r : st.closure_recheck) worst = std::max(worst, r);
  std::ostringstream os;
  os << "max closure residual " << worst << " over " << st.orbits.size() << " orbits";
  g.push_back({"closure", !st.orbits.empty() && worst <= 1e-8, os.str()});
  return g;
}

// ---------------------------------------------------------------------------
// index

IndexStage run_index_stage(const RunConfig& c, const Hypersurface& s, const OrbitsStage& orbits) {
  IndexStage st;
  st.dim_n = s.dim_n();
  st.orbit_set_complete = orbits.complete;
  const int n = s.dim_n();
  const int N_max = *std::max_element(c.ladder.begin(), c.ladder.end());
  for (const auto& o : orbits.orbits) {
    OrbitIndexData d;
    d.orbit_id = o.id;
    d.prime_period = o.prime_period;
    try {
      const SymplecticPath path = index_path(s, o, c.alpha, c.samples, c.integrator_tol);
      d.max_defect = path.max_defect;
      d.multipliers = floquet_multipliers(path);
      d.K_of_y = minimal_period_K(d.multipliers, c.angle_tol, c.q_max);
      d.rotation = rotation_mean_index(path);
      const SymplecticPath coarse =
          index_path(s, o, c.alpha, c.samples, std::min(1e-6, 100.0 * c.integrator_tol));
      d.rotation_coarse = rotation_mean_index(coarse);

      const int M = std::max({c.iterates, 2 * n + 2, 4 * d.K_of_y,
                              iterates_needed(d.rotation, d.K_of_y, n, N_max)});
      if (path.max_defect > 1e-8)
        throw NumericFailure("symplecticity defect above 1e-8", path.max_defect);
      IterateIndexer ix(path);
      for (int m = 1; m <= M; ++m) {
        const OmegaIndex r = ix.index(m);
        d.records.push_back({o.id, m, r.index - n, r.nullity});
      }
      const auto mi = mean_index(d.records, n, d.rotation, c.q_max, 1e-9);
      d.mean_index = mi.value;
      d.mean_index_rational = mi.rational;
      d.mean_index_error = mi.rational ? 0.0 : std::max(std::abs(d.rotation - d.rotation_coarse), 1e-12);
      d.slope = mi.slope;
      d.lower = mi.lower;
      d.upper = mi.upper;
      for (const auto& r : d.records) {
        if (std::abs(r.index_i - r.iterate_m * d.mean_index) > 2 * n + 1e-9) ++d.bott_violations;
        if (r.nullity_nu < 1 || r.nullity_nu > 2 * n - 1) ++d.nullity_violations;
      }
      check_index_records(d.records, n, d.mean_index, d.K_of_y);
    } catch (const std::exception& e) {
      d.failure = describe_error(e);
    }
    st.orbits.push_back(d);
  }
  return st;
}

json to_json(const IndexStage& st) {
  json orbits = json::array();
  for (const auto& d : st.orbits) {
    json rec = json::array();
    for (const auto& r : d.records) rec.push_back({r.iterate_m, r.index_i, r.nullity_nu});
    json mult = json::array();
    for (const auto& f : d.multipliers)
      mult.push_back({{"re", f.value.real()},
                      {"im", f.value.imag()},
                      {"multiplicity", f.multiplicity},
                      {"on_unit_circle", f.on_unit_circle},
                      {"angle", f.angle}});
    json j = {{"id", d.orbit_id},
              {"prime_period", d.prime_period},
              {"records", rec},
              {"rotation", d.rotation},
              {"rotation_coarse", d.rotation_coarse},
              {"mean_index", d.mean_index},
              {"mean_index_error", d.mean_index_error},
              {"slope", d.slope},
              {"feasible", {d.lower, d.upper}},
              {"K_of_y", d.K_of_y},
              {"multipliers", mult},
              {"max_symplectic_defect", d.max_defect},
              {"bott_violations", d.bott_violations},
              {"nullity_violations", d.nullity_violations},
              {"failure", d.failure}};
    if (d.mean_index_rational)
      j["mean_index_rational"] = {d.mean_index_rational->num, d.mean_index_rational->den};
    else
      j["mean_index_rational"] = nullptr;
    orbits.push_back(j);
  }
  return {{"dim_n", st.dim_n},
          {"orbit_set_complete", st.orbit_set_complete},
          {"records_format", {"m", "i", "nu"}},
          {"orbits", orbits}};
}

IndexStage index_from_json(const json& j) {
  IndexStage st;
  try {
    st.dim_n = j.at("dim_n").get<int>();
    st.orbit_set_complete = j.value("orbit_set_complete", false);
    for (const auto& o : j.at("orbits")) {
      OrbitIndexData d;
      d.orbit_id = o.at("id").get<std::string>();
      d.prime_period = o.at("prime_period").get<double>();
      for (const auto& r : o.at("records"))
        d.records.push_back({d.orbit_id, r.at(0).get<int>(), r.at(1).get<int>(), r.at(2).get<int>()});
      d.rotation = o.at("rotation").get<double>();
      d.rotation_coarse = o.at("rotation_coarse").get<double>();
      d.mean_index = o.at("mean_index").get<double>();
      d.mean_index_error = o.at("mean_index_error").get<double>();
      if (!o.at("mean_index_rational").is_null())
        d.mean_index_rational = RationalValue{o["mean_index_rational"][0].get<long long>(),
                                              o["mean_index_rational"][1].get<long long>()};
      d.slope = o.at("slope").get<double>();
      d.lower = o.at("feasible").at(0).get<double>();
      d.upper = o.at("feasible").at(1).get<double>();
      d.K_of_y = o.at("K_of_y").get<int>();
      for (const auto& f : o.at("multipliers")) {
        FloquetMultiplier fm;
        fm.value = {f.at("re").get<double>(), f.at("im").get<double>()};
        fm.multiplicity = f.at("multiplicity").get<int>();
        fm.on_unit_circle = f.at("on_unit_circle").get<bool>();
        fm.angle = f.at("angle").get<double>();
        d.multipliers.push_back(fm);
      }
      d.max_defect = o.at("max_symplectic_defect").get<double>();
      d.bott_violations = o.at("bott_violations").get<int>();
      d.nullity_violations = o.at("nullity_violations").get<int>();
      d.failure = o.at("failure").get<std::string>();
      st.orbits.push_back(d);
    }
  } catch (const json::exception& e) {
    throw UsageError(std::string("index report: ") + e.what());
  }
  return st;
}

std::vector<Gate> index_gates(const IndexStage& st) {
  std::vector<Gate> g;
  std::ostringstream fail;
  double defect = 0.0;
  int bott = 0, nul = 0, m_min = 1 << 30;
  for (const auto& d : st.orbits) {
    if (!d.failure.empty()) fail << d.orbit_id << ": " << d.failure << "; ";
    defect = std::max(defect, d.max_defect);
    bott += d.bott_violations;
    nul += d.nullity_violations;
    m_min = std::min<int>(m_min, d.records.size());
  }
  g.push_back({"index-computed", fail.str().empty(), fail.str()});
  g.push_back({"symplecticity", defect <= 1e-8, "max defect " + std::to_string(defect)});
  g.push_back({"bott-bound", bott == 0,
               std::to_string(bott) + " violations, m <= " + std::to_string(m_min)});
  g.push_back({"nullity-bounds", nul == 0, std::to_string(nul) + " violations"});
  return g;
}

}  // namespace charlab

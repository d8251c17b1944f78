#include <algorithm>
#include <cmath>
#include <sstream>

#include "charlab/flow.hpp"
#include "charlab/pipeline.hpp"

namespace charlab {

using nlohmann::json;

namespace {

Trajectory dense_orbit(const Hypersurface& s, const ClosedCharacteristic& o, double tol) {
  FlowOptions fo;
  fo.samples = 2000;
  fo.tol = tol;
  return integrate_flow(homogeneous_hamiltonian(s, 2.0), o.start(), o.prime_period, fo);
}

const OrbitIndexData* find_index(const IndexStage& st, const std::string& id) {
  for (const auto& d : st.orbits)
    if (d.orbit_id == id) return &d;
  return nullptr;
}

std::string str(const Rational& q) { return q.str(); }

}  // namespace

// ---------------------------------------------------------------------------
// galerkin

GalerkinStage run_galerkin_stage(const RunConfig& c, const Hypersurface& s,
                                 const OrbitsStage& orbits, const IndexStage& index) {
  GalerkinStage st;
  const int n = s.dim_n();
  const auto grid = effective_K_grid(c);
  std::vector<Trajectory> dense;
  for (const auto& o : orbits.orbits) dense.push_back(dense_orbit(s, o, c.integrator_tol));

  for (std::size_t k = 0; k < orbits.orbits.size(); ++k) {
    const auto& o = orbits.orbits[k];
    GalerkinOrbitData d;
    d.orbit_id = o.id;
    try {
      d.a = c.a ? *c.a : parameter_a_for(o, c.T, c.ratio);
      HamiltonianOptions ho;
      ho.seed = c.seed;
      const HamiltonianSpec base(s, d.a, c.T, make_aux_function(c.theta, c.alpha), grid.front(), ho);
      GalerkinOptions go;
      go.mode_cut = c.mode_cut;
      go.seed = c.seed;
      for (std::size_t g = 0; g < grid.size(); ++g) {
        const GalerkinSystem sys(g == 0 ? base : base.with_K(grid[g]), go);
        const auto gc = galerkin_critical_point(sys, s, galerkin_seed(sys, s, o));
        d.K.push_back(grid[g]);
        d.d_of_K.push_back(d_of_K(grid[g], c.T, n));
        d.morse_index.push_back(gc.morse_index);
        d.nullity.push_back(gc.nullity);
        d.critical_value.push_back(gc.critical_value);
        d.expected_value.push_back(sys.spec().critical_value_for_period(o.normalized_period()));
        d.grad_norm.push_back(gc.grad_norm);
        if (g == 0) {
          double best = 1e300;
          for (std::size_t r = 0; r < dense.size(); ++r) {
            const double dist = hausdorff_distance(gc.orbit.trajectory.states, dense[r].states);
            if (dist < best) {
              best = dist;
              d.matched_orbit = orbits.orbits[r].id;
            }
          }
          d.distance = hausdorff_distance(gc.orbit.trajectory.states, dense[k].states);
          d.period_error = std::abs(gc.orbit.prime_period - o.prime_period);
        }
      }
      const OrbitIndexData* idx = find_index(index, o.id);
      if (!idx || !idx->failure.empty() || idx->records.empty())
        throw IncompleteInput("no index data for " + o.id);
      d.path_index = idx->records.front().index_i;
      std::vector<GalerkinIndexSample> samples;
      for (std::size_t g = 0; g < d.K.size(); ++g)
        samples.push_back({d.K[g], d.morse_index[g], d.nullity[g]});
      try {
        d.k_shift_consistent =
            k_shift_audit(samples, c.T, n, d.path_index, idx->records.front().nullity_nu).consistent;
      } catch (const ConsistencyFailure& e) {
        d.k_shift_consistent = false;
        d.failure = describe_error(e);
      }
    } catch (const std::exception& e) {
      d.failure = describe_error(e);
    }
    st.orbits.push_back(d);
  }
  st.one_to_one = !st.orbits.empty();
  std::vector<std::string> seen;
  for (const auto& d : st.orbits) {
    if (d.matched_orbit != d.orbit_id ||
        std::find(seen.begin(), seen.end(), d.matched_orbit) != seen.end())
      st.one_to_one = false;
    seen.push_back(d.matched_orbit);
  }
  return st;
}

json to_json(const GalerkinStage& st) {
  json orbits = json::array();
  for (const auto& d : st.orbits) {
    orbits.push_back({{"id", d.orbit_id},
                      {"matched_orbit", d.matched_orbit},
                      {"a", d.a},
                      {"K", d.K},
                      {"d_of_K", d.d_of_K},
                      {"morse_index", d.morse_index},
                      {"nullity", d.nullity},
                      {"critical_value", d.critical_value},
                      {"expected_value", d.expected_value},
                      {"grad_norm", d.grad_norm},
                      {"distance", d.distance},
                      {"period_error", d.period_error},
                      {"path_index", d.path_index},
                      {"k_shift_consistent", d.k_shift_consistent},
                      {"failure", d.failure}});
  }
  return {{"orbits", orbits}, {"one_to_one", st.one_to_one}};
}

std::vector<Gate> galerkin_gates(const GalerkinStage& st) {
  std::vector<Gate> g;
  std::ostringstream fail;
  bool shift = true, negative = true;
  double value_err = 0.0, spread = 0.0, dist = 0.0;
  for (const auto& d : st.orbits) {
    if (!d.failure.empty()) fail << d.orbit_id << ": " << d.failure << "; ";
    shift = shift && d.k_shift_consistent;
    for (std::size_t k = 0; k < d.critical_value.size(); ++k) {
      value_err = std::max(value_err, std::abs(d.critical_value[k] - d.expected_value[k]));
      spread = std::max(spread, std::abs(d.critical_value[k] - d.critical_value.front()));
      negative = negative && d.critical_value[k] < 0;
    }
    dist = std::max(dist, d.distance);
  }
  std::ostringstream v, sp, ds;
  v << "max |F - closed form| " << value_err << (negative ? ", all negative" : ", NOT all negative");
  sp << "max spread over K " << spread;
  ds << "max Hausdorff gap " << dist << (st.one_to_one ? ", one-to-one" : ", NOT one-to-one");
  g.push_back({"galerkin-converged", fail.str().empty(), fail.str()});
  g.push_back({"k-shift", shift, "Morse index - d(K) equals the path index, nullity constant"});
  g.push_back({"critical-value", negative && value_err <= 1e-6, v.str()});
  g.push_back({"k-independence", spread <= 1e-8, sp.str()});
  g.push_back({"cross-validation", st.one_to_one && dist <= 1e-5, ds.str()});
  return g;
}

// ---------------------------------------------------------------------------
// resonance

ResonanceStage run_resonance_stage(const RunConfig& c, const IndexStage& index) {
  ResonanceStage st;
  const int n = index.dim_n;
  std::vector<OrbitResonanceInput> fine, coarse;
  std::vector<MorseOrbitData> morse;
  for (const auto& d : index.orbits) {
    OrbitResonanceData r;
    r.orbit_id = d.orbit_id;
    OrbitResonanceInput in{d.orbit_id, d.mean_index, d.mean_index_error, d.mean_index_rational,
                           std::nullopt, ""};
    if (!d.failure.empty()) {
      r.exclusion_reason = d.failure;
    } else {
      try {
        auto table = critical_type_numbers(d.records, d.K_of_y, n, c.type_rows);
        const auto e = euler_characteristics(table);
        r.chi = e.chi;
        r.chi_hat = e.chi_hat;
        const auto partial = chi_hat_partial_sums(table, d.records);
        r.partial_sums_exact = true;
        for (std::size_t N = d.K_of_y; N <= partial.size(); N += d.K_of_y)
          r.partial_sums_exact = r.partial_sums_exact && partial[N - 1] == e.chi_hat;
        in.chi_hat = e.chi_hat;
        MorseOrbitData md;
        md.orbit_id = d.orbit_id;
        md.table = table;
        for (const auto& rec : d.records) md.indices.push_back(rec.index_i);
        md.mean_index = d.mean_index;
        md.prime_period = 2.0 * d.prime_period;
        md.chi_hat = e.chi_hat;
        morse.push_back(md);
        r.table = std::move(table);
      } catch (const IncompleteInput& e) {
        r.exclusion_reason = describe_error(e);
      }
    }
    in.exclusion_reason = r.exclusion_reason;
    fine.push_back(in);
    OrbitResonanceInput cin = in;
    if (!cin.mean_index_rational) cin.mean_index = d.rotation_coarse;
    coarse.push_back(cin);
    st.orbits.push_back(std::move(r));
  }
  st.report = identity_check(fine, 1e-9, index.orbit_set_complete);
  st.S_plus_coarse_residual = identity_check(coarse, 1e-9, index.orbit_set_complete).S_plus_residual;
  const int C = 2 * n * n;
  std::vector<int> Ns = c.ladder;
  std::sort(Ns.begin(), Ns.end());
  st.ladder = morse_ladder(morse, n, c.T, C, Ns);
  for (const auto& row : st.ladder) st.series.push_back(morse_series(morse, n, row.a, c.T, C, row.N));
  return st;
}

json to_json(const ResonanceStage& st) {
  json orbits = json::array();
  for (std::size_t k = 0; k < st.orbits.size(); ++k) {
    const auto& r = st.orbits[k];
    const auto& t = st.report.terms[k];
    json rows = json::array();
    json notes = json::array();
    if (r.table) {
      for (const auto& row : r.table->rows)
        rows.push_back({{"m", row.m},
                        {"i", row.index_i},
                        {"nu", row.nullity},
                        {"k", row.k},
                        {"source", row.user_supplied ? "user" : "auto"}});
      notes = r.table->notes;
    }
    orbits.push_back({{"id", r.orbit_id},
                      {"K_of_y", r.table ? r.table->K_of_y : 0},
                      {"mean_index", t.mean_index},
                      {"chi", r.chi},
                      {"chi_hat", r.chi_hat ? json(str(*r.chi_hat)) : json(nullptr)},
                      {"chi_hat_value", r.chi_hat ? json(r.chi_hat->convert_to<double>()) : json(nullptr)},
                      {"role", t.role},
                      {"contribution", t.contribution},
                      {"partial_sums_exact", r.partial_sums_exact},
                      {"critical_types", rows},
                      {"notes", notes},
                      {"exclusion_reason", r.exclusion_reason}});
  }
  const auto& rep = st.report;
  json global = {{"S_plus", rep.S_plus},
                 {"S_plus_exact", rep.S_plus_exact ? json(str(*rep.S_plus_exact)) : json(nullptr)},
                 {"S_plus_error", rep.S_plus_error},
                 {"S_plus_residual", rep.S_plus_residual},
                 {"S_plus_coarse_residual", st.S_plus_coarse_residual},
                 {"S_zero", rep.S_zero},
                 {"S_zero_exact", rep.S_zero_exact ? json(str(*rep.S_zero_exact)) : json(nullptr)},
                 {"S_zero_error", rep.S_zero_error},
                 {"conditional", rep.conditional},
                 {"orbit_set_complete", rep.orbit_set_complete},
                 {"excluded_orbits", rep.excluded_orbits},
                 {"zero_mean_orbits", rep.zero_mean_orbits}};
  json ladder = json::array();
  for (std::size_t k = 0; k < st.ladder.size(); ++k) {
    const auto& row = st.ladder[k];
    const auto& s = st.series[k];
    ladder.push_back({{"N", row.N},
                      {"C", s.C},
                      {"a", row.a},
                      {"plus_at_minus_one", s.plus_at_minus_one},
                      {"minus_at_minus_one", s.minus_at_minus_one},
                      {"plus_ratio", row.plus_ratio},
                      {"minus_ratio", row.minus_ratio},
                      {"deviation", row.deviation},
                      {"C1", s.C1},
                      {"C2", row.C2},
                      {"within_C2", row.within},
                      {"term_bound_ok", s.term_bound_ok},
                      {"max_term_ratio", s.max_term_ratio}});
  }
  return {{"orbits", orbits}, {"identity", global}, {"morse_ladder", ladder}};
}

std::vector<Gate> resonance_gates(const ResonanceStage& st, const IndexStage& index, double tol) {
  std::vector<Gate> g;
  const auto& rep = st.report;
  std::ostringstream id;
  id.precision(3);
  id << std::scientific << "|S+ - 1/2| = " << rep.S_plus_residual << " (error bar " << rep.S_plus_error
     << ", tolerance " << tol << ")" << (rep.conditional ? ", conditional" : "");
  g.push_back({"identity-plus", rep.S_plus_residual <= tol, id.str()});

  bool any_negative = false;
  for (const auto& t : rep.terms) any_negative |= t.role == "negative";
  const bool zero_ok = any_negative || (rep.S_zero == 0.0 && (!rep.S_zero_exact || *rep.S_zero_exact == 0));
  g.push_back({"identity-zero", zero_ok,
               any_negative ? "orbits with negative mean index present"
                            : "no orbit with negative mean index; the sum is empty and equals 0"});

  bool partial = true;
  for (const auto& r : st.orbits)
    if (r.table) partial = partial && r.partial_sums_exact;
  g.push_back({"chi-partial-sums", partial, "partial averages hit chi^ at every multiple of K(y)"});

  const bool refine = rep.S_plus_residual <= st.S_plus_coarse_residual + 1e-12;
  std::ostringstream rf;
  rf << "fine " << rep.S_plus_residual << ", coarse " << st.S_plus_coarse_residual;
  g.push_back({"refinement", refine, rf.str()});

  bool c1 = true, c2 = true;
  for (std::size_t k = 0; k < st.series.size(); ++k) {
    c1 = c1 && st.series[k].term_bound_ok;
    for (const auto& [h, w] : st.series[k].w) c1 = c1 && w <= st.series[k].C1;
    c2 = c2 && st.ladder[k].within;
  }
  g.push_back({"morse-claim1", c1, "w_h within the per-term and global bounds"});
  g.push_back({"morse-claim2", c2, "|M(-1) - 2N S+| <= C2 on every ladder rung"});
  (void)index;
  return g;
}

}  // namespace charlab

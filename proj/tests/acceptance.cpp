// Acceptance run: one PASS/FAIL line per criterion, exit 0 iff all pass.
// Every quantity is recomputed from the stage data, not read off the gates.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "charlab/pipeline.hpp"
#include "table_oracle.hpp"

using namespace charlab;
using charlab::testing::broken_rules;

namespace {

struct SurfaceRun {
  std::string name;
  RunConfig config;
  int n = 1;
  OrbitsStage orbits;
  IndexStage index;
  std::optional<GalerkinStage> galerkin;
  std::optional<ResonanceStage> resonance;
  double seconds = 0.0;
  std::string failure;
};

bool has_stage(const RunConfig& c, const std::string& s) {
  return std::find(c.stages.begin(), c.stages.end(), s) != c.stages.end();
}

SurfaceRun run_surface(const std::string& name) {
  SurfaceRun r;
  r.name = name;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    r.config = load_config(std::filesystem::path(CHARLAB_CONFIG_DIR) / (name + ".json"));
    const Hypersurface s = build_surface(r.config.surface);
    r.n = s.dim_n();
    r.orbits = run_orbits_stage(r.config, s);
    r.index = run_index_stage(r.config, s, r.orbits);
    if (has_stage(r.config, "galerkin")) r.galerkin = run_galerkin_stage(r.config, s, r.orbits, r.index);
    r.resonance = run_resonance_stage(r.config, r.index);
  } catch (const std::exception& e) {
    r.failure = describe_error(e);
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void fail(const std::string& why) {
    if (pass) detail.str("");
    if (!pass) detail << "; ";
    pass = false;
    detail << why;
  }
};

// --- criteria -------------------------------------------------------------

Outcome circle_identity(const SurfaceRun& r) {
  Outcome o;
  if (!r.failure.empty()) { o.fail(r.failure); return o; }
  const auto& rep = r.resonance->report;
  if (rep.terms.size() != 1) o.fail("expected one prime orbit, got " + std::to_string(rep.terms.size()));
  if (rep.terms.empty() || !rep.terms[0].chi_hat) { o.fail("no chi^ for the orbit"); return o; }
  const double res = std::abs(rep.terms[0].contribution - 0.5);
  if (!(res <= 1e-8)) o.fail("|chi^/i^ - 1/2| = " + fmt("%.3g", res));
  if (!(r.seconds <= 5.0)) o.fail("runtime " + fmt("%.2f", r.seconds) + " s > 5 s");
  if (o.pass)
    o.detail << "|chi^/i^ - 1/2| = " << fmt("%.3g", res) << ", " << fmt("%.2f", r.seconds) << " s";
  return o;
}

Outcome ellipsoid_identity(const std::vector<const SurfaceRun*>& runs) {
  Outcome o;
  std::ostringstream ok;
  for (const auto* r : runs) {
    if (!r->failure.empty()) { o.fail(r->name + ": " + r->failure); continue; }
    const auto& rep = r->resonance->report;
    const double res = std::abs(rep.S_plus - 0.5);
    if (rep.conditional) o.fail(r->name + ": identity conditional");
    if (!(res <= 1e-6)) o.fail(r->name + ": |S+ - 1/2| = " + fmt("%.3g", res));
    if (!(r->seconds <= 120.0)) o.fail(r->name + ": runtime " + fmt("%.1f", r->seconds) + " s");
    ok << r->name << " (n=" << r->n << ") |S+ - 1/2| = " << fmt("%.2g", res)
       << (rep.S_plus_exact ? " exact" : " float") << ", " << fmt("%.1f", r->seconds) << " s  ";
  }
  if (o.pass) o.detail << ok.str();
  return o;
}

Outcome zero_sum(const std::vector<const SurfaceRun*>& runs) {
  Outcome o;
  for (const auto* r : runs) {
    if (!r->failure.empty()) { o.fail(r->name + ": " + r->failure); continue; }
    for (const auto& d : r->index.orbits)
      if (!(d.mean_index > 0)) o.fail(r->name + "/" + d.orbit_id + ": i^ = " + fmt("%.6g", d.mean_index));
    const auto& rep = r->resonance->report;
    if (!rep.S_zero_exact || *rep.S_zero_exact != 0 || rep.S_zero != 0.0)
      o.fail(r->name + ": S0 not reported as exactly 0");
  }
  if (o.pass) o.detail << "S0 = 0 (empty sum) on " << runs.size() << " convex surfaces";
  return o;
}

Outcome bott_bound(const std::vector<const SurfaceRun*>& runs) {
  Outcome o;
  int checked = 0;
  double worst = 0.0;
  for (const auto* r : runs) {
    if (!r->failure.empty()) { o.fail(r->name + ": " + r->failure); continue; }
    for (const auto& d : r->index.orbits) {
      if (d.records.size() < 100)
        o.fail(r->name + "/" + d.orbit_id + ": only " + std::to_string(d.records.size()) + " iterates");
      for (const auto& rec : d.records) {
        if (rec.iterate_m > 100) break;
        const double dev = std::abs(rec.index_i - rec.iterate_m * d.mean_index);
        worst = std::max(worst, dev / (2 * r->n));
        ++checked;
        if (dev > 2 * r->n + 1e-9)
          o.fail(r->name + "/" + d.orbit_id + " m=" + std::to_string(rec.iterate_m) + ": " + fmt("%.4g", dev));
      }
    }
  }
  if (o.pass) o.detail << checked << " iterates, max |i - m i^| / 2n = " << fmt("%.3f", worst);
  return o;
}

Outcome nullity_bounds(const std::vector<const SurfaceRun*>& runs) {
  Outcome o;
  int checked = 0;
  for (const auto* r : runs) {
    if (!r->failure.empty()) { o.fail(r->name + ": " + r->failure); continue; }
    for (const auto& d : r->index.orbits)
      for (const auto& rec : d.records) {
        ++checked;
        if (rec.nullity_nu < 1 || rec.nullity_nu > 2 * r->n - 1)
          o.fail(r->name + "/" + d.orbit_id + " m=" + std::to_string(rec.iterate_m) +
                 ": nu = " + std::to_string(rec.nullity_nu));
      }
  }
  if (o.pass) o.detail << checked << " iterates in [1, 2n-1]";
  return o;
}

Outcome k_audits(const std::vector<const SurfaceRun*>& runs) {
  Outcome o;
  double spread = 0.0, fmax = -1e300;
  int orbits = 0;
  for (const auto* r : runs) {
    if (!r->failure.empty()) { o.fail(r->name + ": " + r->failure); continue; }
    if (!r->galerkin) { o.fail(r->name + ": no Galerkin stage"); continue; }
    for (const auto& g : r->galerkin->orbits) {
      const std::string tag = r->name + "/" + g.orbit_id;
      if (!g.failure.empty()) { o.fail(tag + ": " + g.failure); continue; }
      if (g.K.size() != 5) o.fail(tag + ": K grid has " + std::to_string(g.K.size()) + " points");
      const auto it = std::find_if(r->index.orbits.begin(), r->index.orbits.end(),
                                   [&](const OrbitIndexData& d) { return d.orbit_id == g.matched_orbit; });
      if (it == r->index.orbits.end() || it->records.empty()) { o.fail(tag + ": no index data"); continue; }
      const int i1 = it->records.front().index_i;
      std::set<int> jumps;
      for (std::size_t k = 0; k < g.K.size(); ++k) {
        if (g.nullity[k] != g.nullity[0]) o.fail(tag + ": nullity varies over K");
        if (g.morse_index[k] - g.d_of_K[k] != i1)
          o.fail(tag + " K=" + fmt("%.4g", g.K[k]) + ": Morse index - d(K) = " +
                 std::to_string(g.morse_index[k] - g.d_of_K[k]) + ", path index " + std::to_string(i1));
        jumps.insert(g.d_of_K[k]);
        spread = std::max(spread, std::abs(g.critical_value[k] - g.critical_value[0]));
        fmax = std::max(fmax, g.critical_value[k]);
      }
      if (jumps.size() < 2) o.fail(tag + ": K grid never changes d(K)");
      ++orbits;
    }
  }
  if (!(spread <= 1e-8)) o.fail("critical value spread over K " + fmt("%.3g", spread));
  if (!(fmax < 0)) o.fail("critical value not negative: " + fmt("%.3g", fmax));
  if (o.pass)
    o.detail << orbits << " orbits: nullity constant, Morse - d(K) = i(y), F spread " << fmt("%.2g", spread)
             << ", max F " << fmt("%.4g", fmax);
  return o;
}

Outcome periodicity(const std::vector<const SurfaceRun*>& runs) {
  Outcome o;
  int pairs = 0, sums = 0;
  for (const auto* r : runs) {
    if (!r->failure.empty()) { o.fail(r->name + ": " + r->failure); continue; }
    for (const auto& d : r->index.orbits) {
      const std::string tag = r->name + "/" + d.orbit_id;
      const int K = d.K_of_y;
      if (static_cast<int>(d.records.size()) < 4 * K) { o.fail(tag + ": fewer than 4K iterates"); continue; }
      for (int p = 1; p <= 3 * K; ++p, ++pairs) {
        const auto& a = d.records[p - 1];
        const auto& b = d.records[p + K - 1];
        if (a.nullity_nu != b.nullity_nu) o.fail(tag + " p=" + std::to_string(p) + ": nullity");
        if ((b.index_i - a.index_i) % 2 != 0) o.fail(tag + " p=" + std::to_string(p) + ": parity");
      }
    }
    for (const auto& od : r->resonance->orbits) {
      if (!od.table) continue;  // excluded orbit: no table to sum
      const auto it = std::find_if(r->index.orbits.begin(), r->index.orbits.end(),
                                   [&](const OrbitIndexData& d) { return d.orbit_id == od.orbit_id; });
      const auto partial = chi_hat_partial_sums(*od.table, it->records);
      const int K = od.table->K_of_y;
      for (int N = K; N <= static_cast<int>(partial.size()); N += K, ++sums)
        if (partial[N - 1] != *od.chi_hat)
          o.fail(r->name + "/" + od.orbit_id + ": partial sum at N=" + std::to_string(N));
    }
  }
  if (o.pass) o.detail << pairs << " (p, p+K) pairs; " << sums << " partial sums equal chi^ exactly";
  return o;
}

Outcome cross_validation(const std::vector<const SurfaceRun*>& runs) {
  Outcome o;
  double dist = 0.0, cv = 0.0;
  for (const auto* r : runs) {
    if (!r->failure.empty()) { o.fail(r->name + ": " + r->failure); continue; }
    if (!r->galerkin) { o.fail(r->name + ": no Galerkin stage"); continue; }
    const auto& g = *r->galerkin;
    std::set<std::string> matched;
    for (const auto& d : g.orbits) {
      if (!d.failure.empty()) { o.fail(r->name + "/" + d.orbit_id + ": " + d.failure); continue; }
      matched.insert(d.matched_orbit);
      dist = std::max(dist, d.distance);
      for (std::size_t k = 0; k < d.critical_value.size(); ++k)
        cv = std::max(cv, std::abs(d.critical_value[k] - d.expected_value[k]));
    }
    if (g.orbits.size() != r->orbits.orbits.size() || matched.size() != g.orbits.size())
      o.fail(r->name + ": Galerkin and shooting orbit sets are not one-to-one");
  }
  if (!(dist <= 1e-5)) o.fail("trajectory distance " + fmt("%.3g", dist));
  if (!(cv <= 1e-6)) o.fail("critical value error " + fmt("%.3g", cv));
  if (o.pass) o.detail << "one-to-one, distance " << fmt("%.2g", dist) << ", |F - closed form| " << fmt("%.2g", cv);
  return o;
}

Outcome morse(const std::vector<const SurfaceRun*>& runs) {
  Outcome o;
  std::ostringstream ok;
  for (const auto* r : runs) {
    if (!r->failure.empty()) { o.fail(r->name + ": " + r->failure); continue; }
    const auto& st = *r->resonance;
    std::vector<int> Ns;
    for (const auto& row : st.ladder) Ns.push_back(row.N);
    if (Ns != std::vector<int>{50, 100, 200}) o.fail(r->name + ": ladder is not N = 50, 100, 200");
    for (const auto& s : st.series) {
      if (!s.term_bound_ok) o.fail(r->name + " N=" + std::to_string(s.N) + ": per-term bound");
      for (const auto& [h, w] : s.w)
        if (std::abs(static_cast<double>(w)) > s.C1 + 1e-12)
          o.fail(r->name + " N=" + std::to_string(s.N) + ": |w_" + std::to_string(h) + "| > C1");
    }
    const double S = st.report.S_plus;
    double prev_minus = 1e300, prev_dev = 1e300;
    for (const auto& row : st.ladder) {
      const double dev = std::abs(row.plus_ratio - S);
      if (!(dev <= row.C2 / (2.0 * row.N)))
        o.fail(r->name + " N=" + std::to_string(row.N) + ": |ratio - S+| = " + fmt("%.3g", dev));
      if (dev > prev_dev + 1e-15) o.fail(r->name + " N=" + std::to_string(row.N) + ": ratio moved away from S+");
      prev_dev = dev;
      if (std::abs(row.minus_ratio) > prev_minus + 1e-15 || std::abs(row.minus_ratio) > row.C2 / (2.0 * row.N))
        o.fail(r->name + " N=" + std::to_string(row.N) + ": negative range not tending to 0");
      prev_minus = std::abs(row.minus_ratio);
    }
    if (!st.ladder.empty())
      ok << r->name << " M/2N: " << fmt("%.4f", st.ladder.front().plus_ratio) << " -> "
         << fmt("%.4f", st.ladder.back().plus_ratio) << "  ";
  }
  if (o.pass) o.detail << ok.str();
  return o;
}

Outcome hygiene(const std::vector<const SurfaceRun*>& runs) {
  Outcome o;
  double defect = 0.0;
  for (const auto* r : runs) {
    if (!r->failure.empty()) { o.fail(r->name + ": " + r->failure); continue; }
    for (const auto& d : r->index.orbits) defect = std::max(defect, d.max_defect);
  }
  if (!(defect <= 1e-8)) o.fail("symplecticity defect " + fmt("%.3g", defect));

  // randomized tables against the independent classifier
  std::mt19937_64 rng(20260501);
  std::set<TableRule> cited;
  int rejected = 0, wrong = 0;
  for (int t = 0; t < 50000; ++t) {
    const int n = 1 + rng() % 3;
    const int nu = 1 + rng() % (2 * n - 1);
    std::vector<int> k(2 * n - 1 + (rng() % 8 == 0 ? 1 : 0));
    for (auto& v : k) {
      const int x = rng() % 10;
      v = x < 5 ? 0 : (x < 8 ? 1 : (x < 9 ? 2 : -1));
    }
    const auto broken = broken_rules(k, nu, n);
    try {
      validate_type_vector(k, nu, n);
      if (!broken.empty()) ++wrong;
    } catch (const TableRuleViolation& e) {
      ++rejected;
      cited.insert(e.rules().begin(), e.rules().end());
      const std::set<TableRule> got(e.rules().begin(), e.rules().end());
      if (got != charlab::testing::expected_citation(broken)) ++wrong;
    }
  }
  // table-level rules: parity auto-fill and K(y)-periodicity
  for (int t = 0; t < 200; ++t) {
    const int i1 = rng() % 7, step = 2 + rng() % 5;
    std::vector<IndexRecord> rec;
    for (int m = 1; m <= 8; ++m) rec.push_back({"y", m, i1 + (m - 1) * step, m % 2 == 0 ? 3 : 1});
    try {  // nu = 1 row with the wrong k_0
      critical_type_numbers(rec, 2, 2, {{"y", 1, {0, 0, 0}}, {"y", 2, {0, 1, 0}}});
      ++wrong;
    } catch (const TableRuleViolation& e) {
      cited.insert(e.rule());
      wrong += e.rule() != TableRule::nondegenerate;
    }
    try {  // y^2 and y^4 disagree
      critical_type_numbers(rec, 2, 2, {{"y", 2, {0, 1, 0}}, {"y", 4, {0, 0, 1}}});
      ++wrong;
    } catch (const TableRuleViolation& e) {
      cited.insert(e.rule());
      wrong += e.rule() != TableRule::periodicity;
    }
  }
  if (wrong) o.fail(std::to_string(wrong) + " tables accepted or rejected under the wrong rule");
  if (cited.size() != 10) {
    std::string names;
    for (const auto& r : cited) names += " " + to_string(r);
    o.fail("only " + std::to_string(cited.size()) + " of 10 rules cited:" + names);
  }
  if (o.pass)
    o.detail << "defect " << fmt("%.2g", defect) << "; " << rejected + 400
             << " invalid tables rejected citing exactly the broken rules (all 10 rules seen)";
  return o;
}

}  // namespace

int main() {
  std::map<std::string, SurfaceRun> runs;
  for (const char* name : {"circle", "ellipsoid2", "ellipsoid3", "perturbed2", "resonant2"}) {
    runs[name] = run_surface(name);
    std::printf("# %-11s %6.2f s%s%s\n", name, runs[name].seconds, runs[name].failure.empty() ? "" : "  ",
                runs[name].failure.c_str());
    std::fflush(stdout);
  }
  auto pick = [&](std::initializer_list<const char*> names) {
    std::vector<const SurfaceRun*> v;
    for (const char* n : names) v.push_back(&runs[n]);
    return v;
  };
  const auto shipped = pick({"circle", "ellipsoid2", "ellipsoid3", "perturbed2", "resonant2"});

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"circle resonance identity", [&] { return circle_identity(runs["circle"]); }},
      {"ellipsoid resonance identity, n = 2, 3", [&] { return ellipsoid_identity(pick({"ellipsoid2", "ellipsoid3"})); }},
      {"negative-index sum is exactly 0", [&] { return zero_sum(shipped); }},
      {"Bott-type bound, m <= 100", [&] { return bott_bound(shipped); }},
      {"nullity bounds", [&] { return nullity_bounds(shipped); }},
      {"K-independence audits",
       [&] { return k_audits(pick({"circle", "ellipsoid2", "ellipsoid3", "perturbed2"})); }},
      {"periodicity and partial sums", [&] { return periodicity(shipped); }},
      {"Galerkin-shooting cross-validation, n <= 2",
       [&] { return cross_validation(pick({"circle", "ellipsoid2"})); }},
      {"Morse series diagnostics", [&] { return morse(pick({"circle", "ellipsoid2", "ellipsoid3"})); }},
      {"numerical hygiene", [&] { return hygiene(shipped); }},
  };
  int failures = 0;
  for (std::size_t c = 0; c < criteria.size(); ++c) {
    const Outcome o = criteria[c].second();
    failures += !o.pass;
    std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", c + 1, criteria[c].first.c_str(),
                o.detail.str().c_str());
  }
  std::printf("%s (%d of %zu criteria failed)\n", failures ? "FAILED" : "ALL PASSED", failures, criteria.size());
  return failures ? 1 : 0;
}

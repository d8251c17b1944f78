#include "charlab/resonance.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <tuple>

namespace charlab {

std::string to_string(TableRule rule) {
  switch (rule) {
    case TableRule::length: return "length";
    case TableRule::nonnegative: return "nonnegative";
    case TableRule::support: return "support";
    case TableRule::endpoint_binary: return "endpoint-binary";
    case TableRule::rule_i: return "rule-i";
    case TableRule::rule_ii: return "rule-ii";
    case TableRule::rule_iii: return "rule-iii";
    case TableRule::rule_iv: return "rule-iv";
    case TableRule::nondegenerate: return "nondegenerate";
    case TableRule::periodicity: return "periodicity";
  }
  return "?";
}

namespace {

std::string show(const std::vector<int>& k) {
  std::ostringstream os;
  os << "(";
  for (std::size_t l = 0; l < k.size(); ++l) os << (l ? ", " : "") << k[l];
  os << ")";
  return os.str();
}

bool even(int x) { return x % 2 == 0; }

}  // namespace

void validate_type_vector(const std::vector<int>& k, int nu, int n) {
  const std::string where = "k = " + show(k) + ", nu = " + std::to_string(nu);
  if (nu < 1 || nu > 2 * n - 1)
    throw InvalidArgument("nullity " + std::to_string(nu) + " outside [1, 2n-1]");
  if (static_cast<int>(k.size()) > 2 * n - 1)
    throw TableRuleViolation(TableRule::length, where + ": at most 2n-1 entries");
  for (int v : k)
    if (v < 0) throw TableRuleViolation(TableRule::nonnegative, where);
  auto at = [&](int l) { return l < static_cast<int>(k.size()) ? k[l] : 0; };
  std::vector<TableRule> broken;
  std::string why;
  auto flag = [&](TableRule r, const std::string& what) {
    if (std::find(broken.begin(), broken.end(), r) != broken.end()) return;
    broken.push_back(r);
    why += "; " + what;
  };
  for (int l = nu; l < static_cast<int>(k.size()); ++l)
    if (k[l] != 0) flag(TableRule::support, "k_" + std::to_string(l) + " must vanish for l >= nu");
  const int top = nu - 1;
  if (at(0) > 1 || at(top) > 1) flag(TableRule::endpoint_binary, "k_0 and k_{nu-1} are 0 or 1");
  if (at(0) == 1)
    for (int l = 1; l <= top; ++l)
      if (at(l) != 0) flag(TableRule::rule_i, "k_0 = 1 but k_" + std::to_string(l) + " != 0");
  if (top > 0 && at(top) == 1)
    for (int l = 0; l < top; ++l)
      if (at(l) != 0) flag(TableRule::rule_ii, "k_{nu-1} = 1 but k_" + std::to_string(l) + " != 0");
  for (int l = 1; l < top; ++l)
    if (at(l) >= 1 && (at(0) != 0 || at(top) != 0))
      flag(TableRule::rule_iii, "middle k_" + std::to_string(l) + " with nonzero endpoint");
  if (nu <= 3) {
    int nonzero = 0;
    for (int l = 0; l < nu; ++l) nonzero += at(l) != 0;
    if (nonzero > 1) flag(TableRule::rule_iv, "only one k_l may be nonzero for nu <= 3");
  }
  if (!broken.empty()) throw TableRuleViolation(broken, where + why);
}

CriticalTypeTable critical_type_numbers(const std::vector<IndexRecord>& records, int K, int n,
                                        const std::vector<UserTypeEntry>& user) {
  if (K < 1) throw InvalidArgument("K(y) must be positive");
  auto record = [&](int m) -> const IndexRecord* {
    for (const auto& r : records)
      if (r.iterate_m == m) return &r;
    return nullptr;
  };
  const IndexRecord* first = record(1);
  if (!first) throw IncompleteInput("index record for m = 1 missing");
  CriticalTypeTable t;
  t.orbit_id = first->orbit_id;
  t.dim_n = n;
  t.K_of_y = K;

  std::map<int, std::vector<int>> given;
  for (const auto& u : user) {
    if (u.orbit_id != t.orbit_id) continue;
    if (u.m < 1) throw InvalidArgument("user row with m < 1");
    std::vector<int> k = u.k;
    k.resize(std::max<std::size_t>(k.size(), 2 * n - 1), 0);
    if (given.count(u.m) && given[u.m] != k)
      throw InvalidArgument("conflicting user rows for m = " + std::to_string(u.m));
    given[u.m] = k;
  }

  std::vector<std::string> missing;
  for (int m = 1; m <= K; ++m) {
    const IndexRecord* r = record(m);
    if (!r) throw IncompleteInput("index record for m = " + std::to_string(m) + " missing");
    CriticalTypeRow row;
    row.m = m;
    row.index_i = r->index_i;
    row.nullity = r->nullity_nu;
    std::vector<int> auto_k(2 * n - 1, 0);
    if (row.nullity == 1 && even(row.index_i - first->index_i)) auto_k[0] = 1;
    auto it = given.find(m);
    if (it != given.end()) {
      validate_type_vector(it->second, row.nullity, n);
      if (row.nullity == 1 && it->second != auto_k)
        throw TableRuleViolation(TableRule::nondegenerate,
                                 "m = " + std::to_string(m) + ": k = " + show(it->second) +
                                     " but the nondegenerate iterate forces " + show(auto_k));
      row.k = it->second;
      row.user_supplied = true;
    } else if (row.nullity == 1) {
      row.k = auto_k;
    } else {
      missing.push_back(std::to_string(m));
      continue;
    }
    validate_type_vector(row.k, row.nullity, n);
    if (row.nullity >= 4)
      t.notes.push_back("m = " + std::to_string(m) + ": nu >= 4, rows validate but are not determined");
    t.rows.push_back(row);
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& s : missing) list += (list.empty() ? "" : ", ") + s;
    throw IncompleteInput("orbit " + t.orbit_id + ": degenerate iterates m = " + list +
                          " need user critical type rows");
  }
  for (const auto& [m, k] : given) {
    if (m <= K) continue;
    const auto& base = t.rows[(m - 1) % K].k;
    if (k != base)
      throw TableRuleViolation(TableRule::periodicity,
                               "m = " + std::to_string(m) + ": k = " + show(k) + " differs from m = " +
                                   std::to_string((m - 1) % K + 1) + ": " + show(base));
  }
  return t;
}

EulerCharacteristics euler_characteristics(const CriticalTypeTable& t) {
  EulerCharacteristics e;
  Rational sum = 0;
  for (const auto& row : t.rows) {
    int chi = 0;
    for (std::size_t l = 0; l < row.k.size(); ++l)
      chi += (even(row.index_i + static_cast<int>(l)) ? 1 : -1) * row.k[l];
    e.chi.push_back(chi);
    sum += chi;
  }
  e.chi_hat = t.rows.empty() ? Rational(0) : sum / Rational(t.K_of_y);
  return e;
}

std::vector<Rational> chi_hat_partial_sums(const CriticalTypeTable& t,
                                           const std::vector<IndexRecord>& records) {
  std::vector<Rational> out;
  Rational sum = 0;
  int N = 0;
  for (const auto& r : records) {
    if (r.iterate_m != N + 1) throw InvalidArgument("records must be consecutive from m = 1");
    ++N;
    const auto& k = t.k_at(N);
    for (std::size_t l = 0; l < k.size(); ++l)
      sum += (even(r.index_i + static_cast<int>(l)) ? 1 : -1) * k[l];
    out.push_back(sum / Rational(N));
  }
  return out;
}

// ---------------------------------------------------------------------------

ResonanceReport identity_check(const std::vector<OrbitResonanceInput>& orbits, double zero_tol,
                               bool orbit_set_complete) {
  ResonanceReport rep;
  rep.orbit_set_complete = orbit_set_complete;
  rep.conditional = !orbit_set_complete;
  bool exact_plus = true, exact_zero = true;  // an empty sum is exact
  Rational sp = 0, s0 = 0;
  for (const auto& o : orbits) {
    OrbitResonanceTerm term;
    term.orbit_id = o.orbit_id;
    term.mean_index = o.mean_index;
    term.chi_hat = o.chi_hat;
    if (!o.chi_hat) {
      term.role = "excluded";
      rep.conditional = true;
      rep.excluded_orbits.push_back(o.orbit_id);
      rep.terms.push_back(term);
      continue;
    }
    const bool zero = o.mean_index_rational ? o.mean_index_rational->num == 0
                                            : std::abs(o.mean_index) <= zero_tol;
    if (zero) {
      term.role = "zero";
      rep.zero_mean_orbits.push_back(o.orbit_id);
      rep.terms.push_back(term);
      continue;
    }
    const double chi = o.chi_hat->convert_to<double>();
    term.contribution = chi / o.mean_index;
    const double err = std::abs(chi) * o.mean_index_error / (o.mean_index * o.mean_index);
    const bool positive = o.mean_index > 0;
    term.role = positive ? "positive" : "negative";
    (positive ? rep.S_plus : rep.S_zero) += term.contribution;
    (positive ? rep.S_plus_error : rep.S_zero_error) += err;
    if (o.mean_index_rational) {
      const Rational q(o.mean_index_rational->num, o.mean_index_rational->den);
      (positive ? sp : s0) += *o.chi_hat / q;
    } else {
      (positive ? exact_plus : exact_zero) = false;
    }
    rep.terms.push_back(term);
  }
  if (exact_plus) {
    rep.S_plus_exact = sp;
    rep.S_plus = sp.convert_to<double>();
    rep.S_plus_error = 0.0;
  }
  if (exact_zero) {
    rep.S_zero_exact = s0;
    rep.S_zero = s0.convert_to<double>();
    rep.S_zero_error = 0.0;
  }
  rep.S_plus_residual = std::abs(rep.S_plus - 0.5);
  return rep;
}

// ---------------------------------------------------------------------------

namespace {

int window_end(double a, double T, double tau) {
  // largest m with m < aT/tau
  const double x = a * T / tau;
  int m = static_cast<int>(std::ceil(x - 1e-12)) - 1;
  return std::max(m, 0);
}

}  // namespace

int iterates_needed(double mean_index, int K, int n, int N) {
  if (mean_index == 0.0) return K;
  return static_cast<int>(std::ceil((2.0 * N + 4.0 * n) / std::abs(mean_index))) + K + 1;
}

double sufficient_a(const std::vector<MorseOrbitData>& orbits, int n, double T, int N) {
  double a = 0.0;
  for (const auto& o : orbits) {
    a = std::max(a, 10.0 * o.prime_period / T);
    if (o.mean_index == 0.0) continue;
    const int m = iterates_needed(o.mean_index, o.table.K_of_y, n, N);
    a = std::max(a, o.prime_period * m / T);
  }
  return a;
}

MorseSeries morse_series(const std::vector<MorseOrbitData>& orbits, int n, double a, double T,
                         int C, int N) {
  if (C < 0 || N <= C) throw InvalidArgument("need 0 <= C < N");
  MorseSeries s;
  s.C = C;
  s.N = N;
  s.a = a;
  s.T = T;
  auto in_plus = [&](int h) { return h >= 2 * C && h <= 2 * N; };
  auto in_minus = [&](int h) { return h <= -2 * C && h >= -2 * N; };
  double sp = 0.0, sm = 0.0;
  for (const auto& o : orbits) {
    if (o.prime_period <= 0) throw InvalidArgument("orbit " + o.orbit_id + ": bad prime period");
    const int K = o.table.K_of_y;
    const bool contributes = std::abs(o.mean_index) > 1e-9;
    if (contributes) {
      (o.mean_index > 0 ? sp : sm) += o.chi_hat.convert_to<double>() / o.mean_index;
    }
    // Iterates with i^ = 0 stay inside |i| <= 4n - 2 < 2C and never reach the window.
    if (!contributes && C >= 2 * n * n) continue;
    // Beyond m |i^| > 2N + 4n the bound |i(y^m) - m i^| <= 2n keeps i + l outside [-2N, 2N].
    int m_end = window_end(a, T, o.prime_period);
    if (contributes)
      m_end = std::min(m_end, static_cast<int>(std::floor((2.0 * N + 4.0 * n) / std::abs(o.mean_index))) + 1);
    if (static_cast<int>(o.indices.size()) < m_end)
      throw IncompleteInput("orbit " + o.orbit_id + ": index data up to m = " +
                            std::to_string(o.indices.size()) + " but the window needs m = " +
                            std::to_string(m_end));
    // term counts per (m0, l, h) for the Claim 1 check
    std::map<std::tuple<int, int, int>, long long> term;
    for (int m = 1; m <= m_end; ++m) {
      const auto& k = o.table.k_at(m);
      for (int l = 0; l < static_cast<int>(k.size()); ++l) {
        if (k[l] == 0) continue;
        const int h = o.indices[m - 1] + l;
        if (!in_plus(h) && !in_minus(h)) continue;
        s.w[h] += k[l];
        term[{(m - 1) % K, l, h}] += 1;
      }
    }
    if (contributes) {
      const double bound = 4.0 * n / (K * std::abs(o.mean_index)) + 2.0;
      for (const auto& [key, count] : term) {
        s.max_term_ratio = std::max(s.max_term_ratio, count / bound);
        if (count > bound + 1e-12) s.term_bound_ok = false;
      }
      for (int m0 = 1; m0 <= K; ++m0)
        for (int kl : o.table.k_at(m0)) {
          s.C1 += kl * bound;
          s.C2 += kl * ((2.0 * C + 4.0 * n) / (K * std::abs(o.mean_index)) + 1.0);
        }
    }
  }
  for (const auto& [h, w] : s.w) {
    const long long sign = (h % 2 == 0) ? 1 : -1;
    if (in_plus(h)) s.plus_at_minus_one += sign * w;
    if (in_minus(h)) s.minus_at_minus_one += sign * w;
  }
  s.plus_expected = 2.0 * N * sp;
  s.minus_expected = 2.0 * N * sm;
  return s;
}

std::vector<LadderRow> morse_ladder(const std::vector<MorseOrbitData>& orbits, int n, double T,
                                    int C, const std::vector<int>& Ns) {
  std::vector<LadderRow> rows;
  for (int N : Ns) {
    LadderRow r;
    r.N = N;
    r.a = sufficient_a(orbits, n, T, N);
    const auto s = morse_series(orbits, n, r.a, T, C, N);
    r.plus_ratio = s.plus_at_minus_one / (2.0 * N);
    r.minus_ratio = s.minus_at_minus_one / (2.0 * N);
    r.deviation = std::abs(s.plus_at_minus_one - s.plus_expected);
    r.C2 = s.C2;
    r.within = r.deviation <= s.C2 && std::abs(s.minus_at_minus_one - s.minus_expected) <= s.C2;
    rows.push_back(r);
  }
  return rows;
}

void write_morse_csv(const MorseSeries& s, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw InvalidArgument("cannot write " + path);
  f << "h,w_h\n";
  for (const auto& [h, w] : s.w) f << h << "," << w << "\n";
}

}  // namespace charlab

#pragma once

// Critical type numbers, Euler characteristics, the resonance sums
//   S+ = sum_{i^ > 0} chi^/i^,  S0 = sum_{i^ < 0} chi^/i^
// and the truncated Morse series evaluated at t = -1.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "charlab/errors.hpp"
#include "charlab/index.hpp"

namespace charlab {

using Rational = boost::multiprecision::cpp_rational;

enum class TableRule {
  length,          // more than 2n - 1 entries
  nonnegative,
  support,         // k_l = 0 outside [0, nu - 1]
  endpoint_binary, // k_0, k_{nu-1} in {0, 1}
  rule_i,          // k_0 = 1 kills the rest
  rule_ii,         // k_{nu-1} = 1 kills the rest
  rule_iii,        // a middle k_l forces k_0 = k_{nu-1} = 0
  rule_iv,         // nu <= 3: at most one nonzero
  nondegenerate,   // nu = 1 entries must match the parity auto-fill
  periodicity,     // k_l(y^{m+K}) = k_l(y^m)
};
std::string to_string(TableRule rule);

class TableRuleViolation : public InvalidArgument {
 public:
  TableRuleViolation(TableRule rule, const std::string& what)
      : TableRuleViolation(std::vector<TableRule>{rule}, what) {}
  /// Several rules can fail at once; rules() lists all of them, rule() the first.
  TableRuleViolation(std::vector<TableRule> rules, const std::string& what)
      : InvalidArgument(join(rules) + ": " + what), rules_(std::move(rules)) {}
  TableRule rule() const noexcept { return rules_.front(); }
  const std::vector<TableRule>& rules() const noexcept { return rules_; }

 private:
  static std::string join(const std::vector<TableRule>& rules) {
    std::string out;
    for (auto r : rules) out += (out.empty() ? "" : ", ") + to_string(r);
    return out;
  }
  std::vector<TableRule> rules_;
};

/// Checks k = (k_0, ..., k_{2n-2}) against the support and exclusion rules
/// for an iterate of nullity nu. Throws TableRuleViolation: a malformed
/// vector (too long, negative entries) cites that alone, otherwise every
/// broken rule among support, endpoint_binary and rule_i..rule_iv is cited.
void validate_type_vector(const std::vector<int>& k, int nullity, int dim_n);

/// A researcher-supplied row {"orbit_id", "m", "k"}.
struct UserTypeEntry {
  std::string orbit_id;
  int m = 1;
  std::vector<int> k;
};

struct CriticalTypeRow {
  int m = 1;
  int index_i = 0;
  int nullity = 1;
  std::vector<int> k;        // length 2n - 1
  bool user_supplied = false;
};

struct CriticalTypeTable {
  std::string orbit_id;
  int dim_n = 1;
  int K_of_y = 2;
  std::vector<CriticalTypeRow> rows;  // m = 1..K(y)
  std::vector<std::string> notes;     // e.g. tables that validate but are not unique

  /// k_l(y^m) for any m >= 1, extended K(y)-periodically.
  const std::vector<int>& k_at(int m) const { return rows[(m - 1) % K_of_y].k; }
};

/// Builds the table for m = 1..K(y) from the index records (which must cover
/// at least m = 1..K(y)). Nondegenerate iterates are filled by parity against
/// i(y); degenerate ones need a user row. User rows for m > K(y) are checked
/// for periodicity. Throws IncompleteInput for a missing degenerate row and
/// TableRuleViolation for an invalid one.
CriticalTypeTable critical_type_numbers(const std::vector<IndexRecord>& records, int K_of_y,
                                        int dim_n, const std::vector<UserTypeEntry>& user = {});

struct EulerCharacteristics {
  std::vector<int> chi;  // chi(y^m), m = 1..K(y)
  Rational chi_hat;
};

EulerCharacteristics euler_characteristics(const CriticalTypeTable& table);

/// (1/N) sum_{m <= N} chi(y^m) for N = 1..records.size(), with the parity of
/// i(y^m) taken from the records and k extended periodically.
std::vector<Rational> chi_hat_partial_sums(const CriticalTypeTable& table,
                                           const std::vector<IndexRecord>& records);

// ---------------------------------------------------------------------------

struct OrbitResonanceInput {
  std::string orbit_id;
  double mean_index = 0.0;
  double mean_index_error = 0.0;
  std::optional<RationalValue> mean_index_rational;
  std::optional<Rational> chi_hat;   // empty: excluded (incomplete data)
  std::string exclusion_reason;
};

struct OrbitResonanceTerm {
  std::string orbit_id;
  double mean_index = 0.0;
  std::optional<Rational> chi_hat;
  double contribution = 0.0;         // chi^/i^
  std::string role;                  // "positive", "negative", "zero", "excluded"
};

struct ResonanceReport {
  std::vector<OrbitResonanceTerm> terms;
  double S_plus = 0.0, S_plus_error = 0.0, S_plus_residual = 0.0;
  double S_zero = 0.0, S_zero_error = 0.0;
  std::optional<Rational> S_plus_exact, S_zero_exact;
  bool conditional = false;
  bool orbit_set_complete = true;
  std::vector<std::string> excluded_orbits;
  std::vector<std::string> zero_mean_orbits;
};

/// Evaluates both sums. Exact when every contributing i^ is rational-certified.
/// The result is conditional when an orbit is excluded or when the orbit set
/// is not known to be complete.
ResonanceReport identity_check(const std::vector<OrbitResonanceInput>& orbits,
                               double zero_tol = 1e-9, bool orbit_set_complete = true);

// ---------------------------------------------------------------------------

struct MorseOrbitData {
  std::string orbit_id;
  CriticalTypeTable table;
  std::vector<int> indices;   // i(y^m), m = 1..size
  double mean_index = 0.0;
  double prime_period = 0.0;  // tau_j on the normalized clock
  Rational chi_hat;
};

struct MorseSeries {
  int C = 0, N = 0;
  double a = 0.0, T = 1.0;
  std::map<int, long long> w;           // h -> w_h, 2C <= |h| <= 2N
  long long plus_at_minus_one = 0;      // M^{2N}(2C; -1)
  long long minus_at_minus_one = 0;     // M^{-2C}(-2N; -1)
  double C1 = 0.0;                      // Claim 1 bound on w_h
  double C2 = 0.0;                      // bound on |M^{2N}(2C;-1) - 2N S+|
  double plus_expected = 0.0;           // 2N sum_{i^>0} chi^/i^
  double minus_expected = 0.0;          // 2N sum_{i^<0} chi^/i^
  bool term_bound_ok = true;            // every per-(j,m,l) count <= 4n/(K|i^|) + 2
  double max_term_ratio = 0.0;          // largest count / bound
};

/// Builds w_h from the iterates m < aT/tau_j. Throws IncompleteInput when an
/// orbit lacks index data inside that range.
MorseSeries morse_series(const std::vector<MorseOrbitData>& orbits, int dim_n, double a, double T,
                         int C, int N);

/// Smallest a (with aT at least ten prime periods) for which every iterate
/// with |i| <= 2N + 4n is inside the window m < aT/tau_j.
double sufficient_a(const std::vector<MorseOrbitData>& orbits, int dim_n, double T, int N);

/// Number of iterates the Morse series at level N needs for this orbit.
int iterates_needed(double mean_index, int K_of_y, int dim_n, int N);

struct LadderRow {
  int N = 0;
  double a = 0.0;
  double plus_ratio = 0.0;   // M^{2N}(2C;-1) / 2N
  double minus_ratio = 0.0;  // M^{-2C}(-2N;-1) / 2N
  double deviation = 0.0;    // |M^{2N}(2C;-1) - 2N S+|
  double C2 = 0.0;
  bool within = false;       // deviation <= C2
};

std::vector<LadderRow> morse_ladder(const std::vector<MorseOrbitData>& orbits, int dim_n, double T,
                                    int C, const std::vector<int>& Ns);

void write_morse_csv(const MorseSeries& series, const std::string& path);

}  // namespace charlab

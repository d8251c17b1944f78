#include "doctest.h"

#include <cmath>
#include <random>
#include <set>

#include "charlab/resonance.hpp"
#include "table_oracle.hpp"

using namespace charlab;
using charlab::testing::broken_rules;
namespace testing = charlab::testing;

namespace {

std::vector<IndexRecord> records_from(const std::string& id, const std::vector<int>& idx,
                                      const std::vector<int>& nu) {
  std::vector<IndexRecord> r;
  for (std::size_t m = 0; m < idx.size(); ++m)
    r.push_back({id, static_cast<int>(m + 1), idx[m], nu[m]});
  return r;
}

}  // namespace

TEST_CASE("nondegenerate orbit, even index steps: chi^ = (-1)^i(y)") {
  for (int i1 : {0, 3}) {
    auto rec = records_from("y", {i1, i1 + 4, i1 + 6, i1 + 10}, {1, 1, 1, 1});
    auto t = critical_type_numbers(rec, 2, 2);
    for (const auto& row : t.rows) CHECK(row.k == std::vector<int>{1, 0, 0});
    auto e = euler_characteristics(t);
    CHECK(e.chi_hat == Rational(i1 % 2 ? -1 : 1));
  }
}

TEST_CASE("nondegenerate orbit, odd index step: chi^ = (-1)^i(y) / 2") {
  for (int i1 : {1, 2}) {
    auto rec = records_from("y", {i1, i1 + 3, i1 + 6, i1 + 9}, {1, 1, 1, 1});
    auto t = critical_type_numbers(rec, 2, 1);
    CHECK(t.rows[0].k == std::vector<int>{1});
    CHECK(t.rows[1].k == std::vector<int>{0});
    auto e = euler_characteristics(t);
    CHECK(e.chi_hat == Rational(i1 % 2 ? -1 : 1, 2));
    CHECK(e.chi == std::vector<int>{i1 % 2 ? -1 : 1, 0});
  }
}

TEST_CASE("single term: nu = 1, k_0 = 1, even index gives chi = 1") {
  auto t = critical_type_numbers(records_from("c", {0, 2}, {1, 1}), 2, 1);
  CHECK(euler_characteristics(t).chi == std::vector<int>{1, 1});
}

TEST_CASE("k_0 = k_1 = 1 with nu = 2 is rejected by rule (i)") {
  try {
    validate_type_vector({1, 1, 0}, 2, 2);
    FAIL("accepted");
  } catch (const TableRuleViolation& e) {
    CHECK(e.rule() == TableRule::rule_i);
  }
}

TEST_CASE("randomized tables are rejected exactly when a rule is broken, citing every broken rule") {
  std::mt19937 rng(2024);
  int rejected = 0, accepted = 0;
  for (int trial = 0; trial < 20000; ++trial) {
    const int n = 1 + rng() % 3;
    const int nu = 1 + rng() % (2 * n - 1);
    const int len = rng() % (2 * n + 1);
    std::vector<int> k(len);
    for (auto& v : k) {
      const int r = rng() % 10;
      v = r < 5 ? 0 : (r < 8 ? 1 : (r < 9 ? 2 : -1));
    }
    const auto broken = broken_rules(k, nu, n);
    try {
      validate_type_vector(k, nu, n);
      CHECK_MESSAGE(broken.empty(), "accepted an invalid table");
      ++accepted;
    } catch (const TableRuleViolation& e) {
      const std::set<TableRule> cited(e.rules().begin(), e.rules().end());
      CHECK(cited == testing::expected_citation(broken));
      ++rejected;
    }
  }
  CHECK(rejected > 1000);
  CHECK(accepted > 1000);
}

TEST_CASE("degenerate iterates need user rows; user rows are validated") {
  // nu(y^2) = 3, as for an orbit whose transverse rotation is pi per turn.
  auto rec = records_from("e", {0, 4, 6, 10, 12, 16}, {1, 3, 1, 3, 1, 3});
  CHECK_THROWS_AS(critical_type_numbers(rec, 2, 2), IncompleteInput);

  auto t = critical_type_numbers(rec, 2, 2, {{"e", 2, {0, 0, 1}}});
  CHECK(t.rows[1].user_supplied);
  CHECK(euler_characteristics(t).chi_hat == Rational(1));

  CHECK_THROWS_AS(critical_type_numbers(rec, 2, 2, {{"e", 2, {1, 0, 1}}}), TableRuleViolation);
  try {
    critical_type_numbers(rec, 2, 2, {{"e", 2, {0, 1, 0}}, {"e", 4, {1, 0, 0}}});
    FAIL("accepted");
  } catch (const TableRuleViolation& e) {
    CHECK(e.rule() == TableRule::periodicity);
  }
  try {
    critical_type_numbers(rec, 2, 2, {{"e", 1, {0, 0, 0}}, {"e", 2, {0, 1, 0}}});
    FAIL("accepted");
  } catch (const TableRuleViolation& e) {
    CHECK(e.rule() == TableRule::nondegenerate);
  }
}

TEST_CASE("partial sums of chi reach the closed form exactly at multiples of K") {
  const int K = 4;
  std::vector<int> idx, nu;
  for (int m = 1; m <= 10 * K; ++m) {
    idx.push_back(3 * m - 2 + (m % 4 == 2 ? 1 : 0));
    nu.push_back(m % 2 == 0 ? 2 : 1);
  }
  auto rec = records_from("p", idx, nu);
  std::vector<UserTypeEntry> user = {{"p", 2, {0, 1, 0}}, {"p", 4, {1, 0, 0}}};
  auto t = critical_type_numbers(rec, K, 2, user);
  const auto closed = euler_characteristics(t).chi_hat;
  const auto partial = chi_hat_partial_sums(t, rec);
  for (int N = 1; N <= 10 * K; ++N)
    if (N % K == 0) CHECK(partial[N - 1] == closed);
  bool differs = false;
  for (int N = 1; N <= 10 * K; ++N) differs |= N % K != 0 && partial[N - 1] != closed;
  CHECK(differs);
}

TEST_CASE("identity check: exact circle, float ellipsoid, excluded and zero-mean orbits") {
  auto circle = identity_check({{"c", 2.0, 0.0, RationalValue{2, 1}, Rational(1), ""}});
  REQUIRE(circle.S_plus_exact);
  CHECK(*circle.S_plus_exact == Rational(1, 2));
  CHECK(circle.S_plus_residual == 0.0);
  CHECK(*circle.S_zero_exact == 0);
  CHECK_FALSE(circle.conditional);

  const double s2 = std::sqrt(2.0);
  auto ell = identity_check({{"a", 2 + s2, 1e-12, std::nullopt, Rational(1), ""},
                             {"b", 2 + 2 * s2, 1e-12, std::nullopt, Rational(1), ""}});
  CHECK_FALSE(ell.S_plus_exact);
  CHECK(ell.S_plus_residual < 1e-14);
  CHECK(ell.S_plus_error > 0);
  CHECK(ell.S_zero == 0.0);

  auto cond = identity_check({{"a", 3.0, 0, RationalValue{3, 1}, Rational(1), ""},
                              {"b", 6.0, 0, RationalValue{6, 1}, std::nullopt, "degenerate"},
                              {"z", 0.0, 0, RationalValue{0, 1}, Rational(1), ""}});
  CHECK(cond.conditional);
  CHECK(cond.excluded_orbits == std::vector<std::string>{"b"});
  CHECK(cond.zero_mean_orbits == std::vector<std::string>{"z"});
  CHECK(*cond.S_plus_exact == Rational(1, 3));
}

namespace {

MorseOrbitData circle_data(int M) {
  std::vector<int> idx;
  for (int m = 1; m <= M; ++m) idx.push_back(2 * m - 2);
  MorseOrbitData d;
  d.orbit_id = "c";
  d.table = critical_type_numbers(records_from("c", {0, 2}, {1, 1}), 2, 1);
  d.indices = idx;
  d.mean_index = 2.0;
  d.prime_period = 2 * M_PI;
  d.chi_hat = 1;
  return d;
}

}  // namespace

TEST_CASE("Morse series of the circle") {
  const int N = 50, C = 2;
  auto d = circle_data(200);
  const double a = sufficient_a({d}, 1, 1.0, N);
  auto s = morse_series({d}, 1, a, 1.0, C, N);
  for (int h = 2 * C; h <= 2 * N; ++h) CHECK(s.w[h] == (h % 2 == 0 ? 1 : 0));
  CHECK(s.plus_at_minus_one == N - C + 1);
  CHECK(s.minus_at_minus_one == 0);
  CHECK(s.term_bound_ok);
  for (const auto& [h, w] : s.w) CHECK(w <= s.C1);
  CHECK(std::abs(s.plus_at_minus_one - s.plus_expected) <= s.C2);

  CHECK_THROWS_AS(morse_series({circle_data(20)}, 1, a, 1.0, C, N), IncompleteInput);
  auto empty = morse_series({}, 1, a, 1.0, C, N);
  CHECK(empty.w.empty());
  CHECK(empty.plus_at_minus_one == 0);
}

TEST_CASE("Morse ladder converges within C2 / 2N") {
  auto rows = morse_ladder({circle_data(500)}, 1, 1.0, 2, {50, 100, 200});
  REQUIRE(rows.size() == 3);
  for (const auto& r : rows) {
    CHECK(r.within);
    CHECK(std::abs(r.plus_ratio - 0.5) <= r.C2 / (2.0 * r.N));
    CHECK(r.minus_ratio == 0.0);
  }
  CHECK(std::abs(rows[2].plus_ratio - 0.5) < std::abs(rows[0].plus_ratio - 0.5));
}

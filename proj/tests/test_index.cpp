#include "doctest.h"

#include <cmath>

#include "charlab/errors.hpp"
#include "charlab/index.hpp"

using namespace charlab;

namespace {

// R(t) = exp(t S J-type generator) for block-diagonal rotations with speeds w_k.
SymplecticPath rotation_path(const std::vector<double>& speeds, double t_end, int samples) {
  const int n = static_cast<int>(speeds.size());
  SymplecticPath p;
  for (int i = 0; i <= samples; ++i) {
    const double t = t_end * i / samples;
    Mat R = Mat::Zero(2 * n, 2 * n);
    for (int k = 0; k < n; ++k) {
      const double c = std::cos(speeds[k] * t), s = std::sin(speeds[k] * t);
      R(k, k) = c;
      R(k, n + k) = -s;
      R(n + k, k) = s;
      R(n + k, n + k) = c;
    }
    p.times.push_back(t);
    p.samples.push_back(R);
  }
  p.end_monodromy = p.samples.back();
  return p;
}

}  // namespace

TEST_CASE("rotation path normalization") {
  CHECK(omega_index(rotation_path({1.0}, 1.0, 200), 1.0).index == 1);
  CHECK(omega_index(rotation_path({1.0}, 1.0, 200), 1.0).nullity == 0);
  CHECK(omega_index(rotation_path({1.0}, 5.0, 200), 1.0).index == 1);
  CHECK(omega_index(rotation_path({1.0}, 9.0, 200), 1.0).index == 3);
  auto full = omega_index(rotation_path({1.0}, 2 * M_PI, 200), 1.0);
  CHECK(full.index == 1);
  CHECK(full.nullity == 2);
  CHECK(omega_index(rotation_path({1.0}, 4.0, 200), -1.0).index == 2);
  CHECK(omega_index(rotation_path({1.0}, 2.0, 200), -1.0).index == 0);
  CHECK(omega_index(rotation_path({1.0}, M_PI, 200), -1.0).index == 0);
  CHECK(omega_index(rotation_path({1.0}, M_PI, 200), -1.0).nullity == 2);
  // negative rotation
  CHECK(omega_index(rotation_path({-1.0}, 1.0, 200), 1.0).index == -1);
}

TEST_CASE("iterates of a split rotation match the Bott sum") {
  auto p = rotation_path({1.0, std::sqrt(2.0)}, 2.5, 400);
  for (int m = 1; m <= 8; ++m) {
    IterateIndexer ix(p);
    auto direct = ix.index(m);
    auto bott = bott_iterate_index(p, m);
    CHECK(direct.index == bott.index);
    CHECK(direct.nullity == bott.nullity);
    // closed form: sum over blocks of 2 floor(w t m / 2pi) + 1
    int expect = 0;
    for (double w : {1.0, std::sqrt(2.0)}) expect += 2 * int(std::floor(w * 2.5 * m / (2 * M_PI))) + 1;
    CHECK(direct.index == expect);
  }
}

TEST_CASE("coarse sampling is detected") {
  auto p = rotation_path({1.0}, 20.0, 5);
  CHECK_THROWS_AS(omega_index(p, 1.0), NumericFailure);
}

TEST_CASE("rotation mean index of a rotation path") {
  auto p = rotation_path({1.0, std::sqrt(2.0)}, 2.5, 400);
  const double expect = (1.0 + std::sqrt(2.0)) * 2.5 / M_PI;
  CHECK(rotation_mean_index(p) == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("rational recognition") {
  auto r = recognize_rational(2.0 / 3.0, 64, 1e-9);
  REQUIRE(r);
  CHECK(r->num == 2);
  CHECK(r->den == 3);
  CHECK_FALSE(recognize_rational(std::sqrt(2.0), 64, 1e-9));
  auto two = recognize_rational(2.0, 64, 1e-9);
  REQUIRE(two);
  CHECK(two->den == 1);
}

TEST_CASE("minimal period K") {
  auto mk = [](std::vector<double> angles) {
    std::vector<FloquetMultiplier> out;
    for (double a : angles) {
      FloquetMultiplier m;
      m.on_unit_circle = true;
      m.angle = a;
      m.value = std::polar(1.0, a);
      out.push_back(m);
    }
    return out;
  };
  CHECK(minimal_period_K(mk({})) == 2);
  CHECK(minimal_period_K(mk({0.0})) == 2);
  CHECK(minimal_period_K(mk({2 * M_PI / 3, 4 * M_PI / 3})) == 6);
  CHECK(minimal_period_K(mk({2 * M_PI / 3, 2 * M_PI / 4})) == 24);
  CHECK(minimal_period_K(mk({2 * M_PI / std::sqrt(5.0)})) == 2);
  CHECK_THROWS_AS(minimal_period_K(mk({2 * M_PI / 3 + 1e-3}), 5e-2, 64), AmbiguityFailure);
}

TEST_CASE("d(K) formula") {
  CHECK(d_of_K(2.5 * 2 * M_PI, 1.0, 2) == 12);
  CHECK(d_of_K(7.0, 1.0, 2) - d_of_K(1.0, 1.0, 2) == 4);
  CHECK_THROWS_AS(d_of_K(2 * M_PI, 1.0, 2), InvalidArgument);
}

TEST_CASE("k shift audit") {
  auto c = k_shift_audit({{1.0, 6, 1}, {7.0, 10, 1}}, 1.0, 2, 2, 1);
  CHECK(c.consistent);
  CHECK(c.d_of_K[1] - c.d_of_K[0] == 4);
  CHECK_THROWS_AS(k_shift_audit({{1.0, 4, 1}, {7.0, 9, 1}}, 1.0, 2, 2, 1), ConsistencyFailure);
}

TEST_CASE("mean index reconciliation and invariants") {
  std::vector<IndexRecord> recs;
  for (int m = 1; m <= 20; ++m) recs.push_back({"c", m, 2 * m - 2, 1});
  auto r = mean_index(recs, 1, 2.0);
  CHECK(r.value == 2.0);
  REQUIRE(r.rational);
  CHECK(r.rational->den == 1);
  CHECK_THROWS_AS(mean_index(recs, 1, 2.5), NumericFailure);
  check_index_records(recs, 1, 2.0, 2);
  recs[3].nullity_nu = 2;
  CHECK_THROWS_AS(check_index_records(recs, 1, 2.0, 2), ConsistencyFailure);
}

TEST_CASE("planar ellipsoid orbits: closed-form iterate indices and mean index") {
  const std::vector<double> r = {1.0, std::pow(2.0, 0.25)};
  const double alpha = 1.8;
  auto h = homogeneous_hamiltonian(make_ellipsoid(r), alpha);
  double inv_sum = 0.0;
  for (int k : {0, 1}) {
    Vec x0 = Vec::Zero(4);
    x0[k] = r[k];
    FlowOptions fo;
    fo.samples = 2000;
    auto traj = integrate_flow(h, x0, 2 * M_PI * r[k] * r[k] / alpha, fo);
    auto path = integrate_linearized(traj, h, fo);
    IterateIndexer ix(path);
    const double ratio = r[k] * r[k] / (r[1 - k] * r[1 - k]);
    for (int m = 1; m <= 12; ++m) {
      auto o = ix.index(m);
      CHECK(o.index - 2 == 2 * m + 2 * int(std::floor(m * ratio)) - 2);
      CHECK(o.nullity == 1);
      if (m <= 4) CHECK(bott_iterate_index(path, m).index == o.index);
    }
    const double mean = rotation_mean_index(path);
    CHECK(mean == doctest::Approx(2 * (1 + ratio)).epsilon(1e-10));
    inv_sum += 1.0 / mean;
  }
  CHECK(inv_sum == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("refined sampling leaves the circle index unchanged") {
  auto h = homogeneous_hamiltonian(make_ellipsoid({1.0}), 1.8);
  Vec x0(2);
  x0 << 1.0, 0.0;
  for (int samples : {500, 5000}) {
    FlowOptions fo;
    fo.samples = samples;
    auto path = integrate_linearized(integrate_flow(h, x0, 2 * M_PI / 1.8, fo), h, fo);
    for (int m = 1; m <= 10; ++m) {
      auto r = maslov_index(path, m);
      CHECK(r.index_i == 2 * m - 2);
      CHECK(r.nullity == 1);
    }
    CHECK(rotation_mean_index(path) == doctest::Approx(2.0).epsilon(1e-12));
  }
}

#include "doctest.h"

#include <cmath>
#include <random>
#include <utility>

#include "charlab/errors.hpp"
#include "charlab/geometry.hpp"

using namespace charlab;

namespace {
Vec random_point(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> g;
  Vec x(d);
  for (int i = 0; i < d; ++i) x[i] = g(rng);
  return x;
}
}  // namespace

TEST_CASE("ellipsoid gauge is 1-homogeneous and satisfies Euler") {
  auto s = make_ellipsoid({1.0, std::pow(2.0, 0.25), 0.7});
  auto rep = sample_invariants(s, 2000, 3);
  CHECK(rep.passed);
  CHECK(rep.max_homogeneity_error < 1e-12);
  CHECK(rep.max_euler_error < 1e-12);
  CHECK(rep.min_star_margin > 0.0);
}

TEST_CASE("perturbed ellipsoid keeps invariants and differs from the ellipsoid") {
  auto s = make_perturbed_ellipsoid({1.0, 1.3}, {{1.0, 0.5}, 0.2});
  auto rep = sample_invariants(s, 2000, 5);
  CHECK(rep.passed);
  Vec x = Vec::Zero(4);
  x[0] = 1.0;
  CHECK(s.gauge(x) > 1.0);
}

TEST_CASE("gauge hessian matches finite differences") {
  auto s = make_perturbed_ellipsoid({1.0, 1.3}, {{1.0, -0.4}, 0.15});
  std::mt19937_64 rng(1);
  for (int k = 0; k < 20; ++k) {
    Vec x = random_point(rng, 4);
    Mat H = s.gauge_hess(x);
    const double h = 1e-6;
    for (int i = 0; i < 4; ++i) {
      Vec e = Vec::Zero(4);
      e[i] = h;
      Vec fd = (s.gauge_grad(x + e) - s.gauge_grad(x - e)) / (2 * h);
      CHECK((fd - H.col(i)).norm() < 1e-5 * (1 + H.norm()));
    }
  }
}

TEST_CASE("scaled surface") {
  auto s = make_ellipsoid({1.0, 2.0}).scaled(3.0);
  Vec x = Vec::Zero(4);
  x[1] = 6.0;
  CHECK(s.gauge(x) == doctest::Approx(1.0));
}

TEST_CASE("project_to_surface lands on the level set") {
  auto s = make_perturbed_ellipsoid({1.0, 1.2}, {{0.3, 0.9}, 0.1});
  std::mt19937_64 rng(2);
  for (int k = 0; k < 10; ++k) {
    Vec p = project_to_surface(s, random_point(rng, 4));
    CHECK(std::abs(s.gauge(p) - 1.0) < 1e-12);
  }
}

TEST_CASE("aux function germ, band and tail") {
  const std::pair<double, double> params[] = {{0.25, 1.8}, {0.25, 1.7}, {0.3, 1.6}, {0.4, 1.8}, {0.2, 1.8}};
  for (auto [theta, alpha] : params) {
    {
      auto phi = make_aux_function(theta, alpha);
      CHECK(phi.value(0.0) == 0.0);
      CHECK(phi.d1(0.0) == 0.0);
      CHECK(phi.d2(0.0) == doctest::Approx(1.0));
      CHECK(phi.ratio(1e-9) == doctest::Approx(1.0));
      // phi(t) = c t^alpha on the band, and the band is where the ratio lies in [theta, 1-theta]
      for (double u : {0.0, 0.3, 0.7, 1.0}) {
        double t = phi.band_start() + u * (phi.band_end() - phi.band_start());
        CHECK(phi.value(t) == doctest::Approx(phi.c() * std::pow(t, alpha)).epsilon(1e-12));
      }
      CHECK(phi.ratio(phi.band_start()) == doctest::Approx(1 - theta).epsilon(1e-12));
      CHECK(phi.ratio(phi.band_end()) == doctest::Approx(theta).epsilon(1e-12));
      double prev = phi.ratio(1e-6);
      for (double t = 1e-3; t < 30 * phi.band_end(); t *= 1.01) {
        double r = phi.ratio(t);
        CHECK(r < prev);
        prev = r;
      }
      CHECK(phi.ratio(1e4) >= phi.tail_limit());
      CHECK(phi.ratio(2 * phi.band_end()) > phi.tail_limit());
      double q = 0.5 * (theta + 1 - theta);
      CHECK(phi.ratio(phi.solve_ratio(q)) == doctest::Approx(q).epsilon(1e-12));
    }
  }
}

TEST_CASE("aux function rejects infeasible parameters") {
  CHECK_THROWS_AS(make_aux_function(0.25, 1.2), ConstructionFailure);
  CHECK_THROWS_AS(make_aux_function(0.6, 1.8), ConstructionFailure);
}

TEST_CASE("Hamiltonian H_a: grad and hess against differences") {
  auto s = make_ellipsoid({1.0, 1.2});
  HamiltonianSpec spec(s, 2.0, 1.0, make_aux_function(0.25, 1.8), 3.0);
  std::mt19937_64 rng(4);
  for (int k = 0; k < 30; ++k) {
    Vec x = random_point(rng, 4) * (0.2 + 2.0 * k / 30.0);
    const double h = 1e-6;
    Vec g = spec.H_aK_grad(x);
    Mat H = spec.H_aK_hess(x);
    for (int i = 0; i < 4; ++i) {
      Vec e = Vec::Zero(4);
      e[i] = h;
      CHECK(std::abs((spec.H_aK(x + e) - spec.H_aK(x - e)) / (2 * h) - g[i]) < 1e-5 * (1 + g.norm()));
      CHECK((((spec.H_aK_grad(x + e) - spec.H_aK_grad(x - e)) / (2 * h)) - H.col(i)).norm() <
            1e-4 * (1 + H.norm()));
    }
  }
  CHECK(spec.convexity_eps() > 0.0);
}

TEST_CASE("Fenchel dual of a quadratic and Fenchel-Young") {
  auto s = make_ellipsoid({1.0, 1.2});
  HamiltonianSpec spec(s, 2.0, 1.0, make_aux_function(0.25, 1.8), 3.0);
  std::mt19937_64 rng(8);
  for (int k = 0; k < 20; ++k) {
    Vec y = random_point(rng, 4) * 2.0;
    auto f = spec.fenchel_dual(y);
    // equality case of Fenchel-Young at the maximizer
    CHECK(std::abs(f.value + spec.H_aK(f.grad) - y.dot(f.grad)) < 1e-10 * (1 + std::abs(f.value)));
    CHECK((spec.H_aK_grad(f.grad) - y).norm() < 1e-10 * (1 + y.norm()));
    // strict inequality elsewhere
    Vec z = random_point(rng, 4);
    CHECK(f.value + spec.H_aK(z) >= y.dot(z) - 1e-12);
    // dual Hessian inverts the primal one
    Mat P = f.hess * spec.H_aK_hess(f.grad);
    CHECK((P - Mat::Identity(4, 4)).norm() < 1e-8);
  }
}

TEST_CASE("far field is exactly quadratic so the dual is |y|^2 / (2 (eps_a + K))") {
  auto s = make_ellipsoid({1.0, 1.2});
  HamiltonianSpec spec(s, 2.0, 1.0, make_aux_function(0.25, 1.8), 3.0);
  const double k = spec.eps_a() + spec.K();
  Vec y = Vec::Zero(4);
  y[0] = 1e9;
  auto f = spec.fenchel_dual(y);
  CHECK(f.value == doctest::Approx(y.squaredNorm() / (2 * k)).epsilon(1e-10));
}

TEST_CASE("with_K shifts convexity and keeps H_a") {
  auto s = make_ellipsoid({1.0, 1.2});
  HamiltonianSpec spec(s, 2.0, 1.0, make_aux_function(0.25, 1.8), 3.0);
  auto spec2 = spec.with_K(5.0);
  Vec x = Vec::Ones(4) * 0.3;
  CHECK(spec2.H_a(x) == doctest::Approx(spec.H_a(x)));
  CHECK(spec2.H_aK(x) - spec.H_aK(x) == doctest::Approx(x.squaredNorm()));
  CHECK(spec2.convexity_eps() == doctest::Approx(spec.convexity_eps() + 4.0));
}

TEST_CASE("critical radius relation") {
  auto s = make_ellipsoid({1.0});
  HamiltonianSpec spec(s, 4.0, 1.0, make_aux_function(0.25, 1.8), 3.0);
  const double tau = 2.0;  // tau/(aT) = 0.5 lies in the band
  const double rho = spec.rho_for_period(tau);
  CHECK(spec.aux().d1(rho) / rho == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(spec.critical_value_for_period(tau) < 0.0);
}

#pragma once

// Star-shaped hypersurfaces given by gauge functions, the auxiliary radial
// profile, and the modified/convexified Hamiltonian family built on them.

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "charlab/linalg.hpp"

namespace charlab {

enum class SurfaceKind { ellipsoid, perturbed_ellipsoid, custom };

std::string to_string(SurfaceKind kind);

/// Quartic deformation of an ellipsoid gauge: with q(x) = sum_k (x_k^2 + y_k^2)/r_k^2
/// the perturbed gauge is j(x) = (q(x)^2 + magnitude * sum_k coeffs[k] x_k^4)^{1/4}.
/// Only the x_k coordinates enter, so each coordinate plane stays invariant
/// but the planar orbits are no longer circles.
struct QuarticPerturbation {
  std::vector<double> coeffs;
  double magnitude = 0.0;
};

class Hypersurface {
 public:
  using ScalarFn = std::function<double(const Vec&)>;
  using VecFn = std::function<Vec(const Vec&)>;
  using MatFn = std::function<Mat(const Vec&)>;

  Hypersurface(int dim_n, SurfaceKind kind, ScalarFn gauge, VecFn grad, MatFn hess,
               std::vector<double> radii = {},
               std::optional<QuarticPerturbation> perturbation = std::nullopt);

  int dim_n() const { return dim_n_; }
  int ambient_dim() const { return 2 * dim_n_; }
  SurfaceKind kind() const { return kind_; }
  const std::vector<double>& radii() const { return radii_; }
  const std::optional<QuarticPerturbation>& perturbation() const { return perturbation_; }

  double gauge(const Vec& x) const { return gauge_(x); }
  Vec gauge_grad(const Vec& x) const { return grad_(x); }
  Mat gauge_hess(const Vec& x) const { return hess_(x); }

  /// The surface lambda * Sigma (gauge j(x)/lambda).
  Hypersurface scaled(double lambda) const;

 private:
  int dim_n_;
  SurfaceKind kind_;
  ScalarFn gauge_;
  VecFn grad_;
  MatFn hess_;
  std::vector<double> radii_;
  std::optional<QuarticPerturbation> perturbation_;
};

Hypersurface make_ellipsoid(const std::vector<double>& radii);
Hypersurface make_perturbed_ellipsoid(const std::vector<double>& radii,
                                      const QuarticPerturbation& perturbation);

/// Wraps user callbacks; they must pass sample_invariants before acceptance.
Hypersurface make_custom_surface(int dim_n, Hypersurface::ScalarFn gauge,
                                 Hypersurface::VecFn grad, Hypersurface::MatFn hess,
                                 std::uint64_t seed = 7);

struct InvariantReport {
  double max_homogeneity_error = 0.0;  // relative |j(lx) - l j(x)|
  double max_euler_error = 0.0;        // relative |j'(x).x - j(x)|
  double min_star_margin = 0.0;        // min of j'(x).x on j^{-1}(1)
  double max_grad_fd_error = 0.0;      // gradient vs central differences
  bool passed = false;
};

InvariantReport sample_invariants(const Hypersurface& surface, int samples, std::uint64_t seed);

/// Random point of R^{2n} \ {0} projected onto Sigma along its ray.
Vec project_to_surface(const Hypersurface& surface, const Vec& x);

// ---------------------------------------------------------------------------

/// Radial profile phi with phi(0) = phi'(0) = 0, phi''(0) = 1, phi'(t)/t strictly
/// decreasing, and phi(t) = c t^alpha exactly on the band where
/// phi'(t)/t lies in [theta, 1 - theta].
///
/// The ratio r(t) = phi'(t)/t is assembled from three C^1 pieces:
///   [0, t1]   quintic germ in t/t1 with r(0) = 1, r'(0) = 0,
///   [t1, t2]  c*alpha*t^(alpha-2),
///   [t2, inf) theta_inf + (theta - theta_inf) exp(-lambda (t - t2)),
/// with theta_inf = theta/2 and the germ chosen so that the integral of s r(s)
/// over [0, t1] equals c t1^alpha. That integral condition is solvable with
/// r monotone only when alpha > 2 (1 - theta).
class AuxFunction {
 public:
  double theta() const { return theta_; }
  double alpha() const { return alpha_; }
  double c() const { return c_; }
  double band_start() const { return t1_; }
  double band_end() const { return t2_; }
  double tail_limit() const { return theta_inf_; }

  double value(double t) const;
  double d1(double t) const;
  double d2(double t) const;
  /// phi'(t)/t, continuous at 0 with value 1.
  double ratio(double t) const;
  /// Unique t > 0 with ratio(t) = q, for q in (tail_limit, 1).
  double solve_ratio(double q) const;

  friend AuxFunction make_aux_function(double theta, double alpha, double band_start);

 private:
  AuxFunction() = default;
  double germ_ratio(double u) const;   // u = t / t1
  double germ_ratio_d(double u) const; // d/du

  double theta_ = 0, alpha_ = 0, c_ = 0, t1_ = 1, t2_ = 0;
  double theta_inf_ = 0, tail_lambda_ = 0;
  double germ_[6] = {1, 0, 0, 0, 0, 0};  // r(t1 u) = sum germ_[k] u^k
  double band_phi_t2_ = 0;               // c t2^alpha
};

AuxFunction make_aux_function(double theta, double alpha, double band_start = 1.0);

// ---------------------------------------------------------------------------

/// Value/gradient/Hessian callbacks of a Hamiltonian on R^{2n}.
struct Hamiltonian {
  int dim_n = 0;
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> grad;
  std::function<Mat(const Vec&)> hess;
};

/// H(x) = j(x)^alpha.
Hamiltonian homogeneous_hamiltonian(const Hypersurface& surface, double alpha);

struct HamiltonianOptions {
  double eps_a = -1.0;          // default pi / T
  double cutoff_A = -1.0;       // default a * phi(2 * band_end)
  double blend_log_width = 16.0;  // blend over levels s in [A, A e^W]
  int convexity_samples = 10000;
  std::uint64_t seed = 11;
};

struct FenchelResult {
  double value = 0.0;  // H*_{a,K}(y)
  Vec grad;            // maximizer x, equal to the dual gradient
  Mat hess;            // (H''_{a,K}(x))^{-1}
  int iterations = 0;
};

/// H~_a = a phi(j), its outer modification H_a (equal to eps_a |x|^2 / 2 beyond level A e^W)
/// and the convexified H_{a,K} = H_a + K |x|^2 / 2.
class HamiltonianSpec {
 public:
  HamiltonianSpec(Hypersurface surface, double a, double period_T, AuxFunction aux, double K,
                  const HamiltonianOptions& options = {});

  const Hypersurface& surface() const { return surface_; }
  const AuxFunction& aux() const { return aux_; }
  double a() const { return a_; }
  double period_T() const { return T_; }
  double K() const { return K_; }
  double eps_a() const { return eps_a_; }
  double cutoff_A() const { return A_; }
  /// Level above which H_a is exactly eps_a |x|^2 / 2 (in terms of H~_a).
  double blend_end_level() const { return A_ * std::exp(blend_width_); }
  /// Sampled strict-convexity modulus: the eps of the monotonicity bound
  /// (grad H_{a,K}(x) - grad H_{a,K}(y)).(x - y) >= eps/2 |x - y|^2.
  double convexity_eps() const { return convexity_eps_; }

  /// Same construction with another convexification constant.
  HamiltonianSpec with_K(double K) const;

  double H_tilde(const Vec& x) const;
  double H_a(const Vec& x) const;
  Vec H_a_grad(const Vec& x) const;
  Mat H_a_hess(const Vec& x) const;
  double H_aK(const Vec& x) const;
  Vec H_aK_grad(const Vec& x) const;
  Mat H_aK_hess(const Vec& x) const;

  Hamiltonian hamiltonian_a() const;
  Hamiltonian hamiltonian_aK() const;

  /// Radius rho on the ray with phi'(rho)/rho = tau/(aT); tau in the normalized
  /// (N.y = 1) clock.
  double rho_for_period(double tau) const;
  /// Critical value a phi'(rho) rho T / 2 - a phi(rho) T.
  double critical_value_for_period(double tau) const;

  FenchelResult fenchel_dual(const Vec& y, const Vec* warm_start = nullptr) const;

 private:
  HamiltonianSpec(const HamiltonianSpec& base, double K);
  void estimate_convexity(int samples, std::uint64_t seed);
  double blend_coordinate(double s) const;

  Hypersurface surface_;
  double a_, T_;
  AuxFunction aux_;
  double K_;
  double eps_a_ = 0, A_ = 0, blend_width_ = 16.0;
  double convexity_eps_ = 0;
  HamiltonianOptions options_;
};

}  // namespace charlab

#pragma once

// Finite-dimensional reduction of the dual action functional
//   Psi(u) = int_0^T [ -1/2 (M_K u, u) + H*_{a,K}(u) ] dt,
// M_K the inverse of x -> -J x' + K x, on truncated Fourier space.

#include <cstdint>
#include <vector>

#include "charlab/geometry.hpp"
#include "charlab/orbits.hpp"

namespace charlab {

struct GalerkinOptions {
  int mode_cut = 24;          // keep frequencies |k| <= mode_cut; 0: threshold extent + 8
  int quad_points = 0;        // 0: 8 (mode_cut + 1)
  int omega_samples = 4000;
  std::uint64_t seed = 5;
  double inner_tol = 1e-10;
  double outer_tol = 1e-9;
  int max_inner = 50;
  int max_outer = 40;
};

/// Value, gradient and Hessian of the reduced functional psi(g) = Psi(g + h(g)).
struct ReducedEval {
  double value = 0.0;
  Vec grad;
  Mat hess;     // Schur complement of the full Hessian onto G
  Vec h;        // minimizer on the complement
  int inner_iterations = 0;
};

/// Coefficients c_k in R^{2n} of u(t) = sum_k exp(J L_k t) c_k / sqrt(T),
/// L_k = 2 pi k / T; these basis functions are orthonormal in L^2 and
/// eigenvectors of M_K with eigenvalue 1/(L_k + K). The coefficient vector is
/// laid out mode by mode, k = -mode_cut..mode_cut.
class GalerkinSystem {
 public:
  GalerkinSystem(const HamiltonianSpec& spec, const GalerkinOptions& options = {});

  const HamiltonianSpec& spec() const { return spec_; }
  double K() const { return spec_.K(); }
  double T() const { return spec_.period_T(); }
  double omega() const { return omega_; }
  int dim_n() const { return n_; }
  int mode_cut() const { return N_; }
  int quad_points() const { return Nt_; }
  /// Frequencies k with 0 < L_k + K < 2/omega, i.e. -1/(L_k+K) < -omega/2.
  const std::vector<int>& mode_set() const { return modes_G_; }
  int G_dim() const { return static_cast<int>(idx_G_.size()); }
  int full_dim() const { return (2 * N_ + 1) * 2 * n_; }
  double eigenvalue(int k) const;  // -1/(L_k + K)

  // Full functional on the truncated space.
  double Psi(const Vec& c) const;
  Vec Psi_grad(const Vec& c) const;
  void evaluate(const Vec& c, double* value, Vec* grad, Mat* hess) const;

  // Split / merge coefficients on G and its complement.
  Vec restrict_G(const Vec& c) const;
  Vec restrict_perp(const Vec& c) const;
  Vec merge(const Vec& g, const Vec& h) const;

  /// Minimizer h(g) of Psi(g + .) on the complement (strictly convex).
  Vec inner_solve(const Vec& g, const Vec* warm = nullptr, int* iterations = nullptr) const;
  ReducedEval reduced(const Vec& g, const Vec* warm = nullptr) const;

  /// Sampled monotonicity quotient <Psi'(u)-Psi'(v), u-v>/|u-v|^2 over pairs
  /// with u - v in the complement; the minimum should stay >= omega/2.
  double probe_perp_convexity(int pairs, std::uint64_t seed) const;

  // Sampling helpers.
  std::vector<double> nodes() const;
  std::vector<Vec> synthesize(const Vec& c) const;
  Vec synthesize_at(const Vec& c, double t) const;
  Vec project(const std::vector<Vec>& samples) const;  // samples at nodes()
  Vec time_derivative(const Vec& c) const;            // c_k -> L_k J c_k

 private:
  Mat basis_at(double t) const;  // 2n x full_dim

  HamiltonianSpec spec_;
  GalerkinOptions options_;
  int n_, N_, Nt_;
  double omega_ = 0.0;
  std::vector<int> modes_G_;
  std::vector<int> idx_G_, idx_P_;
  std::vector<Mat> basis_;  // basis_at(node i)
};

struct GalerkinCritical {
  Vec coeffs;                 // full coefficient vector at the critical point
  double critical_value = 0.0;
  int morse_index = 0;        // negative eigenvalues of psi''
  int nullity = 0;
  double grad_norm = 0.0;
  int iterations = 0;
  ClosedCharacteristic orbit; // converted back to (tau, y) on the surface
  std::vector<Vec> x_samples; // solution of the fixed-period system at the nodes
};

/// Parameter a placing the orbit at phi'(rho)/rho = ratio.
double parameter_a_for(const ClosedCharacteristic& orbit, double T, double ratio = 0.5);

/// Galerkin seed u(t) = grad H_{a,K}(rho y(tau_N t / T)).
Vec galerkin_seed(const GalerkinSystem& sys, const Hypersurface& surface,
                  const ClosedCharacteristic& orbit);

/// Newton on psi' with the phase constraint <g - g_seed, d/dt g_seed> = 0.
GalerkinCritical galerkin_critical_point(const GalerkinSystem& sys, const Hypersurface& surface,
                                         const Vec& seed_coeffs);

/// Runs the search from each seed orbit, filters the origin and converts back.
std::vector<GalerkinCritical> galerkin_critical_points(const GalerkinSystem& sys,
                                                       const Hypersurface& surface,
                                                       const std::vector<ClosedCharacteristic>& seeds);

}  // namespace charlab

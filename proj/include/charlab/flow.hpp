#pragma once

#include <complex>
#include <string>
#include <vector>

#include "charlab/geometry.hpp"
#include "charlab/linalg.hpp"

namespace charlab {

/// Solution of x' = J H'(x) sampled on a uniform grid over [0, period_tau].
struct Trajectory {
  std::vector<double> times;
  std::vector<Vec> states;
  double period_tau = 0.0;
  double energy_level = 0.0;
  double max_energy_drift = 0.0;
  double closure_residual = 0.0;  // |x(tau) - x(0)|

  int dim() const { return states.empty() ? 0 : static_cast<int>(states.front().size()); }
};

/// Fundamental solution R(t) of z' = J H''(x(t)) z on the trajectory clock.
struct SymplecticPath {
  std::vector<double> times;
  std::vector<Mat> samples;
  Mat end_monodromy;
  double max_defect = 0.0;      // max_t |R^T J R - J|
  double max_det_error = 0.0;   // max_t |det R - 1|
  int projections = 0;          // samples pulled back onto Sp(2n)

  int dim_n() const { return static_cast<int>(end_monodromy.rows() / 2); }
};

struct FlowOptions {
  double tol = 1e-12;
  int samples = 1000;             // uniform output intervals
  double min_radius = 1e-6;       // excluded ball around the origin
  double max_radius = 1e8;
};

Trajectory integrate_flow(const Hamiltonian& h, const Vec& x0, double t_end,
                          const FlowOptions& options = {});

/// Integrates (x, R) jointly from traj.states[0] over [0, traj.period_tau] on the
/// trajectory's own sample times.
SymplecticPath integrate_linearized(const Trajectory& traj, const Hamiltonian& h,
                                    const FlowOptions& options = {});

/// Pulls M back to Sp(2n) by repeated first-order corrections M <- M (I + J E / 2),
/// E = M^T J M - J.
Mat project_symplectic(const Mat& M, int max_iter = 5);

struct FloquetMultiplier {
  std::complex<double> value;
  int multiplicity = 1;
  bool on_unit_circle = false;
  double angle = 0.0;  // in [0, 2 pi), meaningful on the unit circle
};

struct FloquetOptions {
  double cluster_tol = 1e-4;
  double circle_tol = 1e-4;
};

/// Eigenvalues of the end monodromy grouped into classes; throws NumericFailure
/// if the spectrum is not closed under lambda -> 1/conj(lambda).
std::vector<FloquetMultiplier> floquet_multipliers(const Mat& monodromy,
                                                   const FloquetOptions& options = {});
inline std::vector<FloquetMultiplier> floquet_multipliers(const SymplecticPath& path,
                                                          const FloquetOptions& options = {}) {
  return floquet_multipliers(path.end_monodromy, options);
}

/// CSV dumps for plotting: "t,x_1..x_{2n}" and "t,R_11,R_12,..." (row-major).
void write_trajectory_csv(const Trajectory& traj, const std::string& file);
void write_path_csv(const SymplecticPath& path, const std::string& file);

}  // namespace charlab

#pragma once

// Maslov-type indices of linearized closed orbits, mean index and the
// iteration period K(y).

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "charlab/flow.hpp"
#include "charlab/linalg.hpp"

namespace charlab {

struct IndexOptions {
  double snap_tol = 1e-6;       // endpoint eigen-angles this close to 0 count as intersections
  double max_increment = 1.0;   // largest accepted winding step between samples [rad]
};

/// Long's omega-index and omega-nullity of a symplectic path.
struct OmegaIndex {
  int index = 0;
  int nullity = 0;
};

/// Index of the iterated path on [0, m tau] for a fixed omega on the unit circle.
///
/// Works with the Lagrangian pair (graph of Gamma(t), graph of omega I) in
/// C^{4n} with form diag(-J, J). Each Lagrangian is the graph of a unitary
/// U = B A^{-1} between the +-i eigenspaces; the continuous argument of
/// det B / det A counts the crossings and the endpoint eigen-angles of
/// U_omega^* U(Gamma) fix the half-integer corrections. The m-th iterate is
/// handled segment by segment as R(t) M^j, with the graph of M^j kept as an
/// orthonormal frame so that hyperbolic powers do not overflow. Segment
/// windings are cached, so sweeping m = 1..M costs M segment passes.
class IterateIndexer {
 public:
  IterateIndexer(const SymplecticPath& path, std::complex<double> omega = 1.0,
                 const IndexOptions& options = {});

  /// i_omega(x, m) and nu_omega(x, m).
  OmegaIndex index(int m);
  /// Continuous change of arg det over the first m segments.
  double winding(int m);

  int dim_n() const { return n_; }

 private:
  void extend_to(int m);
  std::vector<double> endpoint_angles(const CMat& frame) const;

  const SymplecticPath* path_;
  std::complex<double> omega_;
  IndexOptions options_;
  int n_;
  CMat P_plus_, P_minus_;   // orthonormal eigenbases of -i diag(-J, J)
  CMat U_omega_;            // unitary of the graph of omega I
  std::vector<CMat> frames_;        // orthonormal frame of graph(M^j), j = 0..
  std::vector<double> seg_winding_; // winding of segment j
  std::vector<double> prefix_;      // prefix sums
};

inline OmegaIndex omega_index(const SymplecticPath& path, std::complex<double> omega,
                              const IndexOptions& options = {}) {
  return IterateIndexer(path, omega, options).index(1);
}

struct MaslovResult {
  int raw_index = 0;   // i(x, m) of the iterated path
  int index_i = 0;     // i(y^m) = i(x, m) - n
  int nullity = 0;     // nu(y^m) = nu(x, m)
};

MaslovResult maslov_index(const SymplecticPath& path, int m, const IndexOptions& options = {});

/// Bott-type oracle: sum of i_omega(x, 1) over the m-th roots of unity.
OmegaIndex bott_iterate_index(const SymplecticPath& path, int m, const IndexOptions& options = {});

// ---------------------------------------------------------------------------

struct IndexRecord {
  std::string orbit_id;
  int iterate_m = 1;
  int index_i = 0;
  int nullity_nu = 0;
};

struct RationalValue {
  long long num = 0;
  long long den = 1;
};

struct MeanIndexResult {
  double value = 0.0;          // reconciled mean index
  double rotation = 0.0;       // (1/2pi) * integral of i_omega over the unit circle
  double slope = 0.0;          // least-squares slope of i(y^m) against m
  double lower = 0.0, upper = 0.0;  // feasible interval from |i(y^m) - m i^| <= 2n
  double error_bar = 0.0;      // 2 (2n) / M
  std::optional<RationalValue> rational;
  std::string method = "both";
};

/// Rotation estimate of the mean index from a single period.
double rotation_mean_index(const SymplecticPath& path, const IndexOptions& options = {});

/// Reconciles the rotation estimate with the records i(y^m), m = 1..M (M >= 2n + 2).
MeanIndexResult mean_index(const std::vector<IndexRecord>& records, int dim_n, double rotation,
                           int q_max = 64, double rational_tol = 1e-9);

/// Best rational p/q with q <= q_max within tol of x, via continued fractions.
std::optional<RationalValue> recognize_rational(double x, int q_max, double tol);

/// K(y) = 2 lcm of the denominators s of unit-circle multiplier angles 2 pi r / s.
int minimal_period_K(const std::vector<FloquetMultiplier>& multipliers, double angle_tol = 1e-7,
                     int q_max = 64);
inline int minimal_period_K(const SymplecticPath& path, double angle_tol = 1e-7, int q_max = 64) {
  return minimal_period_K(floquet_multipliers(path), angle_tol, q_max);
}

/// d(K) = 2n ([K T / 2 pi] + 1). Throws when K T lies within 1e-6 of 2 pi Z.
int d_of_K(double K, double T, int dim_n);

struct GalerkinIndexSample {
  double K = 0.0;
  int morse_index = 0;
  int nullity = 0;
};

struct KShiftCheck {
  std::vector<double> K_values;
  std::vector<int> d_of_K;
  std::vector<int> morse_index;
  std::vector<int> shifted;      // morse_index - d(K)
  std::vector<int> nullity;
  int path_index = 0;            // i^v from the path
  bool consistent = false;
};

/// Checks that i_K - d(K) equals the path index and that the nullity does not
/// depend on K; throws ConsistencyFailure otherwise.
KShiftCheck k_shift_audit(const std::vector<GalerkinIndexSample>& samples, double T, int dim_n,
                          int path_index, int path_nullity);

/// Asserts the record invariants: 1 <= nu <= 2n-1, |i - m i^| <= 2n and the
/// K(y)-periodicity of parity and nullity. Throws ConsistencyFailure.
void check_index_records(const std::vector<IndexRecord>& records, int dim_n, double mean_index,
                         int K_of_y);

}  // namespace charlab

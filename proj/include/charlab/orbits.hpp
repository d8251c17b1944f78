#pragma once

// Prime closed characteristics: analytic ellipsoid catalog, shooting, and a
// registry that deduplicates geometrically equal orbits and folds iterates.

#include <optional>
#include <string>
#include <vector>

#include "charlab/flow.hpp"
#include "charlab/geometry.hpp"

namespace charlab {

enum class Provenance { analytic, shooting, galerkin };
std::string to_string(Provenance p);

/// Clocks: `prime_period` and `trajectory` use the H = j^2 flow, where an
/// ellipsoid circle of radius r closes after pi r^2. The normalized clock of
/// y' = J N(y) with N(y).y = 1 runs at half that speed, see normalized_period().
struct ClosedCharacteristic {
  std::string id;
  double prime_period = 0.0;
  Trajectory trajectory;
  double rho = 0.0;              // phi'(rho)/rho = tau_N/(a T), when a Hamiltonian is attached
  int multiplicity_of_record = 1;
  Provenance provenance = Provenance::analytic;
  std::optional<double> critical_value;
  std::optional<double> galerkin_distance;  // Hausdorff gap between Galerkin samples and the flow
  int search_iterations = 0;

  double normalized_period() const { return 2.0 * prime_period; }
  const Vec& start() const { return trajectory.states.front(); }
};

/// max_t |j(y(t)) - 1|
double surface_residual(const Hypersurface& surface, const Trajectory& traj);

struct CatalogResult {
  std::vector<ClosedCharacteristic> orbits;
  std::vector<std::string> warnings;
};

/// The n coordinate-plane circles of an ellipsoid, sampled analytically.
CatalogResult ellipsoid_catalog(const std::vector<double>& radii, int samples = 1000);

struct ShootingOptions {
  double tol = 1e-10;        // closure residual for acceptance
  int max_iter = 30;
  int samples = 1000;
  double max_period_ratio = 4.0;  // tau may not drift beyond this factor of the guess
};

/// Gauss-Newton on (x0, tau) -> (Phi_tau(x0) - x0, j(x0) - 1, phase) for the
/// H = j^2 flow; the phase condition is <x0 - seed, J grad H(seed)> = 0.
ClosedCharacteristic shoot_for_orbit(const Hypersurface& surface, const Vec& seed,
                                     double period_guess, const ShootingOptions& options = {});

/// Largest m <= max_m such that the orbit already closes after tau/m.
int detect_iteration(const Hypersurface& surface, const ClosedCharacteristic& orbit,
                     int max_m = 8, double tol = 1e-7);

/// Symmetric Hausdorff distance between two sampled closed curves, measured
/// point-to-polyline.
double hausdorff_distance(const std::vector<Vec>& a, const std::vector<Vec>& b);

/// Single-writer orbit store: geometrically equal orbits are merged, iterates
/// are folded into their prime record.
class OrbitRegistry {
 public:
  explicit OrbitRegistry(double separation = 1e-4) : separation_(separation) {}

  struct AddResult {
    std::string id;
    enum Kind { added, duplicate, folded_iterate } kind = added;
    int iterate = 1;
  };

  AddResult add(ClosedCharacteristic orbit);
  const std::vector<ClosedCharacteristic>& orbits() const { return orbits_; }
  ClosedCharacteristic* find(const std::string& id);

 private:
  double separation_;
  std::vector<ClosedCharacteristic> orbits_;
};

/// Re-integrates each orbit with the H = j^2 flow at tightened tolerance and
/// returns the closure residual (acceptance needs <= 1e-8).
double recheck_closure(const Hypersurface& surface, const ClosedCharacteristic& orbit);

/// Trajectory of an orbit under H = j^alpha, one prime period 2 tau / alpha.
Trajectory homogeneous_trajectory(const Hypersurface& surface, const ClosedCharacteristic& orbit,
                                  double alpha, int samples);

}  // namespace charlab

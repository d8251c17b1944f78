#pragma once

// Stages orbits -> index -> galerkin -> resonance. Each stage writes one JSON
// file into the output directory and the next stage reads only that file.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "charlab/config.hpp"
#include "charlab/galerkin.hpp"
#include "charlab/index.hpp"
#include "charlab/orbits.hpp"
#include "charlab/resonance.hpp"

namespace charlab {

struct Gate {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct OrbitsStage {
  int dim_n = 1;
  std::vector<ClosedCharacteristic> orbits;
  std::vector<double> closure_recheck;  // per orbit, tightened re-integration
  std::vector<std::string> warnings;
  /// True only when the orbit list provably contains every closed
  /// characteristic (the analytic catalog of a nonresonant ellipsoid).
  bool complete = false;
};

struct OrbitIndexData {
  std::string orbit_id;
  double prime_period = 0.0;
  std::vector<IndexRecord> records;     // m = 1..M
  double rotation = 0.0;                // rotation estimate of i^
  double rotation_coarse = 0.0;         // same at a 100x looser integrator tolerance
  double mean_index = 0.0;
  double mean_index_error = 0.0;
  std::optional<RationalValue> mean_index_rational;
  double slope = 0.0, lower = 0.0, upper = 0.0;
  int K_of_y = 2;
  std::vector<FloquetMultiplier> multipliers;
  double max_defect = 0.0;
  int bott_violations = 0;      // |i(y^m) - m i^| > 2n
  int nullity_violations = 0;   // nu outside [1, 2n-1]
  std::string failure;          // empty when every step succeeded
};

struct IndexStage {
  int dim_n = 1;
  bool orbit_set_complete = false;
  std::vector<OrbitIndexData> orbits;
};

struct GalerkinOrbitData {
  std::string orbit_id;
  std::string matched_orbit;         // registry orbit nearest to the converted solution
  double a = 0.0;
  std::vector<double> K;
  std::vector<int> d_of_K, morse_index, nullity;
  std::vector<double> critical_value, expected_value, grad_norm;
  double distance = 0.0;             // Hausdorff gap to the registry orbit
  double period_error = 0.0;
  bool k_shift_consistent = false;
  int path_index = 0;
  std::string failure;
};

struct GalerkinStage {
  std::vector<GalerkinOrbitData> orbits;
  bool one_to_one = false;
};

struct OrbitResonanceData {
  std::string orbit_id;
  std::optional<CriticalTypeTable> table;
  std::vector<int> chi;
  std::optional<Rational> chi_hat;
  bool partial_sums_exact = false;  // partial sums equal chi^ at every multiple of K(y)
  std::string exclusion_reason;
};

struct ResonanceStage {
  std::vector<OrbitResonanceData> orbits;
  ResonanceReport report;
  double S_plus_coarse_residual = 0.0;  // identity residual from the coarse i^ values
  std::vector<LadderRow> ladder;
  std::vector<MorseSeries> series;      // one per ladder N
};

OrbitsStage run_orbits_stage(const RunConfig& c, const Hypersurface& s);
IndexStage run_index_stage(const RunConfig& c, const Hypersurface& s, const OrbitsStage& orbits);
GalerkinStage run_galerkin_stage(const RunConfig& c, const Hypersurface& s,
                                 const OrbitsStage& orbits, const IndexStage& index);
ResonanceStage run_resonance_stage(const RunConfig& c, const IndexStage& index);

nlohmann::json to_json(const OrbitsStage& st);
nlohmann::json to_json(const IndexStage& st);
nlohmann::json to_json(const GalerkinStage& st);
nlohmann::json to_json(const ResonanceStage& st);
/// Rebuilds trajectories by integrating from the stored start points.
OrbitsStage orbits_from_json(const nlohmann::json& j, const Hypersurface& s, const RunConfig& c);
IndexStage index_from_json(const nlohmann::json& j);

std::vector<Gate> orbit_gates(const OrbitsStage& st);
std::vector<Gate> index_gates(const IndexStage& st);
std::vector<Gate> galerkin_gates(const GalerkinStage& st);
std::vector<Gate> resonance_gates(const ResonanceStage& st, const IndexStage& index, double tol);

/// Exit status: 0 all gates passed and |S+ - 1/2| <= tolerance; 2 identity
/// conditional on excluded orbits; 1 any failure.
int run(const RunConfig& c, std::ostream& log);
/// Diagnostics from existing orbit and index files; 0 when every audit passes.
int audit(const RunConfig& c, std::ostream& log);

/// "kind: message" for the failure taxonomy.
std::string describe_error(const std::exception& e);

void write_json(const nlohmann::json& j, const std::filesystem::path& file);
nlohmann::json read_json_file(const std::filesystem::path& file);

}  // namespace charlab
